"""Fundamental-solution kernels of e^{−itω} in 1D, 2D and 3D, the oscillatory integral I(ξ, η; t)
and power-law fits of their decay."""

import os
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from numpy.polynomial import legendre
from scipy import fft, special
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import DimensionMismatch, InvalidGeneratorSet, ResourceBudgetExceeded, FitError
from libkingsgrid.enumerables import QuadratureMethod
from libkingsgrid.processing import WorkerPool, serial_pool, chunks
from libkingsgrid.symbol import HalfGeneratorSet, TWO_PI
from libkingsgrid.analysis import log_log_regression, check_positive, check_increasing

"""Config starts"""

MEMORY_BUDGET_MB = float(os.environ.get('LKG_MEMORY_BUDGET_MB', 2048))
EVALUATION_BUDGET = 4_000_000_000

"""Config ends"""

logger = start_logger(__name__)

MIN_FIT_POINTS = 3
TRANSIENT_FACTOR = 3.0


@dataclass(frozen=True)
class QuadratureSpec:
    '''How kernels and integrals are discretised'''
    method: QuadratureMethod = QuadratureMethod.periodic_trapezoid_fft
    oversample: int = 16
    floor_t: float = 32.0
    panel_order: int = 8
    panels: Optional[int] = None
    row_reduction: bool = True
    memory_budget_mb: float = MEMORY_BUDGET_MB
    evaluation_budget: int = EVALUATION_BUDGET
    chunk_size: int = 1 << 22

    def grid_size(self, t: float) -> int:
        '''N(t): smallest power of two ≥ oversample·max(t, floor_t), raised until N ≥ 6t + 64'''
        target = self.oversample * max(abs(t), self.floor_t)
        n = 1 << max(4, int(math.ceil(math.log2(target))))
        while n < 6 * abs(t) + 64:
            n *= 2
        return n

    def panel_count(self, t: float, velocity: Sequence[float]) -> int:
        '''Gauss panels per dimension, never below 4·⌈t(6+|v|∞)/(2π)⌉'''
        bandwidth = abs(t) * (6.0 + float(np.max(np.abs(velocity))))
        minimum = max(1, 4 * int(math.ceil(bandwidth / TWO_PI)))
        count = self.panels if self.panels is not None else max(1, 2 * int(math.ceil(bandwidth)))
        return max(count, minimum)

    def with_method(self, method: QuadratureMethod) -> "QuadratureSpec":
        return replace(self, method=method)

    def to_dict(self) -> dict:
        return {
            'method': self.method.value,
            'oversample': self.oversample,
            'floor_t': self.floor_t,
            'panel_order': self.panel_order,
            'panels': self.panels,
            'row_reduction': self.row_reduction,
            'memory_budget_mb': self.memory_budget_mb
        }


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    stderr: float
    t_values: Tuple[float, ...]
    magnitudes: Tuple[float, ...]
    log_residuals: Tuple[float, ...]
    dropped_t: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'exponent': self.exponent,
            'stderr': self.stderr,
            't_values': list(self.t_values),
            'magnitudes': list(self.magnitudes),
            'log_residuals': list(self.log_residuals),
            'dropped_t': self.dropped_t
        }


@dataclass(frozen=True)
class KernelGrid:
    '''K₂(n; t) on the whole index range of one transform.

    Full grids hold N×N values in FFT order; reflection-symmetric symbols keep the quarter
    n1, n2 ∈ [0, N/2] only.'''
    t: float
    size: int
    values: np.ndarray = field(repr=False)
    quarter: bool

    def at(self, n1: int, n2: int) -> complex:
        n1, n2 = int(n1), int(n2)
        if self.quarter:
            n1, n2 = abs(n1), abs(n2)
            if n1 > self.size // 2 or n2 > self.size // 2:
                raise IndexError("Index ({}, {}) outside the resolved range ±{}.".format(n1, n2, self.size // 2))
            return complex(self.values[n1, n2])
        return complex(self.values[n1 % self.size, n2 % self.size])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def argmax(self) -> Tuple[int, int]:
        i, j = np.unravel_index(int(np.argmax(np.abs(self.values))), self.values.shape)
        if not self.quarter:
            half = self.size // 2
            i, j = (i + half) % self.size - half, (j + half) % self.size - half
        return int(i), int(j)

    def norm2(self) -> float:
        '''Σ_n |K₂(n; t)|², counting each quarter value once per reflection'''
        squared = np.abs(self.values)**2
        if not self.quarter:
            return float(squared.sum())
        weights = np.full(self.size // 2 + 1, 2.0)
        weights[0] = weights[-1] = 1.0
        return float(weights @ squared @ weights)


@dataclass(frozen=True)
class KernelRows:
    '''Rows K₂(·, n2; t) for a set of n2, each over all n1 in FFT order'''
    t: float
    size: int
    n2_values: Tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def at(self, n1: int, n2: int) -> complex:
        return complex(self.values[self.n2_values.index(int(n2)), int(n1) % self.size])

    def window_sup(self, centre: int, reach: int) -> float:
        columns = np.arange(centre - reach, centre + reach + 1) % self.size
        return float(np.max(np.abs(self.values[:, columns])))


'''Not in docs. helper functions'''


def check_dimension(gens: HalfGeneratorSet, dimension: int):
    if gens.dimension != dimension:
        logger.error('Oops! An error Occurred ⚠️')
        raise DimensionMismatch("Expected a {}D generator set, got dimension {}.".format(dimension, gens.dimension))


def check_memory(required_bytes: float, spec: QuadratureSpec, required: Any):
    """Refuse a transform whose working set exceeds the memory budget"""
    budget = spec.memory_budget_mb * 2**20
    if required_bytes > budget:
        logger.error('Oops! An error Occurred ⚠️')
        raise ResourceBudgetExceeded(
            "Grid {} needs {:.0f} MB, budget is {:.0f} MB.".format(required, required_bytes / 2**20,
                                                                   spec.memory_budget_mb), required)


def symbol_on_axes(gens: HalfGeneratorSet, axes: Sequence[np.ndarray]) -> np.ndarray:
    """ω on the tensor grid spanned by the given axes, one generator at a time"""
    shape = tuple(len(axis) for axis in axes)
    total = np.zeros(shape)
    for h in gens.half_generators:
        phase = np.zeros(shape)
        for i, (hi, axis) in enumerate(zip(h, axes)):
            if hi:
                view = [1] * len(axes)
                view[i] = len(axis)
                phase = phase + hi * axis.reshape(view)
        total += 2.0 * (1.0 - np.cos(phase))
    return total


def grid_axis(size: int, count: Optional[int] = None) -> np.ndarray:
    return np.arange(size if count is None else count) * (TWO_PI / size)


def row_profile(gens: HalfGeneratorSet) -> Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]:
    """(b, a) with ω(x, y) = b(x) − 2a(x)·cos y; needs |h2| ≤ 1 and h1 symmetric over the h2 = ±1 generators"""
    check_dimension(gens, 2)
    flat = [h[0] for h in gens.half_generators if h[1] == 0]
    tilted = [h[0] * h[1] for h in gens.half_generators if h[1] != 0]
    if any(abs(h[1]) > 1 for h in gens.half_generators) or sorted(tilted) != sorted(-h for h in tilted):
        raise InvalidGeneratorSet("Generator set {} has no cos y row structure.".format(gens.name))
    constant = 2.0 * gens.size

    def b(x):
        x = np.asarray(x, dtype=float)
        return constant - sum((2.0 * np.cos(h1 * x) for h1 in flat), np.zeros_like(x))

    def a(x):
        x = np.asarray(x, dtype=float)
        return sum((np.cos(h1 * x) for h1 in tilted), np.zeros_like(x))

    return b, a


def has_row_structure(gens: HalfGeneratorSet) -> bool:
    try:
        row_profile(gens)
        return True
    except (InvalidGeneratorSet, DimensionMismatch):
        return False


def bessel_integer_order(n: Any, w: np.ndarray) -> np.ndarray:
    """J_n(w) for integer n of any sign and real w of any sign"""
    n = np.asarray(n)
    order = np.abs(n)
    sign = np.where((n < 0) & (order % 2 == 1), -1.0, 1.0)
    sign = sign * np.where((np.asarray(w) < 0) & (order % 2 == 1), -1.0, 1.0)
    return sign * special.jv(order, np.abs(w))


def i_power(n: Any) -> Any:
    return np.asarray([1, 1j, -1, -1j])[np.mod(n, 4)]


def split_layers(gens: HalfGeneratorSet) -> Tuple[HalfGeneratorSet, HalfGeneratorSet]:
    """Planar and vertical factors of a 3D set whose generators are (h1, h2, 0) or (0, 0, h3)"""
    check_dimension(gens, 3)
    planar = [h[:2] for h in gens.half_generators if h[2] == 0]
    vertical = [h[2:] for h in gens.half_generators if h[2] != 0]
    if any(h[0] or h[1] for h in gens.half_generators if h[2] != 0) or not planar or not vertical:
        raise InvalidGeneratorSet("Generator set {} is not layered.".format(gens.name))
    return (HalfGeneratorSet(2, tuple(planar), name=gens.name + '-planar'),
            HalfGeneratorSet(1, tuple(vertical), name=gens.name + '-vertical'))


"""1D kernel"""


def kernel_1d_all(t: float, spec: QuadratureSpec = DEFAULT_SPEC,
                  gens: Optional[HalfGeneratorSet] = None) -> np.ndarray:
    """K₁(n; t) for every n of one transform, FFT order"""
    gens = gens or HalfGeneratorSet.chain1d()
    check_dimension(gens, 1)
    size = spec.grid_size(t)
    omega = symbol_on_axes(gens, [grid_axis(size)])
    return fft.ifft(np.exp(-1j * t * omega))


def kernel_1d(n: int, t: float, spec: QuadratureSpec = DEFAULT_SPEC,
              gens: Optional[HalfGeneratorSet] = None) -> complex:
    """(1/2π)∫ e^{−itω₁(z)} e^{inz} dz by the periodic trapezoid rule"""
    try:
        gens = gens or HalfGeneratorSet.chain1d()
        check_dimension(gens, 1)
        size = spec.grid_size(t)
        z = grid_axis(size)
        omega = symbol_on_axes(gens, [z])
        return complex(np.mean(np.exp(-1j * t * omega) * np.exp(1j * int(n) * z)))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def kernel_1d_sup(t: float, spec: QuadratureSpec = DEFAULT_SPEC, gens: Optional[HalfGeneratorSet] = None) -> float:
    return float(np.max(np.abs(kernel_1d_all(t, spec, gens))))


"""2D kernel"""


def kernel_2d_grid(gens: HalfGeneratorSet, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> KernelGrid:
    """All K₂(n; t) from one discrete Fourier transform of e^{−itω} on the N×N grid"""
    try:
        check_dimension(gens, 2)
        size = spec.grid_size(t)
        if gens.is_reflection_symmetric():
            count = size // 2 + 1
            check_memory(5 * 8.0 * count**2, spec, size)
            axis = grid_axis(size, count)
            omega = symbol_on_axes(gens, [axis, axis])
            phase = t * omega
            del omega
            real = fft.dctn(np.cos(phase), type=1)
            imag = fft.dctn(np.sin(phase), type=1)
            del phase
            values = (real - 1j * imag) / float(size)**2
            return KernelGrid(float(t), size, values, True)
        check_memory(4 * 16.0 * size**2, spec, size)
        axis = grid_axis(size)
        values = fft.ifft2(np.exp(-1j * t * symbol_on_axes(gens, [axis, axis])))
        return KernelGrid(float(t), size, values, False)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def kernel_2d_point(gens: HalfGeneratorSet, n: Sequence[int], t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """One K₂(n; t) by direct summation over the N×N trapezoid grid, row blocks at a time"""
    try:
        check_dimension(gens, 2)
        size = spec.grid_size(t)
        axis = grid_axis(size)
        n1, n2 = int(n[0]), int(n[1])
        column_twiddle = np.exp(1j * n2 * axis)
        block = max(1, spec.chunk_size // size)
        total = 0j
        for start, stop in chunks(size, block):
            rows = axis[start:stop]
            values = np.exp(-1j * t * symbol_on_axes(gens, [rows, axis]))
            total += np.exp(1j * n1 * rows) @ (values @ column_twiddle)
        return complex(total / float(size)**2)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def kernel_2d_rows(gens: HalfGeneratorSet, n2_values: Sequence[int], t: float,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> KernelRows:
    """Whole rows K₂(·, n2; t): the y-integral is iⁿ²·J_n2(2t·a(x)), the x-integral one FFT per row"""
    try:
        b, a = row_profile(gens)
        size = spec.grid_size(t)
        n2_values = tuple(int(n2) for n2 in n2_values)
        check_memory(3 * 16.0 * size * len(n2_values), spec, (len(n2_values), size))
        x = grid_axis(size)
        carrier = np.exp(-1j * t * b(x))
        w = 2.0 * t * a(x)
        orders = np.asarray(n2_values)[:, None]
        integrand = carrier[None, :] * i_power(orders) * bessel_integer_order(orders, w[None, :])
        return KernelRows(float(t), size, n2_values, fft.ifft(integrand, axis=1))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def kernel_value(gens: HalfGeneratorSet, n: Sequence[int], t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """K₂(n; t) by the engine selected in spec.method"""
    if spec.method is QuadratureMethod.bessel_rows:
        return kernel_2d_rows(gens, [n[1]], t, spec).at(n[0], n[1])
    if spec.method is QuadratureMethod.periodic_trapezoid_fft:
        return kernel_2d_grid(gens, t, spec).at(n[0], n[1])
    if spec.method is QuadratureMethod.gauss_panels:
        return eval_I(gens, (n[0] / t, n[1] / t), t, spec) / TWO_PI**2 if t else complex(n[0] == 0 and n[1] == 0)
    return kernel_2d_point(gens, n, t, spec)


"""Direct oscillatory integral"""


def gauss_panels(panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss–Legendre on [0, 2π]"""
    nodes, weights = legendre.leggauss(order)
    width = TWO_PI / panels
    left = np.arange(panels)[:, None] * width
    return (left + 0.5 * width * (nodes + 1.0)[None, :]).ravel(), np.tile(0.5 * width * weights, panels)


def eval_I(gens: HalfGeneratorSet, velocity: Sequence[float], t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """I(ξ, η; t) = ∫_{[0,2π]²} exp(−it(ω(x, y) − ξx − ηy)) dx dy by composite Gauss–Legendre panels"""
    try:
        check_dimension(gens, 2)
        xi, eta = float(velocity[0]), float(velocity[1])
        if t == 0:
            return complex(TWO_PI**2)
        panels = spec.panel_count(t, velocity)
        nodes, weights = gauss_panels(panels, spec.panel_order)
        m = t * eta
        if spec.row_reduction and abs(m - round(m)) < 1e-12 and has_row_structure(gens):
            b, a = row_profile(gens)
            m = int(round(m))
            logger.debug('Reducing the y-integral to J_{} with {} panels'.format(m, panels))
            row = TWO_PI * i_power(m) * bessel_integer_order(m, 2.0 * t * a(nodes)) * np.exp(-1j * t * b(nodes))
            return complex(np.sum(weights * np.exp(1j * t * xi * nodes) * row))
        required = len(nodes)**2
        if required > spec.evaluation_budget:
            logger.error('Oops! An error Occurred ⚠️')
            raise ResourceBudgetExceeded(
                "{} panels per dimension need {:.2e} evaluations, budget is {:.2e}.".format(
                    panels, float(required), float(spec.evaluation_budget)), panels)
        column_factor = weights * np.exp(1j * t * eta * nodes)
        block = max(1, spec.chunk_size // len(nodes))
        total = 0j
        for start, stop in chunks(len(nodes), block):
            rows = nodes[start:stop]
            values = np.exp(-1j * t * symbol_on_axes(gens, [rows, nodes]))
            total += (weights[start:stop] * np.exp(1j * t * xi * rows)) @ (values @ column_factor)
        return complex(total)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""3D kernel"""


def kernel_3d_sup(t: float, spec: QuadratureSpec = DEFAULT_SPEC, gens: Optional[HalfGeneratorSet] = None) -> float:
    """sup_n |ψ_t^∨(n)| = sup|K₂|·sup|K₁| for a layered generator set"""
    try:
        planar, vertical = split_layers(gens or HalfGeneratorSet.lkg3d())
        planar_sup = kernel_2d_grid(planar, t, spec.with_method(QuadratureMethod.periodic_trapezoid_fft)).sup()
        return planar_sup * kernel_1d_sup(t, spec, vertical)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Decay fits"""


def fit_decay(points: Sequence[Tuple[float, float]]) -> DecayFit:
    """Slope of log|value| against log t; the smallest t is dropped when it is a transient outlier"""
    try:
        if len(points) < MIN_FIT_POINTS:
            raise FitError("A decay fit needs at least {} points, got {}.".format(MIN_FIT_POINTS, len(points)))
        t_values = np.asarray([p[0] for p in points], dtype=float)
        magnitudes = np.asarray([p[1] for p in points], dtype=float)
        check_increasing(t_values)
        check_positive(t_values, 't values')
        check_positive(magnitudes, 'magnitudes')
        dropped = None
        if len(points) >= MIN_FIT_POINTS + 1:
            rest = log_log_regression(t_values[1:], magnitudes[1:])
            first_residual = abs(math.log(magnitudes[0]) - (rest.intercept + rest.slope * math.log(t_values[0])))
            rms = float(np.sqrt(np.mean(rest.residuals**2)))
            if first_residual > TRANSIENT_FACTOR * rms and first_residual > 1e-12:
                dropped = float(t_values[0])
                logger.warning('Dropping transient point t = {} (residual {:.3e}, rms {:.3e})'.format(
                    dropped, first_residual, rms))
        start = 1 if dropped is not None else 0
        line = log_log_regression(t_values[start:], magnitudes[start:])
        return DecayFit(line.slope, line.stderr, tuple(t_values[start:]), tuple(magnitudes[start:]),
                        tuple(float(r) for r in line.residuals), dropped)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def lattice_point(t: float, velocity: Sequence[float]) -> Tuple[int, int]:
    return int(round(t * velocity[0])), int(round(t * velocity[1]))


def ray_value(gens: HalfGeneratorSet, velocity: Sequence[float], t: float, spec: QuadratureSpec) -> dict:
    n = lattice_point(t, velocity)
    value = kernel_value(gens, n, t, spec)
    return {'t': float(t), 'value': abs(value), 'N': spec.grid_size(t), 'method': spec.method.value,
            'n1': n[0], 'n2': n[1]}


def lattice_ray_decay(gens: HalfGeneratorSet, velocity: Sequence[float], t_values: Sequence[float],
                      spec: QuadratureSpec = DEFAULT_SPEC, pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, DecayFit]:
    """|K₂(round(t·v); t)| along a t-ladder and its fitted exponent"""
    try:
        pool = pool or serial_pool()
        logger.info('Lattice ray at velocity {} over {} times'.format(tuple(velocity), len(t_values)))
        rows = pool.map(lambda t: ray_value(gens, velocity, t, spec), t_values, 'ray {}'.format(tuple(velocity)))
        frame = pd.DataFrame(rows, columns=['t', 'value', 'N', 'method', 'n1', 'n2'])
        return frame, fit_decay(list(zip(frame['t'], frame['value'])))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def window_sup(gens: HalfGeneratorSet, velocity: Sequence[float], t: float,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """max |K₂(n; t)| over n within ±⌈√t⌉ of round(t·v)"""
    centre = lattice_point(t, velocity)
    reach = int(math.ceil(math.sqrt(t)))
    if has_row_structure(gens):
        rows = kernel_2d_rows(gens, range(centre[1] - reach, centre[1] + reach + 1), t, spec)
        return rows.window_sup(centre[0], reach)
    values = [abs(kernel_2d_point(gens, (centre[0] + i, centre[1] + j), t, spec))
              for i in range(-reach, reach + 1) for j in range(-reach, reach + 1)]
    return float(max(values))


def sup_ladder(gens: HalfGeneratorSet, t_values: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
               pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, DecayFit]:
    """Full-grid sup_n |K₂(n; t)| along a t-ladder"""
    pool = pool or serial_pool()
    grid_spec = spec.with_method(QuadratureMethod.periodic_trapezoid_fft)

    def sup_at(t):
        return {'t': float(t), 'value': kernel_2d_grid(gens, t, grid_spec).sup(), 'N': grid_spec.grid_size(t),
                'method': grid_spec.method.value}

    frame = pd.DataFrame(pool.map(sup_at, t_values, 'sup |K2|'), columns=['t', 'value', 'N', 'method'])
    return frame, fit_decay(list(zip(frame['t'], frame['value'])))


def window_ladder(gens: HalfGeneratorSet, velocities: Sequence[Sequence[float]], t_values: Sequence[float],
                  spec: QuadratureSpec = DEFAULT_SPEC, pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, DecayFit]:
    """Sup continuation for large t: the largest window sup over the given singular velocities"""
    pool = pool or serial_pool()
    row_spec = spec.with_method(QuadratureMethod.bessel_rows)

    def sup_at(t):
        return {'t': float(t), 'value': max(window_sup(gens, v, t, row_spec) for v in velocities),
                'N': row_spec.grid_size(t), 'method': row_spec.method.value}

    frame = pd.DataFrame(pool.map(sup_at, t_values, 'window sup'), columns=['t', 'value', 'N', 'method'])
    return frame, fit_decay(list(zip(frame['t'], frame['value'])))


def sup_1d_ladder(t_values: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
                  pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, DecayFit]:
    pool = pool or serial_pool()
    rows = pool.map(lambda t: {'t': float(t), 'value': kernel_1d_sup(t, spec), 'N': spec.grid_size(t),
                               'method': QuadratureMethod.periodic_trapezoid_fft.value}, t_values, 'sup |K1|')
    frame = pd.DataFrame(rows, columns=['t', 'value', 'N', 'method'])
    return frame, fit_decay(list(zip(frame['t'], frame['value'])))


def sup_3d_ladder(t_values: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
                  gens: Optional[HalfGeneratorSet] = None, pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, DecayFit]:
    pool = pool or serial_pool()
    rows = pool.map(lambda t: {'t': float(t), 'value': kernel_3d_sup(t, spec, gens), 'N': spec.grid_size(t),
                               'method': QuadratureMethod.periodic_trapezoid_fft.value}, t_values, 'sup |K3|')
    frame = pd.DataFrame(rows, columns=['t', 'value', 'N', 'method'])
    return frame, fit_decay(list(zip(frame['t'], frame['value'])))


def sharpness_plateau(gens: HalfGeneratorSet, velocity: Sequence[float], t_values: Sequence[float],
                      spec: QuadratureSpec = DEFAULT_SPEC, rate: float = 0.75,
                      pool: Optional[WorkerPool] = None) -> dict:
    """t^rate·(2π)²·|K₂(round(t·v); t)| along a ladder; a plateau has small relative spread and positive mean"""
    try:
        frame, _ = lattice_ray_decay(gens, velocity, t_values, spec, pool)
        scaled = frame['t']**rate * TWO_PI**2 * frame['value']
        mean = float(scaled.mean())
        spread = float((scaled.max() - scaled.min()) / mean) if mean > 0 else float('inf')
        return {
            'velocity': list(velocity),
            'rate': rate,
            't': list(frame['t']),
            'scaled': [float(s) for s in scaled],
            'mean': mean,
            'spread': spread
        }
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def write_plot_script(csv_path: str, script_path: str, title: str, x: str = 't', y: str = 'value'):
    """gnuplot command file drawing a log-log plot of one CSV"""
    lines = [
        'set datafile separator ","',
        'set logscale xy',
        'set key autotitle columnhead',
        'set title "{}"'.format(title),
        'set xlabel "{}"'.format(x),
        'set ylabel "{}"'.format(y),
        'plot "{}" using "{}":"{}" with linespoints'.format(os.path.basename(csv_path), x, y),
    ]
    with open(script_path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')
    logger.info('Plot script written to {}'.format(script_path))
