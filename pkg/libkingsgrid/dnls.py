"""Linear and nonlinear discrete Schrödinger evolution on a periodic box, mixed space-time norms,
Strichartz admissibility and the small-data experiments."""

import os
import json
import math
from fractions import Fraction
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from scipy import fft
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import DimensionMismatch, EvolutionBlowUp, InadmissiblePair, InvalidConfig
from libkingsgrid.symbol import HalfGeneratorSet
from libkingsgrid.enumerables import preset
from libkingsgrid.analysis import lp_norm, mixed_norm, running_mixed_norm, log_log_regression
from libkingsgrid.oscillatory import symbol_on_axes, grid_axis, kernel_2d_point, QuadratureSpec, DEFAULT_SPEC

logger = start_logger(__name__)

SIGMA = Fraction(13, 12)
DEFAULT_NORMS = (2.0, 4.0, math.inf)
DEFAULT_PAIRS = ((math.inf, 2.0), (Fraction(37, 13), Fraction(74, 13)))


def norm_label(r: Any) -> str:
    return 'linf' if math.isinf(float(r)) else 'l{:g}'.format(float(r))


def mixed_label(q: Any, r: Any) -> str:
    q_label = 'inf' if math.isinf(float(q)) else '{:g}'.format(float(q))
    return 'L{}_{}'.format(q_label, norm_label(r))


@dataclass(frozen=True)
class LatticeField:
    '''Complex field on a periodic box of Z^d'''
    box: Tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        box = tuple(int(L) for L in self.box)
        object.__setattr__(self, 'box', box)
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, 'values', values)
        if values.shape != box:
            raise DimensionMismatch("Values of shape {} on a box {}.".format(values.shape, box))
        for L in box:
            if L < 1 or L & (L - 1):
                raise DimensionMismatch("Box side {} is not a power of two.".format(L))

    @classmethod
    def zeros(cls, box: Sequence[int]) -> "LatticeField":
        return cls(tuple(box), np.zeros(tuple(box), dtype=complex))

    @classmethod
    def delta(cls, box: Sequence[int], amplitude: complex = 1.0, site: Optional[Sequence[int]] = None) -> "LatticeField":
        values = np.zeros(tuple(box), dtype=complex)
        values[tuple(site) if site is not None else (0, ) * len(box)] = amplitude
        return cls(tuple(box), values)

    @classmethod
    def gaussian(cls, box: Sequence[int], amplitude: float = 1.0, width: float = 4.0,
                 momentum: Optional[Sequence[float]] = None) -> "LatticeField":
        '''Wave packet centred at the origin of the periodic box, scaled to ℓ² norm amplitude'''
        axes = [np.minimum(np.arange(L), L - np.arange(L)).astype(float) for L in box]
        grids = np.meshgrid(*axes, indexing='ij')
        values = np.exp(-sum(g**2 for g in grids) / (2.0 * width**2)).astype(complex)
        if momentum is not None:
            signed = np.meshgrid(*[(np.arange(L) + L // 2) % L - L // 2 for L in box], indexing='ij')
            values *= np.exp(1j * sum(k * g for k, g in zip(momentum, signed)))
        values *= amplitude / np.sqrt(np.sum(np.abs(values)**2))
        return cls(tuple(box), values)

    @property
    def dimension(self) -> int:
        return len(self.box)

    def norm(self, r: Any = 2.0) -> float:
        return float(lp_norm(self.values, float(r)))

    def with_values(self, values: np.ndarray) -> "LatticeField":
        return LatticeField(self.box, values)

    def copy(self) -> "LatticeField":
        return LatticeField(self.box, self.values.copy())


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 0.05
    t_final: float = 10.0
    a: float = 0.0
    sign: str = '+'
    source: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False, compare=False)
    record_stride: int = 10
    norms: Tuple[float, ...] = DEFAULT_NORMS
    pairs: Tuple[Tuple[Any, Any], ...] = DEFAULT_PAIRS
    gens: HalfGeneratorSet = field(default_factory=HalfGeneratorSet.lkg3d)

    def __post_init__(self):
        check_config(self)

    @property
    def steps(self) -> int:
        return int(round(self.t_final / abs(self.dt)))

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "EvolutionConfig":
        '''key = value lines; # comments and blank lines skipped'''
        values: Dict[str, Any] = {}
        for line in lines:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise InvalidConfig("Expected key = value, got {!r}.".format(line))
            key, value = (part.strip() for part in line.split('=', 1))
            try:
                if key in ('dt', 't_final', 'a'):
                    values[key] = float(value)
                elif key == 'record_stride':
                    values[key] = int(value)
                elif key == 'sign':
                    values[key] = value
                elif key == 'norms':
                    values[key] = tuple(float(v) for v in value.replace(',', ' ').split())
                elif key == 'preset':
                    values['gens'] = preset(value)
                else:
                    raise InvalidConfig("Unknown evolution key {!r}.".format(key))
            except (ValueError, KeyError) as error:
                raise InvalidConfig("Bad value for {}: {}".format(key, error))
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> "EvolutionConfig":
        with open(path) as handle:
            return cls.from_lines(handle.readlines())

    def to_dict(self) -> dict:
        return {
            'dt': self.dt,
            't_final': self.t_final,
            'a': self.a,
            'sign': self.sign,
            'record_stride': self.record_stride,
            'norms': [str(r) for r in self.norms],
            'pairs': [[str(q), str(r)] for q, r in self.pairs],
            'gens': self.gens.to_dict(),
            'source': self.source is not None
        }


@dataclass(frozen=True)
class NormSeries:
    '''ℓ^r norms at the recorded times with running mixed norms, plus the final field when kept'''
    frame: pd.DataFrame = field(repr=False)
    initial_l2: float
    steps: int
    final: Optional[LatticeField] = field(default=None, repr=False)
    source_norm: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.frame['t'].to_numpy()

    def norm(self, r: Any) -> np.ndarray:
        return self.frame[norm_label(r)].to_numpy()

    def mixed(self, q: Any, r: Any, t_end: Optional[float] = None) -> float:
        '''L^q_t ℓ^r over [0, t_end] (whole record by default)'''
        mask = np.ones(len(self.frame), dtype=bool) if t_end is None else self.times <= t_end + 1e-12
        return mixed_norm(self.times[mask], self.norm(r)[mask], float(q))


'''Not in docs. helper functions'''


def check_config(config: EvolutionConfig):
    """Check the evolution parameters before any step runs"""
    if not config.t_final > 0 or config.dt == 0 or not math.isfinite(config.dt):
        logger.error('Oops! An error Occurred ⚠️')
        raise InvalidConfig("t_final must be positive and dt finite and nonzero.")
    if config.dt < 0 and config.source is not None:
        logger.error('Oops! An error Occurred ⚠️')
        raise InvalidConfig("Backward runs (dt < 0) take no source term.")
    if config.a < 0:
        logger.error('Oops! An error Occurred ⚠️')
        raise InvalidConfig("Nonlinearity exponent a must be nonnegative.")
    if config.sign not in ('+', '-'):
        logger.error('Oops! An error Occurred ⚠️')
        raise InvalidConfig("sign must be '+' or '-', got {!r}.".format(config.sign))
    if config.record_stride < 1:
        logger.error('Oops! An error Occurred ⚠️')
        raise InvalidConfig("record_stride must be at least 1.")
    if abs(config.dt) * config.gens.symbol_sup() >= 2 * math.pi:
        logger.warning('dt·sup ω = {:.3f} wraps the phase of one linear step'.format(
            abs(config.dt) * config.gens.symbol_sup()))


def check_box(gens: HalfGeneratorSet, lattice_field: LatticeField):
    if gens.dimension != lattice_field.dimension:
        logger.error('Oops! An error Occurred ⚠️')
        raise DimensionMismatch("Field on a {}D box for a {}D symbol.".format(lattice_field.dimension, gens.dimension))


def box_symbol(gens: HalfGeneratorSet, box: Sequence[int]) -> np.ndarray:
    """ω at the discrete frequencies 2πm/L of the box, FFT order"""
    return symbol_on_axes(gens, [grid_axis(L) for L in box])


def as_fraction(x: Any) -> Optional[Fraction]:
    """Exact rational of x; None stands for ∞"""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and math.isinf(x):
        return None
    if isinstance(x, str):
        return None if x.strip() in ('inf', '∞') else Fraction(x)
    return Fraction(x)


def reciprocal(x: Optional[Fraction]) -> Fraction:
    return Fraction(0) if x is None else 1 / x


"""Sub-flows"""


class SplitStepPropagator:
    '''Strang step N(dt/2) L(dt) N(dt/2) with cached linear multipliers'''

    def __init__(self, gens: HalfGeneratorSet, box: Sequence[int], dt: float, a: float = 0.0, sign: str = '+'):
        self.gens = gens
        self.box = tuple(box)
        self.dt = dt
        self.a = a
        self.sign = sign
        omega = box_symbol(gens, self.box)
        self._full = np.exp(-1j * dt * omega)
        self._half = np.exp(-0.5j * dt * omega)

    def linear(self, values: np.ndarray, half: bool = False) -> np.ndarray:
        return fft.ifftn((self._half if half else self._full) * fft.fftn(values))

    def nonlinear(self, values: np.ndarray, dt: float) -> np.ndarray:
        if self.a == 0:
            return values
        rotation = -1j if self.sign == '+' else 1j
        return values * np.exp(rotation * np.abs(values)**(2 * self.a) * dt)

    def __call__(self, values: np.ndarray, source: Optional[np.ndarray] = None) -> np.ndarray:
        values = self.nonlinear(values, 0.5 * self.dt)
        values = self.linear(values)
        if source is not None:
            values = values + self.dt * self.linear(source, half=True)
        return self.nonlinear(values, 0.5 * self.dt)


def linear_step(lattice_field: LatticeField, dt: float, gens: Optional[HalfGeneratorSet] = None) -> LatticeField:
    """Spectral multiplication by e^{−i·dt·ω(k)} on the box frequencies"""
    try:
        gens = gens or HalfGeneratorSet.lkg3d()
        check_box(gens, lattice_field)
        if dt == 0:
            return lattice_field.copy()
        multiplier = np.exp(-1j * dt * box_symbol(gens, lattice_field.box))
        return lattice_field.with_values(fft.ifftn(multiplier * fft.fftn(lattice_field.values)))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def nonlinear_step(lattice_field: LatticeField, dt: float, a: float, sign: str = '+') -> LatticeField:
    """Pointwise exact flow u ↦ u·exp(∓i|u|^{2a}dt); '+' rotates clockwise"""
    try:
        if a < 0:
            raise InvalidConfig("Nonlinearity exponent a must be nonnegative.")
        if sign not in ('+', '-'):
            raise InvalidConfig("sign must be '+' or '-', got {!r}.".format(sign))
        rotation = -1j if sign == '+' else 1j
        values = lattice_field.values
        return lattice_field.with_values(values * np.exp(rotation * np.abs(values)**(2 * a) * dt))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Evolution"""


def evolve(config: EvolutionConfig, u0: LatticeField, keep_final: bool = True) -> NormSeries:
    """Strang splitting from u0 over t_final, recording norms every record_stride steps.

    A negative dt runs the flow backward; the recorded t is the elapsed time either way.
    """
    try:
        check_box(config.gens, u0)
        steps = config.steps
        logger.info('Evolving a {} box for {} steps of dt = {} (a = {}, sign {})'.format(
            u0.box, steps, config.dt, config.a, config.sign))
        propagator = SplitStepPropagator(config.gens, u0.box, config.dt, config.a, config.sign)
        values = u0.values.copy()
        records: List[dict] = []
        source_trace: List[Tuple[float, float]] = []
        recorded = sorted(set(float(r) for r in config.norms) | set(float(r) for _, r in config.pairs))

        def record(step, current):
            t = step * abs(config.dt)
            row = {'t': t}
            for r in recorded:
                row[norm_label(r)] = float(lp_norm(current, r))
            records.append(row)
            if config.source is not None:
                source_trace.append((t, float(lp_norm(config.source(t), 2.0))))

        record(0, values)
        for step in range(1, steps + 1):
            source = None
            if config.source is not None:
                source = np.asarray(config.source((step - 0.5) * config.dt), dtype=complex)
            values = propagator(values, source)
            if not np.isfinite(values).all():
                logger.error('Oops! An error Occurred ⚠️')
                raise EvolutionBlowUp("Field stopped being finite at step {}.".format(step), step)
            if step % config.record_stride == 0 or step == steps:
                record(step, values)
        frame = pd.DataFrame(records)
        for q, r in config.pairs:
            frame[mixed_label(q, r)] = running_mixed_norm(frame['t'], frame[norm_label(r)], float(q))
        source_norm = 0.0
        if source_trace:
            trace = np.asarray(source_trace)
            source_norm = mixed_norm(trace[:, 0], trace[:, 1], 1.0)
        final = LatticeField(u0.box, values) if keep_final else None
        return NormSeries(frame, u0.norm(2.0), steps, final, source_norm)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def norm_series_frame(series: NormSeries) -> pd.DataFrame:
    return series.frame.copy()


"""Strichartz"""


def admissible(q: Any, r: Any, sigma: Any = SIGMA) -> bool:
    """Exact σ-admissibility: q, r ≥ 2, (q, r, σ) ≠ (2, ∞, 1) and 1/q + σ/r ≤ σ/2"""
    q, r, sigma = as_fraction(q), as_fraction(r), as_fraction(sigma)
    for exponent in (q, r):
        if exponent is not None and exponent < 2:
            return False
    if q == 2 and r is None and sigma == 1:
        return False
    return reciprocal(q) + sigma * reciprocal(r) <= sigma / 2


def check_pairs(pairs: Sequence[Tuple[Any, Any]], sigma: Any):
    for q, r in pairs:
        if not admissible(q, r, sigma):
            logger.error('Oops! An error Occurred ⚠️')
            raise InadmissiblePair("({}, {}) is not {}-admissible.".format(q, r, sigma))


def strichartz_report(series: NormSeries, pairs: Sequence[Tuple[Any, Any]] = DEFAULT_PAIRS, sigma: Any = SIGMA,
                      windows: Optional[Sequence[float]] = None) -> dict:
    """Mixed norms over growing windows and their ratio to ‖u0‖ℓ² + ‖F‖_{L¹ℓ²}"""
    try:
        check_pairs(pairs, sigma)
        if windows is None:
            windows = [float(series.times[-1])]
        data = series.initial_l2 + series.source_norm
        entries = []
        for q, r in pairs:
            values = [series.mixed(q, r, t_end) for t_end in windows]
            entries.append({
                'pair': [str(q), str(r)],
                'windows': list(windows),
                'mixed_norms': values,
                'ratios': [v / data for v in values]
            })
        return {'sigma': str(sigma), 'data_norm': data, 'pairs': entries}
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Experiments"""


def gwp_experiment(epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3), a: float = 1.0, box: Sequence[int] = (64, 64, 64),
                   t_final: float = 200.0, dt: float = 0.05, record_stride: int = 20, sign: str = '+',
                   gens: Optional[HalfGeneratorSet] = None, t_check: float = 100.0) -> pd.DataFrame:
    """Small-data runs for every ε: completion to t_final, the log-log trend of ℓ^∞, and whether ℓ⁴ at
    t_check (capped at t_final) sits below its t = 1 value"""
    gens = gens or HalfGeneratorSet.lkg3d()
    config = EvolutionConfig(dt, t_final, a, sign, None, record_stride, DEFAULT_NORMS, DEFAULT_PAIRS, gens)
    t_check = min(t_check, t_final)
    rows = []
    for epsilon in epsilons:
        row: Dict[str, Any] = {'epsilon': epsilon}
        try:
            series = evolve(config, LatticeField.delta(box, epsilon), keep_final=False)
        except EvolutionBlowUp as blow_up:
            logger.warning('epsilon = {}: blow-up at step {}'.format(epsilon, blow_up.step))
            row.update({'completed': False, 'failed_step': blow_up.step, 't_final': blow_up.step * dt,
                        'linf_slope': math.nan, 'l4_t1': math.nan, 'l4_check': math.nan, 'l4_decayed': False})
            rows.append(row)
            continue
        late = series.times >= 1.0
        slope = log_log_regression(series.times[late], series.norm(math.inf)[late]).slope
        l4 = series.norm(4.0)
        l4_t1 = float(np.interp(1.0, series.times, l4))
        l4_check = float(np.interp(t_check, series.times, l4))
        row.update({'completed': True, 'failed_step': None, 't_final': float(series.times[-1]), 'linf_slope': slope,
                    'l4_t1': l4_t1, 'l4_check': l4_check, 'l4_decayed': l4_check < l4_t1})
        for q, r in config.pairs:
            row[mixed_label(q, r)] = series.mixed(q, r)
        rows.append(row)
        logger.info('epsilon = {}: linf slope {:.3f}, l4 {:.3e} at t = 1 and {:.3e} at t = {}'.format(
            epsilon, slope, l4_t1, l4_check, t_check))
    return pd.DataFrame(rows)


def gwp_passed(frame: pd.DataFrame) -> bool:
    """Every ε completed, with ℓ^∞ decreasing in trend and ℓ⁴ decayed"""
    return bool(frame['completed'].all() and frame['l4_decayed'].all() and (frame['linf_slope'] < 0).all())


def box_robustness(config: EvolutionConfig, box: Sequence[int], epsilon: float = 1e-2) -> dict:
    """Relative change of the recorded norms when every box side doubles"""
    small = evolve(config, LatticeField.delta(box, epsilon), keep_final=False)
    large = evolve(config, LatticeField.delta([2 * L for L in box], epsilon), keep_final=False)
    changes = {}
    for r in config.norms:
        a, b = small.norm(r), large.norm(r)
        changes[norm_label(r)] = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
    return {'box': list(box), 't_final': config.t_final, 'max_relative_change': changes,
            'worst': max(changes.values())}


def self_convergence_order(config: EvolutionConfig, u0: LatticeField) -> float:
    """log2 of successive differences of the final states at dt, dt/2, dt/4"""
    finals = []
    for k in range(3):
        refined = replace(config, dt=config.dt / 2**k, record_stride=10**9)
        finals.append(evolve(refined, u0).final.values)
    coarse = np.linalg.norm((finals[0] - finals[1]).ravel())
    fine = np.linalg.norm((finals[1] - finals[2]).ravel())
    return float(math.log2(coarse / fine))


def l2_drift(config: EvolutionConfig, u0: LatticeField) -> float:
    """Largest relative deviation of the ℓ² norm from its initial value over the run"""
    series = evolve(config, u0, keep_final=False)
    return float(np.max(np.abs(series.norm(2.0) - series.initial_l2)) / series.initial_l2)


def delta_kernel_check(t: float = 8.0, box: Sequence[int] = (128, 128), reach: int = 8,
                       gens: Optional[HalfGeneratorSet] = None, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Largest gap between the evolved delta on the box and K₂(n; t) for |n|∞ ≤ reach"""
    gens = gens or HalfGeneratorSet.king2d()
    evolved = linear_step(LatticeField.delta(box), t, gens).values
    worst = 0.0
    for n1 in range(-reach, reach + 1):
        for n2 in range(-reach, reach + 1):
            expected = kernel_2d_point(gens, (n1, n2), t, spec)
            worst = max(worst, abs(evolved[n1 % box[0], n2 % box[1]] - expected))
    return worst


"""Field dumps"""


def write_field(lattice_field: LatticeField, path: str, config: Optional[EvolutionConfig] = None):
    """Flat binary of complex128 pairs plus a JSON sidecar"""
    lattice_field.values.astype(np.complex128).tofile(path)
    meta = {'box': list(lattice_field.box), 'dtype': 'complex128'}
    if config is not None:
        meta.update({'dt': config.dt, 't_final': config.t_final, 'a': config.a, 'sign': config.sign})
    with open(path + '.json', 'w') as handle:
        json.dump(meta, handle, indent=2)
    logger.info('Field written to {}'.format(path))


def read_field(path: str) -> LatticeField:
    if not os.path.exists(path + '.json'):
        raise InvalidConfig("Missing sidecar {}.json.".format(path))
    with open(path + '.json') as handle:
        meta = json.load(handle)
    values = np.fromfile(path, dtype=np.complex128).reshape(meta['box'])
    return LatticeField(tuple(meta['box']), values)
