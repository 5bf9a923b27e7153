"""Critical points of the phase, their A1/A2/A3 classification and height, velocity classes,
the degenerate curve and the A3 points of the King's grid symbol."""

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from scipy import ndimage, optimize
from scipy.spatial import cKDTree
from skimage import measure
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import DimensionMismatch, UnclassifiableSingularity
from libkingsgrid.enumerables import CaseTag, SingularityType, VelocityRegion, Formulas, Verdict
from libkingsgrid.processing import WorkerPool, serial_pool
from libkingsgrid.symbol import (HalfGeneratorSet, TorusPoint, TaylorPolynomial, TWO_PI, as_points,
                                 reduce_angles, torus_distance, grad_symbol, hessian_symbol,
                                 taylor_shifted_phase, king2d_cs, king2d_det4)
from libkingsgrid import newton

logger = start_logger(__name__)

HEIGHTS = {
    SingularityType.A1: Fraction(1),
    SingularityType.A2: Fraction(6, 5),
    SingularityType.A3: Fraction(4, 3),
}


@dataclass(frozen=True)
class Tolerances:
    '''Numerical bands of the classification pipeline'''
    det_relative: float = 1e-9
    angle: float = 1e-9
    beta: float = 1e-7
    alpha: float = 1e-7
    discriminant: float = 1e-7
    newton_residual: float = 1e-12
    newton_iterations: int = 100
    step_halvings: int = 30
    dedupe: float = 1e-8
    snap_band: float = 1e-3
    taylor_order: int = 4
    root_residual: float = 1e-10
    bisection: float = 1e-10

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class CriticalPoint:
    location: TorusPoint
    velocity: Tuple[float, float]
    cs: Optional[Tuple[float, float, float, float]]
    hessian_det: float
    case_tag: CaseTag
    singularity_type: SingularityType
    height: Fraction
    coeffs: Optional[Tuple[float, float, float, float]] = None
    newton_height: Optional[Fraction] = None
    formulas: Formulas = Formulas.exact

    @property
    def height_agrees(self) -> bool:
        """Height equals the Newton distance, or no distance was computed"""
        return self.newton_height is None or self.newton_height == self.height

    def to_dict(self) -> dict:
        coeffs = None
        if self.coeffs is not None:
            coeffs = dict(zip(('alpha', 'beta', 'gamma', 'D'), self.coeffs))
        return {
            'location': list(self.location.coordinates),
            'velocity': list(self.velocity),
            'cs': list(self.cs) if self.cs is not None else None,
            'hessian_det': self.hessian_det,
            'case_tag': self.case_tag.value,
            'singularity_type': self.singularity_type.value,
            'height': str(self.height),
            'newton_height': str(self.newton_height) if self.newton_height is not None else None,
            'height_agrees': self.height_agrees,
            'coeffs': coeffs,
            'formulas': self.formulas.value
        }


@dataclass(frozen=True)
class VelocityClass:
    velocity: Tuple[float, float]
    region: VelocityRegion
    witnesses: Tuple[CriticalPoint, ...]
    diagnostics: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            'velocity': list(self.velocity),
            'class': self.region.value,
            'witnesses': [w.to_dict() for w in self.witnesses],
            'diagnostics': list(self.diagnostics)
        }


@dataclass(frozen=True)
class DegeneratePolyline:
    '''Piece of the zero set of det Hess ω, coordinates reduced into [0, 2π)'''
    points: np.ndarray
    closed: bool
    det_residual: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.points)


'''Not in docs. helper functions'''


def check_planar(gens: HalfGeneratorSet):
    if gens.dimension != 2:
        logger.error('Oops! An error Occurred ⚠️')
        raise DimensionMismatch("Singularity classification is planar; got dimension {}.".format(gens.dimension))


def as_formulas(formulas: Any) -> Formulas:
    return formulas if isinstance(formulas, Formulas) else Formulas(formulas)


def cubic_coefficients(cs: Sequence[Any], formulas: Formulas = Formulas.exact) -> Tuple[Any, Any, Any, Any]:
    """(a30, a21, a12, a03) of the cubic part of the shifted King2D phase"""
    c1, s1, c2, s2 = cs
    if as_formulas(formulas) is Formulas.printed:
        return (-(s1 + 2 * c1 * s2) / 3, -2 * c2 * s1, -2 * c1 * s2, -(2 * c2 * s1 + s2) / 3)
    return (-s1 * (1 + 2 * c2) / 3, -2 * c1 * s2, -2 * s1 * c2, -s2 * (1 + 2 * c1) / 3)


def quartic_at(cs: Sequence[Any], x: Any, y: Any) -> Any:
    """Quartic part of the shifted King2D phase evaluated at (x, y)"""
    c1, s1, c2, s2 = cs
    return -(c1 * x**4 + c2 * y**4 + (c1 * c2 - s1 * s2) * (x + y)**4 + (c1 * c2 + s1 * s2) * (x - y)**4) / 12


def swap_cs(cs: Sequence[float]) -> Tuple[float, float, float, float]:
    c1, s1, c2, s2 = cs
    return (c2, s2, c1, s1)


def shear_factor(cs: Sequence[float]) -> float:
    """k with u = x − k·y removing the uv term: 2s1s2/(c1(1+2c2))"""
    c1, s1, c2, s2 = cs
    return 2 * s1 * s2 / (c1 * (1 + 2 * c2))


def printed_closed_forms(cs: Sequence[float]) -> Tuple[float, float, float, float]:
    """α, β, γ and the discriminant as displayed in the Case IIb analysis"""
    c1, s1, c2, s2 = cs
    e = 2 * c2 + 1
    alpha = (-4 * s1**3 * s2**2 / (c1**2 * e**2) - 8 * s1**2 * s2**3 / (c1 * e**2) -
             8 * c2 * s1**2 * s2 / (c1 * e) - 2 * c1 * s2)
    beta = (-8 * s1**4 * s2**3 / (3 * c1**3 * e**3) - 16 * s1**3 * s2**4 / (3 * c1**2 * e**3) -
            8 * c2 * s1**3 * s2**2 / (c1**2 * e**2) - 4 * s1 * s2**2 / e - 2 * c2 * s1 / 3 - s2 / 3)
    gamma = (16 * s1**4 * s2**4 / (3 * c1**3 * e**3) - 8 * c2 * s1**4 * s2**4 / (3 * c1**3 * e**4) -
             4 * s1**4 * s2**4 / (3 * c1**3 * e**4) + 4 * s1**2 * s2**2 / (3 * c1 * e) -
             4 * c2 * s1**2 * s2**2 / (c1 * e**2) - c1 * c2 / 6 - c2 / 12)
    return alpha, beta, gamma, alpha**2 - 4 * (2 * c1 * c2 + c1) * gamma


def composed_closed_forms(cs: Sequence[float], formulas: Formulas = Formulas.exact) -> Tuple[float, float, float, float]:
    """α, β, γ, D read off the sheared Taylor data: uv², v³, v⁴ coefficients and α² − 4Aγ"""
    c1, s1, c2, s2 = cs
    a30, a21, a12, a03 = cubic_coefficients(cs, formulas)
    k = shear_factor(cs)
    alpha = 3 * a30 * k**2 + 2 * a21 * k + a12
    beta = a30 * k**3 + a21 * k**2 + a12 * k + a03
    gamma = quartic_at(cs, k, 1.0)
    return alpha, beta, gamma, alpha**2 - 4 * c1 * (1 + 2 * c2) * gamma


def case_iib_coefficients(cs: Sequence[float], formulas: Any = Formulas.exact) -> Tuple[float, float, float, float]:
    formulas = as_formulas(formulas)
    if formulas is Formulas.printed:
        return printed_closed_forms(cs)
    return composed_closed_forms(cs, formulas)


def scaled_beta(p: Any, formulas: Any = Formulas.exact) -> np.ndarray:
    """β·(c1(1+2c2))³: the cubic on the Hessian null direction, free of poles"""
    cs = king2d_cs(p)
    c1, s1, c2, s2 = cs
    a30, a21, a12, a03 = cubic_coefficients(cs, as_formulas(formulas))
    x, y = 2 * s1 * s2, c1 * (1 + 2 * c2)
    return a30 * x**3 + a21 * x**2 * y + a12 * x * y**2 + a03 * y**3


def printed_taylor(p0: Any, order: int = 4) -> TaylorPolynomial:
    """Shifted King2D phase with the cubic part replaced by the displayed one"""
    exact = taylor_shifted_phase(HalfGeneratorSet.king2d(), p0, order)
    coefficients = {e: c for e, c in exact.coefficients.items() if sum(e) != 3}
    cubic = cubic_coefficients(tuple(float(v) for v in king2d_cs(p0)), Formulas.printed)
    for exponents, value in zip(((3, 0), (2, 1), (1, 2), (0, 3)), cubic):
        if value != 0.0:
            coefficients[exponents] = value
    return TaylorPolynomial(coefficients, order, 2)


def quadratic_frame(taylor: TaylorPolynomial) -> Tuple[TaylorPolynomial, float]:
    """Transpose so the x² coefficient dominates, then shear away the xy term"""
    if abs(taylor.coefficient(0, 2)) > abs(taylor.coefficient(2, 0)):
        taylor = taylor.transposed()
    a, b = taylor.coefficient(2, 0), taylor.coefficient(1, 1)
    k = -b / (2 * a) if a != 0.0 else 0.0
    return taylor.sheared(k), k


def newton_height(taylor: TaylorPolynomial) -> Tuple[Fraction, newton.PrincipalFaceReport]:
    """Newton distance of the Taylor data in the sheared frame"""
    sheared, _ = quadratic_frame(taylor)
    _, report = newton.analyse(sheared)
    return report.distance, report


def determinant_scale(hessian: np.ndarray) -> float:
    return max(1.0, float(np.sum(hessian**2)))


def hessian_determinants(gens: HalfGeneratorSet, points: np.ndarray) -> np.ndarray:
    if gens.is_king2d():
        return 4.0 * king2d_det4(points)
    return np.linalg.det(hessian_symbol(gens, points))


"""Critical points"""


def damped_newton(gens: HalfGeneratorSet, seeds: np.ndarray, velocity: np.ndarray,
                  tolerances: Tolerances) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised damped Newton on ∇ω(p) = v from every seed; returns points and final residuals"""
    p = seeds.copy()
    residual_vector = grad_symbol(gens, p) - velocity
    residual = np.linalg.norm(residual_vector, axis=-1)
    for _ in range(tolerances.newton_iterations):
        active = residual >= tolerances.newton_residual
        if not active.any():
            break
        jacobian = hessian_symbol(gens, p[active])
        step = np.einsum('nij,nj->ni', np.linalg.pinv(jacobian, rcond=1e-13), residual_vector[active])
        scale = np.ones(len(step))
        current = p[active]
        current_residual = residual[active]
        accepted = np.zeros(len(step), dtype=bool)
        trial = current - step
        for _ in range(tolerances.step_halvings):
            trial_residual = np.linalg.norm(grad_symbol(gens, trial) - velocity, axis=-1)
            better = (trial_residual < current_residual) & ~accepted
            accepted |= better
            if accepted.all():
                break
            scale = np.where(accepted, scale, scale / 2)
            trial = np.where(accepted[:, None], trial, current - scale[:, None] * step)
        new_points = np.where(accepted[:, None], trial, current)
        p[active] = reduce_angles(new_points)
        residual_vector = grad_symbol(gens, p) - velocity
        new_residual = np.linalg.norm(residual_vector, axis=-1)
        stalled = active.copy()
        stalled[active] = ~accepted
        residual = new_residual
        if stalled[active].all():
            break
    return p, residual


def seed_points(gradient_grid: np.ndarray, velocity: np.ndarray, spacing: float) -> np.ndarray:
    """Cell centres where both components of ∇ω − v change sign, plus local minima of |∇ω − v|"""
    f = gradient_grid - velocity
    seeds = []
    straddles = np.ones(f.shape[:2], dtype=bool)
    for component in range(2):
        values = f[..., component]
        corners = np.stack([values, np.roll(values, -1, 0), np.roll(values, -1, 1),
                            np.roll(np.roll(values, -1, 0), -1, 1)])
        straddles &= (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)
    rows, cols = np.nonzero(straddles)
    seeds.append(np.stack([(rows + 0.5) * spacing, (cols + 0.5) * spacing], axis=-1))
    magnitude = np.linalg.norm(f, axis=-1)
    minima = (magnitude == ndimage.minimum_filter(magnitude, size=3, mode='wrap'))
    minima &= magnitude < 12.0 * spacing
    rows, cols = np.nonzero(minima)
    seeds.append(np.stack([rows * spacing, cols * spacing], axis=-1))
    return np.concatenate(seeds).astype(float)


def snap_to_degenerate(gens: HalfGeneratorSet, point: np.ndarray, velocity: np.ndarray,
                       tolerances: Tolerances) -> Optional[np.ndarray]:
    """Least-squares projection of a nearly degenerate critical point onto the degenerate locus"""
    king = gens.is_king2d()

    def equations(q):
        values = list(grad_symbol(gens, q) - velocity)
        if king:
            values += [float(king2d_det4(q)), float(scaled_beta(q, Formulas.exact))]
        else:
            values.append(float(np.linalg.det(hessian_symbol(gens, q))) / 4.0)
        return values

    candidates = []
    for system in ((0, 1, 2), (0, 1, 2, 3)) if king else ((0, 1, 2), ):

        def restricted(q, system=system):
            values = equations(q)
            return [values[i] for i in system]

        solution = optimize.least_squares(restricted, point, method='lm', xtol=1e-15, ftol=1e-15, gtol=1e-15)
        q = reduce_angles(solution.x)
        residual = float(np.linalg.norm(grad_symbol(gens, q) - velocity))
        if residual < tolerances.newton_residual:
            candidates.append((abs(float(hessian_determinants(gens, q[None, :])[0])), residual, tuple(q)))
    if not candidates:
        return None
    return np.asarray(min(candidates)[2])


def dedupe_points(points: np.ndarray, radius: float) -> np.ndarray:
    """Keep one representative per cluster under the torus metric, order preserved"""
    if len(points) == 0:
        return points
    tree = cKDTree(reduce_angles(points), boxsize=TWO_PI)
    keep = []
    taken = np.zeros(len(points), dtype=bool)
    for i in range(len(points)):
        if taken[i]:
            continue
        for j in tree.query_ball_point(reduce_angles(points[i]), r=radius):
            taken[j] = True
        keep.append(i)
    return points[keep]


def find_critical_points(gens: HalfGeneratorSet, velocity: Sequence[float], grid_n: int = 256,
                         tolerances: Tolerances = DEFAULT_TOLERANCES,
                         diagnostics: Optional[list] = None) -> List[TorusPoint]:
    """All solutions of ∇ω(p) = v on the torus, sorted lexicographically"""
    try:
        check_planar(gens)
        if grid_n < 64:
            raise ValueError("grid_n must be at least 64, got {}.".format(grid_n))
        velocity = np.asarray(velocity, dtype=float)
        if np.any(np.abs(velocity) > gens.gradient_bound() + 1e-12):
            return []
        spacing = TWO_PI / grid_n
        axis = np.arange(grid_n) * spacing
        grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1)
        seeds = seed_points(grad_symbol(gens, grid), velocity, spacing)
        points, residuals = damped_newton(gens, seeds, velocity, tolerances)
        converged = residuals < tolerances.newton_residual
        for seed, residual in zip(seeds[~converged], residuals[~converged]):
            message = 'Newton did not converge from seed ({:.6f}, {:.6f}); residual {:.3e}'.format(
                seed[0], seed[1], residual)
            if diagnostics is not None:
                diagnostics.append(message)
        if (~converged).any():
            logger.warning('{} of {} seeds did not converge for velocity {}'.format(
                int((~converged).sum()), len(seeds), tuple(velocity)))
        points = dedupe_points(points[converged], tolerances.dedupe)
        snapped = []
        for point in points:
            hessian = hessian_symbol(gens, point)
            if abs(np.linalg.det(hessian)) < tolerances.snap_band * determinant_scale(hessian):
                projected = snap_to_degenerate(gens, point, velocity, tolerances)
                if projected is not None:
                    point = projected
            snapped.append(reduce_angles(point))
        points = np.asarray(snapped).reshape(-1, 2)
        degenerate = np.abs(hessian_determinants(gens, points)) < tolerances.snap_band
        points = np.concatenate([dedupe_points(points[~degenerate], tolerances.dedupe),
                                 dedupe_points(points[degenerate], 1e-5)])
        return sorted((TorusPoint(tuple(p)) for p in points), key=lambda p: p.coordinates)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Classification"""


def king2d_case(cs: Sequence[float], tolerances: Tolerances) -> CaseTag:
    c1, s1, c2, s2 = cs
    if abs(c1) < tolerances.angle or abs(c2) < tolerances.angle:
        return CaseTag.CaseI
    if abs(c1 + 0.5) < tolerances.angle or abs(c2 + 0.5) < tolerances.angle:
        return CaseTag.CaseIIa
    return CaseTag.CaseIIb_A2


def classify_singularity(gens: HalfGeneratorSet, p0: Any, tolerances: Tolerances = DEFAULT_TOLERANCES,
                         formulas: Any = Formulas.exact) -> CriticalPoint:
    """A1/A2/A3 type, case tag and height of p0 as a critical point of its own velocity"""
    try:
        check_planar(gens)
        formulas = as_formulas(formulas)
        location = p0 if isinstance(p0, TorusPoint) else TorusPoint(tuple(as_points(p0)))
        point = location.as_array()
        velocity = tuple(float(v) for v in grad_symbol(gens, point))
        hessian = hessian_symbol(gens, point)
        det = float(np.linalg.det(hessian))
        king = gens.is_king2d()
        cs = tuple(float(v) for v in king2d_cs(point)) if king else None
        if king:
            det = 4.0 * float(king2d_det4(point))
        if abs(det) > tolerances.det_relative * determinant_scale(hessian):
            return CriticalPoint(location, velocity, cs, det, CaseTag.NonDegenerate, SingularityType.A1,
                                 HEIGHTS[SingularityType.A1], None, Fraction(1), formulas)
        if not king:
            return classify_generic(gens, location, velocity, det, tolerances, formulas)
        taylor = printed_taylor(point, tolerances.taylor_order) if formulas is Formulas.printed else \
            taylor_shifted_phase(gens, point, tolerances.taylor_order)
        distance, _ = newton_height(taylor)
        tag = king2d_case(cs, tolerances)
        if formulas is Formulas.printed and tag in (CaseTag.CaseI, CaseTag.CaseIIa):
            return CriticalPoint(location, velocity, cs, det, tag, SingularityType.A2, HEIGHTS[SingularityType.A2],
                                 None, distance, formulas)
        frame = cs
        c1, s1, c2, s2 = cs
        if abs(c1 * (1 + 2 * c2)) < abs(c2 * (1 + 2 * c1)):
            frame = swap_cs(cs)
        alpha, beta, gamma, discriminant = case_iib_coefficients(frame, formulas)
        coeffs = (float(alpha), float(beta), float(gamma), float(discriminant))
        if abs(beta) > tolerances.beta:
            kind = SingularityType.A2
        elif abs(alpha) > tolerances.alpha and abs(discriminant) > tolerances.discriminant:
            kind = SingularityType.A3
        else:
            raise UnclassifiableSingularity(
                "alpha={:.3e}, beta={:.3e}, D={:.3e} all inside their zero bands at {}".format(
                    alpha, beta, discriminant, location.coordinates))
        if tag is CaseTag.CaseIIb_A2 and kind is SingularityType.A3:
            tag = CaseTag.CaseIIb_A3
        if distance != HEIGHTS[kind]:
            logger.warning('Height {} disagrees with Newton distance {} at {}'.format(
                HEIGHTS[kind], distance, location.coordinates))
        return CriticalPoint(location, velocity, cs, det, tag, kind, HEIGHTS[kind], coeffs, distance, formulas)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def classify_generic(gens: HalfGeneratorSet, location: TorusPoint, velocity: Tuple[float, float], det: float,
                     tolerances: Tolerances, formulas: Formulas) -> CriticalPoint:
    """Degenerate point of a symbol other than King2D, typed by its Newton distance"""
    taylor = taylor_shifted_phase(gens, location.as_array(), max(tolerances.taylor_order, 4))
    distance, report = newton_height(taylor)
    for kind in (SingularityType.A2, SingularityType.A3):
        if distance == HEIGHTS[kind] and report.adapted is Verdict.adapted:
            return CriticalPoint(location, velocity, None, det, CaseTag.Generic, kind, HEIGHTS[kind], None,
                                 distance, formulas)
    raise UnclassifiableSingularity("Newton distance {} ({}) at {} is not an A2 or A3 height.".format(
        distance, report.adapted.value, location.coordinates))


def classify_velocity(gens: HalfGeneratorSet, velocity: Sequence[float], grid_n: int = 256,
                      tolerances: Tolerances = DEFAULT_TOLERANCES, formulas: Any = Formulas.exact) -> VelocityClass:
    """V0..V3 by the worst singularity among the critical points of the velocity"""
    try:
        diagnostics: List[str] = []
        points = find_critical_points(gens, velocity, grid_n, tolerances, diagnostics)
        witnesses = tuple(classify_singularity(gens, p, tolerances, formulas) for p in points)
        for witness in witnesses:
            if not witness.height_agrees:
                diagnostics.append('height {} disagrees with Newton distance {} at {}'.format(
                    witness.height, witness.newton_height, witness.location.coordinates))
        kinds = {w.singularity_type for w in witnesses}
        if not witnesses:
            region = VelocityRegion.V0
        elif SingularityType.A3 in kinds:
            region = VelocityRegion.V3
        elif SingularityType.A2 in kinds:
            region = VelocityRegion.V2
        else:
            region = VelocityRegion.V1
        return VelocityClass(tuple(float(v) for v in velocity), region, witnesses, tuple(diagnostics))
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Degenerate curve"""


def determinant_function(gens: HalfGeneratorSet):
    if gens.is_king2d():
        return king2d_det4
    return lambda p: np.linalg.det(hessian_symbol(gens, p))


def refine_on_edges(function, vertices: np.ndarray, spacing: float, tolerance: float) -> np.ndarray:
    """Bisection of each marching-squares vertex along the grid edge it lies on"""
    rows, cols = vertices[:, 0], vertices[:, 1]
    on_row = np.abs(rows - np.round(rows)) < 1e-9
    fixed = np.where(on_row, np.round(rows), np.round(cols)) * spacing
    moving = np.where(on_row, cols, rows)
    lo = np.floor(moving) * spacing
    hi = lo + spacing

    def evaluate(values):
        x = np.where(on_row, fixed, values)
        y = np.where(on_row, values, fixed)
        return function(reduce_angles(np.stack([x, y], axis=-1)))

    f_lo, f_hi = evaluate(lo), evaluate(hi)
    bracketed = np.sign(f_lo) * np.sign(f_hi) <= 0
    iterations = int(math.ceil(math.log2(spacing / tolerance))) + 2
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid = evaluate(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    refined = np.where(bracketed, 0.5 * (lo + hi), moving * spacing)
    x = np.where(on_row, fixed, refined)
    y = np.where(on_row, refined, fixed)
    return np.stack([x, y], axis=-1)


def stitch(pieces: List[np.ndarray], tolerance: float = 1e-7) -> List[Tuple[np.ndarray, bool]]:
    """Join open contour pieces whose ends meet across the 2π seam"""
    closed, open_pieces = [], []
    for piece in pieces:
        if len(piece) > 2 and torus_distance(piece[0], piece[-1]) < tolerance:
            closed.append((piece, True))
        else:
            open_pieces.append(piece)
    while open_pieces:
        current = open_pieces.pop(0)
        while True:
            if len(current) > 2 and torus_distance(current[0], current[-1]) < tolerance:
                closed.append((current, True))
                break
            end = current[-1]
            for index, piece in enumerate(open_pieces):
                if torus_distance(piece[0], end) < tolerance:
                    current = np.concatenate([current, piece[1:]])
                    break
                if torus_distance(piece[-1], end) < tolerance:
                    current = np.concatenate([current, piece[::-1][1:]])
                    break
            else:
                logger.warning('Degenerate curve piece of {} points left open'.format(len(current)))
                closed.append((current, False))
                break
            open_pieces.pop(index)
    return closed


def trace_degenerate_curve(gens: HalfGeneratorSet, resolution: int = 512,
                           tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[DegeneratePolyline]:
    """Zero set of det Hess ω by marching squares, refined by bisection and closed across the seam"""
    try:
        check_planar(gens)
        if resolution < 256:
            raise ValueError("resolution must be at least 256, got {}.".format(resolution))
        logger.info('Tracing the degenerate curve at resolution {}'.format(resolution))
        function = determinant_function(gens)
        spacing = TWO_PI / resolution
        axis = np.arange(resolution) * spacing
        grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1)
        values = np.pad(function(grid), ((0, 1), (0, 1)), mode='wrap')
        pieces = []
        for contour in measure.find_contours(values, 0.0):
            refined = refine_on_edges(function, contour, spacing, tolerances.bisection)
            pieces.append(reduce_angles(refined))
        polylines = []
        for points, closed in stitch(pieces):
            polylines.append(DegeneratePolyline(points, closed, function(points)))
        polylines.sort(key=lambda line: tuple(line.points.min(axis=0)))
        return polylines
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def curve_frame(polylines: List[DegeneratePolyline]):
    """pandas DataFrame (curve, x, y, det_residual) for CSV export"""
    frames = []
    for index, line in enumerate(polylines):
        frames.append(pd.DataFrame({
            'curve': index,
            'x': line.points[:, 0],
            'y': line.points[:, 1],
            'det_residual': line.det_residual
        }))
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=['curve', 'x', 'y', 'det_residual'])


"""A3 points"""


def locus_candidates() -> np.ndarray:
    """Intersections of the degenerate curve with the loci c_i = -1/2, c_i = 0"""
    thirds = (2 * math.pi / 3, 4 * math.pi / 3)
    halves = (math.pi / 2, 3 * math.pi / 2)
    points = []
    for a in thirds + halves:
        for b in (0.0, math.pi):
            points.append((a, b))
            points.append((b, a))
    return np.asarray(points)


def beta_roots_on_line(line: DegeneratePolyline, formulas: Formulas, tolerances: Tolerances) -> List[np.ndarray]:
    """Zeros of the scaled β along one polyline, refined jointly with det = 0"""
    points = line.points
    if line.closed:
        points = np.concatenate([points, points[:1]])
    values = scaled_beta(points, formulas)
    roots = []
    brackets = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]

    def system(q):
        return [float(king2d_det4(q)), float(scaled_beta(q, formulas))]

    for i in brackets:
        a, b = points[i], points[i + 1]
        fa, fb = values[i], values[i + 1]
        weight = fa / (fa - fb) if fa != fb else 0.5
        guess = a + weight * (np.mod(b - a + math.pi, TWO_PI) - math.pi)
        solution = optimize.root(system, guess, method='hybr', tol=1e-15)
        q = reduce_angles(solution.x)
        if np.sum(np.abs(system(q))) < tolerances.root_residual:
            roots.append(q)
    return roots


def degenerate_beta_roots(resolution: int = 512, formulas: Any = Formulas.exact,
                          tolerances: Tolerances = DEFAULT_TOLERANCES, pool: Optional[WorkerPool] = None) -> np.ndarray:
    """Points of the King2D degenerate curve where the scaled β vanishes, deduplicated and sorted"""
    formulas = as_formulas(formulas)
    pool = pool or serial_pool()
    polylines = trace_degenerate_curve(HalfGeneratorSet.king2d(), resolution, tolerances)
    found = pool.map(lambda line: beta_roots_on_line(line, formulas, tolerances), polylines)
    roots = [q for group in found for q in group]
    for candidate in locus_candidates():
        if abs(float(king2d_det4(candidate))) < tolerances.root_residual and \
                abs(float(scaled_beta(candidate, formulas))) < tolerances.root_residual:
            roots.append(reduce_angles(candidate))
    if not roots:
        return np.zeros((0, 2))
    roots = np.asarray(roots)
    roots = roots[np.lexsort((roots[:, 1], roots[:, 0]))]
    return dedupe_points(roots, tolerances.dedupe)


def find_A3_points(gens: HalfGeneratorSet, resolution: int = 512, formulas: Any = Formulas.exact,
                   tolerances: Tolerances = DEFAULT_TOLERANCES, pool: Optional[WorkerPool] = None) -> List[CriticalPoint]:
    """A3 points on the degenerate curve: zeros of β along it, classified"""
    try:
        check_planar(gens)
        if not gens.is_king2d():
            raise DimensionMismatch("A3 enumeration uses the King2D closed forms.")
        if resolution < 512:
            raise ValueError("resolution must be at least 512, got {}.".format(resolution))
        formulas = as_formulas(formulas)
        logger.info('Searching A3 points at resolution {} with {} formulas'.format(resolution, formulas.value))
        points = []
        for root in degenerate_beta_roots(resolution, formulas, tolerances, pool):
            point = classify_singularity(gens, root, tolerances, formulas)
            if point.singularity_type is SingularityType.A3:
                points.append(point)
        return sorted(points, key=lambda p: p.location.coordinates)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def a3_count_check(gens: HalfGeneratorSet, resolution: int = 512, formulas: Any = Formulas.exact,
                   tolerances: Tolerances = DEFAULT_TOLERANCES, pool: Optional[WorkerPool] = None) -> dict:
    """A3 counts at a resolution and its double; disagreement is logged, not resolved"""
    coarse = find_A3_points(gens, resolution, formulas, tolerances, pool)
    fine = find_A3_points(gens, 2 * resolution, formulas, tolerances, pool)
    if len(coarse) != len(fine):
        logger.warning('A3 count {} at resolution {} but {} at {}'.format(len(coarse), resolution, len(fine),
                                                                          2 * resolution))
    return {
        'resolutions': [resolution, 2 * resolution],
        'counts': [len(coarse), len(fine)],
        'agree': len(coarse) == len(fine),
        'points': [p.to_dict() for p in fine]
    }
