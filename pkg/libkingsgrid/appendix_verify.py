"""Numeric certificates for the three Case IIb systems: β = 0 on the degenerate curve has solutions
off the loci c ∈ {0, −1/2}, and α, resp. the discriminant D, stay away from zero on them.

A verdict here is a measured statement, not a proof: "no solution found" means the minimum of the
blocking quantity over the refined System-1 solutions exceeds the published threshold."""

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple
import numpy as np
from scipy import optimize
from tabulate import tabulate
from libkingsgrid.logs import start_logger
from libkingsgrid.enumerables import Formulas, SystemVerdict
from libkingsgrid.processing import WorkerPool
from libkingsgrid.symbol import TorusPoint, reduce_angles, king2d_cs, king2d_det4
from libkingsgrid.singularities import (Tolerances, DEFAULT_TOLERANCES, as_formulas, case_iib_coefficients,
                                        degenerate_beta_roots, dedupe_points)

logger = start_logger(__name__)

BLOCKING_THRESHOLD = 1e-3
LOCUS_MARGIN = 1e-3
WITNESS_RESIDUAL = 1e-10
STABILITY = 0.01
APPENDIX_WITNESS = (-0.996, -0.0869, 0.0288, 1.00)


@dataclass(frozen=True)
class Witness:
    location: TorusPoint
    cs: Tuple[float, float, float, float]
    det_residual: float
    beta_residual: float
    alpha: float
    gamma: float
    discriminant: float

    @property
    def residual(self) -> float:
        return self.det_residual + self.beta_residual

    def to_dict(self) -> dict:
        return {
            'location': list(self.location.coordinates),
            'cs': list(self.cs),
            'det_residual': self.det_residual,
            'beta_residual': self.beta_residual,
            'alpha': self.alpha,
            'gamma': self.gamma,
            'D': self.discriminant
        }


@dataclass(frozen=True)
class GammaSystemReport:
    system_id: int
    formulas: Formulas
    resolution: int
    witnesses: Tuple[Witness, ...]
    min_blocking_value: Optional[float]
    threshold: float
    verdict: SystemVerdict

    def to_dict(self) -> dict:
        return {
            'system_id': self.system_id,
            'formulas': self.formulas.value,
            'resolution': self.resolution,
            'witnesses': [w.to_dict() for w in self.witnesses],
            'min_blocking_value': self.min_blocking_value,
            'threshold': self.threshold,
            'verdict': self.verdict.value
        }


'''Not in docs. helper functions'''


def check_resolution(resolution: int):
    if resolution < 512:
        logger.error('Oops! An error Occurred ⚠️')
        raise ValueError("resolution must be at least 512, got {}.".format(resolution))


def off_loci(cs: Sequence[float], margin: float) -> bool:
    c1, _, c2, _ = cs
    return all(abs(c) > margin and abs(c + 0.5) > margin for c in (c1, c2))


def polish(point: np.ndarray, formulas: Formulas) -> np.ndarray:
    """Refine (det, β) = 0 with the unscaled β, which is regular off the loci"""

    def system(q):
        return [float(king2d_det4(q)), float(case_iib_coefficients(tuple(float(v) for v in king2d_cs(q)), formulas)[1])]

    solution = optimize.root(system, point, method='hybr', tol=1e-15)
    candidate = reduce_angles(solution.x)
    if np.sum(np.abs(system(candidate))) < np.sum(np.abs(system(point))):
        return candidate
    return point


def make_witness(point: np.ndarray, formulas: Formulas) -> Witness:
    cs = tuple(float(v) for v in king2d_cs(point))
    alpha, beta, gamma, discriminant = case_iib_coefficients(cs, formulas)
    return Witness(TorusPoint(tuple(point)), cs, abs(float(king2d_det4(point))), abs(float(beta)), float(alpha),
                   float(gamma), float(discriminant))


"""Systems"""


def system1_witnesses(resolution: int = 512, formulas: Any = Formulas.printed,
                      tolerances: Tolerances = DEFAULT_TOLERANCES, pool: Optional[WorkerPool] = None,
                      margin: float = LOCUS_MARGIN) -> List[Witness]:
    """Solutions of det = 0 and β = 0 off the loci, sorted by location"""
    check_resolution(resolution)
    formulas = as_formulas(formulas)
    logger.info('Solving System 1 at resolution {} with {} formulas'.format(resolution, formulas.value))
    roots = degenerate_beta_roots(resolution, formulas, tolerances, pool)
    kept = []
    for root in roots:
        if off_loci(tuple(float(v) for v in king2d_cs(root)), margin):
            kept.append(polish(root, formulas))
    if not kept:
        return []
    kept = dedupe_points(np.asarray(kept), tolerances.dedupe)
    witnesses = [make_witness(p, formulas) for p in kept]
    return sorted(witnesses, key=lambda w: w.location.coordinates)


def system_report(system_id: int, witnesses: Sequence[Witness], resolution: int, formulas: Formulas,
                  threshold: float = BLOCKING_THRESHOLD) -> GammaSystemReport:
    """Verdict of one system from the System-1 solution set"""
    if system_id == 1:
        good = tuple(w for w in witnesses if w.residual < WITNESS_RESIDUAL)
        verdict = SystemVerdict.solvable if good else SystemVerdict.no_solution_found
        return GammaSystemReport(1, formulas, resolution, tuple(witnesses), None, threshold, verdict)
    if system_id not in (2, 3):
        raise ValueError("Unknown system {}.".format(system_id))
    blocking = [abs(w.alpha) if system_id == 2 else abs(w.discriminant) for w in witnesses]
    minimum = min(blocking) if blocking else None
    if minimum is None or minimum > threshold:
        verdict = SystemVerdict.no_solution_found
    else:
        verdict = SystemVerdict.solvable
    return GammaSystemReport(system_id, formulas, resolution, tuple(witnesses), minimum, threshold, verdict)


def verify_system1(resolution: int = 512, formulas: Any = Formulas.printed, tolerances: Tolerances = DEFAULT_TOLERANCES,
                   pool: Optional[WorkerPool] = None) -> GammaSystemReport:
    try:
        formulas = as_formulas(formulas)
        witnesses = system1_witnesses(resolution, formulas, tolerances, pool)
        return system_report(1, witnesses, resolution, formulas)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def verify_system2(resolution: int = 512, formulas: Any = Formulas.printed, tolerances: Tolerances = DEFAULT_TOLERANCES,
                   pool: Optional[WorkerPool] = None, threshold: float = BLOCKING_THRESHOLD) -> GammaSystemReport:
    try:
        formulas = as_formulas(formulas)
        witnesses = system1_witnesses(resolution, formulas, tolerances, pool)
        return system_report(2, witnesses, resolution, formulas, threshold)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def verify_system3(resolution: int = 512, formulas: Any = Formulas.printed, tolerances: Tolerances = DEFAULT_TOLERANCES,
                   pool: Optional[WorkerPool] = None, threshold: float = BLOCKING_THRESHOLD) -> GammaSystemReport:
    try:
        formulas = as_formulas(formulas)
        witnesses = system1_witnesses(resolution, formulas, tolerances, pool)
        return system_report(3, witnesses, resolution, formulas, threshold)
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


def nearest_witness(report: GammaSystemReport, target: Sequence[float] = APPENDIX_WITNESS) -> Optional[Tuple[Witness, float]]:
    """Witness whose (c1, s1, c2, s2) is closest in max norm to the target"""
    if not report.witnesses:
        return None
    distances = [float(np.max(np.abs(np.asarray(w.cs) - np.asarray(target)))) for w in report.witnesses]
    index = int(np.argmin(distances))
    return report.witnesses[index], distances[index]


def relative_change(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None:
        return None
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify_appendix(resolutions: Sequence[int] = (512, 1024), formulas: Any = Formulas.printed,
                    tolerances: Tolerances = DEFAULT_TOLERANCES, pool: Optional[WorkerPool] = None,
                    threshold: float = BLOCKING_THRESHOLD) -> dict:
    """All three systems at every resolution, the stability of their numbers and a verdict table"""
    try:
        formulas = as_formulas(formulas)
        by_resolution = {}
        for resolution in resolutions:
            witnesses = system1_witnesses(resolution, formulas, tolerances, pool)
            by_resolution[resolution] = [system_report(s, witnesses, resolution, formulas, threshold) for s in (1, 2, 3)]
        coarse, fine = by_resolution[resolutions[0]], by_resolution[resolutions[-1]]
        stability = {
            'witness_counts': [len(by_resolution[r][0].witnesses) for r in resolutions],
            'counts_agree': len(coarse[0].witnesses) == len(fine[0].witnesses),
            'alpha_change': relative_change(coarse[1].min_blocking_value, fine[1].min_blocking_value),
            'D_change': relative_change(coarse[2].min_blocking_value, fine[2].min_blocking_value)
        }
        stable = stability['counts_agree'] and all(
            change is None or change < STABILITY for change in (stability['alpha_change'], stability['D_change']))
        if not stable:
            logger.warning('Appendix numbers moved under resolution doubling: {}'.format(stability))
        rows = [['System {}'.format(r.system_id), r.verdict.value, len(r.witnesses),
                 '' if r.min_blocking_value is None else '{:.6g}'.format(r.min_blocking_value)] for r in fine]
        table = tabulate(rows, headers=['system', 'verdict', 'witnesses', 'min blocking'])
        closest = nearest_witness(fine[0])
        return {
            'formulas': formulas.value,
            'threshold': threshold,
            'reports': {str(r): [report.to_dict() for report in reports] for r, reports in by_resolution.items()},
            'stability': stability,
            'stable': stable,
            'closest_to_printed_witness': None if closest is None else {
                'witness': closest[0].to_dict(),
                'distance': closest[1]
            },
            'table': table
        }
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception
