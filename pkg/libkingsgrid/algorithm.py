"""Experiment runners shared by the command line and the acceptance suite."""

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from scipy import ndimage, optimize, special
from tqdm import tqdm
from libkingsgrid.logs import start_logger
from libkingsgrid.enumerables import Formulas, QuadratureMethod, SingularityType, CaseTag, SystemVerdict
from libkingsgrid.processing import WorkerPool, serial_pool
from libkingsgrid.symbol import HalfGeneratorSet, TorusPoint, grad_symbol, reduce_angles
from libkingsgrid.analysis import bessel_jn_table, geometric_ladder
from libkingsgrid import singularities, oscillatory, appendix_verify, dnls

logger = start_logger(__name__, ignore_module='libkingsgrid.analysis')

A1_POINT = (0.0, 0.0)
CASE_I_POINT = (0.0, math.pi / 2)
A2_VELOCITY = (0.0, 6.0)
V1_VELOCITY = (0.0, 0.0)
V0_VELOCITY = (100.0, 0.0)
GWP_BOX = (64, 64, 64)
BOX_ROBUSTNESS = 0.05


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            'number': self.number,
            'name': self.name,
            'passed': self.passed,
            'measured': self.measured,
            'seconds': self.seconds
        }


'''Not in docs. helper functions'''


def within(value: float, target: float, tolerance: float) -> bool:
    return abs(value - target) <= tolerance


def a3_velocities(resolution: int = 512, pool: Optional[WorkerPool] = None,
                  formulas: Formulas = Formulas.exact) -> List[Tuple[float, float]]:
    """Velocities of the A3 points of the King's grid symbol"""
    points = singularities.find_A3_points(HalfGeneratorSet.king2d(), resolution, formulas, pool=pool)
    return [p.velocity for p in points]


def run_experiment(name: str, function: Callable, *args, **kwargs):
    """Run one experiment with timing; an interrupt is logged, any other error re-raised"""
    try:
        logger.info('Starting {}'.format(name))
        start = time.time()
        result = function(*args, **kwargs)
        logger.info('{} finished in {:.1f} s'.format(name, time.time() - start))
        return result
    except (KeyboardInterrupt, SystemExit):
        print('\n')
        logger.critical("User's keyboard prompt stopped {}".format(name))
        raise
    except Exception as exception:
        logger.critical('Exiting {}...‼️'.format(name))
        logger.error('Oops! Something went wrong while {} was running. ⚠️'.format(name))
        raise exception


"""Experiments"""


def kernel_decay(gens: HalfGeneratorSet, t_values: Sequence[float], spec: oscillatory.QuadratureSpec = oscillatory.DEFAULT_SPEC,
                 pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, oscillatory.DecayFit]:
    """sup_n of the kernel along a t-ladder for a 1D, 2D or layered 3D generator set"""
    if gens.dimension == 1:
        return oscillatory.sup_1d_ladder(t_values, spec, pool)
    if gens.dimension == 2:
        return oscillatory.sup_ladder(gens, t_values, spec, pool)
    return oscillatory.sup_3d_ladder(t_values, spec, gens, pool)


def region_decay(gens: HalfGeneratorSet, velocities: Sequence[Sequence[float]], t_values: Sequence[float],
                 spec: oscillatory.QuadratureSpec = oscillatory.DEFAULT_SPEC,
                 pool: Optional[WorkerPool] = None) -> Tuple[pd.DataFrame, List[dict]]:
    """Lattice-ray fits at each velocity, labelled with the velocity class"""
    frames, fits = [], []
    for velocity in velocities:
        region = singularities.classify_velocity(gens, velocity).region
        frame, fit = oscillatory.lattice_ray_decay(gens, velocity, t_values, spec, pool)
        frame.insert(0, 'velocity', '{:.6f},{:.6f}'.format(*velocity))
        frames.append(frame)
        fits.append({'velocity': list(velocity), 'class': region.value, 'fit': fit.to_dict()})
    return pd.concat(frames, ignore_index=True), fits


def brute_force_critical_points(gens: HalfGeneratorSet, velocity: Sequence[float], grid_n: int = 2048,
                                 cutoff: float = 0.05, accept: float = 1e-6) -> List[np.ndarray]:
    """Local minima of |∇ω − v| on a fine grid, polished by Nelder–Mead and kept when nearly zero"""
    velocity = np.asarray(velocity, dtype=float)
    axis = np.arange(grid_n) * (2 * math.pi / grid_n)
    grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1)
    magnitude = np.linalg.norm(grad_symbol(gens, grid) - velocity, axis=-1)
    minima = (magnitude == ndimage.minimum_filter(magnitude, size=3, mode='wrap')) & (magnitude < cutoff)
    found = []
    for i, j in zip(*np.nonzero(minima)):

        def objective(p):
            return float(np.sum((grad_symbol(gens, p) - velocity)**2))

        result = optimize.minimize(objective, grid[i, j], method='Nelder-Mead',
                                   options={'xatol': 1e-10, 'fatol': 1e-24, 'maxiter': 4000})
        if math.sqrt(result.fun) < accept:
            point = reduce_angles(result.x)
            if all(TorusPoint(tuple(point)).distance(q) > 1e-4 for q in found):
                found.append(point)
    return found


"""Acceptance criteria"""


def criterion_bessel_oracle() -> CriterionResult:
    worst_miller, worst_scipy = 0.0, 0.0
    orders = np.arange(-300, 301)
    for t in (0.5, 3.0, 17.25, 64.0, 100.0):
        values = oscillatory.kernel_1d_all(t)
        table = bessel_jn_table(300, 2.0 * t)
        jn = np.where(orders < 0, (-1.0)**np.abs(orders), 1.0) * table[np.abs(orders)]
        expected = np.exp(-2j * t) * oscillatory.i_power(orders) * jn
        computed = values[orders % len(values)]
        worst_miller = max(worst_miller, float(np.max(np.abs(computed - expected))))
        worst_scipy = max(worst_scipy, float(np.max(np.abs(jn - special.jv(orders, 2.0 * t)))))
    return CriterionResult(1, 'bessel oracle', worst_miller < 1e-10 and worst_scipy < 1e-10,
                           {'max_error': worst_miller, 'miller_vs_scipy': worst_scipy})


def criterion_1d_rate(pool: WorkerPool) -> CriterionResult:
    _, fit = oscillatory.sup_1d_ladder(geometric_ladder(64, 4096), pool=pool)
    return CriterionResult(2, '1D sharp rate', within(fit.exponent, -1.0 / 3.0, 0.03), fit.to_dict())


def criterion_2d_rate(pool: WorkerPool, velocities: Sequence[Tuple[float, float]]) -> CriterionResult:
    gens = HalfGeneratorSet.king2d()
    _, grid_fit = oscillatory.sup_ladder(gens, geometric_ladder(32, 512), pool=pool)
    _, window_fit = oscillatory.window_ladder(gens, velocities, geometric_ladder(256, 4096), pool=pool)
    passed = within(grid_fit.exponent, -0.75, 0.05) and within(window_fit.exponent, -0.75, 0.03)
    return CriterionResult(3, '2D King sup rate', passed, {'grid': grid_fit.to_dict(), 'window': window_fit.to_dict()})


def criterion_3d_rate(pool: WorkerPool) -> CriterionResult:
    _, fit = oscillatory.sup_3d_ladder(geometric_ladder(32, 512), pool=pool)
    return CriterionResult(4, '3D LKG rate', within(fit.exponent, -13.0 / 12.0, 0.06), fit.to_dict())


def criterion_region_rates(pool: WorkerPool, velocities: Sequence[Tuple[float, float]]) -> CriterionResult:
    gens = HalfGeneratorSet.king2d()
    spec = oscillatory.DEFAULT_SPEC.with_method(QuadratureMethod.bessel_rows)
    ladder = geometric_ladder(256, 4096)
    measured, passed = {}, True
    for label, velocity, target, tolerance in [('V1', V1_VELOCITY, -1.0, 0.05), ('V2', A2_VELOCITY, -5.0 / 6.0, 0.05)] + \
            [('V3 {}'.format(i), v, -0.75, 0.03) for i, v in enumerate(velocities)]:
        _, fit = oscillatory.lattice_ray_decay(gens, velocity, ladder, spec, pool)
        measured[label] = {'velocity': list(velocity), 'exponent': fit.exponent, 'stderr': fit.stderr}
        passed &= within(fit.exponent, target, tolerance)
    fast = abs(oscillatory.eval_I(gens, V0_VELOCITY, 200.0))
    measured['V0'] = {'velocity': list(V0_VELOCITY), '|I|': fast}
    return CriterionResult(5, 'region rates', passed and fast < 1e-8, measured)


def criterion_sharpness(pool: WorkerPool, velocities: Sequence[Tuple[float, float]]) -> CriterionResult:
    spec = oscillatory.DEFAULT_SPEC.with_method(QuadratureMethod.bessel_rows)
    report = oscillatory.sharpness_plateau(HalfGeneratorSet.king2d(), velocities[0], geometric_ladder(1024, 4096), spec,
                                           pool=pool)
    return CriterionResult(6, 'sharpness plateau', report['spread'] < 0.15 and report['mean'] > 0, report)


def criterion_singularities(pool: WorkerPool) -> CriterionResult:
    gens = HalfGeneratorSet.king2d()
    origin = singularities.classify_singularity(gens, A1_POINT)
    case_i = singularities.classify_singularity(gens, CASE_I_POINT)
    passed = origin.singularity_type is SingularityType.A1 and origin.height == 1
    passed &= case_i.case_tag is CaseTag.CaseI and case_i.singularity_type is SingularityType.A2
    passed &= case_i.height == Fraction(6, 5) and case_i.newton_height is not None and case_i.height_agrees
    report = appendix_verify.verify_system1(512, Formulas.printed, pool=pool)
    witnesses = []
    for witness in report.witnesses:
        point = singularities.classify_singularity(gens, witness.location, formulas=Formulas.printed)
        witnesses.append(point.to_dict())
        passed &= point.case_tag is CaseTag.CaseIIb_A3 and point.height == Fraction(4, 3)
        passed &= point.newton_height is not None and point.height_agrees
    passed &= bool(witnesses)
    return CriterionResult(7, 'singularity pipeline', passed, {
        'origin': origin.to_dict(),
        'case_i': case_i.to_dict(),
        'system1_witnesses': witnesses
    })


def criterion_critical_oracle(seed: int, count: int = 100) -> CriterionResult:
    gens = HalfGeneratorSet.king2d()
    random = np.random.default_rng(seed)
    mismatches, worst_residual = [], 0.0
    for _ in tqdm(range(count), desc='critical-point oracle'):
        radius, angle = 7.0 * math.sqrt(random.uniform()), random.uniform(0, 2 * math.pi)
        velocity = (radius * math.cos(angle), radius * math.sin(angle))
        refined = singularities.find_critical_points(gens, velocity)
        brute = brute_force_critical_points(gens, velocity)
        for p in refined:
            worst_residual = max(worst_residual, float(np.linalg.norm(grad_symbol(gens, p.as_array()) - velocity)))
        matched = all(any(p.distance(q) < 1e-3 for q in brute) for p in refined)
        matched &= all(any(p.distance(q) < 1e-3 for p in refined) for q in brute)
        if not matched or len(refined) != len(brute):
            mismatches.append({'velocity': list(velocity), 'refined': len(refined), 'brute': len(brute)})
    return CriterionResult(8, 'critical-point oracle', not mismatches and worst_residual < 1e-12,
                           {'mismatches': mismatches, 'max_residual': worst_residual, 'seed': seed})


def criterion_appendix(pool: WorkerPool) -> CriterionResult:
    summary = appendix_verify.verify_appendix((512, 1024), Formulas.printed, pool=pool)
    fine = summary['reports']['1024']
    closest = summary['closest_to_printed_witness']
    passed = fine[0]['verdict'] == SystemVerdict.solvable.value and closest is not None and closest['distance'] < 1e-2
    for report in fine[1:]:
        passed &= report['verdict'] == SystemVerdict.no_solution_found.value
        passed &= report['min_blocking_value'] is not None and report['min_blocking_value'] > 0
    passed &= summary['stable']
    return CriterionResult(9, 'appendix certificate', passed, {
        'stability': summary['stability'],
        'closest': closest,
        'table': summary['table']
    })


def criterion_dnls(box: Sequence[int] = GWP_BOX, t_final: float = 200.0, t_robust: float = 100.0) -> CriterionResult:
    gens = HalfGeneratorSet.lkg3d()
    drift_config = dnls.EvolutionConfig(0.05, 50.0, 1.0, '+', None, 100, (2.0, ), ((math.inf, 2.0), ), gens)
    drift = dnls.l2_drift(drift_config, dnls.LatticeField.gaussian(box, 1.0, 2.0))
    order_config = dnls.EvolutionConfig(0.1, 2.0, 1.0, '+', None, 10**9, (2.0, ), ((math.inf, 2.0), ),
                                        HalfGeneratorSet.king2d())
    order = dnls.self_convergence_order(order_config, dnls.LatticeField.gaussian((64, 64), 2.0, 3.0, (0.5, 0.3)))
    gwp = dnls.gwp_experiment(box=box, t_final=t_final, t_check=t_robust)
    robust_config = dnls.EvolutionConfig(0.05, t_robust, 1.0, '+', None, 20, dnls.DEFAULT_NORMS, dnls.DEFAULT_PAIRS, gens)
    robustness = dnls.box_robustness(robust_config, box, 1e-2)
    pair_ok = dnls.admissible(Fraction(37, 13), Fraction(74, 13), dnls.SIGMA)
    equality = Fraction(13, 37) + dnls.SIGMA * Fraction(13, 74) == dnls.SIGMA / 2
    passed = drift < 1e-12 and 1.8 <= order <= 2.2 and pair_ok and equality
    passed &= dnls.gwp_passed(gwp)
    passed &= robustness['worst'] < BOX_ROBUSTNESS
    return CriterionResult(10, 'dnls', passed, {
        'l2_drift_per_1000_steps': drift,
        'splitting_order': order,
        'gwp': gwp.to_dict(orient='records'),
        'box_robustness': robustness,
        'admissible_boundary': pair_ok and equality
    })


def criterion_cross_validation(seed: int, count: int = 20) -> CriterionResult:
    gens = HalfGeneratorSet.king2d()
    random = np.random.default_rng(seed)
    spec = replace(oscillatory.DEFAULT_SPEC, row_reduction=False)
    worst, samples = 0.0, []
    for _ in tqdm(range(count), desc='eval_I cross-check'):
        t = float(random.integers(4, 65))
        reach = int(6 * t)
        n = (int(random.integers(-reach, reach + 1)), int(random.integers(-reach, reach + 1)))
        direct = oscillatory.eval_I(gens, (n[0] / t, n[1] / t), t, spec)
        periodic = (2 * math.pi)**2 * oscillatory.kernel_2d_point(gens, n, t)
        worst = max(worst, abs(direct - periodic))
        samples.append({'t': t, 'n': list(n), 'gap': abs(direct - periodic)})
    return CriterionResult(11, 'eval_I cross-validation', worst < 1e-8, {'max_gap': worst, 'samples': samples})


def run_acceptance(pool: Optional[WorkerPool] = None, seed: int = 0,
                   only: Optional[Sequence[int]] = None) -> List[CriterionResult]:
    """Every acceptance criterion in order; a criterion that raises counts as failed"""
    pool = pool or serial_pool()
    velocities: List[Tuple[float, float]] = []

    def needs_velocities():
        if not velocities:
            velocities.extend(a3_velocities(pool=pool))
        return velocities

    criteria = {
        1: lambda: criterion_bessel_oracle(),
        2: lambda: criterion_1d_rate(pool),
        3: lambda: criterion_2d_rate(pool, needs_velocities()),
        4: lambda: criterion_3d_rate(pool),
        5: lambda: criterion_region_rates(pool, needs_velocities()),
        6: lambda: criterion_sharpness(pool, needs_velocities()),
        7: lambda: criterion_singularities(pool),
        8: lambda: criterion_critical_oracle(seed),
        9: lambda: criterion_appendix(pool),
        10: lambda: criterion_dnls(),
        11: lambda: criterion_cross_validation(seed),
    }
    results = []
    for number in tqdm(sorted(only or criteria), desc='acceptance'):
        start = time.time()
        try:
            result = run_experiment('criterion {}'.format(number), criteria[number])
        except (KeyboardInterrupt, SystemExit):
            raise
        except Exception as exception:
            result = CriterionResult(number, 'criterion {}'.format(number), False, {'error': repr(exception)})
        result = replace(result, seconds=time.time() - start)
        logger.info('Criterion {} ({}): {}'.format(number, result.name, 'passed' if result.passed else 'FAILED'))
        results.append(result)
    return results
