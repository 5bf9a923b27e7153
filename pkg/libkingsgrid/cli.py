"""Command line entry point: one subcommand per experiment, CSV/JSON artifacts and a manifest per run."""

import os
import sys
import json
import math
import time
import argparse
from enum import Enum
from fractions import Fraction
from dataclasses import dataclass, field, fields, asdict, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
import libkingsgrid
from libkingsgrid.logs import start_logger
from libkingsgrid.exceptions import InvalidConfig, UnknownCommand, ResourceBudgetExceeded
from libkingsgrid.enumerables import Formulas, QuadratureMethod, preset
from libkingsgrid.processing import WorkerPool
from libkingsgrid.symbol import HalfGeneratorSet, TorusPoint, taylor_shifted_phase
from libkingsgrid.analysis import geometric_ladder
from libkingsgrid import algorithm, singularities, oscillatory, appendix_verify, dnls, newton

"""Config starts"""

OUTPUT_DIR = os.environ.get('LKG_OUTPUT_DIR', 'artifacts')
THREADS = int(os.environ.get('LKG_THREADS', 1))

"""Config ends"""

logger = start_logger(__name__)

COMMANDS = ('kernel-decay', 'region-decay', 'sharpness', 'critical-points', 'velocity-class', 'degenerate-curve',
            'a3-points', 'newton', 'verify-appendix', 'dnls', 'gwp', 'all-acceptance')


@dataclass
class ExperimentConfig:
    '''Everything a run depends on; written verbatim into the manifest'''
    command: str
    preset: Optional[str] = None
    dimension: int = 3
    generators: Optional[str] = None
    t_values: Tuple[float, ...] = ()
    resolutions: Tuple[int, ...] = (512, )
    velocities: Tuple[Tuple[float, float], ...] = ()
    point: Optional[Tuple[float, float]] = None
    grid_n: int = 256
    order: int = 4
    formulas: Optional[str] = None
    method: str = QuadratureMethod.periodic_trapezoid_fft.value
    oversample: int = 16
    memory_budget_mb: float = oscillatory.MEMORY_BUDGET_MB
    dist_tolerance: float = 0.0
    tolerances: Dict[str, float] = field(default_factory=dict)
    box: Tuple[int, ...] = (64, 64, 64)
    epsilons: Tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    dt: float = 0.05
    t_final: float = 100.0
    a: float = 1.0
    sign: str = '+'
    record_stride: int = 20
    evolution_config: Optional[str] = None
    criteria: Tuple[int, ...] = ()
    output_dir: str = OUTPUT_DIR
    threads: int = THREADS
    seed: int = 0

    def gens(self, default: str = 'king2d') -> HalfGeneratorSet:
        if self.generators:
            return HalfGeneratorSet.from_file(self.generators)
        return preset(self.preset or default, self.dimension)

    def formula_mode(self, default: Formulas = Formulas.exact) -> Formulas:
        return Formulas(self.formulas) if self.formulas else default

    def quadrature(self) -> oscillatory.QuadratureSpec:
        return oscillatory.QuadratureSpec(method=QuadratureMethod(self.method), oversample=self.oversample,
                                          memory_budget_mb=self.memory_budget_mb)

    def singularity_tolerances(self) -> singularities.Tolerances:
        known = {f.name for f in fields(singularities.Tolerances)}
        unknown = set(self.tolerances) - known
        if unknown:
            raise InvalidConfig("Unknown tolerances {}.".format(sorted(unknown)))
        return singularities.Tolerances(**self.tolerances)

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))


'''Not in docs. helper functions'''


def to_jsonable(value: Any) -> Any:
    """Plain JSON types for numpy scalars, rationals, enums, tuples and nested containers"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def parse_ladder(text: str) -> Tuple[float, ...]:
    """'32..512' doubles from 32 up to 512; '1,2,5' lists values"""
    try:
        if '..' in text:
            start, stop = (float(part) for part in text.split('..'))
            return tuple(float(t) for t in geometric_ladder(start, stop))
        return tuple(float(part) for part in text.split(','))
    except ValueError:
        raise InvalidConfig("Bad t ladder {!r}.".format(text))


def parse_vector(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.replace(' ', '').split(','))
    except ValueError:
        raise InvalidConfig("Bad vector {!r}.".format(text))


def parse_velocities(text: str) -> Tuple[Tuple[float, float], ...]:
    """'0,0;0,6' → ((0, 0), (0, 6))"""
    velocities = tuple(parse_vector(part) for part in text.split(';') if part.strip())
    for v in velocities:
        if len(v) != 2:
            raise InvalidConfig("Velocity {} is not planar.".format(v))
    return velocities


def parse_tolerances(text: str) -> Dict[str, float]:
    values = {}
    for item in text.split(','):
        if item.strip():
            key, _, value = item.partition('=')
            values[key.strip()] = float(value)
    return values


FIELD_PARSERS = {
    't_values': parse_ladder,
    'resolutions': lambda text: tuple(int(v) for v in text.split(',')),
    'velocities': parse_velocities,
    'point': parse_vector,
    'tolerances': parse_tolerances,
    'box': lambda text: tuple(int(v) for v in text.split(',')),
    'epsilons': parse_vector,
    'criteria': lambda text: tuple(int(v) for v in text.split(',')),
}


def coerce(name: str, text: str) -> Any:
    """Parse a config-file or flag value into the type of the ExperimentConfig field"""
    if name in FIELD_PARSERS:
        return FIELD_PARSERS[name](text)
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise InvalidConfig("Unknown config key {!r}.".format(name))
    try:
        if kinds[name] in (int, 'int'):
            return int(text)
        if kinds[name] in (float, 'float'):
            return float(text)
    except ValueError:
        raise InvalidConfig("Bad value {!r} for {}.".format(text, name))
    return text


def read_config_file(path: str) -> Dict[str, Any]:
    """key = value lines, # comments allowed"""
    values = {}
    with open(path) as handle:
        for line in handle:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise InvalidConfig("Expected key = value in {}, got {!r}.".format(path, line))
            key, value = (part.strip() for part in line.split('=', 1))
            key = key.replace('-', '_')
            values[key] = coerce(key, value)
    return values


def check_config(config: ExperimentConfig):
    if config.command not in COMMANDS:
        logger.error('Oops! An error Occurred ⚠️')
        raise UnknownCommand("Unknown command {!r}; choose one of {}.".format(config.command, ', '.join(COMMANDS)))
    if config.threads < 1:
        raise InvalidConfig("threads must be at least 1.")
    try:
        config.formula_mode()
        QuadratureMethod(config.method)
    except ValueError as error:
        raise InvalidConfig(str(error))


def command_dir(config: ExperimentConfig) -> str:
    path = os.path.join(config.output_dir, config.command)
    os.makedirs(path, exist_ok=True)
    return path


def write_json(path: str, payload: Any):
    with open(path, 'w') as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write('\n')


def write_csv(path: str, frame: pd.DataFrame):
    frame.to_csv(path, index=False, float_format='%.17g')


def write_manifest(config: ExperimentConfig, directory: str, seconds: float, status: int):
    write_json(os.path.join(directory, 'manifest.json'), {
        'config': config.to_dict(),
        'version': libkingsgrid.__version__,
        'wall_time_seconds': seconds,
        'exit_status': status
    })


"""Commands"""


def default_velocities(config: ExperimentConfig, pool: WorkerPool) -> Tuple[Tuple[float, float], ...]:
    if config.velocities:
        return config.velocities
    if not config.gens().is_king2d():
        return (algorithm.V1_VELOCITY, )
    return (algorithm.V1_VELOCITY, algorithm.A2_VELOCITY) + tuple(algorithm.a3_velocities(pool=pool))


def kernel_decay(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    t_values = config.t_values or parse_ladder('32..512')
    frame, fit = algorithm.kernel_decay(config.gens(), t_values, config.quadrature(), pool)
    write_csv(os.path.join(directory, 'kernel_decay.csv'), frame)
    write_json(os.path.join(directory, 'decay_fit.json'), fit.to_dict())
    oscillatory.write_plot_script(os.path.join(directory, 'kernel_decay.csv'), os.path.join(directory, 'kernel_decay.gp'),
                                  'sup |kernel| for {}'.format(config.preset or 'king2d'))
    print('exponent {:.4f} ± {:.4f}'.format(fit.exponent, fit.stderr))
    return 0


def region_decay(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    t_values = config.t_values or parse_ladder('256..4096')
    spec = replace(config.quadrature(), method=QuadratureMethod.bessel_rows)
    gens = config.gens()
    if not oscillatory.has_row_structure(gens):
        spec = replace(spec, method=QuadratureMethod.periodic_trapezoid_point)
    frame, fits = algorithm.region_decay(gens, default_velocities(config, pool), t_values, spec, pool)
    write_csv(os.path.join(directory, 'region_decay.csv'), frame)
    write_json(os.path.join(directory, 'region_fits.json'), fits)
    for entry in fits:
        print('{} {}: exponent {:.4f}'.format(entry['class'], tuple(entry['velocity']), entry['fit']['exponent']))
    return 0


def sharpness(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    t_values = config.t_values or parse_ladder('1024..4096')
    velocity = config.velocities[0] if config.velocities else algorithm.a3_velocities(pool=pool)[0]
    spec = replace(config.quadrature(), method=QuadratureMethod.bessel_rows)
    report = oscillatory.sharpness_plateau(config.gens(), velocity, t_values, spec, pool=pool)
    write_json(os.path.join(directory, 'sharpness.json'), report)
    print('mean {:.6g}, relative spread {:.4f}'.format(report['mean'], report['spread']))
    return 0


def critical_points(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    velocity = config.velocities[0] if config.velocities else (0.0, 0.0)
    diagnostics: List[str] = []
    points = singularities.find_critical_points(config.gens(), velocity, config.grid_n,
                                                config.singularity_tolerances(), diagnostics)
    write_json(os.path.join(directory, 'critical_points.json'), {
        'velocity': list(velocity),
        'points': [list(p.coordinates) for p in points],
        'diagnostics': diagnostics
    })
    for p in points:
        print('({:.12f}, {:.12f})'.format(*p.coordinates))
    return 0


def velocity_class(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    gens = config.gens()
    velocity = config.velocities[0] if config.velocities else (0.0, 0.0)
    tolerances = config.singularity_tolerances()
    result = singularities.classify_velocity(gens, velocity, config.grid_n, tolerances, config.formula_mode())
    payload = result.to_dict()
    if config.dist_tolerance > 0:
        delta = config.dist_tolerance
        neighbours = [(velocity[0] + delta * math.cos(k * math.pi / 4), velocity[1] + delta * math.sin(k * math.pi / 4))
                      for k in range(8)]
        classes = pool.map(lambda v: singularities.classify_velocity(gens, v, config.grid_n, tolerances,
                                                                     config.formula_mode()).region.value, neighbours)
        payload['neighbourhood'] = {'radius': delta, 'classes': classes, 'worst': max(classes + [result.region.value])}
    write_json(os.path.join(directory, 'velocity_class.json'), payload)
    print(result.region.value)
    for witness in result.witnesses:
        print('  ({:.6f}, {:.6f}) {} {} h={}'.format(*witness.location.coordinates, witness.case_tag.value,
                                                    witness.singularity_type.value, witness.height))
    return 0


def degenerate_curve(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    polylines = singularities.trace_degenerate_curve(config.gens(), max(config.resolutions), config.singularity_tolerances())
    path = os.path.join(directory, 'degenerate_curve.csv')
    write_csv(path, singularities.curve_frame(polylines))
    with open(os.path.join(directory, 'degenerate_curve.gp'), 'w') as handle:
        handle.write('set datafile separator ","\nset size square\nplot "degenerate_curve.csv" using "x":"y" with dots\n')
    print('{} polylines, {} closed'.format(len(polylines), sum(line.closed for line in polylines)))
    return 0


def a3_points(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    report = singularities.a3_count_check(config.gens(), min(config.resolutions), config.formula_mode(),
                                          config.singularity_tolerances(), pool)
    write_json(os.path.join(directory, 'a3_points.json'), report)
    print('A3 counts {} at resolutions {}'.format(report['counts'], report['resolutions']))
    return 0


def newton_command(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    point = config.point or (0.0, math.pi / 2)
    gens = config.gens()
    if config.formula_mode() is Formulas.printed and gens.is_king2d():
        taylor = singularities.printed_taylor(point, config.order)
    else:
        taylor = taylor_shifted_phase(gens, point, config.order)
    sheared, k = singularities.quadratic_frame(taylor)
    poly, report = newton.analyse(sheared)
    write_json(os.path.join(directory, 'newton.json'), {
        'point': list(TorusPoint(tuple(point)).coordinates),
        'taylor': taylor.to_dict(),
        'shear': k,
        'polyhedron': poly.to_dict(),
        'principal_face': report.to_dict()
    })
    with open(os.path.join(directory, 'newton.tikz'), 'w') as handle:
        handle.write(newton.render_tikz(poly) + '\n')
    print('d = {} ({} face, {})'.format(report.distance, report.face_kind, report.adapted.value))
    return 0


def verify_appendix(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    resolutions = config.resolutions if len(config.resolutions) > 1 else (config.resolutions[0], 2 * config.resolutions[0])
    formulas = config.formula_mode(Formulas.printed)
    summary = appendix_verify.verify_appendix(resolutions, formulas, config.singularity_tolerances(), pool)
    write_json(os.path.join(directory, 'appendix.json'), summary)
    print(summary['table'])
    return 0


def evolution_config(config: ExperimentConfig) -> dnls.EvolutionConfig:
    if config.evolution_config:
        return dnls.EvolutionConfig.from_file(config.evolution_config)
    gens = config.gens('lkg3d')
    return dnls.EvolutionConfig(config.dt, config.t_final, config.a, config.sign, None, config.record_stride,
                                dnls.DEFAULT_NORMS, dnls.DEFAULT_PAIRS, gens)


def dnls_command(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    evolution = evolution_config(config)
    box = config.box[:evolution.gens.dimension]
    u0 = dnls.LatticeField.delta(box, config.epsilons[0])
    series = dnls.evolve(evolution, u0)
    write_csv(os.path.join(directory, 'norms.csv'), dnls.norm_series_frame(series))
    windows = [evolution.t_final * fraction for fraction in (0.25, 0.5, 1.0)]
    write_json(os.path.join(directory, 'strichartz.json'), dnls.strichartz_report(series, evolution.pairs, dnls.SIGMA,
                                                                                  windows))
    dnls.write_field(series.final, os.path.join(directory, 'final_field.bin'), evolution)
    print('final l2 {:.15g}, linf {:.6g}'.format(series.norm(2.0)[-1], series.norm(math.inf)[-1]))
    return 0


def gwp_command(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    evolution = evolution_config(config)
    frame = dnls.gwp_experiment(config.epsilons, evolution.a, config.box[:evolution.gens.dimension], evolution.t_final,
                                evolution.dt, evolution.record_stride, evolution.sign, evolution.gens)
    write_csv(os.path.join(directory, 'gwp.csv'), frame)
    print(frame.to_string(index=False))
    return 0 if dnls.gwp_passed(frame) else 1


def all_acceptance(config: ExperimentConfig, directory: str, pool: WorkerPool) -> int:
    results = algorithm.run_acceptance(pool, config.seed, config.criteria or None)
    write_json(os.path.join(directory, 'acceptance.json'), [r.to_dict() for r in results])
    for result in results:
        print('{:>2} {:<28} {} ({:.1f} s)'.format(result.number, result.name, 'PASS' if result.passed else 'FAIL',
                                                 result.seconds))
    return 0 if all(r.passed for r in results) else 1


HANDLERS = {
    'kernel-decay': kernel_decay,
    'region-decay': region_decay,
    'sharpness': sharpness,
    'critical-points': critical_points,
    'velocity-class': velocity_class,
    'degenerate-curve': degenerate_curve,
    'a3-points': a3_points,
    'newton': newton_command,
    'verify-appendix': verify_appendix,
    'dnls': dnls_command,
    'gwp': gwp_command,
    'all-acceptance': all_acceptance,
}


def run(command: str, config: Optional[ExperimentConfig] = None) -> int:
    """Run one command, write its artifacts and manifest, return the exit status"""
    config = config or ExperimentConfig(command)
    if config.command != command:
        config = replace(config, command=command)
    try:
        check_config(config)
        directory = command_dir(config)
        start = time.time()
        with WorkerPool(config.threads, progress=False) as pool:
            status = algorithm.run_experiment(command, HANDLERS[command], config, directory, pool)
        write_manifest(config, directory, time.time() - start, status)
        return status
    except ResourceBudgetExceeded as exception:
        logger.error('Refused: {} (required {})'.format(exception, exception.required))
        raise exception
    except Exception as exception:
        logger.error('Oops! An error Occurred ⚠️')
        raise exception


"""Argument parsing"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='lkg', description="Dispersive estimates for lattice Schrödinger flows on the King's grid")
    parser.add_argument('--version', action='version', version=libkingsgrid.__version__)
    commands = parser.add_subparsers(dest='command')
    for command in COMMANDS:
        sub = commands.add_parser(command)
        sub.add_argument('--config', help='key = value file; flags override it')
        sub.add_argument('--preset', help='lkg3d, king2d, chain1d or lattice-zd')
        sub.add_argument('--generators', help='file with one half-generator per line')
        sub.add_argument('--t', dest='t_values', help="t ladder, '32..512' or '1,2,4'")
        sub.add_argument('--resolution', dest='resolutions', help='grid resolution(s), comma separated')
        sub.add_argument('--v', dest='velocities', help="velocity 'x,y'; several separated by ';'")
        sub.add_argument('--point', help="torus point 'x,y'")
        sub.add_argument('--grid-n', dest='grid_n')
        sub.add_argument('--order')
        sub.add_argument('--formulas', choices=[f.value for f in Formulas])
        sub.add_argument('--method', choices=[m.value for m in QuadratureMethod])
        sub.add_argument('--oversample')
        sub.add_argument('--memory-budget-mb', dest='memory_budget_mb')
        sub.add_argument('--dist-tolerance', dest='dist_tolerance')
        sub.add_argument('--tolerances', help="name=value pairs, e.g. 'beta=1e-8,angle=1e-10'")
        sub.add_argument('--box')
        sub.add_argument('--epsilons')
        sub.add_argument('--dt')
        sub.add_argument('--t-final', dest='t_final')
        sub.add_argument('--a')
        sub.add_argument('--sign', choices=['+', '-'])
        sub.add_argument('--record-stride', dest='record_stride')
        sub.add_argument('--evolution-config', dest='evolution_config')
        sub.add_argument('--criteria', help='acceptance criteria numbers, comma separated')
        sub.add_argument('--output-dir', dest='output_dir')
        sub.add_argument('--threads')
        sub.add_argument('--seed')
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: Dict[str, Any] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(ExperimentConfig):
        raw = getattr(args, f.name, None)
        if f.name != 'command' and raw is not None:
            values[f.name] = coerce(f.name, raw)
    values.pop('command', None)
    return ExperimentConfig(args.command, **values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2
    try:
        return run(args.command, config_from_args(args))
    except (InvalidConfig, UnknownCommand, ResourceBudgetExceeded) as error:
        print('lkg: {}'.format(error), file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
