'''This module contains tests for cli module'''

import os
import json
import math
from fractions import Fraction
import numpy as np
import pytest
from libkingsgrid import cli, dnls
from libkingsgrid.enumerables import Formulas
from libkingsgrid.exceptions import EvolutionBlowUp, InvalidConfig, UnknownCommand


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


class TestParsing:
    def test_ladder(self):
        """Ranges double, lists are taken as given"""
        assert cli.parse_ladder('32..256') == (32.0, 64.0, 128.0, 256.0)
        assert cli.parse_ladder('1,3,9') == (1.0, 3.0, 9.0)
        with pytest.raises(InvalidConfig):
            cli.parse_ladder('a..b')

    def test_velocities(self):
        assert cli.parse_velocities('0,0; 0,6') == ((0.0, 0.0), (0.0, 6.0))
        with pytest.raises(InvalidConfig):
            cli.parse_velocities('1,2,3')

    def test_coerce(self):
        assert cli.coerce('grid_n', '128') == 128
        assert cli.coerce('dt', '0.5') == 0.5
        assert cli.coerce('tolerances', 'beta=1e-8') == {'beta': 1e-8}
        with pytest.raises(InvalidConfig):
            cli.coerce('colour', 'blue')
        with pytest.raises(InvalidConfig):
            cli.coerce('grid_n', 'many')

    def test_config_file(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('# region run\npreset = king2d\nt-values = 32..128\nthreads = 2\n')
        values = cli.read_config_file(str(path))
        assert values == {'preset': 'king2d', 't_values': (32.0, 64.0, 128.0), 'threads': 2}

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('grid_n = 128\nformulas = exact\n')
        args = cli.build_parser().parse_args(['velocity-class', '--config', str(path), '--formulas', 'printed'])
        config = cli.config_from_args(args)
        assert config.grid_n == 128
        assert config.formula_mode() is Formulas.printed

    def test_jsonable(self):
        value = cli.to_jsonable({'h': Fraction(6, 5), 'x': np.float64(1.5), 'v': (1, 2), 'f': Formulas.exact,
                                 'big': math.inf})
        assert value == {'h': '6/5', 'x': 1.5, 'v': [1, 2], 'f': 'exact', 'big': 'inf'}


class TestRun:
    def test_unknown_command(self, tmp_path):
        with pytest.raises(UnknownCommand):
            cli.run('dance', cli.ExperimentConfig('dance', output_dir=str(tmp_path)))

    def test_critical_points(self, tmp_path):
        """Artifacts and a manifest land in <output>/<command>"""
        config = cli.ExperimentConfig('critical-points', velocities=((0.0, 0.0), ), output_dir=str(tmp_path))
        assert cli.run('critical-points', config) == 0
        directory = tmp_path / 'critical-points'
        points = read_json(str(directory / 'critical_points.json'))
        manifest = read_json(str(directory / 'manifest.json'))
        assert len(points['points']) == 8
        assert manifest['config']['velocities'] == [[0.0, 0.0]]
        assert manifest['exit_status'] == 0
        assert 'version' in manifest and manifest['wall_time_seconds'] >= 0

    def test_velocity_class_neighbourhood(self, tmp_path):
        config = cli.ExperimentConfig('velocity-class', velocities=((0.0, 0.0), ), dist_tolerance=0.01,
                                      output_dir=str(tmp_path))
        cli.run('velocity-class', config)
        payload = read_json(str(tmp_path / 'velocity-class' / 'velocity_class.json'))
        assert payload['class'] == 'V1'
        assert len(payload['neighbourhood']['classes']) == 8

    def test_newton(self, tmp_path):
        config = cli.ExperimentConfig('newton', point=(0.0, math.pi / 2), output_dir=str(tmp_path))
        cli.run('newton', config)
        payload = read_json(str(tmp_path / 'newton' / 'newton.json'))
        assert payload['principal_face']['distance'] == '6/5'
        assert os.path.exists(str(tmp_path / 'newton' / 'newton.tikz'))

    def test_kernel_decay(self, tmp_path):
        config = cli.ExperimentConfig('kernel-decay', preset='chain1d', t_values=(64.0, 128.0, 256.0),
                                      output_dir=str(tmp_path))
        cli.run('kernel-decay', config)
        fit = read_json(str(tmp_path / 'kernel-decay' / 'decay_fit.json'))
        assert fit['exponent'] == pytest.approx(-1.0 / 3.0, abs=0.05)
        assert os.path.exists(str(tmp_path / 'kernel-decay' / 'kernel_decay.gp'))

    def test_dnls(self, tmp_path):
        config = cli.ExperimentConfig('dnls', preset='king2d', box=(16, 16), t_final=1.0, record_stride=5,
                                      epsilons=(0.1, ), output_dir=str(tmp_path))
        assert cli.run('dnls', config) == 0
        directory = tmp_path / 'dnls'
        assert os.path.exists(str(directory / 'norms.csv'))
        assert os.path.exists(str(directory / 'final_field.bin.json'))
        report = read_json(str(directory / 'strichartz.json'))
        assert report['pairs'][0]['windows'] == [0.25, 0.5, 1.0]


class TestMain:
    def test_bad_flag_value(self, tmp_path):
        """Bad values give exit status 2"""
        assert cli.main(['critical-points', '--grid-n', 'many', '--output-dir', str(tmp_path)]) == 2

    def test_no_command(self):
        assert cli.main([]) == 2

    def test_main_runs(self, tmp_path):
        status = cli.main(['critical-points', '--v', '1.0,0.5', '--output-dir', str(tmp_path)])
        assert status == 0
        assert os.path.exists(str(tmp_path / 'critical-points' / 'manifest.json'))


def artifacts(directory):
    """Bytes of every artifact except the manifest, which carries the wall time"""
    found = {}
    for name in sorted(os.listdir(str(directory))):
        if name != 'manifest.json':
            with open(os.path.join(str(directory), name), 'rb') as handle:
                found[name] = handle.read()
    return found


class TestGwp:
    def test_passing_run(self, tmp_path):
        config = cli.ExperimentConfig('gwp', preset='lkg3d', box=(32, 32, 32), t_final=3.0, record_stride=4,
                                      epsilons=(0.1, 0.01), output_dir=str(tmp_path))
        assert cli.run('gwp', config) == 0
        assert os.path.exists(str(tmp_path / 'gwp' / 'gwp.csv'))

    def test_failed_epsilon_sets_exit_status(self, tmp_path, monkeypatch):
        def explode(config, u0, keep_final=True):
            raise EvolutionBlowUp("Field stopped being finite at step 2.", 2)

        monkeypatch.setattr(dnls, 'evolve', explode)
        config = cli.ExperimentConfig('gwp', preset='lkg3d', box=(8, 8, 8), t_final=1.0, epsilons=(0.1, ),
                                      output_dir=str(tmp_path))
        assert cli.run('gwp', config) == 1
        assert read_json(str(tmp_path / 'gwp' / 'manifest.json'))['exit_status'] == 1


class TestDeterminism:
    def test_repeated_runs_identical(self, tmp_path):
        """Two runs with the same configuration write the same bytes"""
        for name in ('first', 'second'):
            config = cli.ExperimentConfig('critical-points', velocities=((1.0, 0.5), ),
                                          output_dir=str(tmp_path / name))
            cli.run('critical-points', config)
        first = artifacts(tmp_path / 'first' / 'critical-points')
        assert first
        assert first == artifacts(tmp_path / 'second' / 'critical-points')

    def test_threads_do_not_change_results(self, tmp_path):
        """A worker pool gives the same artifacts as a single thread"""
        for threads in (1, 4):
            config = cli.ExperimentConfig('a3-points', threads=threads, output_dir=str(tmp_path / str(threads)))
            cli.run('a3-points', config)
        serial = artifacts(tmp_path / '1' / 'a3-points')
        assert serial
        assert serial == artifacts(tmp_path / '4' / 'a3-points')

    def test_threaded_kernel_ladder(self, tmp_path):
        for threads in (1, 3):
            config = cli.ExperimentConfig('kernel-decay', preset='chain1d', t_values=(64.0, 128.0, 256.0),
                                          threads=threads, output_dir=str(tmp_path / str(threads)))
            cli.run('kernel-decay', config)
        serial, threaded = artifacts(tmp_path / '1' / 'kernel-decay'), artifacts(tmp_path / '3' / 'kernel-decay')
        for name in ('kernel_decay.csv', 'decay_fit.json'):
            assert serial[name] == threaded[name]
