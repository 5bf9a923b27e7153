'''This module contains tests for algorithm module'''

import math
import pandas as pd
import pytest
from libkingsgrid import algorithm, dnls
from libkingsgrid.symbol import HalfGeneratorSet
from libkingsgrid.processing import serial_pool
from libkingsgrid.analysis import geometric_ladder


class TestRunExperiment:
    def test_result_returned(self):
        assert algorithm.run_experiment('sum', sum, [1, 2, 3]) == 6

    def test_error_reraised(self):
        with pytest.raises(ZeroDivisionError):
            algorithm.run_experiment('divide', lambda: 1 / 0)


class TestExperiments:
    def test_kernel_decay_dispatch(self):
        """1D ladders use the chain kernel and decay like t^(−1/3)"""
        frame, fit = algorithm.kernel_decay(HalfGeneratorSet.chain1d(), geometric_ladder(64, 1024))
        assert len(frame) == 5
        assert fit.exponent == pytest.approx(-1.0 / 3.0, abs=0.05)

    def test_brute_force_oracle(self):
        """The coarse oracle finds the eight critical points of v = 0"""
        found = algorithm.brute_force_critical_points(HalfGeneratorSet.king2d(), (0.0, 0.0), grid_n=256)
        assert len(found) == 8

    def test_region_decay_labels(self):
        frame, fits = algorithm.region_decay(HalfGeneratorSet.king2d(), [algorithm.V1_VELOCITY], [16.0, 32.0, 64.0])
        assert fits[0]['class'] == 'V1'
        assert set(frame['velocity']) == {'0.000000,0.000000'}


class TestAcceptance:
    def test_bessel_criterion(self):
        result = algorithm.criterion_bessel_oracle()
        assert result.passed
        assert result.measured['max_error'] < 1e-10

    def test_selected_criteria(self):
        """Only the requested criteria run, in order, with timings"""
        results = algorithm.run_acceptance(serial_pool(), only=[1])
        assert [r.number for r in results] == [1]
        assert results[0].seconds >= 0
        assert results[0].to_dict()['passed'] is True

    def test_failure_is_recorded(self, monkeypatch):
        """A criterion that raises is reported as failed instead of stopping the run"""
        monkeypatch.setattr(algorithm, 'criterion_bessel_oracle', lambda: 1 / 0)
        results = algorithm.run_acceptance(serial_pool(), only=[1])
        assert not results[0].passed
        assert 'ZeroDivisionError' in results[0].measured['error']

    def test_constants(self):
        assert algorithm.CASE_I_POINT == (0.0, math.pi / 2)

    def test_dnls_criterion_reduced(self):
        """Reduced LKG3D run reports the ε ladder and a box-doubling change under 5%"""
        result = algorithm.criterion_dnls(box=(32, 32, 32), t_final=3.0, t_robust=2.0)
        assert result.number == 10
        assert [row['epsilon'] for row in result.measured['gwp']] == [1e-1, 1e-2, 1e-3]
        assert all('l4_decayed' in row for row in result.measured['gwp'])
        robustness = result.measured['box_robustness']
        assert robustness['box'] == [32, 32, 32]
        assert robustness['t_final'] == 2.0
        assert robustness['worst'] < algorithm.BOX_ROBUSTNESS

    def test_dnls_criterion_gated(self, monkeypatch):
        """A failed ε or a box-sensitive norm fails criterion 10"""
        monkeypatch.setattr(dnls, 'l2_drift', lambda config, u0: 0.0)
        monkeypatch.setattr(dnls, 'self_convergence_order', lambda config, u0: 2.0)
        good = pd.DataFrame({'epsilon': [1e-2], 'completed': [True], 'l4_decayed': [True], 'linf_slope': [-1.0]})
        monkeypatch.setattr(dnls, 'gwp_experiment', lambda **kwargs: good)
        monkeypatch.setattr(dnls, 'box_robustness', lambda config, box, epsilon: {'worst': 0.01})
        assert algorithm.criterion_dnls(box=(8, 8, 8)).passed
        monkeypatch.setattr(dnls, 'box_robustness', lambda config, box, epsilon: {'worst': 0.2})
        assert not algorithm.criterion_dnls(box=(8, 8, 8)).passed
        monkeypatch.setattr(dnls, 'box_robustness', lambda config, box, epsilon: {'worst': 0.01})
        monkeypatch.setattr(dnls, 'gwp_experiment', lambda **kwargs: good.assign(completed=[False]))
        assert not algorithm.criterion_dnls(box=(8, 8, 8)).passed
