'''This module contains tests for oscillatory module'''

import math
import numpy as np
import pytest
from libkingsgrid.oscillatory import (QuadratureSpec, DEFAULT_SPEC, kernel_1d, kernel_1d_all, kernel_2d_grid,
                                      kernel_2d_point, kernel_2d_rows, kernel_value, kernel_3d_sup, kernel_1d_sup,
                                      eval_I, fit_decay, lattice_ray_decay, window_sup, sharpness_plateau,
                                      row_profile, has_row_structure, split_layers, TWO_PI)
from libkingsgrid.analysis import chain_kernel_reference
from libkingsgrid.symbol import HalfGeneratorSet
from libkingsgrid.enumerables import QuadratureMethod
from libkingsgrid.exceptions import ResourceBudgetExceeded, FitError, DimensionMismatch, InvalidGeneratorSet

KING = HalfGeneratorSet.king2d()


class TestQuadratureSpec:
    def test_grid_size(self):
        """Power of two above 16·max(t, 32) and 6t + 64"""
        assert DEFAULT_SPEC.grid_size(0) == 512
        assert DEFAULT_SPEC.grid_size(100) == 2048
        assert QuadratureSpec(oversample=1).grid_size(200) == 2048

    def test_panel_floor(self):
        spec = QuadratureSpec(panels=1)
        assert spec.panel_count(10.0, (0.0, 0.0)) == 4 * math.ceil(60 / TWO_PI)


class TestKernel1D:
    def test_bessel_oracle(self):
        """Trapezoid kernel matches e^{−2it}·iⁿ·J_n(2t)"""
        for t in (1.0, 10.0, 40.0):
            for n in range(-6, 7):
                assert abs(kernel_1d(n, t) - chain_kernel_reference(n, t)) < 1e-12

    def test_all_matches_point(self):
        values = kernel_1d_all(7.0)
        assert values[3] == pytest.approx(kernel_1d(3, 7.0), abs=1e-13)
        assert values[-2] == pytest.approx(kernel_1d(-2, 7.0), abs=1e-13)

    def test_unitary(self):
        assert np.sum(np.abs(kernel_1d_all(25.0))**2) == pytest.approx(1.0, abs=1e-12)


class TestKernel2D:
    def test_identity_at_zero_time(self):
        grid = kernel_2d_grid(KING, 0.0)
        assert grid.at(0, 0) == pytest.approx(1.0)
        assert abs(grid.at(1, 0)) < 1e-14

    def test_quarter_matches_direct_sum(self):
        """The reflection-symmetric transform agrees with the direct trapezoid sum"""
        grid = kernel_2d_grid(KING, 5.0)
        assert grid.quarter
        for n in ((0, 0), (3, -2), (-4, 1), (7, 7)):
            assert abs(grid.at(*n) - kernel_2d_point(KING, n, 5.0)) < 1e-12

    def test_full_grid_for_asymmetric_set(self):
        gens = HalfGeneratorSet(2, ((1, 0), (0, 1), (1, 1)))
        grid = kernel_2d_grid(gens, 4.0)
        assert not grid.quarter
        assert abs(grid.at(2, -1) - kernel_2d_point(gens, (2, -1), 4.0)) < 1e-12

    def test_unitary(self):
        """Σ|K₂(n; t)|² = 1 with the quarter weights"""
        assert kernel_2d_grid(KING, 12.0).norm2() == pytest.approx(1.0, abs=1e-10)

    def test_rows_match_grid(self):
        """Bessel rows reproduce the transform"""
        grid = kernel_2d_grid(KING, 9.0)
        rows = kernel_2d_rows(KING, [-3, 0, 5], 9.0)
        for n in ((4, -3), (0, 0), (-6, 5)):
            assert abs(rows.at(*n) - grid.at(*n)) < 1e-12

    def test_kernel_value_dispatch(self):
        n, t = (2, 1), 6.0
        expected = kernel_2d_point(KING, n, t)
        for method in QuadratureMethod:
            assert abs(kernel_value(KING, n, t, DEFAULT_SPEC.with_method(method)) - expected) < 1e-9

    def test_memory_budget(self):
        with pytest.raises(ResourceBudgetExceeded) as error:
            kernel_2d_grid(KING, 1000.0, QuadratureSpec(memory_budget_mb=1))
        assert error.value.required == DEFAULT_SPEC.grid_size(1000.0)

    def test_row_structure(self):
        """King2D splits as b(x) − 2a(x)cos y"""
        b, a = row_profile(KING)
        x = np.array([0.0, 1.0, 2.5])
        assert b(x) == pytest.approx(8 - 2 * np.cos(x))
        assert a(x) == pytest.approx(1 + 2 * np.cos(x))
        assert not has_row_structure(HalfGeneratorSet(2, ((1, 0), (0, 1), (1, 1))))
        with pytest.raises(InvalidGeneratorSet):
            row_profile(HalfGeneratorSet(2, ((1, 0), (0, 2))))


class TestKernelSymmetry:
    def test_sign_flips_and_swap(self):
        """K₂ of King2D is unchanged by n ↦ (±n1, ±n2) and by n1 ↔ n2"""
        t = 6.0
        value = kernel_2d_point(KING, (3, -5), t)
        for n in ((-3, 5), (3, 5), (-3, -5), (5, 3), (-5, -3), (5, -3)):
            assert abs(kernel_2d_point(KING, n, t) - value) < 1e-12

    def test_quarter_grid_swap(self):
        grid = kernel_2d_grid(KING, 12.0)
        assert np.max(np.abs(grid.values - grid.values.T)) < 1e-12

    def test_doubling_grid_changes_nothing(self):
        """Aliasing is below round-off: N and 2N give the same K₂ on the resolved range"""
        t, reach = 20.0, 128
        coarse = kernel_2d_grid(KING, t, QuadratureSpec(oversample=16))
        fine = kernel_2d_grid(KING, t, QuadratureSpec(oversample=32))
        assert fine.size == 2 * coarse.size
        difference = coarse.values[:reach + 1, :reach + 1] - fine.values[:reach + 1, :reach + 1]
        assert np.max(np.abs(difference)) < 1e-12


class TestEvalI:
    def test_row_reduction_matches_panels(self):
        """Integer t·η: the Bessel row and the 2D Gauss sum agree"""
        velocity, t = (0.5, 0.25), 4.0
        reduced = eval_I(KING, velocity, t)
        direct = eval_I(KING, velocity, t, QuadratureSpec(row_reduction=False))
        assert abs(reduced - direct) < 1e-9

    def test_matches_kernel(self):
        """I(n/t; t) = (2π)²·K₂(n; t)"""
        t, n = 6.0, (3, -2)
        value = eval_I(KING, (n[0] / t, n[1] / t), t)
        assert abs(value / TWO_PI**2 - kernel_2d_point(KING, n, t)) < 1e-10

    def test_zero_time(self):
        assert eval_I(KING, (0.3, 0.1), 0.0) == pytest.approx(TWO_PI**2)

    def test_fast_decay_without_critical_points(self):
        """|v| far beyond the gradient bound leaves no stationary point and I is negligible"""
        assert abs(eval_I(KING, (100.0, 0.0), 200.0)) < 1e-8

    def test_evaluation_budget(self):
        with pytest.raises(ResourceBudgetExceeded):
            eval_I(KING, (0.1, 0.1), 50.0, QuadratureSpec(row_reduction=False, evaluation_budget=1000))


class TestKernel3D:
    def test_layers(self):
        planar, vertical = split_layers(HalfGeneratorSet.lkg3d())
        assert planar.is_king2d()
        assert vertical.half_generators == ((1, ), )

    def test_product(self):
        """sup|K₃| = sup|K₂|·sup|K₁| on the layered lattice"""
        expected = kernel_2d_grid(KING, 8.0).sup() * kernel_1d_sup(8.0)
        assert kernel_3d_sup(8.0) == pytest.approx(expected)

    def test_needs_3d(self):
        with pytest.raises(DimensionMismatch):
            kernel_3d_sup(8.0, DEFAULT_SPEC, KING)


class TestFitDecay:
    def test_exact_power_law(self):
        """Values t^(−1/2) fit −1/2 and nothing is dropped"""
        fit = fit_decay([(t, t**-0.5) for t in (32.0, 64.0, 128.0, 256.0)])
        assert fit.exponent == pytest.approx(-0.5)
        assert fit.dropped_t is None

    def test_three_points(self):
        fit = fit_decay([(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)])
        assert fit.exponent == pytest.approx(-1.0)

    def test_transient_dropped(self):
        """A wild first point is left out of the fit"""
        points = [(16.0, 1.0)] + [(t, t**-0.75 * (1 + 1e-3 * (-1)**i)) for i, t in enumerate((32.0, 64.0, 128.0, 256.0))]
        fit = fit_decay(points)
        assert fit.dropped_t == 16.0
        assert fit.exponent == pytest.approx(-0.75, abs=0.01)

    def test_refusals(self):
        with pytest.raises(FitError):
            fit_decay([(1.0, 1.0), (2.0, 0.5)])
        with pytest.raises(FitError):
            fit_decay([(1.0, 1.0), (2.0, 0.0), (4.0, 0.25)])
        with pytest.raises(FitError):
            fit_decay([(2.0, 1.0), (1.0, 0.5), (4.0, 0.25)])


class TestLadders:
    def test_ray_frame(self):
        frame, fit = lattice_ray_decay(KING, (0.0, 0.0), [16.0, 32.0, 64.0])
        assert list(frame.columns) == ['t', 'value', 'N', 'method', 'n1', 'n2']
        assert fit.exponent < 0

    def test_window_contains_ray(self):
        t, velocity = 20.0, (0.5, 0.25)
        spec = DEFAULT_SPEC.with_method(QuadratureMethod.bessel_rows)
        ray = abs(kernel_value(KING, (10, 5), t, spec))
        assert window_sup(KING, velocity, t, spec) >= ray

    def test_sharpness_report(self):
        report = sharpness_plateau(KING, (0.0, 0.0), [16.0, 32.0, 64.0],
                                   DEFAULT_SPEC.with_method(QuadratureMethod.bessel_rows))
        assert report['rate'] == 0.75
        assert len(report['scaled']) == 3
        assert report['mean'] > 0
