'''This module contains tests for symbol module'''

import math
import numpy as np
import pytest
from libkingsgrid.symbol import (HalfGeneratorSet, TorusPoint, TaylorPolynomial, eval_symbol, grad_symbol,
                                 hessian_symbol, taylor_shifted_phase, reduce_angles, king2d_det4,
                                 king2d_hessian_closed_form, king2d_cs, king2d_det4_gradient)
from libkingsgrid.exceptions import DimensionMismatch, InvalidGeneratorSet, InsufficientOrder
from libkingsgrid.enumerables import preset


class TestHalfGeneratorSet:
    def test_presets(self):
        """Named sets have the expected sizes"""
        assert HalfGeneratorSet.king2d().size == 4
        assert HalfGeneratorSet.lkg3d().size == 5
        assert preset('lattice-zd', 4).dimension == 4
        assert preset('chain1d').half_generators == ((1, ), )

    def test_gradient_bound(self):
        """King2D gradient is bounded by 6 in each coordinate"""
        assert list(HalfGeneratorSet.king2d().gradient_bound()) == [6.0, 6.0]

    def test_rejects_bad_sets(self):
        """Zero, repeated and negated generators are refused"""
        with pytest.raises(InvalidGeneratorSet):
            HalfGeneratorSet(2, ((0, 0), ))
        with pytest.raises(InvalidGeneratorSet):
            HalfGeneratorSet(2, ((1, 0), (-1, 0)))
        with pytest.raises(DimensionMismatch):
            HalfGeneratorSet(2, ((1, 0, 0), ))

    def test_from_lines(self):
        """Comments and blank lines are skipped"""
        gens = HalfGeneratorSet.from_lines(['# king', '1 0', '0,1', '', '1 1', '1 -1'])
        assert gens.is_king2d()
        assert gens.is_reflection_symmetric()

    def test_not_reflection_symmetric(self):
        """A single diagonal breaks the coordinate flips"""
        assert not HalfGeneratorSet(2, ((1, 0), (0, 1), (1, 1))).is_reflection_symmetric()


class TestTorusPoint:
    def test_reduction(self):
        """Coordinates land in [0, 2π) and the seam folds to zero"""
        p = TorusPoint.of(-math.pi / 2, 2 * math.pi - 1e-16)
        assert p.coordinates[0] == pytest.approx(3 * math.pi / 2)
        assert p.coordinates[1] == 0.0

    def test_distance_across_seam(self):
        """Distance wraps around the torus"""
        assert TorusPoint.of(0.05, 0.0).distance((2 * math.pi - 0.05, 0.0)) == pytest.approx(0.1)

    def test_reduce_angles(self):
        assert reduce_angles([7.0])[0] == pytest.approx(7.0 - 2 * math.pi)


class TestSymbol:
    def test_values(self):
        """ω(0) = 0 and ω(π, π) = 8 on King2D"""
        gens = HalfGeneratorSet.king2d()
        assert eval_symbol(gens, (0.0, 0.0)) == 0.0
        assert eval_symbol(gens, (math.pi, math.pi)) == pytest.approx(8.0)
        assert eval_symbol(gens, (math.pi, 0.0)) == pytest.approx(12.0)

    def test_gradient_at_case_i_point(self):
        """∇ω(0, π/2) = (0, 6)"""
        assert grad_symbol(HalfGeneratorSet.king2d(), (0.0, math.pi / 2)) == pytest.approx([0.0, 6.0])

    def test_gradient_matches_finite_difference(self):
        gens = HalfGeneratorSet.lkg3d()
        p = np.array([0.3, 1.1, -0.7])
        step = 1e-6
        numeric = [(eval_symbol(gens, p + step * e) - eval_symbol(gens, p - step * e)) / (2 * step) for e in np.eye(3)]
        assert grad_symbol(gens, p) == pytest.approx(numeric, abs=1e-6)

    def test_vectorised(self):
        """Trailing axis is the coordinate axis"""
        grid = np.zeros((5, 7, 2))
        assert eval_symbol(HalfGeneratorSet.king2d(), grid).shape == (5, 7)
        assert hessian_symbol(HalfGeneratorSet.king2d(), grid).shape == (5, 7, 2, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_symbol(HalfGeneratorSet.king2d(), (0.0, 0.0, 0.0))

    def test_hessian_closed_form(self):
        """Generic Hessian agrees with the King2D closed form and det = 4·det4"""
        p = (0.4, 2.2)
        generic = hessian_symbol(HalfGeneratorSet.king2d(), p)
        closed = king2d_hessian_closed_form(tuple(float(v) for v in king2d_cs(p)))
        assert generic == pytest.approx(closed)
        assert np.linalg.det(generic) == pytest.approx(4 * float(king2d_det4(p)))

    def test_degenerate_points(self):
        """det4 vanishes on c = 0 and c = −1/2 axes points"""
        assert float(king2d_det4((0.0, math.pi / 2))) == pytest.approx(0.0, abs=1e-15)
        assert float(king2d_det4((2 * math.pi / 3, 0.0))) == pytest.approx(0.0, abs=1e-15)

    def test_det4_gradient(self):
        p, h = np.array([0.9, 2.4]), 1e-6
        numeric = [(float(king2d_det4(p + h * e)) - float(king2d_det4(p - h * e))) / (2 * h) for e in np.eye(2)]
        assert king2d_det4_gradient(p) == pytest.approx(numeric, abs=1e-8)


class TestTaylor:
    def test_quadratic_part_is_half_hessian(self):
        """Order-2 coefficients are the Hessian over two"""
        gens = HalfGeneratorSet.king2d()
        p = (0.7, 1.9)
        taylor = taylor_shifted_phase(gens, p, 4)
        hessian = hessian_symbol(gens, p)
        assert taylor.coefficient(2, 0) == pytest.approx(hessian[0, 0] / 2)
        assert taylor.coefficient(1, 1) == pytest.approx(hessian[0, 1])
        assert taylor.coefficient(0, 2) == pytest.approx(hessian[1, 1] / 2)

    def test_matches_phase(self):
        """Truncation error is of order |δ|^5"""
        gens = HalfGeneratorSet.king2d()
        p = np.array([0.7, 1.9])
        taylor = taylor_shifted_phase(gens, p, 4)
        delta = np.array([1e-2, -2e-2])
        exact = eval_symbol(gens, p + delta) - eval_symbol(gens, p) - grad_symbol(gens, p) @ delta
        assert float(taylor.evaluate(delta)) == pytest.approx(exact, abs=1e-8)

    def test_order_check(self):
        with pytest.raises(InsufficientOrder):
            taylor_shifted_phase(HalfGeneratorSet.king2d(), (0.0, 0.0), 1)
        with pytest.raises(InsufficientOrder):
            TaylorPolynomial({(3, 0): 1.0}, 2)

    def test_shear(self):
        """x² under x = u + v gives u² + 2uv + v²"""
        sheared = TaylorPolynomial({(2, 0): 1.0}, 2).sheared(1.0)
        assert sheared.coefficient(2, 0) == 1.0
        assert sheared.coefficient(1, 1) == 2.0
        assert sheared.coefficient(0, 2) == 1.0

    def test_truncated(self):
        """Dropping the quartic terms leaves an O(|δ|⁴) error"""
        gens = HalfGeneratorSet.king2d()
        p = np.array([0.7, 1.9])
        cubic = taylor_shifted_phase(gens, p, 4).truncated(3)
        assert all(sum(e) <= 3 for e in cubic.coefficients)
        delta = np.array([1e-2, -2e-2])
        exact = eval_symbol(gens, p + delta) - eval_symbol(gens, p) - grad_symbol(gens, p) @ delta
        assert float(cubic.evaluate(delta)) == pytest.approx(exact, abs=1e-6)

    def test_transpose(self):
        assert TaylorPolynomial({(3, 1): 2.0}, 4).transposed().coefficient(1, 3) == 2.0


class TestDerivativeOrders:
    GENERATORS = (HalfGeneratorSet.king2d(), HalfGeneratorSet.lkg3d())

    def convergence_order(self, function, derivative, p, step):
        """log₂ of the error ratio of central differences at step and step/2"""
        errors = []
        for h in (step, step / 2):
            basis = np.eye(p.size)
            numeric = np.stack([(function(p + h * e) - function(p - h * e)) / (2 * h) for e in basis], axis=-1)
            errors.append(np.max(np.abs(numeric - derivative(p))))
        return math.log2(errors[0] / errors[1])

    def test_gradient_order(self):
        random = np.random.default_rng(11)
        for gens in self.GENERATORS:
            for _ in range(4):
                p = random.uniform(0, 2 * math.pi, gens.dimension)
                order = self.convergence_order(lambda q: eval_symbol(gens, q), lambda q: grad_symbol(gens, q), p, 0.02)
                assert order >= 1.9

    def test_hessian_order(self):
        random = np.random.default_rng(12)
        for gens in self.GENERATORS:
            for _ in range(4):
                p = random.uniform(0, 2 * math.pi, gens.dimension)
                order = self.convergence_order(lambda q: grad_symbol(gens, q), lambda q: hessian_symbol(gens, q), p,
                                               0.02)
                assert order >= 1.9

    def test_even_symbol(self):
        """ω(p) = ω(−p)"""
        points = np.random.default_rng(13).uniform(-4, 4, (50, 3))
        gens = HalfGeneratorSet.lkg3d()
        assert eval_symbol(gens, -points) == pytest.approx(eval_symbol(gens, points), abs=1e-13)


class TestKingValues:
    def test_case_i_cubic(self):
        """At (0, π/2) the phase is x² − 2x²y − y³ up to order three"""
        taylor = taylor_shifted_phase(HalfGeneratorSet.king2d(), (0.0, math.pi / 2), 3)
        expected = {(2, 0): 1.0, (2, 1): -2.0, (0, 3): -1.0}
        for exponents in ((2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)):
            assert taylor.coefficient(*exponents) == pytest.approx(expected.get(exponents, 0.0), abs=1e-12)

    def test_hessian_at_two_thirds(self):
        """det Hess ω(2π/3, 2π/3) = −9"""
        p = (2 * math.pi / 3, 2 * math.pi / 3)
        assert np.linalg.det(hessian_symbol(HalfGeneratorSet.king2d(), p)) == pytest.approx(-9.0)
        assert 4 * float(king2d_det4(p)) == pytest.approx(-9.0)

    def test_taylor_remainder_ladder(self):
        """Order-4 remainder shrinks like |δ|⁵ along a ladder of halvings"""
        gens = HalfGeneratorSet.king2d()
        p = np.array([0.7, 1.9])
        direction = np.array([0.6, -0.8])
        taylor = taylor_shifted_phase(gens, p, 4)
        remainders = []
        for scale in (0.08, 0.04, 0.02):
            delta = scale * direction
            exact = eval_symbol(gens, p + delta) - eval_symbol(gens, p) - grad_symbol(gens, p) @ delta
            remainders.append(abs(exact - float(taylor.evaluate(delta))))
        orders = [math.log2(a / b) for a, b in zip(remainders, remainders[1:])]
        assert min(orders) >= 4.5
