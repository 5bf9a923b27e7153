'''This module contains tests for appendix_verify module'''

import pytest
from libkingsgrid.appendix_verify import (Witness, system_report, system1_witnesses, verify_appendix, nearest_witness,
                                          verify_system1, verify_system2, verify_system3,
                                          relative_change, off_loci, check_resolution, BLOCKING_THRESHOLD,
                                          LOCUS_MARGIN)
from libkingsgrid.singularities import find_A3_points
from libkingsgrid.symbol import TorusPoint, HalfGeneratorSet
from libkingsgrid.enumerables import Formulas, SystemVerdict


def witness(alpha, discriminant, residual=0.0, cs=(0.5, 0.5, 0.5, 0.5)):
    return Witness(TorusPoint.of(1.0, 2.0), cs, residual, 0.0, alpha, 0.1, discriminant)


class TestSystemReport:
    def test_system1(self):
        """Solvable when a witness has residual under 1e-10"""
        assert system_report(1, [witness(1.0, 1.0)], 512, Formulas.printed).verdict is SystemVerdict.solvable
        assert system_report(1, [witness(1.0, 1.0, 1e-6)], 512, Formulas.printed).verdict is \
            SystemVerdict.no_solution_found

    def test_blocking_quantities(self):
        """System 2 blocks on |α|, System 3 on |D|"""
        witnesses = [witness(0.2, 5e-4), witness(-0.05, 0.3)]
        second = system_report(2, witnesses, 512, Formulas.printed)
        third = system_report(3, witnesses, 512, Formulas.printed)
        assert second.min_blocking_value == pytest.approx(0.05)
        assert second.verdict is SystemVerdict.no_solution_found
        assert third.min_blocking_value == pytest.approx(5e-4)
        assert third.verdict is SystemVerdict.solvable

    def test_no_witnesses(self):
        report = system_report(2, [], 512, Formulas.exact)
        assert report.min_blocking_value is None
        assert report.verdict is SystemVerdict.no_solution_found
        assert report.to_dict()['verdict'] == 'no-solution-found'

    def test_unknown_system(self):
        with pytest.raises(ValueError):
            system_report(4, [], 512, Formulas.exact)


class TestHelpers:
    def test_off_loci(self):
        assert off_loci((0.3, 0.9, 0.7, 0.1), 1e-3)
        assert not off_loci((-0.5, 0.9, 0.7, 0.1), 1e-3)
        assert not off_loci((0.3, 0.9, 0.0, 1.0), 1e-3)

    def test_relative_change(self):
        assert relative_change(1.0, 1.01) == pytest.approx(0.01 / 1.01)
        assert relative_change(None, 1.0) is None

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            check_resolution(256)

    def test_nearest_witness(self):
        report = system_report(1, [witness(1.0, 1.0, cs=(-0.99, -0.08, 0.03, 1.0)), witness(1.0, 1.0)], 512,
                               Formulas.printed)
        found, distance = nearest_witness(report)
        assert found.cs[0] == -0.99
        assert distance == pytest.approx(0.0069, abs=1e-4)


class TestSystemOne:
    def test_printed_witnesses(self):
        """Every printed-mode witness solves det = 0 and β = 0 off the loci"""
        witnesses = system1_witnesses(512, Formulas.printed)
        assert witnesses
        for w in witnesses:
            assert w.residual < 1e-10
            assert off_loci(w.cs, 1e-3)

    def test_summary(self):
        summary = verify_appendix((512, 1024), 'printed')
        assert set(summary['reports']) == {'512', '1024'}
        assert [r['system_id'] for r in summary['reports']['1024']] == [1, 2, 3]
        assert summary['reports']['512'][1]['threshold'] == BLOCKING_THRESHOLD
        assert 'System 1' in summary['table']

    def test_blocking_systems(self):
        """α and D stay away from zero on every System-1 witness"""
        first = verify_system1(512, 'printed')
        for report, index in ((verify_system2(512, 'printed'), 2), (verify_system3(512, 'printed'), 3)):
            assert report.system_id == index
            assert len(report.witnesses) == len(first.witnesses)
            assert report.min_blocking_value > 0
            assert report.verdict is SystemVerdict.no_solution_found

    def test_discriminant_identity(self):
        """D = α² − 4(2c₁c₂ + c₁)γ at every witness"""
        for w in system1_witnesses(512, Formulas.printed):
            c1, _, c2, _ = w.cs
            assert w.discriminant == pytest.approx(w.alpha**2 - 4 * (2 * c1 * c2 + c1) * w.gamma, abs=1e-12)

    def test_same_set_as_a3_search(self):
        """System-1 witnesses are exactly the printed-mode A3 points off the loci"""
        a3 = [p for p in find_A3_points(HalfGeneratorSet.king2d(), 512, Formulas.printed)
              if off_loci(p.cs, LOCUS_MARGIN)]
        witnesses = system1_witnesses(512, Formulas.printed)
        assert len(witnesses) == len(a3)
        for w in witnesses:
            assert min(p.location.distance(w.location.coordinates) for p in a3) < 1e-8
