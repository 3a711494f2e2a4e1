"""
Tests for the direct search: nearest p, solution enumeration and witness scans.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from dani import PowerLaw, eval_psi
from diosearch import (
    ThetaMatrix,
    WitnessClass,
    best_p_for_q,
    class_box,
    count_growth,
    enumerate_solutions,
    q_grid,
    thmA_witnesses,
    thmB_witnesses,
)
from lattice import EnumerationBudgetError, is_primitive
from numkit import CongruenceConstraint, WeightPair


def naive_solutions(theta, psi, cs, Qmax):
    """Double loop over q and every p of a wide window (m = n = 1), exact residuals."""
    x = Fraction(float(theta))
    N_p, v_p = cs.moduli[0], cs.residues[0]
    N_q, v_q = cs.moduli[1], cs.residues[1]
    out = set()
    for q in range(-Qmax, Qmax + 1):
        if q == 0 or (q - v_q) % N_q:
            continue
        best = None
        for p in range(-Qmax - 2 * N_p - 2, Qmax + 2 * N_p + 3):
            if (p - v_p) % N_p:
                continue
            r = abs(x * q + p)
            if best is None or r < best[0]:
                best = (r, p)
        residual = float(best[0])
        if abs(q) >= psi.x0 and residual <= eval_psi(psi, abs(q)):
            out.add((best[1], q))
    return out


class TestBestP:
    """Nearest class member to -(theta q)."""

    def test_unconstrained(self):
        """Test the nearest p without a congruence."""
        assert best_p_for_q([[0.3]], (7,)) == (-2,)
        assert ThetaMatrix([[0.3]]).residual_vector((7,), (-2,))[0] == pytest.approx(0.1)

    def test_constrained(self):
        """Test the nearest p inside a residue class."""
        assert best_p_for_q([[0.3]], (7,), residues=(1,), moduli=(3,)) == (-2,)

    def test_zero_theta(self):
        """Test p = 0 for theta = 0."""
        assert best_p_for_q([[0.0, 0.0]], (5, -3)) == (0,)

    def test_ties_toward_smaller_p(self):
        """Test ties break toward the smaller p."""
        assert best_p_for_q([[0.5]], (1,)) == (-1,)
        assert best_p_for_q([[0.5]], (-1,)) == (0,)

    def test_shape_checked(self):
        """Test q of the wrong length is refused."""
        with pytest.raises(ValueError):
            best_p_for_q([[0.3]], (1, 2))


class TestClassBox:
    """Lattice points of a box inside a residue class."""

    def test_excludes_zero(self):
        """Test the zero vector is left out of the box."""
        box = class_box([1, 1], [0, 0], [1, 1])
        assert len(box) == 8
        assert not np.any(np.all(box == 0, axis=1))

    def test_residues(self):
        """Test box entries follow their residue."""
        box = class_box([5], [2], [3])
        assert [int(x) for x in box[:, 0]] == [-4, -1, 2, 5]

    def test_budget(self):
        """Test an oversized box exhausts the budget."""
        with pytest.raises(EnumerationBudgetError):
            class_box([100, 100], [0, 0], [1, 1], budget=1000)


class TestEnumerateSolutions:
    """enumerate_solutions against the continued fraction and a naive loop."""

    def test_convergents(self, sqrt2_theta):
        """Test the continued fraction denominators of sqrt 2 are found."""
        recs = enumerate_solutions(sqrt2_theta, PowerLaw(1.0, 1.0), CongruenceConstraint.trivial(2), 30)
        qs = {abs(r.q[0]) for r in recs}
        assert {1, 2, 5, 12, 29} <= qs

    def test_sorted_and_verified(self, sqrt2_theta):
        """Test solutions come sorted by q-norm and satisfy the inequality."""
        recs = enumerate_solutions(sqrt2_theta, PowerLaw(1.0, 1.0), CongruenceConstraint.trivial(2), 200)
        norms = [r.qnorm for r in recs]
        assert norms == sorted(norms)
        th = ThetaMatrix(sqrt2_theta)
        for r in recs:
            assert r.p == best_p_for_q(th, r.q)
            assert max(th.residual_vector(r.q, r.p)) <= 1.0 / r.qnorm

    def test_rational_theta(self):
        """Test a rational theta."""
        recs = enumerate_solutions([[0.375]], PowerLaw(0.5, 1.0), CongruenceConstraint.trivial(2), 40)
        exact = [r for r in recs if r.residual == 0.0]
        assert {abs(r.q[0]) for r in exact} == {8, 16, 24, 32, 40}

    def test_class_with_no_solutions(self):
        """Test a class with no solutions gives an empty list."""
        cs = CongruenceConstraint((2, 2), (1, 1))
        assert enumerate_solutions([[0.5]], PowerLaw(0.1, 1.0), cs, 100) == []
        assert naive_solutions(0.5, PowerLaw(0.1, 1.0), cs, 100) == set()

    @pytest.mark.parametrize("moduli,residues", [((1, 1), (0, 0)), ((2, 2), (1, 1)), ((3, 3), (1, 2)),
                                                 ((4, 4), (0, 1)), ((5, 5), (2, 0))])
    def test_matches_naive_loop(self, moduli, residues):
        """Test agreement with a naive loop over q."""
        rng = np.random.default_rng(11)
        cs = CongruenceConstraint(moduli, residues)
        for psi in (PowerLaw(1.0, 1.0), PowerLaw(2.0, 0.5)):
            for _ in range(8):
                theta = float(rng.random())
                found = {(r.p[0], r.q[0]) for r in enumerate_solutions([[theta]], psi, cs, 80)}
                assert found == naive_solutions(theta, psi, cs, 80)

    def test_two_by_one(self):
        """Test a two by one theta."""
        theta = [[0.1234], [0.9876]]
        cs = CongruenceConstraint.trivial(3)
        recs = enumerate_solutions(theta, PowerLaw(1.0, 1.0), cs, 50)
        th = ThetaMatrix(theta)
        for r in recs:
            assert len(r.p) == 2
            assert max(th.residual_vector(r.q, r.p)) ** 2 <= 1.0 / r.qnorm

    def test_qmax_checked(self, sqrt2_theta):
        """Test Qmax must be positive."""
        with pytest.raises(ValueError):
            enumerate_solutions(sqrt2_theta, PowerLaw(1.0, 1.0), CongruenceConstraint.trivial(2), 0)


class TestCountGrowth:
    """Cumulative solution counts."""

    def test_nondecreasing(self, sqrt2_theta):
        """Test counts never decrease with Q."""
        table = count_growth(sqrt2_theta, PowerLaw(1.0, 1.0), CongruenceConstraint.trivial(2), [10, 100, 1000])
        counts = [c for _, c in table]
        assert counts == sorted(counts)
        assert counts[-1] > counts[0]

    def test_rational_theta_keeps_growing(self):
        """Test a rational theta has ever more solutions."""
        table = count_growth([[0.25]], PowerLaw(1.0, 1.0), CongruenceConstraint.trivial(2), [10, 100, 1000])
        counts = [c for _, c in table]
        assert counts[0] < counts[1] < counts[2]


class TestThmA:
    """Witness scan for one strong and several weak approximations."""

    def test_dirichlet_every_q(self):
        """Test every Q is a witness for the trivial class with c = 1."""
        rng = np.random.default_rng(5)
        for _ in range(10):
            theta = [[float(rng.random())]]
            report = thmA_witnesses(theta, [CongruenceConstraint.trivial(2)], 1.0, 0.5, 200)
            assert report.Qs == [float(Q) for Q in range(1, 201)]

    def test_duplicated_trivial_class(self, sqrt2_theta):
        """Test a duplicated trivial class gives the same witnesses."""
        single = thmA_witnesses(sqrt2_theta, [CongruenceConstraint.trivial(2)], 1.0, 0.5, 300)
        double = thmA_witnesses(sqrt2_theta, [CongruenceConstraint.trivial(2)] * 2, 1.0, 0.5, 300)
        assert double.Qs == single.Qs

    def test_two_classes_find_witness(self, sqrt2_theta):
        """Test two classes produce witnesses meeting both bounds."""
        classes = [CongruenceConstraint((2, 2), (1, 1)), CongruenceConstraint((3, 3), (1, 2))]
        report = thmA_witnesses(sqrt2_theta, classes, 4.0, 0.5, 10 ** 4)
        assert len(report.witnesses) >= 1
        for w in report.witnesses:
            strong, weak = w.records
            assert abs(strong.q[0]) <= w.Q and abs(weak.q[0]) <= w.Q
            assert strong.residual <= 4.0 / w.Q * (1 + 1e-12)
            assert weak.residual <= 4.0 / math.sqrt(w.Q) * (1 + 1e-12)
            assert classes[0].contains(strong.p + strong.q)
            assert classes[1].contains(weak.p + weak.q)

    def test_delta_range(self, sqrt2_theta):
        """Test delta must lie in (0, 1)."""
        with pytest.raises(ValueError):
            thmA_witnesses(sqrt2_theta, [CongruenceConstraint.trivial(2)], 1.0, 1.0, 10)


class TestThmB:
    """Witness scan on a geometric Q grid with weighted boxes."""

    def test_grid(self):
        """Test the geometric Q grid."""
        grid = q_grid(100.0, 0.5)
        assert grid[0] == pytest.approx(1.0)
        assert grid[-1] <= 100.0
        assert np.allclose(np.diff(np.log(grid)), 0.5)

    def test_dirichlet_boxes(self):
        """Test every grid point is a witness for Dirichlet boxes."""
        rng = np.random.default_rng(8)
        wc = WitnessClass(CongruenceConstraint.trivial(2), WeightPair.uniform(1, 1))
        grid = q_grid(500.0, 0.1)
        for _ in range(10):
            report = thmB_witnesses([[float(rng.random())]], [wc], 1.0, grid)
            assert len(report.witnesses) == len(grid)

    def test_monotone_in_eps(self):
        """Test witnesses for a smaller eps stay witnesses for a larger one."""
        rng = np.random.default_rng(9)
        classes = [WitnessClass(CongruenceConstraint((3, 3), (1, 2)), WeightPair.uniform(1, 1)),
                   WitnessClass(CongruenceConstraint((3, 3), (2, 2)), WeightPair.uniform(1, 1), 1.5)]
        grid = q_grid(300.0, 0.05)
        for _ in range(5):
            theta = [[float(rng.random())]]
            small = set(thmB_witnesses(theta, classes, 0.4, grid).Qs)
            large = set(thmB_witnesses(theta, classes, 0.8, grid).Qs)
            assert small <= large

    def test_dilation_control(self):
        """Test identical classes have no distinct primitive witnesses."""
        rng = np.random.default_rng(10)
        wc = WitnessClass(CongruenceConstraint((3, 3), (1, 1)), WeightPair.uniform(1, 1))
        grid = q_grid(2000.0, 0.05)
        for _ in range(10):
            report = thmB_witnesses([[float(rng.random())]], [wc, wc], 0.6, grid,
                                    require_primitive=True, distinct=True)
            assert report.witnesses == []

    def test_records_satisfy_bounds(self, sqrt2_theta):
        """Test every witness record satisfies its box."""
        wp = WeightPair.uniform(1, 1)
        classes = [WitnessClass(CongruenceConstraint((2, 2), (1, 0)), wp, 1.0)]
        report = thmB_witnesses(sqrt2_theta, classes, 0.8, q_grid(1000.0, 0.1), require_primitive=True)
        assert report.witnesses
        for w in report.witnesses:
            (rec,) = w.records
            assert rec.residual <= 0.8 / w.Q * (1 + 1e-12)
            assert abs(rec.q[0]) <= 0.8 * w.Q * (1 + 1e-12)
            assert is_primitive(rec.p + rec.q)

    def test_kappa_positive(self, sqrt2_theta):
        """Test kappa must be positive."""
        wc = WitnessClass(CongruenceConstraint.trivial(2), WeightPair.uniform(1, 1), 0.0)
        with pytest.raises(ValueError):
            thmB_witnesses(sqrt2_theta, [wc], 0.5, q_grid(10.0))
