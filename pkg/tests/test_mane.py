import math

import numpy as np
import pytest

from fklab import (
    AlphaValue,
    DomainError,
    EnvPoint,
    GridSpec,
    InsufficientDataError,
    calibrate_window,
    circle_model,
    cocycle_defects,
    cylinder_at,
    energy,
    equidistribution_counts,
    grid_sensitivity,
    ground_energy,
    make_chain,
    mane_table,
    minimize_free,
    phi_lookup,
    rotation_number,
    sturm_model,
    torus_model,
)

from oracles import brute_force_phi

CIRCLE = EnvPoint.circle(0.0)
FIB = AlphaValue.fibonacci()
PHI = (1.0 + math.sqrt(5.0)) / 2.0


def phi_closed_form_zero_potential(lam, t, n_cap=400):
    """min over n >= 1 of n * W(t/n) for W(s) = (s - lam)^2 / 2."""
    if t == 0.0:
        return 0.5 * lam * lam
    return min(n * 0.5 * (t / n - lam) ** 2 for n in range(1, n_cap + 1))


class TestManeTable:
    def test_zero_potential_closed_forms(self):
        m = circle_model(0.0, 1.0)
        t = mane_table(m, CIRCLE, 0.0, 2.0, 0.5, 6)
        assert phi_lookup(t, 2.0) == pytest.approx(0.0, abs=1e-12)
        assert phi_lookup(t, 0.5) == pytest.approx(0.125, abs=1e-12)
        assert phi_lookup(t, 0.0) == pytest.approx(0.5, abs=1e-12)
        j = int(np.argmin(np.abs(t.targets - 2.0)))
        assert t.n_steps[j] == 2
        assert t.chains[j] == pytest.approx([0.0, 1.0, 2.0], abs=1e-12)

    @pytest.mark.parametrize("K", [0.0, 1.0])
    def test_matches_exhaustive_enumeration(self, K):
        m = circle_model(K, 0.5)
        table = mane_table(m, CIRCLE, 0.0, 2.0, 0.5, 6)
        for sign in (1.0, -1.0):
            nodes = sign * 0.5 * np.arange(5)
            for j in range(1, 5):
                expect = brute_force_phi(m, CIRCLE, nodes, j, 0.0, 6)
                assert phi_lookup(table, float(nodes[j])) == pytest.approx(expect, abs=1e-12)

    def test_one_step_bound(self):
        m = circle_model(1.0, 0.5)
        t = mane_table(m, CIRCLE, 0.01, 2.0, 0.1, 40)
        for tt, ph in zip(t.targets, t.phi):
            assert ph <= energy(m, CIRCLE, 0.0, float(tt)) - 0.01 + 1e-9

    def test_monotone_in_n_max(self):
        m = circle_model(1.0, 0.5)
        t1 = mane_table(m, CIRCLE, 0.0, 2.0, 0.1, 20)
        t2 = mane_table(m, CIRCLE, 0.0, 2.0, 0.1, 40)
        assert np.all(t2.phi <= t1.phi + 1e-12)

    def test_grid_sensitivity_bounded(self):
        m = circle_model(1.0, 0.5)
        rep = grid_sensitivity(m, CIRCLE, 0.0, 2.0, 0.1, 40)
        assert rep["max_change"] <= rep["bound_Ch"]

    def test_preconditions(self):
        m = circle_model(0.0, 0.0)
        with pytest.raises(DomainError):
            mane_table(m, CIRCLE, 0.0, 2.0, 0.5, 1000)


class TestCocycleDefects:
    def test_circle_suite(self):
        m = circle_model(1.0, 0.5)
        est = ground_energy(m, CIRCLE, [4, 8, 16], GridSpec(h=0.05))
        table = mane_table(m, CIRCLE, est.lower_bound, 2.0, 0.05, 120)
        d = cocycle_defects(m, table, samples=12, seed=0)
        assert d["subadd_max"] <= 10.0 * 0.05 * d["lip_bound"]
        assert d["one_step_max"] <= 1e-9
        assert d["lower_bound_max"] <= 1e-9
        assert np.isfinite(d["sublinearity_ratio"])

    def test_zero_potential_ratio_matches_closed_form(self):
        # the convex closed form makes the ratio computable independently;
        # negative displacements dominate because they fight the drift
        m = circle_model(0.0, 1.0)
        table = mane_table(m, CIRCLE, 0.0, 2.0, 0.25, 16)
        d = cocycle_defects(m, table, samples=10, seed=0)
        expect = max(
            abs(phi_closed_form_zero_potential(1.0, float(t))) / (1.0 + abs(float(t)))
            for t in table.targets
        )
        assert d["sublinearity_ratio"] == pytest.approx(expect, abs=1e-9)


class TestCalibration:
    def test_zero_potential_window(self):
        m = circle_model(0.0, 1.0)
        rep = calibrate_window(m, CIRCLE, 0.0, 32, 8, GridSpec(h=0.05))
        assert rep.max_defect <= 1e-6
        assert rep.rotation == pytest.approx(1.0, abs=1e-8)

    def test_torus_degenerate_point(self):
        m = torus_model(1.0, 1.0, 0.0)
        env = EnvPoint.torus(0.0, 0.0)
        est = ground_energy(m, env, [4, 8, 16], GridSpec(h=0.05))
        assert est.lower_bound == pytest.approx(0.0, abs=1e-6)
        rep = calibrate_window(m, env, est.lower_bound, 32, 8, GridSpec(h=0.05))
        assert rep.max_defect <= 1e-6

    def test_defects_nonnegative(self):
        m = circle_model(1.0, 0.5)
        est = ground_energy(m, CIRCLE, [4, 8, 16], GridSpec(h=0.05))
        rep = calibrate_window(m, CIRCLE, est.lower_bound, 32, 8, GridSpec(h=0.05))
        assert rep.defects[:, 2].min() >= -1e-8

    def test_defect_nonincreasing_with_outer_length(self):
        m = circle_model(1.0, 0.5)
        est = ground_energy(m, CIRCLE, [4, 8, 16], GridSpec(h=0.05))
        r32 = calibrate_window(m, CIRCLE, est.lower_bound, 32, 8, GridSpec(h=0.05))
        r64 = calibrate_window(m, CIRCLE, est.lower_bound, 64, 8, GridSpec(h=0.05))
        assert r64.max_defect <= r32.max_defect + 1e-12


class TestRotationNumber:
    def test_unit_drift(self):
        m = circle_model(0.0, 1.0)
        rep = rotation_number(m, CIRCLE, [8, 16], GridSpec(h=0.05))
        for _, r in rep.values:
            assert r == pytest.approx(1.0, abs=1e-8)
        assert not rep.degenerate

    def test_circle_positive_and_cauchy(self):
        m = circle_model(1.0, 0.5)
        rep = rotation_number(m, CIRCLE, [16, 32, 64], GridSpec(h=0.05))
        rots = [r for _, r in rep.values]
        assert all(r > 0 for r in rots)
        assert max(rots) - min(rots) <= 5e-2

    def test_degenerate_flag(self):
        m = circle_model(0.0, 0.0)
        rep = rotation_number(m, CIRCLE, [8, 16], GridSpec(h=0.05))
        assert rep.degenerate
        assert rep.chains[0] == pytest.approx(np.full(9, rep.chains[0][0]), abs=1e-9)


class TestEquidistribution:
    def test_periodic_counts_equal(self):
        half = AlphaValue.rational(1, 2)
        env = EnvPoint.quasicrystal(half)
        m = sturm_model(half, 0.0, 0.0, 2.0)
        ch = make_chain(m, env, np.arange(0.0, 64.0, 2.0))
        sec = cylinder_at(env, 32.0, 3.0)
        counts, _ = equidistribution_counts(ch, env, sec, 3.0)
        assert counts.max() == counts.min()

    def test_fibonacci_minimizer_counts(self):
        m = sturm_model(FIB, 0.5, 1.0, PHI)
        env = EnvPoint.quasicrystal(FIB)
        res = minimize_free(m, env, 64, h=0.08)
        R = float(FIB.inv_floor() + 1)
        mid = res.chain.positions[len(res.chain.positions) // 2]
        sec = cylinder_at(env, float(mid), R)
        counts, _ = equidistribution_counts(res.chain, env, sec, R)
        assert counts.size >= 3
        assert counts.max() - counts.min() <= 2

    def test_too_few_returns(self):
        env = EnvPoint.quasicrystal(FIB)
        m = sturm_model(FIB, 0.5, 1.0, PHI)
        ch = make_chain(m, env, [0.0, 1.0, 2.0])
        sec = cylinder_at(env, 1.0, 2.0)
        with pytest.raises(InsufficientDataError):
            equidistribution_counts(ch, env, sec, 2.0)

    def test_nonmonotone_rejected(self):
        env = EnvPoint.quasicrystal(FIB)
        m = sturm_model(FIB, 0.5, 1.0, PHI)
        ch = make_chain(m, env, [0.0, 2.0, 1.0])
        sec = cylinder_at(env, 1.0, 2.0)
        with pytest.raises(DomainError):
            equidistribution_counts(ch, env, sec, 2.0)
