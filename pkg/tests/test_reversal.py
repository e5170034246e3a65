import numpy as np
import pytest

from fapplab.reversal import (TWO_PI, CellRegion, PhasePoint, ReversalConfig,
                              ReversibleMap, bound, involution, lyapunov,
                              reversal_probability, step)


def make_config(**overrides):
    defaults = dict(
        map=ReversibleMap(6.0),
        perturbed_kick=6.0,
        steps=10,
        region=CellRegion(center=PhasePoint(3.0, 2.0), half_width=0.025),
        samples=10000,
        seed=1234,
    )
    defaults.update(overrides)
    return ReversalConfig(**defaults)


class TestPhasePoint:
    def test_modular_reduction(self):
        pt = PhasePoint(7.0, -1.0)
        assert 0 <= pt.q < TWO_PI
        assert 0 <= pt.p < TWO_PI
        assert pt.q == pytest.approx(7.0 - TWO_PI)

    def test_involution_is_its_own_inverse(self):
        pt = PhasePoint(1.2, 3.4)
        back = involution(involution(pt))
        assert back.q == pytest.approx(pt.q, abs=1e-15)
        assert back.p == pytest.approx(pt.p, abs=1e-15)


class TestStep:
    def test_integrable_limit_is_rotation(self):
        m = ReversibleMap(0.0)
        out = step(m, PhasePoint(1.0, 0.5))
        assert out.q == pytest.approx(1.5, abs=1e-15)
        assert out.p == pytest.approx(0.5, abs=1e-15)

    def test_backward_inverts_forward(self, rng):
        m = ReversibleMap(6.0)
        q = rng.uniform(0, TWO_PI, 10000)
        p = rng.uniform(0, TWO_PI, 10000)
        q1, p1 = m.step_arrays(q.copy(), p.copy(), "forward")
        q2, p2 = m.step_arrays(q1, p1, "backward")
        assert np.max(np.abs(q2 - q)) < 1e-12
        assert np.max(np.abs(p2 - p)) < 1e-12

    def test_momentum_flip_conjugation_is_inverse(self, rng):
        # flip, one forward step, flip again == one backward step
        m = ReversibleMap(6.0)
        q = rng.uniform(0, TWO_PI, 10000)
        p = rng.uniform(0, TWO_PI, 10000)
        qc, pc = m.step_arrays(q.copy(), (-p) % TWO_PI, "forward")
        pc = (-pc) % TWO_PI
        qb, pb = m.step_arrays(q.copy(), p.copy(), "backward")
        dq = np.abs((qc - qb + np.pi) % TWO_PI - np.pi)
        dp = np.abs((pc - pb + np.pi) % TWO_PI - np.pi)
        assert np.max(dq) < 1e-12
        assert np.max(dp) < 1e-12

    def test_unknown_direction(self):
        with pytest.raises(ValueError):
            step(ReversibleMap(1.0), PhasePoint(0, 0), "sideways")


class TestAreaPreservation:
    def test_unit_jacobian_everywhere(self, rng):
        # product of the analytic one-step tangent maps has determinant one
        m = ReversibleMap(6.0)
        half = 3.0
        for _ in range(200):
            q = float(rng.uniform(0, TWO_PI))
            p = float(rng.uniform(0, TWO_PI))
            c1 = half * np.cos(q)
            p1 = (p + half * np.sin(q)) % TWO_PI
            qn = (q + p1) % TWO_PI
            c2 = half * np.cos(qn)
            j = (np.array([[1, 0], [c2, 1]]) @ np.array([[1, 1], [0, 1]])
                 @ np.array([[1, 0], [c1, 1]]))
            assert abs(np.linalg.det(j) - 1.0) < 1e-12

    def test_covariance_volume_short_time(self, rng):
        # one chaotic step of a small cell is linear to good accuracy;
        # evaluated on the unwrapped lift so the torus seam cannot split the cloud
        region = CellRegion(center=PhasePoint(3.0, 2.0), half_width=0.025)
        q, p = region.sample(rng, 100000)
        vol_in = np.linalg.det(np.cov(np.vstack([q, p])))
        p = p + 3.0 * np.sin(q)
        q = q + p
        p = p + 3.0 * np.sin(q)
        vol_out = np.linalg.det(np.cov(np.vstack([q, p])))
        assert vol_out == pytest.approx(vol_in, rel=0.05)

    def test_shear_preserves_covariance_20_steps(self, rng):
        # integrable limit on the unwrapped plane: exact unimodular shear
        region = CellRegion(center=PhasePoint(3.0, 0.1), half_width=0.025)
        q, p = region.sample(rng, 100000)
        vol_in = np.linalg.det(np.cov(np.vstack([q, p])))
        for _ in range(20):
            q = q + p  # no wrap: lift to the plane
        vol_out = np.linalg.det(np.cov(np.vstack([q, p])))
        assert vol_out == pytest.approx(vol_in, rel=0.05)


class TestReversalProbability:
    def test_unperturbed_reversal_is_exact(self):
        result = reversal_probability(make_config(perturbed_kick=6.0, steps=10))
        assert result.probability == 1.0

    def test_zero_steps(self):
        result = reversal_probability(make_config(steps=0, perturbed_kick=6.5))
        assert result.probability == 1.0

    def test_small_perturbation_long_time_decays(self):
        cfg = make_config(perturbed_kick=6.0 + 1e-3, steps=20, samples=100000)
        result = reversal_probability(cfg)
        assert result.probability < 0.05

    def test_std_error_formula(self):
        result = reversal_probability(make_config(perturbed_kick=6.01, steps=5))
        p = result.probability
        assert result.std_error == pytest.approx(np.sqrt(p * (1 - p) / 10000), abs=1e-15)

    def test_seed_determinism(self):
        a = reversal_probability(make_config(perturbed_kick=6.02, steps=8))
        b = reversal_probability(make_config(perturbed_kick=6.02, steps=8))
        assert a == b  # bit-identical dataclasses

    def test_monotone_decay_within_noise(self):
        prev, prev_se = 1.1, 0.0
        for t in range(2, 21, 2):
            cfg = make_config(perturbed_kick=6.01, steps=t, samples=30000, seed=77)
            r = reversal_probability(cfg)
            assert r.probability <= prev + 2 * max(r.std_error, prev_se), f"t={t}"
            prev, prev_se = r.probability, r.std_error

    def test_config_validation(self):
        with pytest.raises(ValueError):
            make_config(samples=50)
        with pytest.raises(ValueError):
            make_config(steps=-1)
        with pytest.raises(ValueError):
            CellRegion(center=PhasePoint(0, 0), half_width=4.0)


class TestLyapunov:
    def test_integrable_limit(self):
        assert abs(lyapunov(ReversibleMap(0.0), steps=2000, seed=3)) < 0.01

    def test_strong_chaos_matches_large_kick_asymptote(self):
        # large-kick growth rate of the kicked rotor approaches ln(K/2)
        lam6 = lyapunov(ReversibleMap(6.0), steps=3000, seed=5)
        assert lam6 == pytest.approx(np.log(3.0), abs=0.15)
        lam10 = lyapunov(ReversibleMap(10.0), steps=3000, seed=5)
        assert lam10 == pytest.approx(np.log(5.0), abs=0.10)

    def test_minimum_effort_enforced(self):
        with pytest.raises(ValueError):
            lyapunov(ReversibleMap(6.0), steps=100)


class TestBound:
    def test_zero_time(self):
        assert bound(1.1, 0) == 1.0

    def test_arithmetic(self):
        assert bound(1.1, 10) == pytest.approx(np.exp(-11.0), rel=1e-12)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            bound(1.0, -1)
