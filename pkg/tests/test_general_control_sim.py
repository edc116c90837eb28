import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from string_damping.even_field import TWO_PI, CircleGrid, Problem
from string_damping.experiments import initial_with_rho
from string_damping.friction_solver import field_at, horizon_steps, profile, solve_phi, trajectory_rho
from string_damping.general_control_sim import (
    DEFAULT_ENVELOPE,
    ControlError,
    Envelope,
    PiecewiseControl,
    adversarial_controls,
    bound_check,
    incoming_history,
    lattice_samples,
    open_loop_profile,
    random_bang_bang,
    replayed_friction,
    simulate_feedback,
    simulate_open_loop,
    sup_chasing_policy,
)


def random_grid(seed, m=64, scale=10.0):
    return CircleGrid(scale * np.random.default_rng(seed).standard_normal(m))


class TestPiecewiseControl:
    def test_evaluation(self):
        u = PiecewiseControl([0.0, 1.0, 2.5], [0.5, -1.0])
        np.testing.assert_array_equal(u(np.array([0.0, 0.99, 1.0, 2.5, 3.0])),
                                      [0.5, 0.5, -1.0, -1.0, -1.0])
        assert u.end == 2.5

    @pytest.mark.parametrize("b, v", [
        ([0.0, 1.0], [2.0]),
        ([0.0, 1.0], [np.nan]),
        ([0.5, 1.0], [0.0]),
        ([0.0, 1.0, 1.0], [0.0, 0.0]),
        ([0.0, 1.0], [0.0, 0.0]),
        ([0.0], []),
    ])
    def test_rejects(self, b, v):
        with pytest.raises(ControlError):
            PiecewiseControl(b, v)

    def test_from_samples(self):
        u = PiecewiseControl.from_samples([1.0, 0.0, -1.0], 0.5)
        np.testing.assert_array_equal(u.breakpoints, [0.0, 0.5, 1.0, 1.5])

    def test_lattice_samples(self):
        u = PiecewiseControl.constant(-0.25, 10.0)
        np.testing.assert_array_equal(lattice_samples(u, 5, 8), -0.25)


class TestOpenLoop:
    def test_zero_control_is_free_transport(self):
        G = random_grid(0)
        T = 3 * TWO_PI + 0.7
        u = PiecewiseControl.constant(0.0, T)
        steps = horizon_steps(T, G.m)
        p = open_loop_profile(G, u, T, steps * G.step)
        np.testing.assert_array_equal(p.values, np.roll(G.values, -steps))
        rec = simulate_open_loop(G, u, T)
        assert rec.rate() == 0.0

    def test_constant_push_on_constant_profile(self):
        G = CircleGrid.constant(50.0, 128)
        rec = simulate_open_loop(G, PiecewiseControl.constant(-1.0, 40 * TWO_PI), 40 * TWO_PI)
        assert rec.rate() == pytest.approx(1.0, abs=1e-12)

    def test_linear_in_data_and_control(self):
        G1, G2 = random_grid(1), random_grid(2)
        T = 2 * TWO_PI
        u1 = PiecewiseControl.constant(0.3, T)
        u2 = random_bang_bang(np.random.default_rng(0), T, 0.4)
        steps = horizon_steps(T, 64)
        n1 = lattice_samples(u1, steps, 64)
        n2 = lattice_samples(u2, steps, 64)
        a = incoming_history(G1, n1, steps)
        b = incoming_history(G2, n2, steps)
        ab = incoming_history(CircleGrid(G1.values + G2.values), n1 + n2, steps)
        np.testing.assert_allclose(ab[np.isfinite(ab)], (a + b)[np.isfinite(ab)], atol=1e-12)

    def test_replaying_friction_reproduces_it(self):
        G = random_grid(3)
        T = 5 * TWO_PI
        sig = solve_phi(G, T)
        u = replayed_friction(G, T)
        for t in (0.0, 2.0, T):
            np.testing.assert_array_equal(open_loop_profile(G, u, T, t).values,
                                          profile(sig, t).values)
        dry = trajectory_rho(G, T)
        rec = simulate_open_loop(G, u, T)
        np.testing.assert_array_equal(rec.rho_stop, dry.rho_stop)
        np.testing.assert_array_equal(rec.phi0, dry.phi0)

    def test_matches_field_at(self):
        G = random_grid(4)
        T = 3 * TWO_PI
        sig = solve_phi(G, T)
        u = replayed_friction(G, T)
        for nt in (1, 50, 130, sig.steps):
            t = nt * G.step
            p = open_loop_profile(G, u, T, t)
            for i in range(G.m):
                assert p.values[i] == pytest.approx(field_at(G, sig, i * G.step, t), abs=1e-12)

    def test_short_control_rejected(self):
        with pytest.raises(ControlError):
            simulate_open_loop(random_grid(5), PiecewiseControl.constant(0.0, 1.0), 5.0)

    def test_bad_load_convention(self):
        G = random_grid(5)
        with pytest.raises(ValueError):
            open_loop_profile(G, PiecewiseControl.constant(0.0, 1.0), 1.0, 0.5, "side")

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0.01, 3.0))
    def test_no_control_beats_one_per_period(self, seed, dwell):
        # each crossing moves a characteristic by at most 1
        G = random_grid(seed, 32, 8.0)
        T = 6 * TWO_PI
        u = random_bang_bang(np.random.default_rng(seed), T, dwell)
        rec = simulate_open_loop(G, u, T, sample_at=np.array([0, horizon_steps(T, 32)]))
        assert rec.rho_stop[-1] >= rec.rho_stop[0] - 6 * TWO_PI - 1e-9


class TestFeedbackAndAdversaries:
    def test_simulate_feedback_matches_dry_friction_when_large(self):
        # away from capture, -sign(current[c]) is dry friction
        G = CircleGrid.constant(20.0, 32)
        T = 3 * TWO_PI
        u = simulate_feedback(G, lambda cur, c: -np.sign(cur[c]), T)
        np.testing.assert_array_equal(u.values, -1.0)

    def test_sup_chasing(self):
        assert sup_chasing_policy(np.array([1.0, -3.0, 2.0]), 0) == 1.0

    def test_adversary_list(self):
        G = random_grid(6)
        ctrls = adversarial_controls(G, 2 * TWO_PI, 12, seed=1)
        assert len(ctrls) == 12
        assert [k for k, _ in ctrls[:4]] == ["const-1", "const0", "const+1", "sup-chasing"]
        for _, u in ctrls:
            assert np.all(np.abs(u.values) <= 1.0)
            assert u.end >= 2 * TWO_PI - 1e-12

    def test_adversaries_are_seeded(self):
        G = random_grid(7)
        a = adversarial_controls(G, TWO_PI, 10, seed=3)
        b = adversarial_controls(G, TWO_PI, 10, seed=3)
        for (ka, ua), (kb, ub) in zip(a, b):
            assert ka == kb
            np.testing.assert_array_equal(ua.values, ub.values)


class TestBoundCheck:
    def test_envelope(self):
        e = Envelope(2.0, 3.0)
        assert e.tol(4.0, 6.0) == 1.0
        assert e.tol(1.0, 0.0) == np.inf

    def test_calibration(self):
        e = Envelope.calibrate([1.1, 0.95], [10.0, 10.0], [10.0, 20.0])
        assert e.c1 == e.c2 == pytest.approx(0.5)

    def test_passes_for_large_data(self):
        _, G = initial_with_rho(0, 120 * np.pi, 512)
        T = 30 * TWO_PI + np.pi
        rep = bound_check(G, adversarial_controls(G, T, 12, seed=0), T, DEFAULT_ENVELOPE)
        assert rep.passed
        assert rep.excess_over_dry <= 1e-9
        assert rep.dry_rate == pytest.approx(1.0, abs=rep.tol)
        assert len(rep.rates) == 12

    def test_negative_envelope_flags_violation(self):
        G = CircleGrid.constant(10.0, 16)
        T = 2 * TWO_PI
        # a negative envelope flags even the optimal push
        rep = bound_check(G, [PiecewiseControl.constant(-1.0, T)], T, Envelope(-10.0, 0.0),
                          Problem.STOP)
        assert not rep.passed
        assert rep.worst == "control0"

    def test_damp_problem(self):
        _, G = initial_with_rho(1, 120 * np.pi, 512, problem=Problem.DAMP)
        T = 20 * TWO_PI
        rep = bound_check(G, adversarial_controls(G, T, 6, seed=2), T, DEFAULT_ENVELOPE,
                          Problem.DAMP)
        assert rep.problem is Problem.DAMP
        assert rep.passed
