import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from string_damping.even_field import TWO_PI, CircleGrid, EvenFourier, StatePair, to_traveling_wave
from string_damping.support_geometry import (
    DegenerateMomentumError,
    Momentum,
    dry_friction_control,
    pairing,
    steepest_state,
    support_D,
    support_Omega,
    zeta,
    zeta_roots,
)

coef = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def momenta(draw, max_degree=6, drift=False):
    n = draw(st.integers(1, max_degree))
    phi = draw(st.lists(coef, min_size=n + 1, max_size=n + 1))
    psi = draw(st.lists(coef, min_size=n + 1, max_size=n + 1))
    if not drift:
        phi[0] = 0.0
    return Momentum(EvenFourier(phi), EvenFourier(psi))


def brute_support(xi, T, n=2_000_000):
    """Midpoint rule on |zeta|, no root finding."""
    h = T / n
    t = (np.arange(n) + 0.5) * h
    total = 0.0
    for chunk in np.array_split(t, 20):
        total += np.abs(zeta(xi, chunk)).sum()
    return total * h


def random_momentum(rng, degree):
    phi = rng.normal(size=degree + 1)
    phi[0] = 0.0
    return Momentum(EvenFourier(phi), EvenFourier(rng.normal(size=degree + 1)))


class TestZeta:
    def test_zero(self):
        xi = Momentum.from_dicts()
        np.testing.assert_array_equal(zeta(xi, np.linspace(0, 10, 7)), 0.0)

    def test_psi1_gives_cos(self):
        t = np.linspace(0, 7, 50)
        np.testing.assert_allclose(zeta(Momentum.from_dicts(psi={1: 1.0}), t), np.cos(t), atol=1e-15)

    def test_phi1_integrates_to_sin(self):
        t = np.linspace(0, 7, 50)
        np.testing.assert_allclose(zeta(Momentum.from_dicts(phi={1: 2.0}), t), 2 * np.sin(t),
                                   atol=1e-15)

    def test_matches_definition_by_quadrature(self):
        # zeta(t) = xi1(t) + int_0^t xi0
        xi = Momentum.from_dicts(phi={0: 0.3, 2: 1.1, 3: -0.4}, psi={0: 0.2, 1: -0.7, 3: 0.5})
        t = 2.3
        s = np.linspace(0, t, 200001)
        w = np.full(s.size, s[1] - s[0])
        w[[0, -1]] *= 0.5
        integral = float(np.sum(w * xi.xi0(s)))
        assert zeta(xi, t) == pytest.approx(xi.xi1(t) + integral, abs=1e-9)

    def test_roots_of_cos(self):
        r = zeta_roots(Momentum.from_dicts(psi={1: 1.0}), TWO_PI)
        np.testing.assert_allclose(r, [np.pi / 2, 3 * np.pi / 2], atol=1e-12)


class TestSupportD:
    def test_zero_horizon(self):
        assert support_D(Momentum.from_dicts(psi={1: 3.0}), 0.0) == 0.0

    def test_cos_over_period(self):
        assert support_D(Momentum.from_dicts(psi={1: 1.0}), TWO_PI) == pytest.approx(4.0, rel=1e-12)

    def test_constant(self):
        assert support_D(Momentum.from_dicts(psi={0: 1.0}), 5.0) == pytest.approx(5.0, rel=1e-14)

    def test_drift_term(self):
        # zeta = t - 1: int_0^3 |t - 1| dt = 1/2 + 2
        xi = Momentum.from_dicts(phi={0: 1.0}, psi={0: -1.0})
        assert support_D(xi, 3.0) == pytest.approx(2.5, rel=1e-12)

    def test_negative_horizon_rejected(self):
        with pytest.raises(ValueError):
            support_D(Momentum.from_dicts(psi={1: 1.0}), -1.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_against_brute_force(self, seed):
        xi = random_momentum(np.random.default_rng(seed), 7)
        T = 9.3
        assert support_D(xi, T) == pytest.approx(brute_support(xi, T), rel=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(momenta(), st.floats(0, 4))
    def test_positive_homogeneity(self, xi, lam):
        T = 7.0
        assert support_D(lam * xi, T) == pytest.approx(lam * support_D(xi, T),
                                                       rel=1e-9, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(momenta(), momenta())
    def test_subadditive(self, a, b):
        T = 5.5
        assert support_D(a + b, T) <= support_D(a, T) + support_D(b, T) + 1e-9

    @settings(max_examples=40, deadline=None)
    @given(momenta(drift=True), st.floats(0, 10), st.floats(0, 10))
    def test_monotone_in_horizon(self, xi, t1, t2):
        lo, hi = sorted((t1, t2))
        assert support_D(xi, lo) <= support_D(xi, hi) + 1e-12


class TestSupportOmega:
    def test_zero(self):
        assert support_Omega(Momentum.from_dicts()) == 0.0

    def test_cos(self):
        assert support_Omega(Momentum.from_dicts(psi={1: 1.0})) == pytest.approx(2 / np.pi, rel=1e-12)

    def test_constant(self):
        assert support_Omega(Momentum.from_dicts(psi={0: 1.0})) == pytest.approx(1.0, rel=1e-14)

    def test_drift_rejected(self):
        with pytest.raises(ValueError):
            support_Omega(Momentum.from_dicts(phi={0: 1.0}))

    @settings(max_examples=30, deadline=None)
    @given(momenta(), st.sampled_from([1, 2, 5]))
    def test_periodic_equality(self, xi, k):
        hd = support_D(xi, TWO_PI * k)
        assert abs(hd - TWO_PI * k * support_Omega(xi)) <= 1e-8 * max(hd, 1e-300)

    def test_cesaro_convergence_is_first_order(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            xi = random_momentum(rng, 5)
            omega = support_Omega(xi)
            for T in (10.0, 40.0, 160.0, 640.0):
                # the defect is bounded by one period's worth of |zeta|
                assert abs(support_D(xi, T) / T - omega) <= TWO_PI * omega / T + 1e-12

    def test_orthogonality_flags(self):
        from string_damping.even_field import Problem
        assert Momentum.from_dicts(psi={0: 1.0, 1: 1.0}).orthogonal_to(Problem.STOP)
        assert not Momentum.from_dicts(psi={0: 1.0, 1: 1.0}).orthogonal_to(Problem.DAMP)
        assert not Momentum.from_dicts(phi={0: 1.0}).orthogonal_to(Problem.STOP)


class TestSteepestState:
    m = 512

    def test_constant_momentum(self):
        s = steepest_state(Momentum.from_dicts(psi={0: 1.0}), 3.0, self.m)
        np.testing.assert_array_equal(s.f1.values, 3.0)
        np.testing.assert_array_equal(s.f0.values, 0.0)

    def test_cos_momentum(self):
        s = steepest_state(Momentum.from_dicts(psi={1: 1.0}), 2.0, self.m)
        x = TWO_PI * np.arange(self.m) / self.m
        # nodes at the zeros of cos see a rounded sign; skip them
        off = np.abs(np.cos(x)) > 1e-9
        np.testing.assert_array_equal(s.f1.values[off], 2.0 * np.sign(np.cos(x[off])))
        np.testing.assert_array_equal(s.f0.values, 0.0)

    def test_sin_momentum_gives_triangle_wave(self):
        T = 1.5
        s = steepest_state(Momentum.from_dicts(phi={1: 1.0}), T, self.m)
        x = TWO_PI * np.arange(self.m) / self.m
        off = np.abs(np.sin(x)) > 1e-9
        np.testing.assert_array_equal(s.f1.values[off], 0.0)
        # -T * int_0^x sign(sin): a triangle wave peaking at x = pi
        triangle = -T * np.where(x <= np.pi, x, TWO_PI - x)
        np.testing.assert_allclose(s.f0.values, triangle, atol=T * TWO_PI / self.m)

    def test_degenerate(self):
        with pytest.raises(DegenerateMomentumError):
            steepest_state(Momentum.from_dicts(), 1.0, 8)

    @settings(max_examples=30, deadline=None)
    @given(momenta(), st.floats(0.1, 50))
    def test_feedback_consistency(self, xi, T):
        z0 = float(zeta(xi, 0.0))
        assume(abs(z0) > 1e-9)
        g = steepest_state(xi, T, self.m).traveling_wave()
        assert dry_friction_control(g) == -np.sign(z0)

    @pytest.mark.parametrize("seed", range(5))
    def test_duality_pairing(self, seed):
        xi = random_momentum(np.random.default_rng(100 + seed), 6)
        T = 4.0
        s = steepest_state(xi, T, 1 << 14)
        assert pairing(xi, s) == pytest.approx(T * support_Omega(xi), rel=2e-3)

    def test_pairing_exact_for_trivial_case(self):
        xi = Momentum.from_dicts(psi={0: 1.0})
        T = 2.5
        assert pairing(xi, steepest_state(xi, T, 16)) == T * support_Omega(xi)

    def test_pairing_on_series(self):
        xi = Momentum.from_dicts(phi={1: 2.0}, psi={0: 1.0, 2: 3.0})
        f = StatePair(EvenFourier([5.0, 1.0]), EvenFourier([1.0, 0.0, 1.0]))
        # w0 = 1, wn = 1/2
        assert pairing(xi, f) == pytest.approx(0.5 * 2.0 * 1.0 + 1.0 * 1.0 + 0.5 * 3.0)


class TestDryFriction:
    def test_positive(self):
        assert dry_friction_control(CircleGrid([3.0, 0.0])) == -1.0

    def test_negative(self):
        assert dry_friction_control(CircleGrid([-0.2, 5.0])) == 1.0

    def test_switching_surface(self):
        assert dry_friction_control(CircleGrid([0.0, 5.0])) == 0.0

    def test_reads_velocity_at_load(self):
        # f0' vanishes at 0, so only f1(0) matters
        f = StatePair(EvenFourier([0.0, 4.0]), EvenFourier([-0.5, 0.2]))
        assert dry_friction_control(to_traveling_wave(f, 16)) == 1.0
