"""Kernel tests.

Each reference value is produced by an oracle that shares no code with the
implementation: adaptive quadrature of the defining integral for Q, exact
rational recursion for binomial tails, and plain 2D Monte Carlo for the
two-half-plane probability.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from mlbounds.errors import ValidationError
from mlbounds.numerics import (
    ChannelPoint,
    SnrConvention,
    TripletGeometry,
    angle_upper_bound,
    binomial_tail,
    q_function,
    triplet_probability,
)


def q_oracle(x: float) -> float:
    """Q(x) straight from its defining integral via adaptive quadrature."""
    val, _ = integrate.quad(
        lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi),
        x,
        math.inf,
        epsabs=1e-300,
        epsrel=1e-13,
    )
    return val


def binom_tail_oracle(p: Fraction, n: int, lo: int, hi: int) -> Fraction:
    """Literal recursive pmf evaluation in exact rational arithmetic:
    f(0) = (1-p)^n, f(m+1) = f(m) * (n-m)/(m+1) * p/(1-p)."""
    lo = max(0, lo)
    hi = min(n, hi)
    if lo > hi:
        return Fraction(0)
    term = (1 - p) ** n
    total = Fraction(0)
    for m in range(0, hi + 1):
        if m >= lo:
            total += term
        term = term * (n - m) * p / ((m + 1) * (1 - p))
    return total


class TestQFunction:
    def test_matches_quadrature_oracle(self):
        for x in np.linspace(0.0, 8.0, 33):
            ref = q_oracle(float(x))
            assert abs(float(q_function(x)) - ref) <= 1e-12 * ref

    def test_known_points(self):
        assert float(q_function(0.0)) == 0.5
        # complement symmetry
        for x in (0.3, 1.0, 2.7):
            assert math.isclose(
                float(q_function(-x)), 1.0 - float(q_function(x)), rel_tol=1e-14
            )

    def test_monotone_decreasing_and_underflow(self):
        xs = np.linspace(-5.0, 40.0, 200)
        qs = q_function(xs)
        assert np.all(np.diff(qs) <= 0)
        assert float(q_function(40.0)) == 0.0  # underflow-to-zero is the contract

    def test_vectorized(self):
        xs = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(
            q_function(xs), [float(q_function(v)) for v in xs], rtol=1e-15
        )


class TestBinomialTail:
    def test_matches_rational_recursion(self):
        ps = [Fraction(1, 10), Fraction(1, 3), Fraction(1, 2), Fraction(9, 10), Fraction(97, 100)]
        rng = np.random.default_rng(20240811)
        for n in (1, 2, 5, 17, 33, 64):
            for p in ps:
                windows = [(0, n), (0, 0), (n, n), (1, n), (0, n - 1), (-2, n + 3)]
                for _ in range(4):
                    a, b = sorted(rng.integers(0, n + 1, size=2).tolist())
                    windows.append((int(a), int(b)))
                for lo, hi in windows:
                    ref = binom_tail_oracle(p, n, lo, hi)
                    got = binomial_tail(float(p), n, lo, hi)
                    if ref == 0:
                        assert got == 0.0
                    else:
                        assert abs(got - float(ref)) <= 1e-12 * float(ref)

    def test_hand_case(self):
        # sum_{m=2}^{3} C(4,m) 0.1^m 0.9^(4-m) = 0.0486 + 0.0036
        assert math.isclose(binomial_tail(0.1, 4, 2, 3), 0.0522, rel_tol=1e-12)

    def test_empty_and_full_windows(self):
        assert binomial_tail(0.3, 12, 13, 12) == 0.0
        assert math.isclose(binomial_tail(0.3, 12, 0, 12), 1.0, rel_tol=1e-14)
        # complement of "no errors": 1 - (1-p)^n
        for p, n in ((0.01, 60), (0.2, 7)):
            ref = -math.expm1(n * math.log1p(-p))
            assert math.isclose(binomial_tail(p, n, 1, n), ref, rel_tol=1e-12)

    def test_degenerate_lengths(self):
        for n_total in (0, -1, -5):
            assert binomial_tail(0.4, n_total, 0, 3) == 1.0
            assert binomial_tail(0.4, n_total, -2, 0) == 1.0
            assert binomial_tail(0.4, n_total, 1, 3) == 0.0
            assert binomial_tail(0.4, n_total, -4, -1) == 0.0

    def test_edge_probabilities(self):
        assert binomial_tail(0.0, 9, 0, 4) == 1.0
        assert binomial_tail(0.0, 9, 1, 9) == 0.0
        assert binomial_tail(1.0, 9, 5, 9) == 1.0
        assert binomial_tail(1.0, 9, 0, 8) == 0.0

    def test_split_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 64))
            p = float(rng.uniform(0.01, 0.99))
            lo, hi = sorted(rng.integers(0, n + 1, size=2).tolist())
            if lo == hi:
                continue
            mid = int(rng.integers(lo, hi))
            whole = binomial_tail(p, n, lo, hi)
            parts = binomial_tail(p, n, lo, mid) + binomial_tail(p, n, mid + 1, hi)
            assert math.isclose(whole, parts, rel_tol=1e-12)

    def test_monotone_in_upper_limit(self):
        vals = [binomial_tail(0.17, 40, 3, hi) for hi in range(3, 41)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_deep_tail_keeps_relative_accuracy(self):
        # all terms underflow a direct product path long before this
        ref = binom_tail_oracle(Fraction(1, 1000), 64, 40, 64)
        got = binomial_tail(0.001, 64, 40, 64)
        assert abs(got - float(ref)) <= 1e-12 * float(ref)

    def test_rejects_bad_probability(self):
        with pytest.raises(ValidationError):
            binomial_tail(-0.1, 5, 0, 5)
        with pytest.raises(ValidationError):
            binomial_tail(1.5, 5, 0, 5)


class TestAngleUpperBound:
    def test_formula_and_cap(self):
        # d1 = d2 = n/2 sits exactly at the cap
        assert angle_upper_bound(5, 5, 10) == pytest.approx(math.pi / 2, rel=1e-15)
        # small distances push the raw sum past pi/2, the cap takes over
        assert angle_upper_bound(1, 1, 100) == math.pi / 2
        # beyond half the length the raw sum applies
        got = angle_upper_bound(8, 9, 10)
        want = math.acos(math.sqrt(0.8)) + math.acos(math.sqrt(0.9))
        assert got == pytest.approx(want, rel=1e-15)
        assert got < math.pi / 2
        assert angle_upper_bound(10, 10, 10) == 0.0

    def test_symmetric_and_monotone(self):
        assert angle_upper_bound(3, 7, 12) == angle_upper_bound(7, 3, 12)
        vals = [angle_upper_bound(d, d, 16) for d in range(8, 17)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            angle_upper_bound(0, 3, 8)
        with pytest.raises(ValidationError):
            angle_upper_bound(3, 9, 8)


class TestTripletProbability:
    def test_right_angle_closed_form(self):
        for d in (1, 4, 10):
            for sigma in (0.5, 1.0, 2.0):
                geom = TripletGeometry(d=d, n=4 * d, theta=math.pi / 2)
                q = float(q_function(math.sqrt(d) / sigma))
                want = 2.0 * q - q * q
                got = triplet_probability(geom, sigma)
                assert abs(got - want) <= 1e-10 * want

    def test_monte_carlo_oracle(self):
        # union of two half-planes at distance sqrt(d), normals theta apart
        d, theta, sigma = 3, math.pi / 3, 0.8
        rng = np.random.default_rng(42)
        samples = rng.normal(0.0, sigma, size=(10_000_000, 2))
        thresh = math.sqrt(d)
        hit1 = samples[:, 0] >= thresh
        hit2 = samples[:, 0] * math.cos(theta) + samples[:, 1] * math.sin(theta) >= thresh
        p_hat = float(np.mean(hit1 | hit2))
        se = math.sqrt(p_hat * (1.0 - p_hat) / samples.shape[0])
        got = triplet_probability(TripletGeometry(d=d, n=12, theta=theta), sigma)
        assert abs(got - p_hat) <= 3.0 * se

    def test_monotone_in_theta(self):
        for d, sigma in ((2, 1.0), (6, 0.7)):
            thetas = np.linspace(0.05, math.pi / 2, 30)
            vals = [
                triplet_probability(TripletGeometry(d=d, n=4 * d, theta=float(t)), sigma)
                for t in thetas
            ]
            assert all(b >= a - 1e-13 * a for a, b in zip(vals, vals[1:]))

    def test_bracketed_by_q_and_2q(self):
        for d, sigma, theta in ((1, 1.0, 0.3), (5, 0.6, 1.2), (9, 2.0, math.pi / 2)):
            q = float(q_function(math.sqrt(d) / sigma))
            got = triplet_probability(TripletGeometry(d=d, n=4 * d, theta=theta), sigma)
            assert q <= got <= 2.0 * q

    def test_geometry_validation(self):
        with pytest.raises(ValidationError):
            TripletGeometry(d=0, n=8, theta=1.0)
        with pytest.raises(ValidationError):
            TripletGeometry(d=3, n=2, theta=1.0)
        with pytest.raises(ValidationError):
            TripletGeometry(d=2, n=8, theta=0.0)
        with pytest.raises(ValidationError):
            TripletGeometry(d=2, n=8, theta=math.pi / 2 + 1e-9)
        with pytest.raises(ValidationError):
            triplet_probability(TripletGeometry(d=2, n=8, theta=1.0), 0.0)

    def test_from_code_weights_applies_angle_cap(self):
        low = TripletGeometry.from_code_weights(2, 16)
        assert low.theta == math.pi / 2
        high = TripletGeometry.from_code_weights(14, 16)
        assert high.theta == pytest.approx(2.0 * math.acos(math.sqrt(14 / 16)), rel=1e-15)
        assert high.theta < math.pi / 2


class TestChannelPoint:
    def test_crossover_consistency(self):
        pt = ChannelPoint.from_sigma(0.8)
        assert pt.p_b == pytest.approx(float(q_function(1.25)), rel=1e-15)
        assert 0.0 < pt.p_b < 0.5
        assert pt.snr_convention is SnrConvention.SIGMA

    def test_ebn0_mapping(self):
        # rate 1/2 at 0 dB lands exactly at sigma = 1
        pt = ChannelPoint.from_snr_db(0.0, SnrConvention.EBN0_DB, rate=0.5)
        assert pt.sigma == pytest.approx(1.0, rel=1e-15)
        # higher rate means less energy per symbol is needed, so sigma shrinks
        hi = ChannelPoint.from_snr_db(0.0, SnrConvention.EBN0_DB, rate=0.9)
        assert hi.sigma < 1.0

    def test_esn0_mapping(self):
        pt = ChannelPoint.from_snr_db(3.0, SnrConvention.ESN0_DB)
        assert pt.sigma == pytest.approx(math.sqrt(1.0 / (2.0 * 10 ** 0.3)), rel=1e-15)

    def test_validation(self):
        with pytest.raises(ValidationError):
            ChannelPoint.from_sigma(0.0)
        with pytest.raises(ValidationError):
            ChannelPoint.from_snr_db(1.0, SnrConvention.EBN0_DB, rate=None)
        with pytest.raises(ValidationError):
            ChannelPoint.from_snr_db(1.0, SnrConvention.EBN0_DB, rate=1.5)
        with pytest.raises(ValidationError):
            ChannelPoint(sigma=1.0, p_b=0.4, snr_db=1.0, snr_convention=SnrConvention.SIGMA)
