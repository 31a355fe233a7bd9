"""Upper bounds on ML decoding error probability over BPSK-AWGN.

Every combined bound here has the same shape: pick a radius d*, bound the
error probability jointly with the hard-decision word staying within radius
d* of the transmitted word, and add the binomial mass B(p_b, n, d*+1, n) of
leaving that region.  The radius is scanned exhaustively and the smallest
objective wins, so d* = n recovers the plain union bound and d* = 0 leaves
only the region-exit mass, which is always below 1.

Numerical layout notes: per-weight terms are assembled in ascending weight
order into equally sliced arrays for every variant, binomial prefix masses
are clamped to <= 1, and each refinement multiplies a baseline term by
factors <= 1, so the documented dominance chains (word <= truncated union <=
union, bit <= word) hold exactly in floating point, not just in exact
arithmetic.
"""

from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol

import numpy as np
from scipy import special

from .errors import MlboundsError, ProviderLookupError, ValidationError
from .numerics import (
    ChannelPoint,
    TripletGeometry,
    angle_upper_bound,
    binomial_tail,
    q_function,
    triplet_probability,
)
from .spectrum import InputOutputSpectrum, SpectrumKind, WeightSpectrum

__all__ = [
    "BoundVariant",
    "ThetaPolicy",
    "BoundResult",
    "BaseBoundProvider",
    "UnionBoundProvider",
    "FileBoundProvider",
    "union_bound",
    "truncated_union_bound",
    "gfbt_combine",
    "pairwise_term",
    "triplet_term",
    "h_term",
    "h_prime_term",
    "pairwise_error_bound",
    "triplet_error_bound",
    "word_error_bound",
    "bit_error_bound",
    "optimize_dstar",
]


class BoundVariant(enum.Enum):
    """Bound family; the string values double as CLI names."""

    UNION = "union"
    TRUNCATED_UNION = "truncated-union"
    PAIRWISE_IMPROVED = "pairwise"
    TRIPLET_IMPROVED = "triplet"
    UNIFIED_WORD = "word"
    UNIFIED_BIT = "bit"
    GFBT_COMBINED = "gfbt"


class ThetaPolicy(enum.Enum):
    """Half-plane separation angle used in triplet-based terms.

    CLOSED_FORM takes theta = pi/2, where the two-half-plane probability is
    exactly 2Q - Q^2.  TIGHT substitutes the angle cap 2*arccos(sqrt(d/n))
    whenever that is below pi/2 (only possible for d > n/2), paying one
    quadrature per weight for a slightly smaller factor.
    """

    CLOSED_FORM = "closed-form"
    TIGHT = "tight"


@dataclass(frozen=True)
class BoundResult:
    """One bound evaluation at one channel point.

    value is the raw minimized objective and may exceed 1; clamped is
    min(value, 1) for plotting.  per_d_terms holds the per-weight
    contributions at the winning d*, tail_term the region-exit mass
    B(p_b, n, d*+1, n), and base_term an opaque provider total (gfbt replay
    only).  value = sum(per_d_terms) + base_term + tail_term within 1e-12.
    """

    value: float
    d_star_opt: int
    per_d_terms: dict[int, float]
    tail_term: float
    variant: BoundVariant
    base_term: float = 0.0

    @property
    def clamped(self) -> float:
        return min(self.value, 1.0)


class BaseBoundProvider(Protocol):
    """Any upper bound on ML error probability of the subcode with spectrum
    restricted to d <= 2d*, evaluated at a channel point.

    Must return a finite value in [0, inf) and 0 for an empty sub-spectrum.
    """

    def __call__(self, sub_spectrum: WeightSpectrum, ch: ChannelPoint) -> float: ...


class _BinomialTable:
    """Binomial(N, p) mass tables for all N in [0, n] at fixed p.

    prefix[N, m] = B(p, N, 0, m), suffix[m] = B(p, n, m, n).  Rows are built
    from log-space pmfs so deep tails keep relative accuracy; prefixes come
    from forward sums and suffixes from backward sums, never from 1-x
    subtractions.  Everything is clamped to <= 1 so a product term * mass
    can never exceed the unrefined term in floating point.
    """

    def __init__(self, p: float, n: int):
        if not 0.0 <= p < 1.0:
            raise ValidationError(f"table needs p in [0, 1), got {p!r}")
        self.n = n
        if p == 0.0:
            # deep-SNR degenerate case: zero hard errors almost surely
            self.prefix = np.ones((n + 1, n + 1))
            suffix = np.zeros(n + 2)
            suffix[0] = 1.0
            self.suffix = suffix
            return
        upper = np.arange(n + 1, dtype=np.float64)[:, None]  # N
        m = np.arange(n + 1, dtype=np.float64)[None, :]
        with np.errstate(invalid="ignore"):
            logpmf = (
                special.gammaln(upper + 1.0)
                - special.gammaln(m + 1.0)
                - special.gammaln(upper - m + 1.0)
                + m * math.log(p)
                + (upper - m) * math.log1p(-p)
            )
        pmf = np.where(m <= upper, np.exp(logpmf), 0.0)
        self.prefix = np.minimum(1.0, np.cumsum(pmf, axis=1))
        suffix = np.zeros(n + 2)
        suffix[: n + 1] = np.cumsum(pmf[n, ::-1])[::-1]
        self.suffix = np.minimum(1.0, suffix)

    def mass_upto(self, n_totals: np.ndarray, m: int) -> np.ndarray:
        """B(p, N, 0, m) for an array of lengths N, which may be <= 0.

        Lengths <= 0 are degenerate at zero successes, which is exactly row
        N = 0 of the table, so clipping handles them.
        """
        if m < 0:
            return np.zeros(len(n_totals))
        rows = np.clip(n_totals, 0, None)
        cols = np.minimum(m, rows)
        return self.prefix[rows, cols]

    def region_exit(self, d_star: int) -> float:
        """B(p, n, d*+1, n): hard-decision weight leaves the radius-d* ball."""
        return float(self.suffix[min(d_star + 1, self.n + 1)])


def _probe_range(
    spectrum: WeightSpectrum, d_star: int | None, d_star_max: int | None
) -> range:
    """Radii to scan: all of [0, n] when the spectrum is complete, else only
    radii whose 2d* coverage the truncation actually provides."""
    n = spectrum.n
    known = spectrum.max_known_weight
    hi = n if known >= n else known // 2
    if d_star_max is not None:
        d_star_max = operator.index(d_star_max)
        if not 0 <= d_star_max:
            raise ValidationError(f"d_star_max must be >= 0, got {d_star_max}")
        hi = min(hi, d_star_max)
    if d_star is not None:
        d_star = operator.index(d_star)
        if not 0 <= d_star <= hi:
            raise ValidationError(
                f"d_star={d_star} outside the feasible range [0, {hi}] "
                f"(spectrum known through weight {known})"
            )
        return range(d_star, d_star + 1)
    return range(0, hi + 1)


@dataclass
class _PointArrays:
    """Ascending-weight term arrays shared by every variant at one point."""

    n: int
    ds: np.ndarray  # positive weights with A_d > 0, ascending
    a: np.ndarray  # multiplicities
    q: np.ndarray  # Q(sqrt(d)/sigma)
    table: _BinomialTable

    @classmethod
    def build(cls, spectrum: WeightSpectrum, ch: ChannelPoint) -> "_PointArrays":
        ds = np.array(spectrum.weights(), dtype=np.int64)
        a = np.array([spectrum.counts[int(d)] for d in ds], dtype=np.float64)
        q = q_function(np.sqrt(ds.astype(np.float64)) / ch.sigma)
        return cls(spectrum.n, ds, a, np.atleast_1d(q), _BinomialTable(ch.p_b, spectrum.n))

    def cut(self, d_max: int) -> int:
        """Number of leading entries with d <= d_max."""
        return int(np.searchsorted(self.ds, d_max, side="right"))


def _triplet_factors(
    ds: np.ndarray, n: int, ch: ChannelPoint, q: np.ndarray, theta_policy: ThetaPolicy
) -> np.ndarray:
    """Half the two-half-plane probability per weight: Q - Q^2/2 at the
    closed-form angle, or the quadrature value at the capped angle when the
    tight policy actually improves on pi/2."""
    factors = q - 0.5 * q * q
    if theta_policy is ThetaPolicy.TIGHT:
        # theta == 0 only at d == n where at most one codeword exists and the
        # factor is multiplied by zero anyway; keep the closed form there.
        for idx, d in enumerate(ds):
            theta = angle_upper_bound(int(d), int(d), n)
            if 0.0 < theta < 0.5 * math.pi:
                geom = TripletGeometry(int(d), n, theta)
                factors[idx] = 0.5 * triplet_probability(geom, ch.sigma)
    return factors


def _minimize(
    evaluate: Callable[[int], tuple[float, dict[int, float], float, float]],
    probe: range,
    variant: BoundVariant,
) -> BoundResult:
    """Scan radii and keep the smallest objective, ties to the smallest d*."""
    best: tuple[float, int] | None = None
    for d_star in probe:
        value = evaluate(d_star)[0]
        if not math.isfinite(value):
            raise ValidationError(f"objective at d_star={d_star} is {value!r}")
        if best is None or value < best[0]:
            best = (value, d_star)
    assert best is not None  # probe ranges are never empty
    value, d_star = best
    _, terms, tail, base = evaluate(d_star)
    return BoundResult(value, d_star, terms, tail, variant, base)


# --- scalar per-weight terms ----------------------------------------------


def _check_term_args(a_d: float, d: int, d_star: int, n: int) -> tuple[int, int, int]:
    d = operator.index(d)
    d_star = operator.index(d_star)
    n = operator.index(n)
    if not 1 <= d <= n:
        raise ValidationError(f"need 1 <= d <= n, got d={d}, n={n}")
    if not 0 <= d_star <= n:
        raise ValidationError(f"need 0 <= d_star <= n, got {d_star}")
    if not (math.isfinite(a_d) and a_d >= 0.0):
        raise ValidationError(f"multiplicity must be finite and >= 0, got {a_d!r}")
    return d, d_star, n


def pairwise_term(a_d: float, d: int, d_star: int, n: int, ch: ChannelPoint) -> float:
    """A_d Q(sqrt(d)/sigma) B(p_b, n-d, 0, d*-1).

    The binomial factor is the probability that the n-d positions agreeing
    with the transmitted word carry few enough hard errors to keep the
    received hard word within radius d* given a weight-d overtake, which is
    what sharpens the plain union term A_d Q.
    """
    d, d_star, n = _check_term_args(a_d, d, d_star, n)
    q = float(q_function(math.sqrt(d) / ch.sigma))
    return a_d * q * binomial_tail(ch.p_b, n - d, 0, d_star - 1)


def _triplet_factor_scalar(d: int, n: int, ch: ChannelPoint, theta_policy: ThetaPolicy) -> float:
    q = float(q_function(math.sqrt(d) / ch.sigma))
    if theta_policy is ThetaPolicy.TIGHT:
        theta = angle_upper_bound(d, d, n)
        if 0.0 < theta < 0.5 * math.pi:
            return 0.5 * triplet_probability(TripletGeometry(d, n, theta), ch.sigma)
    return q - 0.5 * q * q


def triplet_term(
    a_d: int,
    d: int,
    d_star: int,
    n: int,
    ch: ChannelPoint,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
) -> float:
    """Joint bound on {some weight-d codeword wins, hard word in the region}
    with weight-d competitors paired off two at a time.

    Even A_d: A_d (Q - Q^2/2) B(p_b, n-2d, 0, d*-1).  Odd A_d pairs off all
    but one and keeps a pairwise term for the leftover:
    (A_d - 1)(Q - Q^2/2) B(p_b, n-2d, 0, d*-1) + Q B(p_b, n-d, 0, d*-1).
    Needs an integer multiplicity; parity decides the split.
    """
    d, d_star, n = _check_term_args(a_d, d, d_star, n)
    if abs(a_d - round(a_d)) > 1e-6:
        raise ValidationError(f"pairing needs an integer multiplicity, got {a_d!r}")
    count = round(a_d)
    tf = _triplet_factor_scalar(d, n, ch, theta_policy)
    paired = binomial_tail(ch.p_b, n - 2 * d, 0, d_star - 1)
    if count % 2 == 0:
        return count * tf * paired
    q = float(q_function(math.sqrt(d) / ch.sigma))
    single = binomial_tail(ch.p_b, n - d, 0, d_star - 1)
    return (count - 1) * tf * paired + q * single


def h_term(
    a_d: float,
    d: int,
    d_star: int,
    n: int,
    ch: ChannelPoint,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
) -> float:
    """Unified per-weight term, valid for any real multiplicity A_d >= 0:

        min{ A_d Q B(p_b, n-d, 0, d*-1),
             (A_d - 1)(Q - Q^2/2) B(p_b, n-2d, 0, d*-1) + Q }.

    The second branch deliberately leaves the trailing Q without a binomial
    factor: that keeps it a valid bound for every real A_d (in particular
    ensemble averages below 1, where A_d - 1 goes negative), at the price of
    being slightly looser than the integer-parity split.
    """
    d, d_star, n = _check_term_args(a_d, d, d_star, n)
    q = float(q_function(math.sqrt(d) / ch.sigma))
    tf = _triplet_factor_scalar(d, n, ch, theta_policy)
    branch1 = a_d * q * binomial_tail(ch.p_b, n - d, 0, d_star - 1)
    branch2 = (a_d - 1.0) * tf * binomial_tail(ch.p_b, n - 2 * d, 0, d_star - 1) + q
    return min(branch1, branch2)


def h_prime_term(
    iowe_slice: Mapping[int, float],
    d: int,
    d_star: int,
    n: int,
    k: int,
    ch: ChannelPoint,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
) -> float:
    """Bit-error counterpart of the unified term for one codeword weight.

    With A_d = sum_i A_{i,d}, A'_d = sum_i (i/k) A_{i,d} and
    i^ = max{i : A_{i,d} > 0}:

        min{ A'_d Q B(p_b, n-d, 0, d*-1),
             (i^/k) [ (A_d - 1)(Q - Q^2/2) B(p_b, n-2d, 0, d*-1) + Q ] }.

    An all-zero slice contributes 0.
    """
    d, d_star, n = _check_term_args(0.0, d, d_star, n)
    k = operator.index(k)
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    a_d = 0.0
    a_prime = 0.0
    i_hat = 0
    for i in sorted(iowe_slice):
        count = iowe_slice[i]
        if not (math.isfinite(count) and count >= 0.0):
            raise ValidationError(f"slice count A_({i},{d})={count!r} must be >= 0")
        a_d += count
        a_prime += (i / k) * count
        if count > 0.0:
            i_hat = max(i_hat, operator.index(i))
    if a_d == 0.0:
        return 0.0
    q = float(q_function(math.sqrt(d) / ch.sigma))
    tf = _triplet_factor_scalar(d, n, ch, theta_policy)
    branch1 = a_prime * q * binomial_tail(ch.p_b, n - d, 0, d_star - 1)
    branch2 = (i_hat / k) * (
        (a_d - 1.0) * tf * binomial_tail(ch.p_b, n - 2 * d, 0, d_star - 1) + q
    )
    return min(branch1, branch2)


# --- whole-curve bounds ----------------------------------------------------


def union_bound(spectrum: WeightSpectrum, ch: ChannelPoint) -> BoundResult:
    """Plain union bound sum_d A_d Q(sqrt(d)/sigma) over the full spectrum."""
    if spectrum.kind is SpectrumKind.TRUNCATED:
        raise ValidationError("union bound needs the full spectrum, not a truncated one")
    arrays = _PointArrays.build(spectrum, ch)
    terms = arrays.a * arrays.q
    value = float(np.sum(terms))
    per_d = {int(d): float(t) for d, t in zip(arrays.ds, terms)}
    return BoundResult(value, spectrum.n, per_d, 0.0, BoundVariant.UNION)


def _combined_bound(
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    variant: BoundVariant,
    term_fn: Callable[["_PointArrays", int, int], np.ndarray],
    d_star: int | None,
    d_star_max: int | None,
) -> BoundResult:
    arrays = _PointArrays.build(spectrum, ch)

    def evaluate(radius: int):
        cut = arrays.cut(2 * radius)
        terms = term_fn(arrays, cut, radius)
        tail = arrays.table.region_exit(radius)
        value = float(np.sum(terms)) + tail
        per_d = {int(d): float(t) for d, t in zip(arrays.ds[:cut], terms)}
        return value, per_d, tail, 0.0

    return _minimize(evaluate, _probe_range(spectrum, d_star, d_star_max), variant)


def truncated_union_bound(
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    *,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """min over d* of sum_{d <= 2d*} A_d Q(sqrt(d)/sigma) + B(p_b, n, d*+1, n).

    Any error event with the hard word inside the radius-d* ball already has
    a competitor within weight 2d*, so the union needs only those terms; the
    tail pays for leaving the ball.  d* = n recovers the union bound exactly,
    and the d* = 0 objective 1 - (1 - p_b)^n keeps the minimum below 1 even
    where the union bound diverges.
    """

    def terms(arrays: _PointArrays, cut: int, radius: int) -> np.ndarray:
        return arrays.a[:cut] * arrays.q[:cut]

    return _combined_bound(
        spectrum, ch, BoundVariant.TRUNCATED_UNION, terms, d_star, d_star_max
    )


def pairwise_error_bound(
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    *,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """Combined bound with each union term refined by the conditional
    binomial factor B(p_b, n-d, 0, d*-1)."""

    def terms(arrays: _PointArrays, cut: int, radius: int) -> np.ndarray:
        mass = arrays.table.mass_upto(arrays.n - arrays.ds[:cut], radius - 1)
        return arrays.a[:cut] * arrays.q[:cut] * mass

    return _combined_bound(spectrum, ch, BoundVariant.PAIRWISE_IMPROVED, terms, d_star, d_star_max)


def triplet_error_bound(
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    *,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """Combined bound with weight classes paired off two at a time (exact
    integer spectra only; parity of each A_d decides the leftover term)."""
    for d in spectrum.weights():
        if abs(spectrum.counts[d] - round(spectrum.counts[d])) > 1e-6:
            raise ValidationError(
                f"pairing needs integer multiplicities, got A_{d}={spectrum.counts[d]!r}"
            )

    def terms(arrays: _PointArrays, cut: int, radius: int) -> np.ndarray:
        ds = arrays.ds[:cut]
        counts = np.round(arrays.a[:cut])
        q = arrays.q[:cut]
        tf = _triplet_factors(ds, arrays.n, ch, q, theta_policy)
        paired = arrays.table.mass_upto(arrays.n - 2 * ds, radius - 1)
        single = arrays.table.mass_upto(arrays.n - ds, radius - 1)
        odd = counts % 2 == 1
        return np.where(
            odd,
            (counts - 1.0) * tf * paired + q * single,
            counts * tf * paired,
        )

    return _combined_bound(spectrum, ch, BoundVariant.TRIPLET_IMPROVED, terms, d_star, d_star_max)


def word_error_bound(
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    *,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """Combined word-error bound built from the unified per-weight term
    min{A_d Q B(n-d), (A_d - 1)(Q - Q^2/2) B(n-2d) + Q}; works for any real
    multiplicities, ensemble averages included."""

    def terms(arrays: _PointArrays, cut: int, radius: int) -> np.ndarray:
        ds = arrays.ds[:cut]
        a = arrays.a[:cut]
        q = arrays.q[:cut]
        tf = _triplet_factors(ds, arrays.n, ch, q, theta_policy)
        single = arrays.table.mass_upto(arrays.n - ds, radius - 1)
        paired = arrays.table.mass_upto(arrays.n - 2 * ds, radius - 1)
        return np.minimum(a * q * single, (a - 1.0) * tf * paired + q)

    return _combined_bound(spectrum, ch, BoundVariant.UNIFIED_WORD, terms, d_star, d_star_max)


def bit_error_bound(
    iowe: InputOutputSpectrum,
    ch: ChannelPoint,
    *,
    theta_policy: ThetaPolicy = ThetaPolicy.CLOSED_FORM,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """Combined bit-error bound from the input-output spectrum.

    Refuses ensemble-average input: the bit terms need max{i : A_{i,d} > 0}
    per weight, and an ensemble average has positive mass at every i, which
    would silently degrade i^/k to 1.
    """
    if iowe.kind is SpectrumKind.ENSEMBLE_AVERAGE:
        raise ValidationError(
            "bit bound needs a per-code IOWE; ensemble averages have no usable i^ profile"
        )
    k = iowe.k
    marginal = iowe.weight_spectrum()
    arrays = _PointArrays.build(marginal, ch)
    a_prime = np.zeros(len(arrays.ds))
    i_hat_frac = np.zeros(len(arrays.ds))
    for idx, d in enumerate(arrays.ds):
        profile = iowe.slice(int(d))
        a_prime[idx] = sum((i / k) * profile[i] for i in sorted(profile))
        i_hat_frac[idx] = max(i for i, c in profile.items() if c > 0.0) / k

    def evaluate(radius: int):
        cut = arrays.cut(2 * radius)
        ds = arrays.ds[:cut]
        a = arrays.a[:cut]
        q = arrays.q[:cut]
        tf = _triplet_factors(ds, arrays.n, ch, q, theta_policy)
        single = arrays.table.mass_upto(arrays.n - ds, radius - 1)
        paired = arrays.table.mass_upto(arrays.n - 2 * ds, radius - 1)
        terms = np.minimum(
            a_prime[:cut] * q * single,
            i_hat_frac[:cut] * ((a - 1.0) * tf * paired + q),
        )
        tail = arrays.table.region_exit(radius)
        value = float(np.sum(terms)) + tail
        per_d = {int(d): float(t) for d, t in zip(ds, terms)}
        return value, per_d, tail, 0.0

    return _minimize(
        evaluate, _probe_range(marginal, d_star, d_star_max), BoundVariant.UNIFIED_BIT
    )


# --- generic combination with an external base bound ------------------------


class UnionBoundProvider:
    """T_u of the restricted spectrum: sum of A_d Q(sqrt(d)/sigma)."""

    def __call__(self, sub_spectrum: WeightSpectrum, ch: ChannelPoint) -> float:
        ds = sub_spectrum.weights()
        if not ds:
            return 0.0
        a = np.array([sub_spectrum.counts[d] for d in ds])
        q = np.atleast_1d(q_function(np.sqrt(np.array(ds, dtype=np.float64)) / ch.sigma))
        return float(np.sum(a * q))


class FileBoundProvider:
    """Replay of a precomputed base-bound table.

    File format: '#' comments plus one 'snr_db d_star value' record per
    line.  Lookup keys on the channel point's snr_db (matched to 1e-9) and
    the radius recovered from the sub-spectrum's truncation 2d*.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._entries: dict[int, list[tuple[float, float]]] = {}
        for lineno, line in _provider_lines(self.path):
            parts = line.split()
            if len(parts) != 3:
                raise ProviderLookupError(
                    f"{self.path}:{lineno}: expected 'snr_db d_star value'"
                )
            try:
                snr = float(parts[0])
                d_star = int(parts[1])
                value = float(parts[2])
            except ValueError as exc:
                raise ProviderLookupError(f"{self.path}:{lineno}: {exc}") from None
            if d_star < 0 or not math.isfinite(value) or value < 0.0:
                raise ProviderLookupError(
                    f"{self.path}:{lineno}: need d_star >= 0 and a finite value >= 0"
                )
            self._entries.setdefault(d_star, []).append((snr, value))

    def __call__(self, sub_spectrum: WeightSpectrum, ch: ChannelPoint) -> float:
        truncation = sub_spectrum.truncation
        if truncation is None or truncation % 2:
            raise ProviderLookupError(
                "file provider needs sub-spectra carrying an even truncation 2d*"
            )
        d_star = truncation // 2
        for snr, value in self._entries.get(d_star, ()):
            if abs(snr - ch.snr_db) <= 1e-9:
                return value
        raise ProviderLookupError(
            f"{self.path}: no entry for snr_db={ch.snr_db!r}, d_star={d_star}"
        )


def _provider_lines(path: Path):
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def gfbt_combine(
    provider: BaseBoundProvider,
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    *,
    d_star: int | None = None,
    d_star_max: int | None = None,
) -> BoundResult:
    """min over d* of provider(spectrum restricted to 2d*) + B(p_b, n, d*+1, n).

    Any bound on the subcode spanned by weights <= 2d* is a valid base term,
    so this combines external bounds with the region tail; with
    UnionBoundProvider it reproduces truncated_union_bound exactly.  An
    empty sub-spectrum short-circuits to base 0 (a subcode with only the
    transmitted word cannot produce an error inside the region).
    """
    table = _BinomialTable(ch.p_b, spectrum.n)

    def evaluate(radius: int):
        sub = spectrum.restrict(2 * radius)
        if not sub.weights():
            base = 0.0
        else:
            try:
                base = float(provider(sub, ch))
            except MlboundsError as exc:
                raise type(exc)(f"base bound failed at d_star={radius}: {exc}") from exc
            if not (math.isfinite(base) and base >= 0.0):
                raise ValidationError(
                    f"provider returned {base!r} at d_star={radius}, need finite >= 0"
                )
        tail = table.region_exit(radius)
        return base + tail, {}, tail, base

    return _minimize(evaluate, _probe_range(spectrum, d_star, d_star_max), BoundVariant.GFBT_COMBINED)


def optimize_dstar(
    term_evaluator: Callable[[WeightSpectrum, ChannelPoint, int], float],
    spectrum: WeightSpectrum,
    ch: ChannelPoint,
    probe_range,
) -> tuple[float, int]:
    """Exhaustive scan of term_evaluator(spectrum, ch, d_star) over
    probe_range; returns (best value, smallest optimal d_star)."""
    best: tuple[float, int] | None = None
    for d_star in probe_range:
        d_star = operator.index(d_star)
        if not 0 <= d_star <= spectrum.n:
            raise ValidationError(f"d_star={d_star} outside [0, {spectrum.n}]")
        value = float(term_evaluator(spectrum, ch, d_star))
        if best is None or value < best[0]:
            best = (value, d_star)
    if best is None:
        raise ValidationError("empty probe range")
    return best
