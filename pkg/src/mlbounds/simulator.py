"""Monte Carlo validation harness: BPSK over AWGN with exact ML decoding.

The all-zero codeword is transmitted throughout (error probability of a
linear code on this channel does not depend on the transmitted word), so a
codeword c beats the transmitted one exactly when its support score
S(c) = sum_{t in supp(c)} y_t goes negative, and an ML word error happens
when min_c S(c) < 0.  A tie S(c) = 0 resolves to the smallest message
index, i.e. the transmitted word when it participates.

The batch engine does not score all 2^k codewords per trial.  Sorting y
ascending gives prefix sums LB(d) = sum of the d smallest samples, a lower
bound on every weight-d score, so only weight classes with LB(d) <= 0 can
contain a winner and only those are scanned (vectorized over the trials
that need them).  The pruning is exact: skipped classes provably have all
scores positive.
"""

from __future__ import annotations

import enum
import json
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .spectrum import LinearCode

__all__ = [
    "BLOCK",
    "ListOutcome",
    "TrialOutcome",
    "SimConfig",
    "SimReport",
    "wilson_interval",
    "ml_decode",
    "list_decode",
    "decode_trial",
    "simulate",
]

# trials per RNG block; the stream for block b is Philox(key=[seed, b]), so
# any worker partition of the blocks reproduces identical noise, and a
# partial final block is a prefix of the full block's stream
BLOCK = 1024

_WILSON_Z = 1.96  # 95% two-sided


class ListOutcome(enum.Enum):
    """Fate of the transmitted codeword under radius-d* list decoding."""

    CORRECT_IN_LIST_WON = "correct-in-list-won"
    CORRECT_IN_LIST_LOST = "correct-in-list-lost"
    NOT_IN_LIST = "not-in-list"


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial decoding record for the all-zero transmission.

    nearest_competitor_weight is the Hamming weight of the winning
    competitor and is present exactly when ml_word_error; ml_tie flags an
    exactly achieved score tie (zero probability under continuous noise, so
    a nonzero tie count signals a numerics bug).
    """

    ml_word_error: bool
    ml_bit_errors: int
    hard_decision_weight: int
    list_outcome: ListOutcome
    nearest_competitor_weight: int | None
    ml_tie: bool


@dataclass(frozen=True)
class SimConfig:
    code: LinearCode
    sigma: float
    d_star: int
    trials: int
    seed: int
    max_k_for_ml: int = 26
    work_limit: int = 400_000_000_000

    def __post_init__(self):
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be finite and > 0, got {self.sigma!r}")
        d_star = operator.index(self.d_star)
        if not 0 <= d_star <= self.code.n:
            raise ValidationError(f"need 0 <= d_star <= n, got {d_star}")
        if operator.index(self.trials) < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        seed = operator.index(self.seed)
        if not 0 <= seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValidationError(f"need 0 <= successes <= trials, got {successes}/{trials}")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class SimReport:
    """Aggregated counters of one simulation run with Wilson 95% CIs.

    joint_errors_by_weight[d] counts trials where some weight-d codeword
    beat the transmitted one AND the hard-decision word stayed within
    radius d_star (the joint events the combined bounds control);
    bit_errors totals information-bit errors across all trials.
    """

    n: int
    k: int
    sigma: float
    snr_db: float
    d_star: int
    trials: int
    seed: int
    word_errors: int
    bit_errors: int
    region_exits: int
    ties: int
    joint_errors_by_weight: dict[int, int]

    @property
    def word_error_rate(self) -> float:
        return self.word_errors / self.trials

    @property
    def word_error_ci(self) -> tuple[float, float]:
        return wilson_interval(self.word_errors, self.trials)

    @property
    def bit_error_rate(self) -> float:
        return self.bit_errors / (self.trials * self.k)

    @property
    def bit_error_ci(self) -> tuple[float, float]:
        return wilson_interval(self.bit_errors, self.trials * self.k)

    @property
    def region_exit_rate(self) -> float:
        return self.region_exits / self.trials

    @property
    def region_exit_ci(self) -> tuple[float, float]:
        return wilson_interval(self.region_exits, self.trials)

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "k": self.k,
            "sigma": self.sigma,
            "snr_db": self.snr_db,
            "d_star": self.d_star,
            "trials": self.trials,
            "seed": self.seed,
            "word_errors": self.word_errors,
            "word_error_rate": self.word_error_rate,
            "word_error_ci": list(self.word_error_ci),
            "bit_errors": self.bit_errors,
            "bit_error_rate": self.bit_error_rate,
            "bit_error_ci": list(self.bit_error_ci),
            "region_exits": self.region_exits,
            "region_exit_rate": self.region_exit_rate,
            "region_exit_ci": list(self.region_exit_ci),
            "ties": self.ties,
            "joint_errors_by_weight": {str(d): c for d, c in sorted(self.joint_errors_by_weight.items())},
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [
            f"[{self.n},{self.k}] code, sigma={self.sigma!r} ({self.snr_db:.4f} dB Eb/N0), "
            f"d_star={self.d_star}, trials={self.trials}, seed={self.seed}",
            f"word errors : {self.word_errors}  rate={self.word_error_rate:.6e}  "
            f"ci95=[{self.word_error_ci[0]:.6e}, {self.word_error_ci[1]:.6e}]",
            f"bit errors  : {self.bit_errors}  rate={self.bit_error_rate:.6e}  "
            f"ci95=[{self.bit_error_ci[0]:.6e}, {self.bit_error_ci[1]:.6e}]",
            f"region exits: {self.region_exits}  rate={self.region_exit_rate:.6e}  "
            f"ci95=[{self.region_exit_ci[0]:.6e}, {self.region_exit_ci[1]:.6e}]",
            f"score ties  : {self.ties}",
        ]
        if self.joint_errors_by_weight:
            pairs = ", ".join(f"{d}:{c}" for d, c in sorted(self.joint_errors_by_weight.items()))
            lines.append(f"joint errors by competitor weight (within region): {pairs}")
        else:
            lines.append("joint errors by competitor weight (within region): none")
        return "\n".join(lines)


# --- codebook construction ---------------------------------------------------


@lru_cache(maxsize=4)
def _codebook(code: LinearCode) -> np.ndarray:
    """All 2^k codeword bitmasks in message order (message = array index)."""
    cw = np.zeros(1 << code.k, dtype=np.uint64)
    for j, row in enumerate(code.rows):
        half = 1 << j
        cw[half : 2 * half] = cw[:half] ^ np.uint64(row)
    return cw


class _ClassLayout:
    """Codebook sorted by Hamming weight with a float 0/1 bit matrix.

    bits rows follow the weight-sorted order; within a class the message
    indices stay ascending (stable sort), so a first-occurrence argmin is
    also the smallest-message tie-break within that class.
    """

    def __init__(self, code: LinearCode):
        cw = _codebook(code)
        weights = np.bitwise_count(cw).astype(np.int16)
        order = np.argsort(weights, kind="stable")
        self.msgs = order.astype(np.uint32)
        sorted_w = weights[order]
        self.class_weights = [int(d) for d in np.unique(sorted_w) if d >= 1]
        self.bounds = {
            int(d): (
                int(np.searchsorted(sorted_w, d, side="left")),
                int(np.searchsorted(sorted_w, d, side="right")),
            )
            for d in self.class_weights
        }
        shifts = np.arange(code.n, dtype=np.uint64)
        self.bits = (
            ((cw[order][:, None] >> shifts) & np.uint64(1)).astype(np.float64)
        )


@lru_cache(maxsize=4)
def _layout(code: LinearCode) -> _ClassLayout:
    return _ClassLayout(code)


def _guard(code: LinearCode, trials: int, max_k: int, work_limit: int) -> None:
    if code.k > max_k:
        raise ResourceLimitError(
            f"ML decoding over 2^{code.k} codewords exceeds the k <= {max_k} guard"
        )
    work = (1 << code.k) * trials
    if work > work_limit:
        raise ResourceLimitError(
            f"2^k * trials = {work:.3e} exceeds the work limit {work_limit:.3e}; "
            "raise work_limit only for deliberate long runs"
        )
    footprint = (1 << code.k) * (8 * code.n + 24)
    if footprint > 3_500_000_000:
        raise ResourceLimitError(
            f"codebook tables would need ~{footprint / 1e9:.1f} GB"
        )


def _noise_block(seed: int, block_index: int, m: int, n: int, sigma: float) -> np.ndarray:
    key = np.array([seed, block_index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return 1.0 + sigma * gen.standard_normal((m, n))


# --- single-trial reference decoders ----------------------------------------


def _scores(code: LinearCode, y: np.ndarray) -> np.ndarray:
    layout = _layout(code)
    raw = layout.bits @ np.asarray(y, dtype=np.float64)
    # undo the weight sort so scores[i] belongs to message i
    out = np.empty_like(raw)
    out[layout.msgs] = raw
    return out


def _check_received(code: LinearCode, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (code.n,):
        raise ValidationError(f"received vector must have shape ({code.n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValidationError("received vector must be finite")
    return y


def ml_decode(code: LinearCode, y, *, max_k: int = 26) -> int:
    """Brute-force ML decoding: smallest message index among the
    Euclidean-nearest codewords (argmin of the support score)."""
    _guard(code, 1, max_k, 1 << 62)
    y = _check_received(code, y)
    return int(np.argmin(_scores(code, y)))


def _hard_mask(y: np.ndarray) -> int:
    # Algorithm step S1 boundary rule: y_t <= 0 maps to bit 1
    mask = 0
    for t in range(len(y)):
        if y[t] <= 0.0:
            mask |= 1 << t
    return mask


def list_decode(code: LinearCode, y, d_star: int, *, max_k: int = 26) -> int | None:
    """Hard-decision list decoding: collect codewords within Hamming
    distance d_star of the hard-decision word, return the Euclidean-nearest
    list member (smallest message index on ties), or None when the list is
    empty (declared decoding failure)."""
    _guard(code, 1, max_k, 1 << 62)
    y = _check_received(code, y)
    d_star = operator.index(d_star)
    if not 0 <= d_star <= code.n:
        raise ValidationError(f"need 0 <= d_star <= n, got {d_star}")
    cw = _codebook(code)
    dist = np.bitwise_count(cw ^ np.uint64(_hard_mask(y)))
    members = np.nonzero(dist <= d_star)[0]
    if members.size == 0:
        return None
    scores = _scores(code, y)[members]
    return int(members[np.argmin(scores)])


def decode_trial(code: LinearCode, y, d_star: int, *, max_k: int = 26) -> TrialOutcome:
    """Full per-trial record for the all-zero transmission (reference path;
    the batch engine in simulate() reproduces these outcomes with pruning)."""
    _guard(code, 1, max_k, 1 << 62)
    y = _check_received(code, y)
    d_star = operator.index(d_star)
    if not 0 <= d_star <= code.n:
        raise ValidationError(f"need 0 <= d_star <= n, got {d_star}")
    cw = _codebook(code)
    scores = _scores(code, y)
    winner = int(np.argmin(scores))
    best = scores[winner]
    ml_tie = int(np.count_nonzero(scores == best)) >= 2
    word_error = winner != 0
    bit_errors = int(np.bitwise_count(np.uint64(winner))) if word_error else 0
    competitor_weight = int(np.bitwise_count(cw[winner])) if word_error else None

    hard = _hard_mask(y)
    hard_weight = int(np.bitwise_count(np.uint64(hard)))
    if hard_weight > d_star:
        outcome = ListOutcome.NOT_IN_LIST
    else:
        dist = np.bitwise_count(cw ^ np.uint64(hard))
        members = np.nonzero(dist <= d_star)[0]
        list_winner = int(members[np.argmin(scores[members])])
        outcome = (
            ListOutcome.CORRECT_IN_LIST_WON
            if list_winner == 0
            else ListOutcome.CORRECT_IN_LIST_LOST
        )
    return TrialOutcome(
        ml_word_error=word_error,
        ml_bit_errors=bit_errors,
        hard_decision_weight=hard_weight,
        list_outcome=outcome,
        nearest_competitor_weight=competitor_weight,
        ml_tie=ml_tie,
    )


# --- batch engine ------------------------------------------------------------


class _Counters:
    def __init__(self):
        self.word_errors = 0
        self.bit_errors = 0
        self.region_exits = 0
        self.ties = 0
        self.joint: dict[int, int] = {}

    def merge(self, other: "_Counters") -> None:
        self.word_errors += other.word_errors
        self.bit_errors += other.bit_errors
        self.region_exits += other.region_exits
        self.ties += other.ties
        for d, c in other.joint.items():
            self.joint[d] = self.joint.get(d, 0) + c


# cap on the trials x class-size score matrix materialized per matmul
_SCAN_CELL_BUDGET = 32_000_000


def _run_block(layout: _ClassLayout, cfg: SimConfig, block_index: int, m: int) -> _Counters:
    n = cfg.code.n
    y = _noise_block(cfg.seed, block_index, m, n, cfg.sigma)
    counters = _Counters()

    hard_w = np.count_nonzero(y <= 0.0, axis=1)
    in_region = hard_w <= cfg.d_star
    counters.region_exits = int(m - np.count_nonzero(in_region))

    # LB[:, d] = sum of the d smallest samples: lower bound on every
    # weight-d support score, exact pruning criterion
    lb = np.cumsum(np.sort(y, axis=1), axis=1)

    best = np.zeros(m)
    mult = np.ones(m, dtype=np.int64)  # transmitted word scores exactly 0
    best_msg = np.zeros(m, dtype=np.uint32)

    for d in layout.class_weights:
        cand = np.nonzero(lb[:, d - 1] <= 0.0)[0]
        if cand.size == 0:
            continue
        start, stop = layout.bounds[d]
        bits_t = layout.bits[start:stop].T
        class_msgs = layout.msgs[start:stop]
        chunk = max(1, _SCAN_CELL_BUDGET // (stop - start))
        errors_in_region = 0
        for lo in range(0, cand.size, chunk):
            rows = cand[lo : lo + chunk]
            scores = y[rows] @ bits_t
            cmin = scores.min(axis=1)
            ccnt = np.count_nonzero(scores == cmin[:, None], axis=1)
            cmsg = class_msgs[np.argmin(scores, axis=1)]
            errors_in_region += int(np.count_nonzero((cmin < 0.0) & in_region[rows]))
            upd = cmin < best[rows]
            eq = cmin == best[rows]
            idx = rows[upd]
            best[idx] = cmin[upd]
            mult[idx] = ccnt[upd]
            best_msg[idx] = cmsg[upd]
            idx_eq = rows[eq]
            mult[idx_eq] += ccnt[eq]
            best_msg[idx_eq] = np.minimum(best_msg[idx_eq], cmsg[eq])
        if errors_in_region:
            counters.joint[d] = errors_in_region

    errors = best < 0.0
    counters.word_errors = int(np.count_nonzero(errors))
    counters.bit_errors = int(np.bitwise_count(best_msg[errors].astype(np.uint64)).sum())
    counters.ties = int(np.count_nonzero(mult >= 2))
    return counters


def simulate(cfg: SimConfig, *, workers: int = 1) -> SimReport:
    """Run cfg.trials all-zero transmissions and aggregate exact counters.

    Noise for trial t comes from the Philox stream keyed (seed, t // BLOCK),
    so results are bit-identical for any worker count and for any partition
    of the trial range into blocks.
    """
    _guard(cfg.code, cfg.trials, cfg.max_k_for_ml, cfg.work_limit)
    workers = operator.index(workers)
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    layout = _layout(cfg.code)

    blocks = [
        (b, min(BLOCK, cfg.trials - b * BLOCK))
        for b in range((cfg.trials + BLOCK - 1) // BLOCK)
    ]
    total = _Counters()
    if workers == 1:
        for block_index, m in blocks:
            total.merge(_run_block(layout, cfg, block_index, m))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                lambda bm: _run_block(layout, cfg, bm[0], bm[1]), blocks
            )
            for counters in results:
                total.merge(counters)

    rate = cfg.code.k / cfg.code.n
    snr_db = -10.0 * math.log10(2.0 * rate * cfg.sigma * cfg.sigma)
    return SimReport(
        n=cfg.code.n,
        k=cfg.code.k,
        sigma=float(cfg.sigma),
        snr_db=snr_db,
        d_star=int(cfg.d_star),
        trials=int(cfg.trials),
        seed=int(cfg.seed),
        word_errors=total.word_errors,
        bit_errors=total.bit_errors,
        region_exits=total.region_exits,
        ties=total.ties,
        joint_errors_by_weight=dict(sorted(total.joint.items())),
    )
