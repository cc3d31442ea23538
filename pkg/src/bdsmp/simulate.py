"""Monte Carlo validation of the ladder models.

Simulates trajectories of a birth-death ladder with the exact perturbed
intensities (no truncation involved), so long-run occupation fractions,
return times, and first-passage times can be checked against the
analytic machinery within statistical error.

Reproducibility contract: all randomness flows through a counter-based
Philox generator keyed by the caller's seed.  The same inputs produce
bit-identical results, independent of platform or call order.  Each
replication of a first-passage experiment gets its own jumped stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, RangeError
from .model import IntensityModel
from .reduction import ReducedModel

_BLOCK = 1 << 16
_BATCHES = 20


class _UniformStream:
    """Buffered uniforms from a Philox stream, consumed one at a time.

    Draws are returned in generator order regardless of block size, so the
    consumption sequence (and therefore every simulation result) is fixed
    by the seed alone.
    """

    def __init__(self, bit_generator: np.random.BitGenerator) -> None:
        self._gen = np.random.Generator(bit_generator)
        self._buf: list[float] = []
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


def _sojourn(u: float, lam: float, geometric: bool) -> float:
    # u is uniform on [0, 1); 1 - u lies in (0, 1] so the logs are finite.
    if geometric:
        if lam >= 1.0:
            return 1.0
        k = math.ceil(math.log(1.0 - u) / math.log1p(-lam))
        return float(max(k, 1))
    return -math.log(1.0 - u) / lam


@dataclass(frozen=True)
class SimulationResult:
    """Summary statistics of one simulated trajectory."""

    occupation: np.ndarray
    occupation_se: np.ndarray
    mean_return: dict[int, tuple[float, float, int]]
    mean_hit_0_from_1: tuple[float, float, int] | None
    horizon: float
    seed: int

    def __post_init__(self) -> None:
        total = float(math.fsum(self.occupation))
        if abs(total - 1.0) > 1e-12:
            raise InvariantViolation(
                f"occupation fractions sum to {total!r}, expected 1"
            )


def simulate_path(
    m: IntensityModel,
    eps: float,
    horizon: float,
    seed: int,
    start: int = 0,
) -> SimulationResult:
    """Simulate one trajectory of length ``horizon`` in continuous time.

    Occupation fractions are exact time averages over ``[0, horizon]``
    (the final sojourn is truncated at the horizon).  Their standard
    errors come from 20 equal-length batch means.  Return times are the
    spans between successive landings on a state, which are independent
    by regeneration; the initial position counts as a landing.  The
    absorption statistic times excursions from the moment the chain
    steps 0 -> 1 until it next lands on 0.
    """
    if not 0.0 < eps <= m.eps0:
        raise RangeError(f"eps={eps!r} outside (0, {m.eps0!r}]")
    if horizon <= 0.0:
        raise RangeError("horizon must be positive")
    if not 0 <= start <= m.N:
        raise RangeError(f"start state {start} outside 0..{m.N}")

    n = m.N + 1
    lam_tot = [m.lam_total(i, eps) for i in range(n)]
    p_up = [m.lam(i, "+", eps) / lam_tot[i] for i in range(n)]
    geometric = m.sojourn_family == "geometric"

    uni = _UniformStream(np.random.Philox(seed))
    batch_len = horizon / _BATCHES
    occ = [[0.0] * n for _ in range(_BATCHES)]

    last_entry = [math.nan] * n
    ret_count = [0] * n
    ret_sum = [0.0] * n
    ret_sumsq = [0.0] * n

    hit_count = 0
    hit_sum = 0.0
    hit_sumsq = 0.0
    armed_at: float | None = None

    t = 0.0
    state = start
    last_entry[state] = 0.0
    top = m.N

    while t < horizon:
        u_dir = uni.next()
        u_soj = uni.next()
        t_next = t + _sojourn(u_soj, lam_tot[state], geometric)

        # Spread the sojourn over the batch grid, clipped at the horizon.
        a = t
        b = t_next if t_next < horizon else horizon
        while a < b:
            i = int(a / batch_len)
            if i >= _BATCHES:
                i = _BATCHES - 1
            edge = (i + 1) * batch_len
            if edge > b:
                edge = b
            occ[i][state] += edge - a
            if edge <= a:
                break
            a = edge

        nxt = state + 1 if u_dir < p_up[state] else state - 1
        if nxt < 0:
            nxt = 0
        elif nxt > top:
            nxt = top

        if t_next <= horizon:
            prev = last_entry[nxt]
            if prev == prev:  # not NaN
                d = t_next - prev
                ret_count[nxt] += 1
                ret_sum[nxt] += d
                ret_sumsq[nxt] += d * d
            last_entry[nxt] = t_next
            if state == 0 and nxt == 1:
                if armed_at is None:
                    armed_at = t_next
            elif nxt == 0 and armed_at is not None:
                d = t_next - armed_at
                hit_count += 1
                hit_sum += d
                hit_sumsq += d * d
                armed_at = None

        t = t_next
        state = nxt

    fractions = np.array(
        [math.fsum(occ[b][i] for b in range(_BATCHES)) / horizon for i in range(n)]
    )
    batch_frac = np.array(occ) / batch_len
    occupation_se = batch_frac.std(axis=0, ddof=1) / math.sqrt(_BATCHES)

    mean_return: dict[int, tuple[float, float, int]] = {}
    for i in range(n):
        c = ret_count[i]
        if c == 0:
            continue
        mean = ret_sum[i] / c
        var = max(ret_sumsq[i] / c - mean * mean, 0.0)
        se = math.sqrt(var / c) if c > 1 else 0.0
        mean_return[i] = (mean, se, c)

    hit: tuple[float, float, int] | None = None
    if hit_count > 0:
        mean = hit_sum / hit_count
        var = max(hit_sumsq / hit_count - mean * mean, 0.0)
        se = math.sqrt(var / hit_count) if hit_count > 1 else 0.0
        hit = (mean, se, hit_count)

    return SimulationResult(
        occupation=fractions,
        occupation_se=occupation_se,
        mean_return=mean_return,
        mean_hit_0_from_1=hit,
        horizon=horizon,
        seed=seed,
    )


def occupation_estimate(result: SimulationResult) -> np.ndarray:
    """Occupation fractions of a simulated trajectory (sums to one)."""
    return result.occupation


def hitting_estimate(
    m: IntensityModel,
    eps: float,
    start: int,
    target: int,
    replications: int,
    seed: int,
) -> tuple[float, float]:
    """Mean first-passage time from ``start`` to ``target`` over independent runs.

    Each replication runs on its own jumped Philox stream, so the estimate
    is reproducible and replications stay independent.  When ``start`` and
    ``target`` coincide this measures the return time (at least one jump).
    """
    if not 0.0 < eps <= m.eps0:
        raise RangeError(f"eps={eps!r} outside (0, {m.eps0!r}]")
    for name, s in (("start", start), ("target", target)):
        if not 0 <= s <= m.N:
            raise RangeError(f"{name} state {s} outside 0..{m.N}")
    if replications < 1:
        raise RangeError("replications must be >= 1")

    n = m.N + 1
    lam_tot = [m.lam_total(i, eps) for i in range(n)]
    p_up = [m.lam(i, "+", eps) / lam_tot[i] for i in range(n)]
    geometric = m.sojourn_family == "geometric"
    base = np.random.Philox(seed)
    top = m.N

    total = 0.0
    totalsq = 0.0
    for rep in range(replications):
        uni = _UniformStream(base.jumped(rep))
        t = 0.0
        state = start
        while True:
            u_dir = uni.next()
            u_soj = uni.next()
            t += _sojourn(u_soj, lam_tot[state], geometric)
            nxt = state + 1 if u_dir < p_up[state] else state - 1
            if nxt < 0:
                nxt = 0
            elif nxt > top:
                nxt = top
            state = nxt
            if state == target:
                break
        total += t
        totalsq += t * t

    mean = total / replications
    var = max(totalsq / replications - mean * mean, 0.0)
    se = math.sqrt(var / replications) if replications > 1 else 0.0
    return mean, se


def reduced_hitting_estimate(
    rm: ReducedModel[float],
    start: int,
    target: int,
    replications: int,
    seed: int,
) -> tuple[float, float]:
    """Mean first-passage time simulated on a reduced numeric chain.

    The reduced chain keeps the window's transition probabilities and
    folds excursions below/above the window into the boundary branches,
    so the boundary's outward direction acts as a self-loop whose
    direction-conditional sojourn mean ``e / p`` absorbs the excursion
    time.  Sojourns are drawn exponentially with those means, which
    preserves every expected first-passage time of the reduced process.
    """
    for name, s in (("start", start), ("target", target)):
        if not rm.lo <= s <= rm.hi:
            raise RangeError(f"{name} state {s} outside window {rm.lo}..{rm.hi}")
    if replications < 1:
        raise RangeError("replications must be >= 1")

    means: dict[int, tuple[float, float]] = {}
    for i, sd in rm.states.items():
        down = sd.e_minus / sd.p_minus if sd.p_minus > 0.0 else 0.0
        up = sd.e_plus / sd.p_plus if sd.p_plus > 0.0 else 0.0
        means[i] = (down, up)

    base = np.random.Philox(seed)
    total = 0.0
    totalsq = 0.0
    for rep in range(replications):
        uni = _UniformStream(base.jumped(rep))
        t = 0.0
        state = start
        while True:
            u_dir = uni.next()
            u_soj = uni.next()
            sd = rm.states[state]
            if u_dir < sd.p_plus:
                mean_soj = means[state][1]
                nxt = state + 1
            else:
                mean_soj = means[state][0]
                nxt = state - 1
            t += -math.log(1.0 - u_soj) * mean_soj
            if nxt < rm.lo:
                nxt = rm.lo
            elif nxt > rm.hi:
                nxt = rm.hi
            state = nxt
            if state == target:
                break
        total += t
        totalsq += t * t

    mean = total / replications
    var = max(totalsq / replications - mean * mean, 0.0)
    se = math.sqrt(var / replications) if replications > 1 else 0.0
    return mean, se
