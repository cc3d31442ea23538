"""Perturbed birth-death semi-Markov models on the state ladder {0, ..., N}.

A model carries, for every state ``i``, truncated Laurent expansions of the
two embedded transition probabilities ``p_{i,-}``, ``p_{i,+}`` (down/up; at
the boundaries the inward-blocked direction is a self-loop) and of the two
expected-sojourn contributions ``e_{i,-}``, ``e_{i,+}``.  All expansions
share one length ``L``: each is guaranteed on a window of span ``L``
starting at its order shift.

Models are built either from raw expansion data (:func:`from_expansions`)
or from jump intensities that are linear in the perturbation parameter
(:func:`from_linear_intensities`), in which case the probability and sojourn
expansions are *derived* by expansion division and the exact intensities are
kept for fixed-``eps`` evaluation.

Validation enforces the structural conditions: positive leading
coefficients at the declared order shifts, shifts only at the boundaries
(and only 0 or 1), the two probabilities summing to one order-by-order, and
matching shift structure between probabilities and sojourn contributions.
Identically-zero *self-loop* branches at the boundaries (``p_{0,-}`` or
``p_{N,+}``) are admitted: they never enter a quotient downstream.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import (
    LengthMismatch,
    RangeError,
    ViolatesD,
    ViolatesE,
    ViolatesF,
    ViolatesG,
)
from .laurent import LaurentExpansion, add, divide, expansion

SojournFamily = Literal["geometric", "exponential"]

_ZERO = 1e-12


def is_zero_expansion(a: LaurentExpansion) -> bool:
    return all(abs(c) <= _ZERO for c in a.coeffs)


@dataclass(frozen=True)
class TransitionPair:
    """Per-state expansion data: probabilities, sojourn parts, order shifts."""

    p_minus: LaurentExpansion
    p_plus: LaurentExpansion
    e_minus: LaurentExpansion
    e_plus: LaurentExpansion
    l_minus: int = 0
    l_plus: int = 0


@dataclass(frozen=True)
class Scenario:
    """Boundary-asymptotics class.

    H1: neither boundary asymptotically absorbing; H2: low boundary
    absorbing in the limit; H3: both.  A model absorbing only at the *top*
    is normalized to H2 with ``mirrored`` set — consumers that care about
    which physical end is absorbing must check the flag.
    """

    tag: Literal["H1", "H2", "H3"]
    mirrored: bool = False


@dataclass(frozen=True)
class IntensityModel:
    """Jump intensities linear in eps: lam_{i,+-}(eps) = g[0] + g[1]*eps."""

    N: int
    g_plus: tuple[tuple[float, float], ...]
    g_minus: tuple[tuple[float, float], ...]
    sojourn_family: SojournFamily = "exponential"
    eps0: float = 1.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("need at least two states (N >= 1)")
        gp = tuple((float(a), float(b)) for a, b in self.g_plus)
        gm = tuple((float(a), float(b)) for a, b in self.g_minus)
        if len(gp) != self.N + 1 or len(gm) != self.N + 1:
            raise LengthMismatch("need one intensity pair per state 0..N")
        if self.sojourn_family not in ("geometric", "exponential"):
            raise ValueError(f"unknown sojourn family {self.sojourn_family!r}")
        object.__setattr__(self, "g_plus", gp)
        object.__setattr__(self, "g_minus", gm)
        for i in range(self.N + 1):
            if gp[i][0] < 0 or gm[i][0] < 0:
                raise ViolatesD(f"negative unperturbed intensity at state {i}")
            if gp[i][0] + gm[i][0] <= 0:
                raise ViolatesD(
                    f"total unperturbed intensity vanishes at state {i}; the "
                    "embedded chain is not defined there at eps = 0"
                )
        object.__setattr__(self, "eps0", self._clamp_eps0(float(self.eps0)))

    def _clamp_eps0(self, eps0: float) -> float:
        """Largest usable eps <= requested eps0.

        Every branch intensity must stay >= 0 and every total intensity
        must stay > 0 on (0, eps0]; geometric sojourns additionally need
        the total intensity <= 1 (it is a probability parameter).  All
        constraints are linear, so endpoint checks suffice.
        """
        if eps0 <= 0:
            raise ValueError("eps0 must be positive")
        for i in range(self.N + 1):
            for g0, g1 in (self.g_plus[i], self.g_minus[i]):
                if g1 < 0 and g0 + g1 * eps0 < 0:
                    eps0 = min(eps0, -g0 / g1)
            t0 = self.g_plus[i][0] + self.g_minus[i][0]
            t1 = self.g_plus[i][1] + self.g_minus[i][1]
            if t1 < 0 and t0 + t1 * eps0 <= 0:
                # keep a sliver of positivity below the root
                eps0 = min(eps0, -t0 / t1 * (1 - 1e-12))
            if self.sojourn_family == "geometric":
                if t0 > 1 + 1e-12:
                    raise ViolatesD(
                        f"geometric sojourn needs total intensity <= 1, got "
                        f"{t0} at state {i} (eps = 0)"
                    )
                if t1 > 0 and t0 + t1 * eps0 > 1:
                    eps0 = min(eps0, (1 - t0) / t1)
        if eps0 <= 0:
            raise ValueError("no positive eps satisfies the intensity constraints")
        return eps0

    # -- fixed-eps evaluation --------------------------------------------

    def lam(self, i: int, sign: str, eps: float) -> float:
        g0, g1 = self.g_plus[i] if sign == "+" else self.g_minus[i]
        return g0 + g1 * eps

    def lam_total(self, i: int, eps: float) -> float:
        return self.lam(i, "+", eps) + self.lam(i, "-", eps)

    # -- serialization ----------------------------------------------------

    def to_descriptor(self) -> dict:
        d = {
            "N": self.N,
            "sojourn_family": self.sojourn_family,
            "g_plus": [list(p) for p in self.g_plus],
            "g_minus": [list(p) for p in self.g_minus],
            "eps0": self.eps0,
        }
        return d

    @classmethod
    def from_descriptor(cls, d: dict) -> "IntensityModel":
        return cls(
            N=int(d["N"]),
            g_plus=tuple((float(a), float(b)) for a, b in d["g_plus"]),
            g_minus=tuple((float(a), float(b)) for a, b in d["g_minus"]),
            sojourn_family=d.get("sojourn_family", "exponential"),
            eps0=float(d.get("eps0", 1.0)),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class BirthDeathSMP:
    """Validated perturbed birth-death semi-Markov model."""

    N: int
    pairs: tuple[TransitionPair, ...]
    scenario: Scenario
    source: Optional[IntensityModel] = None
    eps0: float = 1.0

    @property
    def L(self) -> int:
        return self.pairs[0].p_plus.span

    def pair(self, i: int) -> TransitionPair:
        return self.pairs[i]

    def e_total(self, i: int) -> LaurentExpansion:
        """Expansion of the full expected sojourn e_i = e_{i,-} + e_{i,+}."""
        return add(self.pairs[i].e_minus, self.pairs[i].e_plus)

    def digest(self) -> str:
        if self.source is not None:
            return self.source.digest()
        payload = [
            (p.l_minus, p.l_plus)
            + tuple((x.h,) + x.coeffs for x in (p.p_minus, p.p_plus, p.e_minus, p.e_plus))
            for p in self.pairs
        ]
        blob = json.dumps([self.N, payload], sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _branch_is_self_loop(i: int, sign: str, N: int) -> bool:
    return (i == 0 and sign == "-") or (i == N and sign == "+")


def _validate_pairs(N: int, pairs: Sequence[TransitionPair]) -> None:
    if len(pairs) != N + 1:
        raise LengthMismatch(f"need {N + 1} transition pairs, got {len(pairs)}")
    L = pairs[0].p_plus.span
    for i, pr in enumerate(pairs):
        for name, p, e, l in (
            ("-", pr.p_minus, pr.e_minus, pr.l_minus),
            ("+", pr.p_plus, pr.e_plus, pr.l_plus),
        ):
            for x in (p, e):
                if x.span != L:
                    raise LengthMismatch(
                        f"expansion length mismatch at state {i}: span {x.span} != {L}"
                    )
            if is_zero_expansion(p):
                # only ever legal for a boundary self-loop branch
                if not _branch_is_self_loop(i, name, N):
                    raise ViolatesD(
                        f"transition probability p_({i},{name}) vanishes identically"
                    )
                if not is_zero_expansion(e):
                    raise ViolatesG(
                        f"p_({i},{name}) vanishes identically but e_({i},{name}) "
                        "does not"
                    )
                continue
            if 0 < i < N and l != 0:
                raise ViolatesD(f"interior state {i} cannot carry an order shift")
            if l not in (0, 1):
                raise ViolatesD(f"order shift at state {i} must be 0 or 1, got {l}")
            if p.h != l:
                raise ViolatesD(
                    f"p_({i},{name}) starts at order {p.h}, declared shift is {l}"
                )
            if p.coeffs[0] <= 0:
                raise ViolatesD(
                    f"p_({i},{name}) leading coefficient must be positive, "
                    f"got {p.coeffs[0]}"
                )
            if e.h != l:
                raise ViolatesG(
                    f"e_({i},{name}) starts at order {e.h}, p starts at {p.h}; "
                    "the shifts must agree"
                )
            if e.coeffs[0] <= 0:
                raise ViolatesE(
                    f"e_({i},{name}) leading coefficient must be positive, "
                    f"got {e.coeffs[0]}"
                )
        # outward boundary branches must not vanish identically: the state
        # would be absorbing at every eps, not just in the limit
        if i == 0 and is_zero_expansion(pr.p_plus):
            raise ViolatesD("p_(0,+) vanishes identically; state 0 is absorbing")
        if i == N and is_zero_expansion(pr.p_minus):
            raise ViolatesD(f"p_({N},-) vanishes identically; state {N} is absorbing")
        # probabilities sum to one, order by order, over the common window;
        # high orders of a long window can carry coefficients far above 1,
        # where an absolute tolerance would sit below one ulp, so each
        # order's check is scaled by its own coefficient magnitudes
        k_common = min(pr.p_minus.k, pr.p_plus.k)
        s0 = pr.p_minus.coeff(0) + pr.p_plus.coeff(0)
        if abs(s0 - 1.0) > 1e-10:
            raise ViolatesF(f"p_({i},-)[0] + p_({i},+)[0] = {s0}, expected 1")
        for l in range(1, k_common + 1):
            a, b = pr.p_minus.coeff(l), pr.p_plus.coeff(l)
            if abs(a + b) > 1e-10 * max(1.0, abs(a), abs(b)):
                raise ViolatesF(
                    f"order-{l} probability coefficients at state {i} sum to "
                    f"{a + b}, expected 0"
                )


def classify_scenario(N: int, pairs: Sequence[TransitionPair]) -> Scenario:
    """Boundary class from the leading order of the outward branches."""
    low_live = pairs[0].p_plus.h == 0
    high_live = pairs[N].p_minus.h == 0
    if low_live and high_live:
        return Scenario("H1")
    if not low_live and high_live:
        return Scenario("H2")
    if low_live and not high_live:
        return Scenario("H2", mirrored=True)
    return Scenario("H3")


def from_expansions(
    N: int,
    pairs: Sequence[TransitionPair],
    source: Optional[IntensityModel] = None,
    eps0: float = 1.0,
) -> BirthDeathSMP:
    """Build and validate a model from raw expansion data."""
    _validate_pairs(N, pairs)
    scenario = classify_scenario(N, pairs)
    return BirthDeathSMP(
        N=N, pairs=tuple(pairs), scenario=scenario, source=source, eps0=eps0
    )


def _intensity_expansion(g0: float, g1: float, L: int) -> Optional[LaurentExpansion]:
    """Span-L window for the exactly-known linear function g0 + g1*eps.

    Returns None for the identically-zero branch.
    """
    if g0 > 0:
        return expansion(0, [g0, g1] + [0.0] * (L - 1))
    if g1 > 0:
        return expansion(1, [g1] + [0.0] * L)
    return None


def from_linear_intensities(m: IntensityModel, L: int) -> BirthDeathSMP:
    """Derive the probability and sojourn expansions from linear intensities.

    p_{i,+-} = lam_{i,+-}/lam_i and e_{i,+-} = p_{i,+-}/lam_i, all carried to
    length L.  The mean sojourn in state i is 1/lam_i under both sojourn
    families, so the expansions do not depend on the family.
    """
    if L < 1:
        raise ValueError("expansion length L must be >= 1")
    pairs = []
    for i in range(m.N + 1):
        lam_p = _intensity_expansion(*m.g_plus[i], L)
        lam_m = _intensity_expansion(*m.g_minus[i], L)
        zero = expansion(0, [0.0] * (L + 1))
        if lam_p is None and lam_m is None:
            raise ViolatesD(f"state {i} has no transitions at any eps")
        lam_tot = add(lam_p or zero, lam_m or zero)
        branches = {}
        for name, lam_b in (("-", lam_m), ("+", lam_p)):
            if lam_b is None:
                branches[name] = (zero, zero, 0)
                continue
            p = divide(lam_b, lam_tot)
            e = divide(p, lam_tot)
            branches[name] = (p, e, lam_b.h)
        (pm, em, lm), (pp, ep, lp) = branches["-"], branches["+"]
        pairs.append(
            TransitionPair(
                p_minus=pm, p_plus=pp, e_minus=em, e_plus=ep, l_minus=lm, l_plus=lp
            )
        )
    return from_expansions(m.N, pairs, source=m, eps0=m.eps0)


# ---------------------------------------------------------------------------
# fixed-eps evaluation


@dataclass(frozen=True)
class EvaluatedModel:
    """Numeric transition data at one fixed eps."""

    N: int
    eps: float
    p_minus: np.ndarray
    p_plus: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray
    lam_minus: Optional[np.ndarray] = None
    lam_plus: Optional[np.ndarray] = None

    @property
    def e_total(self) -> np.ndarray:
        return self.e_minus + self.e_plus


def evaluate_at(model: BirthDeathSMP, eps: float) -> EvaluatedModel:
    """Numeric p, e (and lam, when intensities are attached) at fixed eps.

    Uses exact intensities when the model was built from them; otherwise the
    truncated expansions.  Checks that the numbers form a valid embedded
    chain: probabilities in [0, 1] summing to one per state, sojourn
    contributions positive except on identically-zero self-loop branches.
    """
    if not 0 < eps <= model.eps0:
        raise RangeError(f"eps = {eps} outside the working range (0, {model.eps0}]")
    n = model.N + 1
    pm = np.empty(n)
    pp = np.empty(n)
    em = np.empty(n)
    ep = np.empty(n)
    lm = lp = None
    if model.source is not None:
        src = model.source
        lm = np.array([src.lam(i, "-", eps) for i in range(n)])
        lp = np.array([src.lam(i, "+", eps) for i in range(n)])
        tot = lm + lp
        pm, pp = lm / tot, lp / tot
        em, ep = pm / tot, pp / tot
    else:
        for i, pr in enumerate(model.pairs):
            # probabilities form a pair: evaluate both on the common window,
            # where the order-wise sum-to-one identity holds exactly
            kc = min(pr.p_minus.k, pr.p_plus.k)
            pm[i] = pr.p_minus.truncate(kc).evaluate(eps)
            pp[i] = pr.p_plus.truncate(kc).evaluate(eps)
            em[i] = pr.e_minus.evaluate(eps)
            ep[i] = pr.e_plus.evaluate(eps)
    for i in range(n):
        for val in (pm[i], pp[i]):
            if not -1e-9 <= val <= 1 + 1e-9:
                raise RangeError(
                    f"p at state {i} evaluates to {val} at eps = {eps}; outside "
                    "the perturbation regime"
                )
        if abs(pm[i] + pp[i] - 1.0) > 1e-9:
            raise RangeError(
                f"probabilities at state {i} sum to {pm[i] + pp[i]} at eps = {eps}"
            )
        for name, pexp, val in (
            ("-", model.pairs[i].p_minus, em[i]),
            ("+", model.pairs[i].p_plus, ep[i]),
        ):
            if is_zero_expansion(pexp):
                continue  # admitted self-loop branch: e is identically zero too
            if val <= 0:
                raise RangeError(
                    f"e_({i},{name}) evaluates to {val} at eps = {eps}; expected > 0"
                )
    return EvaluatedModel(
        N=model.N, eps=eps, p_minus=pm, p_plus=pp, e_minus=em, e_plus=ep,
        lam_minus=lm, lam_plus=lp,
    )
