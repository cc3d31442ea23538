"""Stationary and conditional quasi-stationary distributions.

Two independent computation routes live here:

* **Expansions** — per-state Laurent expansions of the stationary law
  ``pi_i = e_i / E_ii`` (and of its renormalization over the non-absorbing
  support, the conditional quasi-stationary law), powered by the reduction
  engine.  Lower orders follow the scenario: everything at order 0 under H1;
  under H2 the asymptotically absorbing boundary keeps order 0 (its mass
  tends to one) while every other state starts at order 1; under H3 both
  boundary states keep order 0 and the interior starts at order 1.  The
  quasi-stationary expansions always start at order 0 on their support.

* **Exact values at fixed eps** — the classical birth-death product formula
  when exact intensities are attached, otherwise numeric ``e_i/E_ii``;
  both in log space so sharply peaked laws on long ladders cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import (
    InsufficientPrecision,
    InvariantViolation,
    RangeError,
    WrongScenario,
)
from .laurent import (
    LaurentExpansion,
    balanced_divide,
    constant,
    divide,
    multi_sum,
    multiply,
)
from .model import (
    BirthDeathSMP,
    IntensityModel,
    Scenario,
    _intensity_expansion,
    evaluate_at,
    from_linear_intensities,
)
from .reduction import return_time_expansion, return_time_explicit_numeric

Kind = Literal["stationary", "quasi_H2", "quasi_H3"]


@dataclass(frozen=True)
class DistributionExpansion:
    """Per-state expansions of a distribution, on its support."""

    kind: Kind
    scenario: Scenario
    N: int
    L: int
    support: tuple[int, ...]
    per_state: dict[int, LaurentExpansion]

    def expansion_for(self, i: int) -> LaurentExpansion:
        if i not in self.per_state:
            raise KeyError(f"state {i} is outside the support of this {self.kind}")
        return self.per_state[i]

    def shift_for(self, i: int) -> int:
        return self.expansion_for(i).h

    def coeff(self, i: int, order: int) -> float:
        """Coefficient of eps**order for state i (0 outside the support)."""
        if i not in self.per_state:
            return 0.0
        return self.per_state[i].coeff(order)

    def truncated_value(self, i: int, eps: float) -> float:
        """The order-L truncation evaluated at eps (0 outside the support)."""
        if i not in self.per_state:
            return 0.0
        return self.per_state[i].evaluate(eps)


def _check_sum_identities(d: DistributionExpansion, orders: range, scale: float) -> None:
    """Coefficient sums: 1 at the lowest order of the family, else 0.

    ``scale`` is the largest coefficient magnitude seen in the intermediate
    expansions; the identities cancel quantities of that size, so rounding
    residue proportional to it is expected and only structurally wrong sums
    are rejected.
    """
    tol = 1e-9 * max(1.0, scale)
    for l in orders:
        target = 1.0 if l == orders.start else 0.0
        s = math.fsum(d.coeff(i, l) for i in d.support)
        if abs(s - target) > tol:
            raise InvariantViolation(
                f"{d.kind} coefficient sum at order {l} is {s}, expected {target}"
            )


def _coeff_scale(xs) -> float:
    return max(max(abs(c) for c in x.coeffs) for x in xs)


def _require_finite(xs, L: int) -> None:
    # coefficient growth is geometric in the order, so a long enough window
    # overflows float64 no matter how the arithmetic is arranged
    if not all(math.isfinite(c) for x in xs for c in x.coeffs):
        raise InsufficientPrecision(
            f"expansion coefficients overflow double precision before "
            f"order {L}; the achievable window for this model is shorter"
        )


def _pi_expansions(model: BirthDeathSMP) -> dict[int, LaurentExpansion]:
    return {
        i: balanced_divide(model.e_total(i), return_time_expansion(model, i))
        for i in range(model.N + 1)
    }


def _product_weight_expansions(
    model: BirthDeathSMP, top: int
) -> Optional[list[LaurentExpansion]]:
    """Stationary-weight expansions w_0..w_top from exact intensities.

    The birth-death product formula as window arithmetic: w_0 = 1 and
    w_i = w_{i-1} * lam_{i-1,+}/lam_{i,-}.  Every factor is a ratio of
    linear intensity expansions, so each state's coefficients stay at the
    model's own scale.  Ratios of these weights equal ratios of pi_i, but
    without the coefficient blow-up the e/E route suffers for models whose
    return-time expansions have a tiny convergence radius.  Returns None
    when no exact intensities are attached or a ladder rung vanishes
    identically (callers fall back to the e/E route).
    """
    src = model.source
    if src is None:
        return None
    K = model.L + 1
    w = [constant(1.0, K)]
    for i in range(1, top + 1):
        num = _intensity_expansion(*src.g_plus[i - 1], K)
        den = _intensity_expansion(*src.g_minus[i], K)
        if num is None or den is None:
            return None
        w.append(multiply(w[i - 1], divide(num, den)))
        if not all(math.isfinite(c) for c in w[-1].coeffs):
            return None
    return w


def _expected_stationary_shift(scenario: Scenario, i: int, N: int) -> int:
    if scenario.tag == "H1":
        return 0
    if scenario.tag == "H2":
        absorbing = N if scenario.mirrored else 0
        return 0 if i == absorbing else 1
    return 0 if i in (0, N) else 1  # H3


def stationary_expansion(model: BirthDeathSMP, L: int) -> DistributionExpansion:
    """Expansions of pi_i to length L (orders shift .. shift + L per state)."""
    if L < 0:
        raise ValueError("L must be >= 0")
    if L > model.L:
        raise InsufficientPrecision(
            f"requested length {L} exceeds the model's expansion length {model.L}"
        )
    per_state = {}
    pis = _pi_expansions(model)
    _require_finite(pis.values(), L)
    for i, pi in pis.items():
        want = _expected_stationary_shift(model.scenario, i, model.N)
        if pi.h != want or pi.coeffs[0] <= 0:
            raise InvariantViolation(
                f"pi_{i} starts at order {pi.h} with leading {pi.coeffs[0]}; "
                f"scenario {model.scenario.tag} requires order {want} with a "
                "positive leading coefficient"
            )
        per_state[i] = pi.truncate(pi.h + L)
    d = DistributionExpansion(
        kind="stationary",
        scenario=model.scenario,
        N=model.N,
        L=L,
        support=tuple(range(model.N + 1)),
        per_state=per_state,
    )
    _check_sum_identities(d, range(0, L + 1), _coeff_scale(pis.values()))
    return d


def absorbing_states(scenario: Scenario, N: int) -> tuple[int, ...]:
    if scenario.tag == "H1":
        return ()
    if scenario.tag == "H2":
        return (N,) if scenario.mirrored else (0,)
    return (0, N)


def conditional_quasi_stationary_expansion(
    model: BirthDeathSMP, L: int
) -> DistributionExpansion:
    """Expansions of pi_i / (mass not yet absorbed), over the live support."""
    scenario = model.scenario
    if scenario.tag == "H1":
        raise WrongScenario(
            "conditional quasi-stationary law needs an asymptotically "
            "absorbing boundary (H2 or H3)"
        )
    if L > model.L:
        raise InsufficientPrecision(
            f"requested length {L} exceeds the model's expansion length {model.L}"
        )
    dead = absorbing_states(scenario, model.N)
    support = tuple(i for i in range(model.N + 1) if i not in dead)
    if not support:
        raise WrongScenario("no states remain after removing the absorbing boundary")
    weights = _product_weight_expansions(model, max(support))
    if weights is not None:
        numerators = {i: weights[i] for i in support}
    else:
        pis = _pi_expansions(model)
        numerators = {i: pis[i] for i in support}
    _require_finite(numerators.values(), L)
    denom = multi_sum(numerators.values())
    per_state = {}
    for i in support:
        q = balanced_divide(numerators[i], denom)
        if q.h != 0 or q.coeffs[0] <= 0:
            raise InvariantViolation(
                f"quasi-stationary expansion at state {i} starts at order {q.h} "
                f"with leading {q.coeffs[0]}; expected order 0, positive"
            )
        per_state[i] = q.truncate(L)
    d = DistributionExpansion(
        kind="quasi_H2" if scenario.tag == "H2" else "quasi_H3",
        scenario=scenario,
        N=model.N,
        L=L,
        support=support,
        per_state=per_state,
    )
    _check_sum_identities(d, range(0, L + 1), _coeff_scale(per_state.values()))
    return d


# ---------------------------------------------------------------------------
# exact values at fixed eps


@dataclass(frozen=True)
class ExactDistribution:
    """A concrete probability vector at one eps (eps = 0 for limiting laws)."""

    kind: Kind
    eps: float
    probs: np.ndarray  # full length N+1; zero outside the support
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        s = math.fsum(self.probs[list(self.support)])
        if abs(s - 1.0) > 1e-12 or (self.probs < -1e-15).any():
            raise InvariantViolation(f"not a probability vector (sum {s})")


def _normalized_from_logs(n_states: int, support, logw) -> np.ndarray:
    top = max(logw)
    w = {i: math.exp(lw - top) for i, lw in zip(support, logw)}
    total = math.fsum(w.values())
    probs = np.zeros(n_states)
    for i in support:
        probs[i] = w[i] / total
    return probs


def _log_product_weights(src: IntensityModel, eps: float) -> list[float]:
    """log of the unnormalized product-formula weights, for states 0..N.

    w_0 = 1 and w_i = w_{i-1} * lam_{i-1,+}(eps) / lam_{i,-}(eps).
    """
    logw = [0.0]
    for i in range(1, src.N + 1):
        up = src.lam(i - 1, "+", eps)
        down = src.lam(i, "-", eps)
        if up <= 0 or down <= 0:
            raise RangeError(
                f"product formula needs positive rates; lam_({i - 1},+) = {up}, "
                f"lam_({i},-) = {down} at eps = {eps}"
            )
        logw.append(logw[-1] + math.log(up) - math.log(down))
    return logw


def stationary_exact(model: BirthDeathSMP, eps: float) -> ExactDistribution:
    """Stationary law at fixed eps: product formula, else numeric e_i/E_ii."""
    full = tuple(range(model.N + 1))
    if model.source is not None:
        if not 0 < eps <= model.eps0:
            raise RangeError(f"eps = {eps} outside the working range (0, {model.eps0}]")
        probs = _normalized_from_logs(
            model.N + 1, full, _log_product_weights(model.source, eps)
        )
    else:
        ev = evaluate_at(model, eps)
        raw = [
            float(ev.e_total[i]) / return_time_explicit_numeric(ev, i) for i in full
        ]
        s = math.fsum(raw)
        if abs(s - 1.0) > 1e-9:
            raise InvariantViolation(f"e_i/E_ii values sum to {s}, expected 1")
        probs = np.array(raw) / s
    return ExactDistribution(kind="stationary", eps=eps, probs=probs, support=full)


def quasi_exact(model: BirthDeathSMP, eps: float) -> ExactDistribution:
    """Conditional quasi-stationary law at fixed eps.

    Algebraically this is the stationary vector renormalized over the
    non-absorbing support: the shared factors of the product formula cancel
    in the conditioning quotient.
    """
    scenario = model.scenario
    if scenario.tag == "H1":
        raise WrongScenario("quasi-stationary law needs scenario H2 or H3")
    dead = absorbing_states(scenario, model.N)
    support = tuple(i for i in range(model.N + 1) if i not in dead)
    stat = stationary_exact(model, eps)
    mass = math.fsum(stat.probs[list(support)])
    if mass <= 0:
        raise RangeError(f"no stationary mass on the support at eps = {eps}")
    probs = np.zeros(model.N + 1)
    probs[list(support)] = stat.probs[list(support)] / mass
    kind = "quasi_H2" if scenario.tag == "H2" else "quasi_H3"
    return ExactDistribution(kind=kind, eps=eps, probs=probs, support=support)


def exact_distributions(
    model: BirthDeathSMP, eps: float
) -> tuple[ExactDistribution, Optional[ExactDistribution]]:
    """Stationary law and, under H2/H3, the conditional quasi-stationary law."""
    stat = stationary_exact(model, eps)
    quasi = quasi_exact(model, eps) if model.scenario.tag != "H1" else None
    return stat, quasi


def mirror_intensity_model(m: IntensityModel) -> IntensityModel:
    """Relabel states i -> N - i (up- and down-branches swap)."""
    return IntensityModel(
        N=m.N,
        g_plus=tuple(reversed(m.g_minus)),
        g_minus=tuple(reversed(m.g_plus)),
        sojourn_family=m.sojourn_family,
        eps0=m.eps0,
    )


def limiting_conditional_quasi_stationary(model: BirthDeathSMP) -> ExactDistribution:
    """The eps -> 0 limit of the conditional quasi-stationary law.

    Needs exact intensities: the limit is a product of unperturbed rates
    over the support, starting the ladder just above the absorbing boundary
    (the vanishing boundary rate cancels in the conditioning).
    """
    scenario = model.scenario
    if scenario.tag == "H1":
        raise WrongScenario("quasi-stationary law needs scenario H2 or H3")
    if model.source is None:
        raise WrongScenario(
            "the limiting quasi-stationary law needs exact intensities"
        )
    if scenario.tag == "H2" and scenario.mirrored:
        mirrored = from_linear_intensities(
            mirror_intensity_model(model.source), model.L
        )
        flipped = limiting_conditional_quasi_stationary(mirrored)
        probs = np.array(list(reversed(flipped.probs)))
        support = tuple(sorted(model.N - i for i in flipped.support))
        return ExactDistribution(
            kind=flipped.kind, eps=0.0, probs=probs, support=support
        )
    src = model.source
    dead = absorbing_states(scenario, model.N)
    support = tuple(i for i in range(model.N + 1) if i not in dead)
    logw = []
    acc = 0.0
    for i in support:  # contiguous run 1 .. top
        if i > support[0]:
            up = src.lam(i - 1, "+", 0.0)
            down = src.lam(i, "-", 0.0)
            if up <= 0 or down <= 0:
                raise RangeError(
                    f"limiting product needs positive unperturbed interior rates "
                    f"(lam_({i - 1},+)(0) = {up}, lam_({i},-)(0) = {down})"
                )
            acc += math.log(up) - math.log(down)
        else:
            down = src.lam(i, "-", 0.0)
            if down <= 0:
                raise RangeError(f"lam_({i},-)(0) = {down} must be positive")
            acc = -math.log(down)
        logw.append(acc)
    probs = _normalized_from_logs(model.N + 1, support, logw)
    kind = "quasi_H2" if scenario.tag == "H2" else "quasi_H3"
    return ExactDistribution(kind=kind, eps=0.0, probs=probs, support=support)


def limiting_stationary(model: BirthDeathSMP) -> ExactDistribution:
    """The eps -> 0 limit of the stationary law: order-0 coefficients."""
    d = stationary_expansion(model, 0)
    probs = np.array([max(d.coeff(i, 0), 0.0) for i in range(model.N + 1)])
    probs /= math.fsum(probs)
    return ExactDistribution(
        kind="stationary", eps=0.0, probs=probs, support=tuple(range(model.N + 1))
    )
