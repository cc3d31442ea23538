"""Phase-space reduction: sequential exclusion of boundary states.

Excluding a boundary state of the ladder leaves the remaining transition
*probabilities* untouched and folds the time spent in the excluded state
into the expected-sojourn contribution of its neighbour's branch pointing
at it.  Repeating until a single state ``i`` remains turns the sojourn data
into the expected return time ``E_ii``.

The recurrences are written against plain arithmetic operators, so the same
code drives both truncated-expansion entries (yielding the Laurent expansion
of ``E_ii``) and float entries at a fixed ``eps``.  ``E_ii`` is also
computed by an independent explicit product formula (:func:`return_time_explicit`)
used to cross-check the reduction engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Generic, Literal, TypeVar

from .errors import NonPivotalDivisor, RangeError, WindowTooSmall
from .laurent import LaurentExpansion, add, divide, multi_product, multi_sum, multiply
from .model import BirthDeathSMP, EvaluatedModel, evaluate_at

V = TypeVar("V", LaurentExpansion, float)


@dataclass(frozen=True)
class StateData(Generic[V]):
    p_minus: V
    p_plus: V
    e_minus: V
    e_plus: V

    @property
    def e_total(self) -> V:
        return self.e_minus + self.e_plus


@dataclass(frozen=True)
class ReducedModel(Generic[V]):
    """Transition data restricted to the window of states lo..hi."""

    lo: int
    hi: int
    states: dict[int, StateData[V]]


def initial_window(model: BirthDeathSMP) -> ReducedModel[LaurentExpansion]:
    states = {
        i: StateData(pr.p_minus, pr.p_plus, pr.e_minus, pr.e_plus)
        for i, pr in enumerate(model.pairs)
    }
    return ReducedModel(lo=0, hi=model.N, states=states)


def numeric_window(ev: EvaluatedModel) -> ReducedModel[float]:
    states = {
        i: StateData(
            float(ev.p_minus[i]), float(ev.p_plus[i]),
            float(ev.e_minus[i]), float(ev.e_plus[i]),
        )
        for i in range(ev.N + 1)
    }
    return ReducedModel(lo=0, hi=ev.N, states=states)


def _quotient(num: V, den: V) -> V:
    if isinstance(num, LaurentExpansion):
        return divide(num, den)
    if den == 0:
        raise NonPivotalDivisor("outward transition probability vanishes")
    return num / den


def reduce_boundary(m: ReducedModel[V], side: Literal["low", "high"]) -> ReducedModel[V]:
    """Exclude the state at the chosen end of the window.

    Probabilities are copied unchanged; only the expectation on the branch
    of the new boundary state that pointed at the excluded one is updated:

        low:  e'_{lo+1,-} = e_{lo+1,-} + e_lo * p_{lo+1,-} / p_{lo,+}
        high: e'_{hi-1,+} = e_{hi-1,+} + e_hi * p_{hi-1,+} / p_{hi,-}

    with e_j the total expectation e_{j,-} + e_{j,+} of the excluded state.
    """
    if m.lo == m.hi:
        raise WindowTooSmall("cannot exclude the last remaining state")
    states = dict(m.states)
    if side == "low":
        gone = states.pop(m.lo)
        nb = states[m.lo + 1]
        bump = gone.e_total * _quotient(nb.p_minus, gone.p_plus)
        states[m.lo + 1] = replace(nb, e_minus=nb.e_minus + bump)
        return ReducedModel(lo=m.lo + 1, hi=m.hi, states=states)
    if side == "high":
        gone = states.pop(m.hi)
        nb = states[m.hi - 1]
        bump = gone.e_total * _quotient(nb.p_plus, gone.p_minus)
        states[m.hi - 1] = replace(nb, e_plus=nb.e_plus + bump)
        return ReducedModel(lo=m.lo, hi=m.hi - 1, states=states)
    raise ValueError(f"side must be 'low' or 'high', got {side!r}")


def reduce_to(m: ReducedModel[V], i: int) -> ReducedModel[V]:
    """Exclude states until only the window <i, i> remains (low side first)."""
    if not m.lo <= i <= m.hi:
        raise RangeError(f"state {i} outside window <{m.lo}, {m.hi}>")
    while m.lo < i:
        m = reduce_boundary(m, "low")
    while m.hi > i:
        m = reduce_boundary(m, "high")
    return m


def return_time_expansion(model: BirthDeathSMP, i: int) -> LaurentExpansion:
    """Laurent expansion of E_ii by the recurrent reduction algorithm."""
    final = reduce_to(initial_window(model), i)
    return final.states[i].e_total


def return_time_numeric(ev: EvaluatedModel, i: int) -> float:
    """E_ii at fixed eps by the same reduction recurrences on floats."""
    final = reduce_to(numeric_window(ev), i)
    return final.states[i].e_total


# ---------------------------------------------------------------------------
# explicit product formula


def _gamma(model: BirthDeathSMP, i: int, j: int, sign: str) -> LaurentExpansion:
    """Product of the p_{t,sign} expansions for t = i..j (i <= j)."""
    ps = [
        model.pairs[t].p_plus if sign == "+" else model.pairs[t].p_minus
        for t in range(i, j + 1)
    ]
    return multi_product(ps)


def return_time_explicit(model: BirthDeathSMP, i: int) -> LaurentExpansion:
    """E_ii by the explicit formula: one weighted term per other state.

    E_ii = e_i + sum_{k<i} e_k * G_{k+1,i,-}/G_{k,i-1,+}
               + sum_{k>i} e_k * G_{i,k-1,+}/G_{i+1,k,-}

    with G the running products of up/down probabilities.  The self-loop
    probabilities p_{0,-} and p_{N,+} never appear in any product.
    """
    terms = [model.e_total(i)]
    for k in range(0, i):
        w = divide(_gamma(model, k + 1, i, "-"), _gamma(model, k, i - 1, "+"))
        terms.append(multiply(model.e_total(k), w))
    for k in range(i + 1, model.N + 1):
        w = divide(_gamma(model, i, k - 1, "+"), _gamma(model, i + 1, k, "-"))
        terms.append(multiply(model.e_total(k), w))
    return multi_sum(terms)


def return_time_explicit_numeric(ev: EvaluatedModel, i: int) -> float:
    """Float twin of :func:`return_time_explicit` at fixed eps."""

    def gamma(a: int, b: int, plus: bool) -> float:
        arr = ev.p_plus if plus else ev.p_minus
        return math.prod(arr[t] for t in range(a, b + 1))

    e = ev.e_total
    terms = [float(e[i])]
    for k in range(0, i):
        den = gamma(k, i - 1, True)
        if den == 0:
            raise NonPivotalDivisor("outward transition probability vanishes")
        terms.append(e[k] * gamma(k + 1, i, False) / den)
    for k in range(i + 1, ev.N + 1):
        den = gamma(i + 1, k, False)
        if den == 0:
            raise NonPivotalDivisor("outward transition probability vanishes")
        terms.append(e[k] * gamma(i, k - 1, True) / den)
    return math.fsum(terms)


def expected_absorption_from_one(model: BirthDeathSMP, eps: float) -> float:
    """E_10(eps): expected time to reach state 0 from state 1, at fixed eps.

    Read off the first-step decomposition at state 0:
    E_00 = e_0 + p_{0,+} * E_10, so E_10 = (E_00 - e_0)/p_{0,+}.
    """
    ev = evaluate_at(model, eps)
    p_up = float(ev.p_plus[0])
    if p_up <= 0:
        raise RangeError(f"p_(0,+) evaluates to {p_up} at eps = {eps}")
    e00 = return_time_explicit_numeric(ev, 0)
    return (e00 - float(ev.e_total[0])) / p_up
