"""Second-order closed forms for the distribution coefficients.

An independent cross-check of the expansion engine: the first two
coefficients of every stationary (and conditional quasi-stationary)
expansion admit explicit formulas built from just the leading and
next-to-leading coefficients of the transition data.  This module evaluates
them *without* the reduction engine, by first-order arithmetic on
``(order, value, slope)`` triples:

    triple (w, v0, v1)  ~  v0 * eps**w + v1 * eps**(w+1) + o(eps**(w+1))

Products and quotients of such triples are closed, with orders adding or
subtracting; the expected-return-time triple of each state is accumulated
term by term (one term per other state, weighted by a quotient of
up/down-probability range products, exactly mirroring the explicit return
time formula), and a final quotient yields the two coefficients.  One code
path covers every boundary scenario: the order bookkeeping moves the
boundary shifts through automatically.
"""

from __future__ import annotations

import math
from collections import defaultdict

from .errors import WrongScenario
from .laurent import LaurentExpansion
from .model import BirthDeathSMP
from .distributions import DistributionExpansion, absorbing_states

Triple = tuple[int, float, float]

_ONE: Triple = (0, 1.0, 0.0)


def _t_mul(a: Triple, b: Triple) -> Triple:
    return (a[0] + b[0], a[1] * b[1], a[1] * b[2] + a[2] * b[1])


def _t_div(n: Triple, d: Triple) -> Triple:
    return (
        n[0] - d[0],
        n[1] / d[1],
        (n[2] * d[1] - n[1] * d[2]) / d[1] ** 2,
    )


def _head(x: LaurentExpansion) -> Triple:
    """Leading order and first two coefficients of an expansion."""
    return (x.h, x.coeff(x.h), x.coeff(x.h + 1))


def _range_product(model: BirthDeathSMP, a: int, b: int, sign: str) -> Triple:
    out = _ONE
    for t in range(a, b + 1):
        p = model.pairs[t].p_plus if sign == "+" else model.pairs[t].p_minus
        out = _t_mul(out, _head(p))
    return out


def _e_triple(model: BirthDeathSMP, i: int) -> Triple:
    e = model.e_total(i)
    return (0, e.coeff(0), e.coeff(1))


def _return_time_triple(model: BirthDeathSMP, i: int) -> Triple:
    """First two coefficients of E_ii, term-by-term like the explicit formula."""
    acc: dict[int, float] = defaultdict(float)

    def put(t: Triple) -> None:
        acc[t[0]] += t[1]
        acc[t[0] + 1] += t[2]

    put(_e_triple(model, i))
    for k in range(0, i):
        w = _t_div(
            _range_product(model, k + 1, i, "-"),
            _range_product(model, k, i - 1, "+"),
        )
        put(_t_mul(_e_triple(model, k), w))
    for k in range(i + 1, model.N + 1):
        w = _t_div(
            _range_product(model, i, k - 1, "+"),
            _range_product(model, i + 1, k, "-"),
        )
        put(_t_mul(_e_triple(model, k), w))
    lead = min(acc)
    return (lead, acc[lead], acc[lead + 1])


def _stationary_triples(model: BirthDeathSMP) -> list[Triple]:
    return [
        _t_div(_e_triple(model, i), _return_time_triple(model, i))
        for i in range(model.N + 1)
    ]


def second_order_closed_form(
    model: BirthDeathSMP, kind: str = "stationary"
) -> DistributionExpansion:
    """First two distribution coefficients by the closed formulas (L = 1).

    kind 'stationary' gives the stationary coefficients for any scenario;
    'quasi' gives the conditional quasi-stationary ones (H2/H3 only).
    """
    if model.L < 1:
        raise ValueError("closed forms need expansion data of length >= 1")
    cs = _stationary_triples(model)
    if kind == "stationary":
        per_state = {
            i: LaurentExpansion(w, (v0, v1)) for i, (w, v0, v1) in enumerate(cs)
        }
        return DistributionExpansion(
            kind="stationary",
            scenario=model.scenario,
            N=model.N,
            L=1,
            support=tuple(range(model.N + 1)),
            per_state=per_state,
        )
    if kind != "quasi":
        raise ValueError(f"unknown kind {kind!r}")
    if model.scenario.tag == "H1":
        raise WrongScenario("quasi-stationary closed form needs scenario H2 or H3")
    dead = absorbing_states(model.scenario, model.N)
    support = tuple(i for i in range(model.N + 1) if i not in dead)
    orders = {cs[i][0] for i in support}
    assert len(orders) == 1, "support triples must share one leading order"
    w = orders.pop()
    denom = (w, math.fsum(cs[i][1] for i in support), math.fsum(cs[i][2] for i in support))
    per_state = {}
    for i in support:
        q = _t_div(cs[i], denom)
        per_state[i] = LaurentExpansion(q[0], (q[1], q[2]))
    return DistributionExpansion(
        kind="quasi_H2" if model.scenario.tag == "H2" else "quasi_H3",
        scenario=model.scenario,
        N=model.N,
        L=1,
        support=support,
        per_state=per_state,
    )
