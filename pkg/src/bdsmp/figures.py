"""Figure-panel sweeps behind the ``reproduce`` command.

Each panel is a small table: a distribution over states at fixed eps
together with its low-order truncations, a limiting distribution, or a
single state's probability swept over an eps grid.  Tables are plain
data so the CLI can write them as CSV and tests can consume them
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .builders import preset
from .distributions import (
    DistributionExpansion,
    conditional_quasi_stationary_expansion,
    limiting_conditional_quasi_stationary,
    limiting_stationary,
    quasi_exact,
    stationary_exact,
    stationary_expansion,
)
from .errors import BdsmpError
from .model import BirthDeathSMP, from_linear_intensities

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


@dataclass(frozen=True)
class PanelTable:
    """One figure panel as a column-named table."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    model_digest: str


def _model(name: str, L: int = 3) -> BirthDeathSMP:
    return from_linear_intensities(preset(name), L=L)


def _truncations(d: DistributionExpansion, i: int, eps: float, orders: Sequence[int]):
    exp = d.expansion_for(i) if i in d.support else None
    out = []
    for L in orders:
        out.append(0.0 if exp is None else exp.truncate(L).evaluate(eps))
    return out


def _state_panel(
    name: str,
    model: BirthDeathSMP,
    d: DistributionExpansion,
    exact_probs,
    states: Sequence[int],
    eps: float,
    orders: Sequence[int],
) -> PanelTable:
    cols = ("state", "eps", "exact") + tuple(f"approx_L{L}" for L in orders)
    rows = tuple(
        (float(i), eps, float(exact_probs[i]), *_truncations(d, i, eps, orders))
        for i in states
    )
    return PanelTable(name, cols, rows, model.digest())


def _limit_panel(name: str, model: BirthDeathSMP, probs, states) -> PanelTable:
    rows = tuple((float(i), float(probs[i])) for i in states)
    return PanelTable(name, ("state", "probability"), rows, model.digest())


def _eps_panel(
    name: str,
    model: BirthDeathSMP,
    d: DistributionExpansion,
    state: int,
    grid: Sequence[float],
    orders: Sequence[int],
    exact_at,
    limit_value: float,
) -> PanelTable:
    cols = ("eps", "exact") + tuple(f"approx_L{L}" for L in orders)
    rows = []
    for eps in grid:
        exact = limit_value if eps == 0.0 else float(exact_at(eps))
        rows.append((eps, exact, *_truncations(d, state, eps, orders)))
    return PanelTable(name, cols, tuple(rows), model.digest())


def _grid(stop: float, step: float) -> tuple[float, ...]:
    n = round(stop / step)
    return tuple(i * step for i in range(n + 1))


def _fig1() -> tuple[PanelTable, ...]:
    model = _model("fig1")
    d = stationary_expansion(model, L=3)
    states = range(model.N + 1)
    limit = limiting_stationary(model).probs
    panels = [_state_panel("fig1a", model, d, limit, states, 0.0, (1, 2))]
    for tag, eps in (("fig1b", 0.01), ("fig1c", 0.02), ("fig1d", 0.03)):
        exact = stationary_exact(model, eps).probs
        panels.append(_state_panel(tag, model, d, exact, states, eps, (1, 2)))
    return tuple(panels)


def _fig2() -> tuple[PanelTable, ...]:
    model = _model("fig1")
    d = stationary_expansion(model, L=3)
    limit = limiting_stationary(model).probs
    grid = _grid(0.05, 0.0025)
    return tuple(
        _eps_panel(
            name,
            model,
            d,
            state,
            grid,
            (1, 2, 3),
            lambda eps, s=state: stationary_exact(model, eps).probs[s],
            float(limit[state]),
        )
        for name, state in (("fig2a", 40), ("fig2b", 80))
    )


def _fig3() -> tuple[PanelTable, ...]:
    model = _model("fig3")
    d = conditional_quasi_stationary_expansion(model, L=3)
    eps = 0.005
    exact = quasi_exact(model, eps).probs
    return (
        _state_panel("fig3a", model, d, exact, range(1, model.N), eps, (1, 2)),
        _state_panel("fig3b", model, d, exact, range(1, 21), eps, (1, 2)),
    )


def _fig4() -> tuple[PanelTable, ...]:
    panels = []
    for tag in ("a", "b", "c", "d"):
        model = _model(f"fig4{tag}", L=1)
        probs = limiting_conditional_quasi_stationary(model).probs
        panels.append(_limit_panel(f"fig4{tag}", model, probs, range(1, model.N)))
    return tuple(panels)


def _fig5() -> tuple[PanelTable, ...]:
    panels = []
    for tag in ("a", "b"):
        model = _model(f"fig5{tag}", L=1)
        probs = limiting_conditional_quasi_stationary(model).probs
        panels.append(_limit_panel(f"fig5{tag}", model, probs, range(1, model.N + 1)))
    return tuple(panels)


def _fig6() -> tuple[PanelTable, ...]:
    model = _model("fig5b")
    d = conditional_quasi_stationary_expansion(model, L=3)
    eps = 0.02
    exact = quasi_exact(model, eps).probs
    limit = limiting_conditional_quasi_stationary(model).probs
    return (
        _state_panel("fig6a", model, d, exact, range(1, model.N + 1), eps, (1, 2)),
        _eps_panel(
            "fig6b",
            model,
            d,
            10,
            _grid(0.05, 0.0025),
            (1, 2, 3),
            lambda eps: quasi_exact(model, eps).probs[10],
            float(limit[10]),
        ),
    )


def _fig7() -> tuple[PanelTable, ...]:
    panels = []
    for name, preset_name, stop, step in (
        ("fig7a", "fig5a", 0.1, 0.005),
        ("fig7b", "fig5b", 0.02, 0.001),
    ):
        model = _model(preset_name)
        d = stationary_expansion(model, L=3)
        limit = limiting_stationary(model).probs
        panels.append(
            _eps_panel(
                name,
                model,
                d,
                0,
                _grid(stop, step),
                (1, 2, 3),
                lambda eps, m=model: stationary_exact(m, eps).probs[0],
                float(limit[0]),
            )
        )
    return tuple(panels)


_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
}


def figure_tables(figure: str) -> tuple[PanelTable, ...]:
    """All panels of one figure (``fig1`` .. ``fig7``)."""
    try:
        build = _BUILDERS[figure]
    except KeyError:
        known = ", ".join(FIGURES)
        raise BdsmpError(f"unknown figure {figure!r}; expected one of {known}")
    return build()


def reproduce_tables(figures: Sequence[str] | None = None) -> tuple[PanelTable, ...]:
    """Panels for the requested figures (default: every figure)."""
    out: list[PanelTable] = []
    for figure in figures or FIGURES:
        out.extend(figure_tables(figure))
    return tuple(out)
