"""Row-set builders behind the CLI/service commands.

Each builder returns ``(columns, rows)`` ready for CSV rendering or a JSON
response.  Sweeps over several eps values fan the per-eps work out to a
thread pool and reassemble the blocks in request order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .builders import preset
from .distributions import (
    DistributionExpansion,
    conditional_quasi_stationary_expansion,
    quasi_exact,
    stationary_exact,
    stationary_expansion,
)
from .errors import BdsmpError
from .model import BirthDeathSMP, IntensityModel, from_linear_intensities
from .simulate import SimulationResult, hitting_estimate, simulate_path

Cell = float | int | str | None
TableData = tuple[tuple[str, ...], list[tuple[Cell, ...]]]


def load_intensity(
    preset_name: Optional[str], descriptor: Optional[dict]
) -> IntensityModel:
    if (preset_name is None) == (descriptor is None):
        raise BdsmpError("give exactly one of preset / descriptor")
    if preset_name is not None:
        return preset(preset_name)
    return IntensityModel.from_descriptor(descriptor)


def load_model(
    preset_name: Optional[str],
    descriptor: Optional[dict],
    L: int,
) -> BirthDeathSMP:
    # the model's own window must hold at least the first-order term; an
    # L = 0 request just truncates the delivered expansions harder
    return from_linear_intensities(load_intensity(preset_name, descriptor), max(L, 1))


def _applicable_expansions(
    model: BirthDeathSMP, L: int
) -> list[DistributionExpansion]:
    out = [stationary_expansion(model, L)]
    if model.scenario.tag != "H1":
        out.append(conditional_quasi_stationary_expansion(model, L))
    return out


def _keep(states: Optional[Sequence[int]], i: int) -> bool:
    return states is None or i in states


def expand_rows(
    model: BirthDeathSMP, L: int, states: Optional[Sequence[int]] = None
) -> TableData:
    columns = (
        "state",
        "kind",
        "shift",
        *(f"coeff_{l}" for l in range(L + 1)),
        "guaranteed_k",
    )
    rows: list[tuple[Cell, ...]] = []
    for d in _applicable_expansions(model, L):
        for i in d.support:
            if not _keep(states, i):
                continue
            exp = d.expansion_for(i)
            # coeff_l multiplies eps**(shift + l): the shift column carries
            # the leading order, so every state gets L + 1 live columns
            rows.append((i, d.kind, exp.h, *exp.coeffs, exp.k))
    return columns, rows


def exact_rows(
    model: BirthDeathSMP,
    eps_values: Sequence[float],
    states: Optional[Sequence[int]] = None,
) -> TableData:
    columns = ("state", "eps", "pi", "quasi")
    has_quasi = model.scenario.tag != "H1"

    def block(eps: float) -> list[tuple[Cell, ...]]:
        pi = stationary_exact(model, eps)
        quasi = quasi_exact(model, eps) if has_quasi else None
        out = []
        for i in range(model.N + 1):
            if not _keep(states, i):
                continue
            q = quasi.probs[i] if quasi is not None and i in quasi.support else None
            out.append((i, eps, float(pi.probs[i]), q))
        return out

    return columns, _sweep(block, eps_values)


def compare_rows(
    model: BirthDeathSMP,
    L: int,
    eps_values: Sequence[float],
    states: Optional[Sequence[int]] = None,
) -> TableData:
    columns = ("state", "eps", "exact", "truncated_L", "abs_error", "error_over_epsL")
    d = stationary_expansion(model, L)

    def block(eps: float) -> list[tuple[Cell, ...]]:
        exact = stationary_exact(model, eps)
        out = []
        for i in range(model.N + 1):
            if not _keep(states, i):
                continue
            trunc = d.truncated_value(i, eps)
            err = abs(float(exact.probs[i]) - trunc)
            out.append(
                (
                    i,
                    eps,
                    float(exact.probs[i]),
                    trunc,
                    err,
                    err / eps ** (L + d.shift_for(i)),
                )
            )
        return out

    return columns, _sweep(block, eps_values)


def simulate_rows(
    model: IntensityModel,
    eps: float,
    horizon: float,
    seed: int,
    replications: int = 0,
    start: int = 0,
    target: int = 0,
) -> TableData:
    columns = ("stat", "state", "value", "se", "count")
    result: SimulationResult = simulate_path(
        model, eps, horizon=horizon, seed=seed, start=start
    )
    rows: list[tuple[Cell, ...]] = [
        ("occupation", i, float(result.occupation[i]), float(result.occupation_se[i]), None)
        for i in range(model.N + 1)
    ]
    for i in sorted(result.mean_return):
        mean, se, count = result.mean_return[i]
        rows.append(("mean_return", i, mean, se, count))
    if result.mean_hit_0_from_1 is not None:
        mean, se, count = result.mean_hit_0_from_1
        rows.append(("hit_time_to_0", 1, mean, se, count))
    if replications > 0:
        mean, se = hitting_estimate(
            model, eps, start=start, target=target, replications=replications, seed=seed
        )
        rows.append((f"first_passage_to_{target}", start, mean, se, replications))
    return columns, rows


def _sweep(block, eps_values: Sequence[float]) -> list[tuple[Cell, ...]]:
    if len(eps_values) == 1:
        return block(eps_values[0])
    with ThreadPoolExecutor(max_workers=min(8, len(eps_values))) as pool:
        chunks = list(pool.map(block, eps_values))
    return [row for chunk in chunks for row in chunk]
