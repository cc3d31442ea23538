"""Intensity-model constructors for the three worked applications.

Three families of perturbed birth-death dynamics are covered: a
density-regulated population with immigration, a stochastic SIS epidemic
with external infection pressure, and a two-allele reproduction model with
mutation and viability selection.  Each constructor emits an
:class:`~bdsmp.model.IntensityModel` whose branch intensities are exactly
linear in the perturbation parameter, ready for
:func:`~bdsmp.model.from_linear_intensities`.

A registry of named parameter sets (``fig1``, ``fig3``, ``fig4a``-``fig4d``,
``fig5a``, ``fig5b``) backs the CLI presets and the bundled
figure-reproduction sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

from .errors import BdsmpError, InvariantViolation
from .model import IntensityModel

Perturbation = Literal["immigration", "birth"]


@dataclass(frozen=True)
class PopDynParams:
    """Density-regulated population with immigration.

    Per-capita birth and death rates ``birth_rate`` / ``death_rate`` are
    damped (resp. amplified) near the ceiling ``N`` by the crowding factors
    ``1 - crowding_birth*(i/N)**shape_birth`` and
    ``1 + crowding_death*(i/N)**shape_death``; immigration enters at rate
    ``immigration_rate * (1 - (i/N)**shape_immigration)``.  Exactly one
    rate is replaced by the perturbation parameter, selected by
    ``perturbation``: ``"immigration"`` studies a nearly-closed population
    (extinction asymptotically absorbing), ``"birth"`` a nearly sterile one
    sustained by immigration.  The replaced field is ignored.
    """

    N: int
    birth_rate: float
    death_rate: float
    immigration_rate: float
    crowding_birth: float
    crowding_death: float
    shape_birth: float = 1.0
    shape_immigration: float = 1.0
    shape_death: float = 1.0
    perturbation: Perturbation = "immigration"

    def __post_init__(self) -> None:
        if self.N < 1:
            raise InvariantViolation("population ceiling N must be >= 1")
        for name in ("birth_rate", "death_rate", "immigration_rate"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} must be >= 0")
        if not 0.0 <= self.crowding_birth <= 1.0:
            raise InvariantViolation("crowding_birth must lie in [0, 1]")
        if self.crowding_death < 0:
            raise InvariantViolation("crowding_death must be >= 0")
        if self.crowding_birth == 0 and self.crowding_death == 0:
            raise InvariantViolation(
                "at least one crowding weight must be strictly positive"
            )
        for name in ("shape_birth", "shape_immigration", "shape_death"):
            if getattr(self, name) <= 0:
                raise InvariantViolation(f"{name} must be > 0")
        if self.perturbation not in ("immigration", "birth"):
            raise InvariantViolation(
                f"unknown perturbation kind {self.perturbation!r}"
            )


def population_dynamics_model(p: PopDynParams, eps0: float = 1.0) -> IntensityModel:
    """Birth-death intensities of the population model.

    Under the ``"immigration"`` perturbation the upward intensity is
    ``birth_rate*i*(1 - crowding_birth*(i/N)**shape_birth)`` plus the
    perturbation times ``1 - (i/N)**shape_immigration``, and the empty state
    gets a unit self-loop clock (its total intensity would vanish at
    eps = 0 otherwise; hitting times and conditional laws are insensitive
    to the loop).  Under the ``"birth"`` perturbation the roles of the two
    upward terms swap and no regularization is needed, immigration keeping
    every state alive in the limit.
    """
    if p.death_rate <= 0:
        raise InvariantViolation("death_rate must be > 0")
    if p.perturbation == "immigration" and p.birth_rate <= 0:
        raise InvariantViolation(
            "the immigration-perturbed model needs birth_rate > 0: interior "
            "upward intensities must not vanish at eps = 0"
        )
    if p.perturbation == "birth" and p.immigration_rate <= 0:
        raise InvariantViolation(
            "the birth-perturbed model needs immigration_rate > 0: the empty "
            "state has no dynamics at eps = 0 otherwise"
        )
    N = p.N
    g_plus: list[tuple[float, float]] = []
    g_minus: list[tuple[float, float]] = []
    for i in range(N + 1):
        x = i / N
        births = i * (1.0 - p.crowding_birth * x**p.shape_birth)
        inflow = 1.0 - x**p.shape_immigration
        deaths = p.death_rate * i * (1.0 + p.crowding_death * x**p.shape_death)
        if p.perturbation == "immigration":
            g_plus.append((p.birth_rate * births, inflow))
        else:
            g_plus.append((p.immigration_rate * inflow, births))
        g_minus.append((deaths, 0.0))
    if p.perturbation == "immigration":
        g_minus[0] = (1.0, 0.0)
    return IntensityModel(
        N=N,
        g_plus=tuple(g_plus),
        g_minus=tuple(g_minus),
        sojourn_family="exponential",
        eps0=eps0,
    )


@dataclass(frozen=True)
class SISParams:
    """Closed SIS epidemic with frequency-dependent contacts.

    ``contact_rate`` scales the internal infection pressure ``i(1 - i/N)``
    and ``recovery_rate`` the per-host recovery ``i``.  The perturbation
    parameter is the external infection rate per susceptible, so the
    upward slope at ``i`` infected is ``N - i``.
    """

    N: int
    contact_rate: float
    recovery_rate: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise InvariantViolation("host count N must be >= 1")
        if self.contact_rate <= 0 or self.recovery_rate <= 0:
            raise InvariantViolation("contact and recovery rates must be > 0")


def sis_model(p: SISParams, eps0: float = 1.0) -> IntensityModel:
    """Infection/recovery intensities, infection-free state regularized.

    The infection-free state gets the same unit self-loop clock as the
    population model: without it the state's total intensity vanishes at
    eps = 0 and no embedded chain exists there.
    """
    N = p.N
    g_plus = tuple(
        (p.contact_rate * i * (1.0 - i / N), float(N - i)) for i in range(N + 1)
    )
    g_minus: list[tuple[float, float]] = [
        (p.recovery_rate * i, 0.0) for i in range(N + 1)
    ]
    g_minus[0] = (1.0, 0.0)
    return IntensityModel(
        N=N,
        g_plus=g_plus,
        g_minus=tuple(g_minus),
        sojourn_family="exponential",
        eps0=eps0,
    )


@dataclass(frozen=True)
class MoranParams:
    """Two-allele overlapping-generation reproduction model.

    The chain counts copies of allele 1 among ``N`` gene copies (``N/2``
    diploid individuals, so ``N`` is even).  At each replacement event one
    copy dies uniformly at random and is replaced by a copy whose type
    reflects viability selection and mutation: homozygote pairings survive
    with weights ``1 + sel11/N`` and ``1 + sel22/N`` against 1 for the
    heterozygote, and the chosen parental copy then mutates 1 -> 2 with
    probability ``(mut12_const + mut12_slope*eps)/N`` or 2 -> 1 with
    ``(mut21_const + mut21_slope*eps)/N``.
    """

    N: int
    mut12_const: float
    mut12_slope: float
    mut21_const: float
    mut21_slope: float
    sel11: float = 0.0
    sel22: float = 0.0

    def __post_init__(self) -> None:
        if self.N < 2 or self.N % 2:
            raise InvariantViolation("gene-copy count N must be even and >= 2")
        for name in ("mut12_const", "mut12_slope", "mut21_const", "mut21_slope"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} must be >= 0")
        if self.mut12_slope + self.mut21_slope <= 0:
            raise InvariantViolation(
                "at least one mutation slope must be strictly positive; the "
                "model is otherwise unperturbed"
            )
        for name in ("sel11", "sel22"):
            if 1.0 + getattr(self, name) / self.N < 0:
                raise InvariantViolation(
                    f"1 + {name}/N must be >= 0 (survival weights are "
                    "probabilities up to normalization)"
                )


def _post_selection_fraction(x: float, s1: float, s2: float) -> float:
    """Probability the surviving parental copy is allele 1, before mutation."""
    num = (1.0 + s1) * x * x + x * (1.0 - x)
    den = (
        (1.0 + s1) * x * x
        + 2.0 * x * (1.0 - x)
        + (1.0 + s2) * (1.0 - x) * (1.0 - x)
    )
    if den <= 0:
        raise InvariantViolation(
            f"selection weights degenerate at allele fraction {x}: every "
            "pairing has survival weight zero"
        )
    return num / den


def moran_model(p: MoranParams, eps0: float = 1.0) -> IntensityModel:
    """Replacement-event intensities with unit clocks at the boundaries.

    Interior intensities multiply the incoming-copy allele probability by
    the outgoing-copy probability.  At the monomorphic states the blocked
    direction folds into a self-loop, so the event clock is exactly one
    there for every eps and the geometric sojourn parameter stays valid.
    """
    N = p.N
    s1, s2 = p.sel11 / N, p.sel22 / N
    u1c, u1s = p.mut12_const / N, p.mut12_slope / N
    u2c, u2s = p.mut21_const / N, p.mut21_slope / N
    g_plus: list[tuple[float, float]] = []
    g_minus: list[tuple[float, float]] = []
    for i in range(N + 1):
        x = i / N
        sel = _post_selection_fraction(x, s1, s2)
        # incoming-copy allele-1 probability, affine in eps
        in0 = sel + u2c - (u1c + u2c) * sel
        in1 = u2s - (u1s + u2s) * sel
        g_plus.append((in0 * (1.0 - x), in1 * (1.0 - x)))
        g_minus.append(((1.0 - in0) * x, -in1 * x))
    g_minus[0] = (1.0 - g_plus[0][0], -g_plus[0][1])
    g_plus[N] = (1.0 - g_minus[N][0], -g_minus[N][1])
    return IntensityModel(
        N=N,
        g_plus=tuple(g_plus),
        g_minus=tuple(g_minus),
        sojourn_family="geometric",
        eps0=eps0,
    )


def genotype_survival_weights(p: MoranParams) -> tuple[float, float, float]:
    """Normalized survival weights of the (11, 12, 22) genotype pairings."""
    s1, s2 = p.sel11 / p.N, p.sel22 / p.N
    total = 3.0 + s1 + s2
    return ((1.0 + s1) / total, 1.0 / total, (1.0 + s2) / total)


# ---------------------------------------------------------------------------
# named presets


def _allele_flow_variant(sel11: float, sel22: float) -> IntensityModel:
    """Mutation-free limit with perturbation-driven mutation both ways."""
    return moran_model(
        MoranParams(
            N=100,
            mut12_const=0.0,
            mut12_slope=100.0,
            mut21_const=0.0,
            mut21_slope=100.0,
            sel11=sel11,
            sel22=sel22,
        )
    )


PRESETS: dict[str, Callable[[], IntensityModel]] = {
    "fig1": lambda: moran_model(
        MoranParams(
            N=100,
            mut12_const=5.0,
            mut12_slope=0.0,
            mut21_const=5.0,
            mut21_slope=100.0,
        )
    ),
    "fig3": lambda: _allele_flow_variant(0.0, 0.0),
    "fig4a": lambda: _allele_flow_variant(0.0, 0.0),
    "fig4b": lambda: _allele_flow_variant(10.0, -10.0),
    "fig4c": lambda: _allele_flow_variant(10.0, 10.0),
    "fig4d": lambda: _allele_flow_variant(-10.0, -10.0),
    "fig5a": lambda: sis_model(
        SISParams(N=100, contact_rate=0.5, recovery_rate=1.0)
    ),
    "fig5b": lambda: sis_model(
        SISParams(N=100, contact_rate=1.5, recovery_rate=1.0)
    ),
}

PRESET_NAMES: tuple[str, ...] = tuple(sorted(PRESETS))


def preset(name: str) -> IntensityModel:
    """Build one of the named example parameterizations."""
    try:
        build = PRESETS[name]
    except KeyError:
        raise BdsmpError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    return build()
