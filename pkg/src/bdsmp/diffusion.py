"""Continuous-state approximations for the ladder models.

Complements the exact expansion engine with the classical large-``N``
heuristics: carrying capacities from the rescaled drift, Gaussian
approximations of quasi-stationary laws, the allele-frequency diffusion
density of the reproduction model with its per-state bin masses, closed-form
fixation probabilities, and a two-term renewal approximation of the time
fraction spent at an asymptotically absorbing boundary.

Everything here is an *approximation layer*: tests compare it against the
exact engine, never the other way around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .builders import MoranParams, PopDynParams, SISParams
from .errors import (
    DegenerateDerivative,
    FormulaNotApplicable,
    InvariantViolation,
    NonIntegrable,
    NoSignChange,
    RangeError,
    WrongScenario,
)
from .model import BirthDeathSMP
from .reduction import expected_absorption_from_one


@dataclass(frozen=True)
class DriftSpec:
    """Rescaled drift/variance pair of a ladder model at one fixed eps.

    ``m(x)`` is the net flow and ``v(x)`` the fluctuation intensity at
    population fraction ``x``; both are per-fraction rates, so the state
    scale ``N`` enters only when converting back to ladder levels.
    """

    m: Callable[[float], float]
    v: Callable[[float], float]
    N: int
    eps: float

    def __post_init__(self) -> None:
        for x in np.linspace(0.1, 0.9, 9):
            if self.v(float(x)) <= 0:
                raise InvariantViolation(
                    f"variance function must be positive on (0,1); fails at {x}"
                )


def population_drift(p: PopDynParams, eps: float) -> DriftSpec:
    birth = p.birth_rate if p.perturbation == "immigration" else eps
    inflow = eps if p.perturbation == "immigration" else p.immigration_rate

    def up(x: float) -> float:
        return birth * x * (1.0 - p.crowding_birth * x**p.shape_birth) + (
            inflow / p.N
        ) * (1.0 - x**p.shape_immigration)

    def down(x: float) -> float:
        return p.death_rate * x * (1.0 + p.crowding_death * x**p.shape_death)

    return DriftSpec(
        m=lambda x: up(x) - down(x), v=lambda x: up(x) + down(x), N=p.N, eps=eps
    )


def sis_drift(p: SISParams, eps: float) -> DriftSpec:
    def up(x: float) -> float:
        return p.contact_rate * x * (1.0 - x) + eps * (1.0 - x)

    def down(x: float) -> float:
        return p.recovery_rate * x

    return DriftSpec(
        m=lambda x: up(x) - down(x), v=lambda x: up(x) + down(x), N=p.N, eps=eps
    )


def moran_drift(p: MoranParams, eps: float) -> DriftSpec:
    """Allele-frequency drift on the sped-up (one event per copy) clock."""
    u1 = p.mut12_const + p.mut12_slope * eps
    u2 = p.mut21_const + p.mut21_slope * eps
    s1, s2 = p.sel11, p.sel22

    def m(x: float) -> float:
        return u2 * (1.0 - x) - u1 * x + ((s1 + s2) * x - s2) * x * (1.0 - x)

    return DriftSpec(m=m, v=lambda x: 2.0 * x * (1.0 - x), N=p.N, eps=eps)


_BRACKET = (1e-9, 1.0 - 1e-9)


def carrying_capacity(d: DriftSpec) -> tuple[float, float]:
    """Root of the drift on (0,1) and the matching ladder level.

    Returns ``(x, N*x)``.  Requires the growth regime: positive drift at the
    bottom of the interval, negative at the top.
    """
    lo, hi = _BRACKET
    m_lo, m_hi = d.m(lo), d.m(hi)
    if not (m_lo > 0.0 > m_hi):
        raise NoSignChange(
            f"drift does not cross zero on (0,1): m({lo:g}) = {m_lo:g}, "
            f"m({hi:g}) = {m_hi:g}"
        )
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if d.m(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return x, d.N * x


def gaussian_quasi_approx(d: DriftSpec) -> tuple[float, float]:
    """Normal (mean, variance) matching the linearized dynamics at the root."""
    x, level = carrying_capacity(d)
    h = 1e-6 * max(1.0, abs(x))
    slope = (d.m(x + h) - d.m(x - h)) / (2.0 * h)
    if abs(slope) < 1e-10:
        raise DegenerateDerivative(
            f"drift derivative at the root x = {x:g} is numerically zero; the "
            "linearized fluctuation variance is undefined"
        )
    return level, d.N * d.v(x) / (2.0 * abs(slope))


def discretize_gaussian(mean: float, variance: float, N: int) -> np.ndarray:
    """Normal mass over unit bins centered at the states 0..N (unnormalized)."""
    sd = math.sqrt(variance)

    def cdf(z: float) -> float:
        return 0.5 * (1.0 + math.erf((z - mean) / (sd * math.sqrt(2.0))))

    return np.array([cdf(i + 0.5) - cdf(i - 0.5) for i in range(N + 1)])


# ---------------------------------------------------------------------------
# allele-frequency diffusion density


@dataclass(frozen=True)
class DensityTable:
    """Normalized density sampled on an interior grid of (0,1)."""

    xs: np.ndarray
    values: np.ndarray
    total: float  # unnormalized integral over (0,1), kept for reuse


def _mutation_exponents(p: MoranParams, eps: float) -> tuple[float, float]:
    u1 = p.mut12_const + p.mut12_slope * eps
    u2 = p.mut21_const + p.mut21_slope * eps
    if u1 <= 0.0 or u2 <= 0.0:
        raise NonIntegrable(
            f"density exponents must be positive for integrability; got "
            f"{u2:g} at 0 and {u1:g} at 1 (eps = {eps:g})"
        )
    return u1, u2


def _simpson(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, panels: int) -> float:
    if hi <= lo:
        return 0.0
    xs = np.linspace(lo, hi, 2 * panels + 1)
    ys = f(xs)
    h = (hi - lo) / (2 * panels)
    return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1::2].sum() + 2.0 * ys[2:-1:2].sum())


def _density_integral(
    u1: float, u2: float, s1: float, s2: float, lo: float, hi: float, panels: int
) -> float:
    """Integral of x^(u2-1) (1-x)^(u1-1) exp(mix) over [lo, hi].

    The power factors are integrable but unbounded when an exponent is < 1;
    substituting x = t^(1/u2) at the left endpoint (and mirrored at the
    right) turns the singular factor into the constant 1/u2, leaving a
    smooth integrand for the composite Simpson rule.
    """

    def tilt(x: np.ndarray) -> np.ndarray:
        return np.exp(0.5 * (s1 + s2) * x * x - s2 * x)

    def full(x: np.ndarray) -> np.ndarray:
        return x ** (u2 - 1.0) * (1.0 - x) ** (u1 - 1.0) * tilt(x)

    if lo < 0.5 < hi:
        return _density_integral(u1, u2, s1, s2, lo, 0.5, panels) + _density_integral(
            u1, u2, s1, s2, 0.5, hi, panels
        )
    if lo == 0.0 and u2 < 1.0:

        def left(t: np.ndarray) -> np.ndarray:
            x = t ** (1.0 / u2)
            return (1.0 - x) ** (u1 - 1.0) * tilt(x)

        return _simpson(left, 0.0, hi**u2, panels) / u2
    if hi == 1.0 and u1 < 1.0:

        def right(t: np.ndarray) -> np.ndarray:
            x = 1.0 - t ** (1.0 / u1)
            return x ** (u2 - 1.0) * tilt(x)

        return _simpson(right, 0.0, (1.0 - lo) ** u1, panels) / u1
    return _simpson(full, lo, hi, panels)


def moran_diffusion_density(
    p: MoranParams, eps: float, grid: int = 200
) -> DensityTable:
    """Stationary allele-frequency density of the diffusion limit.

    Proportional to x^(U2-1) (1-x)^(U1-1) exp[(sel11+sel22)x^2/2 - sel22*x]
    with U-exponents the eps-evaluated scaled mutation rates; normalized to
    unit mass on (0,1) and sampled at ``grid`` interior points.
    """
    u1, u2 = _mutation_exponents(p, eps)
    s1, s2 = p.sel11, p.sel22
    panels = 10 * grid
    total = _density_integral(u1, u2, s1, s2, 0.0, 1.0, panels)
    xs = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    values = (
        xs ** (u2 - 1.0)
        * (1.0 - xs) ** (u1 - 1.0)
        * np.exp(0.5 * (s1 + s2) * xs * xs - s2 * xs)
        / total
    )
    return DensityTable(xs=xs, values=values, total=total)


def moran_diffusion_bins(p: MoranParams, eps: float, panels: int = 40) -> np.ndarray:
    """Per-state masses: density integrated over ((i-1/2)/N, (i+1/2)/N)."""
    u1, u2 = _mutation_exponents(p, eps)
    s1, s2 = p.sel11, p.sel22
    total = _density_integral(u1, u2, s1, s2, 0.0, 1.0, 10 * 200)
    N = p.N
    out = np.empty(N + 1)
    for i in range(N + 1):
        lo = max(0.0, (i - 0.5) / N)
        hi = min(1.0, (i + 0.5) / N)
        out[i] = _density_integral(u1, u2, s1, s2, lo, hi, panels) / total
    return out


# ---------------------------------------------------------------------------
# fixation


@dataclass(frozen=True)
class FixationSplit:
    """Limiting absorption probabilities of the mutation-free model.

    ``p_low``/``p_high`` depend on the start state; ``pi_low``/``pi_high``
    are the limiting boundary masses of the stationary law as the
    perturbation vanishes, which do not.
    """

    p_low: float
    p_high: float
    pi_low: float
    pi_high: float


def limiting_boundary_split(p: MoranParams) -> tuple[float, float]:
    """Limiting stationary masses (low, high) of the mutation-free model.

    How the vanishing mutation pressure splits the boundary mass depends
    only on the slopes and the selection difference; valid for any
    selection strengths.
    """
    if p.mut12_const != 0.0 or p.mut21_const != 0.0:
        raise WrongScenario(
            "the limiting boundary split needs both limiting mutation rates "
            "zero (the unperturbed chain must absorb at both ends)"
        )
    w = math.exp(-0.5 * (p.sel11 - p.sel22))
    pi_high = p.mut21_slope / (w * p.mut12_slope + p.mut21_slope)
    return 1.0 - pi_high, pi_high


def fixation_probabilities(p: MoranParams, start: int) -> FixationSplit:
    """Closed-form fixation chances, where a closed form exists.

    Known cases: no selection (linear in the start state) and multiplicative
    homozygote weights, (1 + sel11/N)(1 + sel22/N) = 1.  Everything else
    raises FormulaNotApplicable; use the expansion engine instead.
    """
    pi_low, pi_high = limiting_boundary_split(p)
    if not 0 <= start <= p.N:
        raise RangeError(f"start state {start} outside 0..{p.N}")
    s1, s2 = p.sel11 / p.N, p.sel22 / p.N
    if s1 == 0.0 and s2 == 0.0:
        p_high = start / p.N
    elif abs((1.0 + s1) * (1.0 + s2) - 1.0) <= 1e-12:
        p_high = (1.0 - (1.0 + s2) ** start) / (1.0 - (1.0 + s2) ** p.N)
    else:
        raise FormulaNotApplicable(
            "fixation closed forms cover only neutral or multiplicative "
            f"selection; got homozygote weights {1 + s1:g}, {1 + s2:g}"
        )
    return FixationSplit(
        p_low=1.0 - p_high, p_high=p_high, pi_low=pi_low, pi_high=pi_high
    )


# ---------------------------------------------------------------------------
# boundary occupancy under a nearly-absorbing low boundary


def boundary_occupancy_first_order(model: BirthDeathSMP, eps: float) -> float:
    """Two-term renewal approximation of the time fraction at state 0.

    Alternates the mean holding spell at the boundary, 1/(slope*eps), with
    the mean excursion length started from state 1.  The ratio needs no
    accounting of individual 0 -> 0 self-loops (Wald: mean visits times
    mean sojourn is 1/lam_(0,+)(eps) under both sojourn families), so it
    reproduces the exact stationary probability of state 0; the name
    reflects its classical first-order reading 1 - slope*eps*excursion +
    o(eps).
    """
    if model.scenario.tag != "H2" or model.scenario.mirrored:
        raise WrongScenario(
            "the boundary-occupancy approximation applies when the low "
            "boundary is the asymptotically absorbing one"
        )
    if model.source is None:
        raise FormulaNotApplicable(
            "needs intensity-level data: the boundary holding time is "
            "1/lam_(0,+)(eps), which expansions of p and e do not determine"
        )
    g0, g1 = model.source.g_plus[0]
    if g0 != 0.0 or g1 <= 0.0:
        raise WrongScenario(
            "expected an outward boundary intensity of the form slope*eps "
            f"with positive slope; got {g0:g} + {g1:g}*eps"
        )
    hold = 1.0 / (g1 * eps)
    excursion = expected_absorption_from_one(model, eps)
    return hold / (hold + excursion)


def log_series_quasi_limit(r0: float, N: int) -> np.ndarray:
    """Logarithmic-series approximation to the subcritical quasi limit.

    Weight r0^i/i at state i, normalized by |log(1 - r0)| (the absolute
    value keeps the weights positive; the alternating-sign branch of the
    log has no probabilistic meaning).  Only sensible for r0 < 1.
    """
    if not 0.0 < r0 < 1.0:
        raise FormulaNotApplicable(
            f"log-series approximation needs a subcritical ratio in (0,1); "
            f"got {r0:g}"
        )
    i = np.arange(1, N + 1, dtype=float)
    out = np.zeros(N + 1)
    out[1:] = r0**i / (i * abs(math.log1p(-r0)))
    return out
