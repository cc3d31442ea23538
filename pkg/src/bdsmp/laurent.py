"""Arithmetic for truncated Laurent asymptotic expansions.

A :class:`LaurentExpansion` represents a function of a small parameter
``eps`` of the form ::

    a_h*eps**h + a_{h+1}*eps**(h+1) + ... + a_k*eps**k + o(eps**k)

with integer ``h <= k`` (``h`` may be negative).  The pair ``(h, k)`` is the
*precision window*: coefficients below ``h`` are exactly zero by
construction, coefficients above ``k`` are unknown.  Every operation
propagates the window of its result exactly — this bookkeeping, rather than
the convolution arithmetic itself, is the point of the module.  The window
laws are:

    scale:    h, k unchanged
    add:      h = min(h_A, h_B),   k = min(k_A, k_B)
    multiply: h = h_A + h_B,       k = min(k_A + h_B, k_B + h_A)
    divide:   h = h_A - h_B,       k = min(k_A - h_B, k_B - 2*h_B + h_A)

and their m-ary generalizations (see :func:`multi_sum`, :func:`multi_product`).

An expansion whose leading coefficient is nonzero (under a relative
threshold, see :meth:`LaurentExpansion.is_pivotal`) is called *pivotal*.
Divisors must be pivotal.  Products of non-pivotal expansions are permitted:
the result keeps its declared window and simply is not pivotal either; no
implicit re-anchoring ever happens (:meth:`LaurentExpansion.re_anchor` is
explicit), so windows remain auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import InsufficientPrecision, NonPivotalDivisor, NonPivotalOperand

#: relative threshold under which a coefficient counts as zero
ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class LaurentExpansion:
    """Truncated Laurent expansion with an explicit precision window."""

    h: int
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.h, int):
            raise TypeError(f"lower order must be an integer, got {self.h!r}")
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("an expansion needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    # -- window -----------------------------------------------------------

    @property
    def k(self) -> int:
        """Highest power whose coefficient is guaranteed."""
        return self.h + len(self.coeffs) - 1

    @property
    def span(self) -> int:
        """Window length ``k - h`` (number of coefficients minus one)."""
        return len(self.coeffs) - 1

    def coeff(self, power: int) -> float:
        """Coefficient of ``eps**power``.

        Powers below ``h`` are exactly zero.  Powers above ``k`` are not
        represented and asking for them is an error, not zero.
        """
        if power > self.k:
            raise InsufficientPrecision(
                f"coefficient of eps^{power} is beyond the guaranteed window "
                f"(k = {self.k})"
            )
        if power < self.h:
            return 0.0
        return self.coeffs[power - self.h]

    # -- pivotality -------------------------------------------------------

    @property
    def zero_threshold(self) -> float:
        return ZERO_RTOL * max(1.0, max(abs(c) for c in self.coeffs))

    @property
    def is_pivotal(self) -> bool:
        """True iff the leading coefficient is nonzero (thresholded)."""
        return abs(self.coeffs[0]) > self.zero_threshold

    def re_anchor(self) -> "LaurentExpansion":
        """Drop leading below-threshold coefficients (h rises, k fixed).

        All-zero expansions are returned unchanged: there is no meaningful
        anchor to move to.
        """
        tol = self.zero_threshold
        for idx, c in enumerate(self.coeffs):
            if abs(c) > tol:
                if idx == 0:
                    return self
                return LaurentExpansion(self.h + idx, self.coeffs[idx:])
        return self

    # -- evaluation & slicing --------------------------------------------

    def evaluate(self, eps: float) -> float:
        """Value of the truncated expansion at ``eps`` (remainder dropped)."""
        return math.fsum(c * eps ** (self.h + r) for r, c in enumerate(self.coeffs))

    def truncate(self, new_k: int) -> "LaurentExpansion":
        """Shrink the window to ``[h, new_k]``."""
        if not self.h <= new_k <= self.k:
            raise ValueError(f"cannot truncate window [{self.h},{self.k}] to k={new_k}")
        return LaurentExpansion(self.h, self.coeffs[: new_k - self.h + 1])

    # -- operator sugar (delegates to the module-level operations) --------

    def __add__(self, other: "LaurentExpansion") -> "LaurentExpansion":
        return add(self, other)

    def __neg__(self) -> "LaurentExpansion":
        return scale(-1.0, self)

    def __sub__(self, other: "LaurentExpansion") -> "LaurentExpansion":
        return add(self, scale(-1.0, other))

    def __mul__(self, other: Union["LaurentExpansion", float, int]) -> "LaurentExpansion":
        if isinstance(other, LaurentExpansion):
            return multiply(self, other)
        return scale(float(other), self)

    def __rmul__(self, other: Union[float, int]) -> "LaurentExpansion":
        return scale(float(other), self)

    def __truediv__(self, other: Union["LaurentExpansion", float, int]) -> "LaurentExpansion":
        if isinstance(other, LaurentExpansion):
            return divide(self, other)
        return scale(1.0 / float(other), self)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        terms = ", ".join(f"{c!r}*e^{self.h + r}" for r, c in enumerate(self.coeffs))
        return f"Laurent[{terms} + o(e^{self.k})]"


def expansion(h: int, coeffs: Sequence[float]) -> LaurentExpansion:
    """Convenience constructor."""
    return LaurentExpansion(h, tuple(coeffs))


def constant(value: float, k: int = 0) -> LaurentExpansion:
    """The constant ``value`` with guaranteed window ``[0, k]``."""
    return LaurentExpansion(0, (float(value),) + (0.0,) * k)


# ---------------------------------------------------------------------------
# operations


def scale(c: float, a: LaurentExpansion) -> LaurentExpansion:
    """``c * A``; window unchanged."""
    return LaurentExpansion(a.h, tuple(c * x for x in a.coeffs))


def add(a: LaurentExpansion, b: LaurentExpansion) -> LaurentExpansion:
    """``A + B`` on the common window ``[min h, min k]``."""
    h = min(a.h, b.h)
    k = min(a.k, b.k)
    if k < h:
        # Cannot happen for well-formed operands (k >= h individually implies
        # min k >= min h), but guard so malformed input fails loudly.
        raise InsufficientPrecision("addition windows do not overlap")
    return LaurentExpansion(h, tuple(a.coeff(p) + b.coeff(p) for p in range(h, k + 1)))


def multiply(a: LaurentExpansion, b: LaurentExpansion) -> LaurentExpansion:
    """``A * B`` by truncated convolution.

    Non-pivotal operands are allowed; the result keeps the declared window
    ``h = h_A + h_B`` without re-anchoring and is itself non-pivotal.
    """
    h = a.h + b.h
    k = min(a.k + b.h, b.k + a.h)
    n = k - h + 1
    out = []
    for r in range(n):
        out.append(math.fsum(a.coeffs[l] * b.coeffs[r - l] for l in range(r + 1)))
    return LaurentExpansion(h, tuple(out))


def divide(a: LaurentExpansion, b: LaurentExpansion) -> LaurentExpansion:
    """``A / B`` by long division; ``B`` must be pivotal.

    The recurrence subtracts the already-produced quotient terms::

        f_r = (a_r - sum_{l=1..r} b_l * f_{r-l}) / b_0

    (indices relative to each window's anchor), which is the unique choice
    making ``multiply(B, divide(A, B))`` reproduce ``A`` on the common
    window.
    """
    if not b.is_pivotal:
        raise NonPivotalDivisor(
            "divisor has a vanishing leading coefficient at this precision"
        )
    h = a.h - b.h
    k = min(a.k - b.h, b.k - 2 * b.h + a.h)
    n = k - h + 1
    b0 = b.coeffs[0]
    f: list[float] = []
    for r in range(n):
        s = math.fsum(b.coeffs[l] * f[r - l] for l in range(1, r + 1))
        f.append((a.coeffs[r] - s) / b0)
    return LaurentExpansion(h, tuple(f))


def balanced_divide(a: LaurentExpansion, b: LaurentExpansion) -> LaurentExpansion:
    """``A / B``, re-balancing the representation when B's tail grows fast.

    The zero threshold behind :meth:`LaurentExpansion.is_pivotal` compares
    coefficients that sit at different powers of eps.  An expansion with a
    small convergence radius ``rho`` has coefficients growing like
    ``rho**-r``, so a genuinely nonzero leading coefficient can drown in
    the growth of its own tail and :func:`divide` would reject a perfectly
    well-posed division.  This wrapper substitutes ``eps = 2**m * delta``
    with ``m`` chosen to flatten the divisor's tail growth, divides there,
    and substitutes back.  Powers of two scale floats exactly, so this is
    the same arithmetic as :func:`divide` on a re-balanced representation,
    with identical windows.

    The growth estimate deliberately ignores the leading coefficient: a
    divisor whose lead is cancellation noise shows a jump between lead and
    tail, stays non-pivotal after balancing, and is still rejected.
    """
    if b.is_pivotal or len(b.coeffs) < 3:
        return divide(a, b)
    tail = [abs(c) for c in b.coeffs[1:]]
    ratios = [n / d for d, n in zip(tail, tail[1:]) if d > 0.0 and n > 0.0]
    if not ratios:
        return divide(a, b)
    growth = math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))
    if growth <= 1.0:
        return divide(a, b)
    m = -round(math.log2(growth))
    top = max(abs(a.h), abs(a.k), abs(b.h), abs(b.k), abs(a.h - b.h), 1)
    while m and abs(m) * top > 960:
        m += 1
    if m == 0:
        return divide(a, b)
    q = divide(_conjugate(a, m), _conjugate(b, m))
    return _conjugate(q, -m)


def _conjugate(x: LaurentExpansion, m: int) -> LaurentExpansion:
    # substitution eps -> 2**m * eps: the order-j coefficient gains 2**(m*j)
    return LaurentExpansion(
        x.h, tuple(c * 2.0 ** (m * (x.h + r)) for r, c in enumerate(x.coeffs))
    )


def multi_sum(xs: Iterable[LaurentExpansion]) -> LaurentExpansion:
    """Sum of many expansions on the window ``[min h, min k]``."""
    xs = list(xs)
    if not xs:
        raise ValueError("multi_sum of an empty list")
    h = min(x.h for x in xs)
    k = min(x.k for x in xs)
    if k < h:
        raise InsufficientPrecision("summation windows do not overlap")
    return LaurentExpansion(
        h, tuple(math.fsum(x.coeff(p) for x in xs) for p in range(h, k + 1))
    )


def multi_product(xs: Iterable[LaurentExpansion]) -> LaurentExpansion:
    """Product of many pivotal expansions.

    Window: ``h = sum h_l`` and ``k = min_l (k_l + sum_{r != l} h_r)``.
    Computed as a fold of :func:`multiply`, which yields exactly that window
    by associativity of the pairwise law (asserted).
    """
    xs = list(xs)
    if not xs:
        raise ValueError("multi_product of an empty list")
    for x in xs:
        if not x.is_pivotal:
            raise NonPivotalOperand("multi_product requires pivotal factors")
    h = sum(x.h for x in xs)
    k = min(x.k + (h - x.h) for x in xs)
    acc = xs[0]
    for x in xs[1:]:
        acc = multiply(acc, x)
    assert acc.h == h and acc.k == k
    return acc
