"""Fixed-point localization sums.

The integral of an equivariant class over a space with finitely many torus
fixed points is the sum, over the fixed points, of the class's value divided
by the equivariant Euler class of the tangent space.  The denominators cancel
whenever the input is a genuine integral; :func:`abbv_sum` performs the exact
common-denominator sum and reduces it, so such inputs come back with
denominator 1.

:func:`fibre_integral_fixed_points` applies this to the jet-tower fibre:
weights are specialized to distinct rationals -- exact arithmetic, no
symbolic simplification bottleneck -- and the hyperplane variable h rides
along as an opaque constant.  The six-point Grassmannian demo keeps its
weights symbolic, where the full cancellation is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exactalg import JetresError, MultiPoly, Q, QLike, VarContext
from .tower import (
    DEFAULT_POINT_CAP,
    enumerate_fixed_points,
    euler_value,
    weight_value,
)

__all__ = [
    "DegenerateWeightsError",
    "LocalizationDatum",
    "SymbolicFraction",
    "abbv_sum",
    "grassmannian_context",
    "grassmannian_fixed_point_data",
    "fibre_integral_fixed_points",
]


class DegenerateWeightsError(JetresError):
    """Weight values collide, making an Euler denominator vanish."""

    code = "degenerate"


@dataclass(frozen=True)
class LocalizationDatum:
    """One fixed point: the class value at the point and the Euler class."""

    numerator_value: MultiPoly
    euler: MultiPoly

    def __post_init__(self) -> None:
        if self.euler.is_zero:
            raise DegenerateWeightsError("zero Euler class at a fixed point")


class SymbolicFraction:
    """A quotient of polynomials, reduced by exact division when possible."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: MultiPoly, denominator: MultiPoly):
        if denominator.is_zero:
            raise ZeroDivisionError("zero denominator")
        quot = numerator.divide_exact(denominator)
        if quot is not None:
            numerator = quot
            denominator = MultiPoly.const(numerator.ctx, 1)
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("SymbolicFraction is immutable")

    @property
    def is_polynomial(self) -> bool:
        return self.denominator == MultiPoly.const(self.denominator.ctx, 1)

    def as_polynomial(self) -> MultiPoly:
        if not self.is_polynomial:
            raise JetresError("fraction did not reduce to a polynomial")
        return self.numerator

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Q)):
            return self.is_polynomial and self.numerator == other
        if isinstance(other, MultiPoly):
            return self.is_polynomial and self.numerator == other
        if isinstance(other, SymbolicFraction):
            return (self.numerator * other.denominator) == (other.numerator * self.denominator)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def __repr__(self) -> str:
        if self.is_polynomial:
            return f"SymbolicFraction({self.numerator.to_text()})"
        return f"SymbolicFraction(({self.numerator.to_text()})/({self.denominator.to_text()}))"


def abbv_sum(points: Sequence[LocalizationDatum]) -> SymbolicFraction:
    """Exact fixed-point sum: sum of value/euler over a common denominator."""
    if not points:
        raise ValueError("need at least one fixed point")
    ctx = points[0].numerator_value.ctx
    numerator = MultiPoly.zero(ctx)
    denominator = MultiPoly.const(ctx, 1)
    for datum in points:
        numerator = numerator * datum.euler + datum.numerator_value * denominator
        denominator = denominator * datum.euler
    return SymbolicFraction(numerator, denominator)


def grassmannian_context() -> VarContext:
    return VarContext(("M1", "M2", "M3", "M4"))


def grassmannian_fixed_point_data(
    mus: Sequence[QLike] | None = None,
) -> list[LocalizationDatum]:
    """The six fixed points of Grass(2,4) for the class c_1(tau)^2 c_2(tau).

    Value at the point {i,j} is (m_i+m_j)^2 m_i m_j; the Euler class is
    prod_{s not in {i,j}} (m_s-m_i)(m_s-m_j).  Symbolic by default.
    """
    ctx = grassmannian_context()
    if mus is None:
        vals = [MultiPoly.variable(ctx, f"M{i}") for i in range(1, 5)]
    else:
        if len(mus) != 4:
            raise ValueError("need four weights")
        if len({Q(m) for m in mus}) != 4:
            raise DegenerateWeightsError("repeated weight values")
        vals = [MultiPoly.const(ctx, m) for m in mus]
    out = []
    for i in range(4):
        for j in range(i + 1, 4):
            value = (vals[i] + vals[j]) ** 2 * vals[i] * vals[j]
            euler = MultiPoly.const(ctx, 1)
            for s in range(4):
                if s not in (i, j):
                    euler = euler * (vals[s] - vals[i]) * (vals[s] - vals[j])
            out.append(LocalizationDatum(value, euler))
    return out


def fibre_integral_fixed_points(
    n: int,
    k: int,
    P: MultiPoly,
    lambdas: Sequence[QLike],
    point_cap: int = DEFAULT_POINT_CAP,
) -> MultiPoly:
    """Fibre integral of P(z_1..z_k, h) over the k-tower by fixed points.

    The weights are the numeric values `lambdas` (pairwise distinct); h stays
    symbolic.  For homogeneous P of degree k(n-1) the result is independent
    of the chosen weight values; lower degrees integrate to zero and higher
    degrees are weight-dependent (callers who care should check
    `degree k(n-1)` themselves -- the sum is returned either way).
    """
    lams = [Q(v) for v in lambdas]
    if len(lams) != n:
        raise ValueError("need n weight values")
    if len(set(lams)) != n:
        raise DegenerateWeightsError("repeated weight values")
    subs_template = {f"z{i}": Q(0) for i in range(1, k + 1)}
    total = MultiPoly.zero(P.ctx)
    for fp in enumerate_fixed_points(n, k, point_cap):
        euler = euler_value(fp, lams)
        if euler == 0:
            raise DegenerateWeightsError(
                "weight collision at the chosen values; pick different lambdas"
            )
        subs = dict(subs_template)
        for i, w in enumerate(fp.weights, start=1):
            subs[f"z{i}"] = weight_value(w, lams)
        total = total + P.substitute(subs) * (Q(1) / euler)
    return total
