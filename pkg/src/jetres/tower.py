"""Torus fixed-point data of the jet-tower fibre.

The fibre of the k-level tower over a point is a k-stage tower of P^(n-1)
bundles.  A torus fixed point is a chain (w_1, ..., w_k) of weights, where
w_1 is one of the basis weights L_1..L_n and each later w_i is drawn from the
weight set of the previous level.  Weight sets follow two equivalent rules:

  recursive:  S(w_1..w_{i-1}) = { w_{i-1} } u { w - w_{i-1} : w in S(w_1..w_{i-2}) },
              nonzero elements only;
  closed:     { L_j - w_[1..i],  w_1 - w_[2..i], ..., w_{i-1} - w_i,  w_i }
              minus its single zero element, minus { -(w_t + ... + w_i) : 2<=t<=i }.

Both always have exactly n elements; the equality of the two rules is checked
exhaustively by the test suite.  Weights are integer vectors in the L-basis
and are compared exactly, so "nonzero" and set membership are unambiguous.

Note the count: each weight set carries n elements even though the relative
tangent bundle of a level has rank n - 1.  The sets list the weights of the
rank-n bundle being projectivized at the next level; the fibres are P^(n-1),
and the Euler class at a chain discards the chosen weight itself, leaving
k(n-1) tangent factors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .exactalg import JetresError, MultiPoly, Q, QLike, ResourceLimitError, VarContext

__all__ = [
    "Weight",
    "FixedPoint",
    "ValidationError",
    "basis_weights",
    "weight_set_recursive",
    "weight_set_closed",
    "enumerate_fixed_points",
    "euler_class",
    "euler_value",
    "lambda_context",
    "weight_value",
    "weight_poly",
    "tangent_weights",
    "DEFAULT_POINT_CAP",
]

DEFAULT_POINT_CAP = 10**6


class ValidationError(JetresError):
    """An invalid fixed-point prefix or weight chain."""

    code = "validation"


@dataclass(frozen=True, order=True)
class Weight:
    """A weight sum(c_i * L_i) stored as the integer vector (c_1, ..., c_n)."""

    coeffs: tuple[int, ...]

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Weight":
        return Weight(tuple(-a for a in self.coeffs))

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)


def basis_weights(n: int) -> list[Weight]:
    return [Weight(tuple(1 if j == i else 0 for j in range(n))) for i in range(n)]


def _validate_prefix(prefix: Sequence[Weight], n: int) -> list[list[Weight]]:
    """Walk the recursion, returning the successive weight sets S_0..S_len."""
    sets = [basis_weights(n)]
    for i, w in enumerate(prefix):
        current = sets[-1]
        if w not in current:
            raise ValidationError(f"prefix weight {w.coeffs} at position {i} not in its weight set")
        sets.append(_next_set(current, w))
    return sets


def _next_set(current: Sequence[Weight], chosen: Weight) -> list[Weight]:
    out = {chosen}
    for w in current:
        delta = w - chosen
        if not delta.is_zero:
            out.add(delta)
    return sorted(out)


def weight_set_recursive(prefix: Sequence[Weight], n: int) -> list[Weight]:
    """Weight set above a valid prefix, by the level-by-level recursion."""
    return sorted(_validate_prefix(list(prefix), n)[-1])


def weight_set_closed(prefix: Sequence[Weight], n: int) -> list[Weight]:
    """Same set by the closed form; exact multiset bookkeeping is asserted."""
    prefix = list(prefix)
    _validate_prefix(prefix, n)
    i = len(prefix)
    if i == 0:
        return sorted(basis_weights(n))
    candidates: list[Weight] = []
    total = prefix[0]
    for w in prefix[1:]:
        total = total + w
    for lam in basis_weights(n):
        candidates.append(lam - total)
    # w_t - (w_{t+1} + ... + w_i) for t = 1..i-1, then w_i itself
    for t in range(i - 1):
        tail = prefix[t + 1]
        for w in prefix[t + 2 :]:
            tail = tail + w
        candidates.append(prefix[t] - tail)
    candidates.append(prefix[-1])

    bag = Counter(candidates)
    zeros = bag.pop(Weight((0,) * n), 0)
    if zeros != 1:
        raise ValidationError(f"expected exactly one zero element, found {zeros}")
    removed = 0
    for t in range(1, i):
        tail = prefix[t]
        for w in prefix[t + 1 :]:
            tail = tail + w
        drop = -tail
        if bag[drop] <= 0:
            raise ValidationError(f"subtracted element {drop.coeffs} absent from candidate set")
        bag[drop] -= 1
        removed += 1
        if not bag[drop]:
            del bag[drop]
    # cardinality bookkeeping: n = (n + i) - 1 - (i - 1)
    if sum(bag.values()) != n or any(m != 1 for m in bag.values()):
        raise ValidationError("closed-form weight set is not a set of n elements")
    assert removed == i - 1
    return sorted(bag)


@dataclass(frozen=True)
class FixedPoint:
    """A fixed point of the tower fibre: a valid chain (w_1, ..., w_k)."""

    weights: tuple[Weight, ...]
    n: int

    def __post_init__(self) -> None:
        _validate_prefix(self.weights, self.n)

    @property
    def k(self) -> int:
        return len(self.weights)


def enumerate_fixed_points(n: int, k: int, point_cap: int = DEFAULT_POINT_CAP) -> list[FixedPoint]:
    """All n^k weight chains, in deterministic (sorted-set DFS) order."""
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    if n**k > point_cap:
        raise ResourceLimitError(f"{n}^{k} fixed points exceed cap {point_cap}")
    out: list[FixedPoint] = []

    def rec(chain: list[Weight], current: list[Weight]) -> None:
        if len(chain) == k:
            out.append(FixedPoint(tuple(chain), n))
            return
        for w in current:
            rec(chain + [w], _next_set(current, w))

    rec([], sorted(basis_weights(n)))
    return out


def tangent_weights(fp: FixedPoint) -> list[Weight]:
    """The k(n-1) tangent weights w - w_j over all levels j."""
    out: list[Weight] = []
    current = sorted(basis_weights(fp.n))
    for wj in fp.weights:
        for w in current:
            if w != wj:
                out.append(w - wj)
        current = _next_set(current, wj)
    return out


def lambda_context(n: int) -> VarContext:
    return VarContext(tuple(f"L{i}" for i in range(1, n + 1)))


def weight_poly(w: Weight, ctx: VarContext) -> MultiPoly:
    terms = {}
    for i, c in enumerate(w.coeffs):
        if c:
            e = [0] * len(ctx)
            e[i] = 1
            terms[tuple(e)] = Q(c)
    return MultiPoly(ctx, terms)


def weight_value(w: Weight, lams: Sequence[QLike]) -> Q:
    return sum((Q(c) * Q(v) for c, v in zip(w.coeffs, lams)), Q(0))


def euler_class(fp: FixedPoint, ctx: VarContext | None = None) -> MultiPoly:
    """Equivariant Euler class: the product of all tangent weights, in L_i's."""
    if ctx is None:
        ctx = lambda_context(fp.n)
    out = MultiPoly.const(ctx, 1)
    for w in tangent_weights(fp):
        out = out * weight_poly(w, ctx)
    return out


def euler_value(fp: FixedPoint, lams: Sequence[QLike]) -> Q:
    """Euler class at numeric lambda values (exact rational)."""
    out = Q(1)
    for w in tangent_weights(fp):
        out *= weight_value(w, lams)
    return out
