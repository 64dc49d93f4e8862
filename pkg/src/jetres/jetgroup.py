"""The k-jet reparametrization group.

A reparametrization germ t -> a1*t + a2*t^2 + ... + ak*t^k (a1 != 0) acts on
k-jets by an upper-triangular matrix whose (i, j) entry is the sum of
a_{s1}*...*a_{si} over all compositions s1+...+si = j into i positive parts.
The action is row-vector times matrix, which fixes the homomorphism
convention: matrix(compose(phi, psi)) = matrix(phi) * matrix(psi) where
compose(phi, psi)(t) = phi(psi(t)).

This module is a self-contained correctness corpus for the combinatorial
kernels; nothing downstream imports it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .exactalg import MultiPoly, Q, VarContext

__all__ = [
    "JetReparam",
    "reparam_matrix",
    "reparam_matrix_symbolic",
    "reparam_compose",
    "alpha_context",
]


@dataclass(frozen=True)
class JetReparam:
    """Coefficients (a1, ..., ak) of a k-jet of reparametrization, a1 != 0."""

    alpha: tuple[Q, ...]

    def __post_init__(self) -> None:
        if not self.alpha:
            raise ValueError("k must be at least 1")
        if self.alpha[0] == 0:
            raise ValueError("a1 must be nonzero")
        object.__setattr__(self, "alpha", tuple(Q(a) for a in self.alpha))

    @property
    def k(self) -> int:
        return len(self.alpha)

    @property
    def is_unipotent(self) -> bool:
        return self.alpha[0] == 1

    @classmethod
    def identity(cls, k: int) -> "JetReparam":
        return cls((Q(1),) + (Q(0),) * (k - 1))


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> tuple[tuple[int, ...], ...]:
    """All ways to write total as an ordered sum of `parts` positive integers."""
    if parts == 1:
        return ((total,),) if total >= 1 else ()
    out = []
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


def reparam_matrix(phi: JetReparam) -> list[list[Q]]:
    """The k x k matrix of the jet action; entry (i, j) sums over compositions."""
    k = phi.k
    a = phi.alpha
    mat = []
    for i in range(1, k + 1):
        row = []
        for j in range(1, k + 1):
            total = Q(0)
            for comp in _compositions(j, i):
                term = Q(1)
                for s in comp:
                    term *= a[s - 1]
                total += term
            row.append(total)
        mat.append(row)
    return mat


def alpha_context(k: int) -> VarContext:
    return VarContext(tuple(f"a{i}" for i in range(1, k + 1)))


def reparam_matrix_symbolic(k: int) -> list[list[MultiPoly]]:
    """Same matrix with symbolic coefficients a1..ak."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ctx = alpha_context(k)
    avars = [MultiPoly.variable(ctx, f"a{i}") for i in range(1, k + 1)]
    mat = []
    for i in range(1, k + 1):
        row = []
        for j in range(1, k + 1):
            total = MultiPoly.zero(ctx)
            for comp in _compositions(j, i):
                term = MultiPoly.const(ctx, 1)
                for s in comp:
                    term = term * avars[s - 1]
                total = total + term
            row.append(total)
        mat.append(row)
    return mat


def reparam_compose(phi: JetReparam, psi: JetReparam) -> JetReparam:
    """Coefficients of phi(psi(t)) truncated past t^k."""
    if phi.k != psi.k:
        raise ValueError("jet orders differ")
    k = phi.k
    # powers of psi as truncated power series: psi^i mod t^(k+1)
    out = [Q(0)] * k
    psi_c = list(psi.alpha)
    power = psi_c[:]  # psi^i coefficients of t^1..t^k, starting at i=1
    for i in range(1, k + 1):
        ai = phi.alpha[i - 1]
        if ai:
            for t in range(k):
                out[t] += ai * power[t]
        if i < k:
            nxt = [Q(0)] * k
            for t1 in range(k):
                if power[t1] == 0:
                    continue
                for t2 in range(k - t1 - 1):
                    nxt[t1 + t2 + 1] += power[t1] * psi_c[t2]
            power = nxt
    return JetReparam(tuple(out))
