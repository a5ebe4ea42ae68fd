"""Determinant, rank, inertia and eigenvalue counts from a congruent diagonal.

By Sylvester's law of inertia the sign pattern of any diagonal congruent to
``M`` gives the inertia of ``M``; applied to ``M - cI`` it counts the
eigenvalues of ``M`` that are at most ``c``. Intervals are half-open,
``(a, b]``; pass ``math.inf``/``-math.inf`` (or the strings ``"inf"`` and
``"-inf"``) for unbounded ends.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from .boxes import DiagonalArray, congruent_diagonal
from .field import Field, RealField, Sign
from .matrix import SparseSymmetricMatrix
from .treedecomp import NiceTreeDecomposition


class InvalidInterval(ValueError):
    pass


class Inertia(NamedTuple):
    n_plus: int
    n_minus: int
    n_zero: int

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus + self.n_zero

    def __str__(self):
        return f"({self.n_plus},{self.n_minus},{self.n_zero})"


def _values(D) -> list:
    return [d for _, d in D]


def inertia(D: DiagonalArray | Iterable, F: Field) -> Inertia:
    counts = {Sign.POSITIVE: 0, Sign.NEGATIVE: 0, Sign.ZERO: 0}
    for d in _values(D):
        counts[F.sign(d)] += 1
    return Inertia(counts[Sign.POSITIVE], counts[Sign.NEGATIVE], counts[Sign.ZERO])


def rank(D: DiagonalArray | Iterable, F: Field) -> int:
    return sum(1 for d in _values(D) if not F.is_zero(d))


def determinant(D: DiagonalArray | Iterable, F: Field):
    det = F.one()
    for d in _values(D):
        det = det * d
    return det


def tolerance_sensitive(D: DiagonalArray | Iterable, F: Field) -> bool:
    """True when a real-mode pivot sits within 10x the zero tolerance."""
    if not isinstance(F, RealField):
        return False
    return any(abs(d) <= 10 * F.threshold for d in _values(D))


def _endpoint(c, F: Field):
    if isinstance(c, str):
        t = c.strip().lower()
        if t in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        if t in ("-inf", "-infinity"):
            return -math.inf
        return F.parse(c)
    if isinstance(c, float) and math.isinf(c):
        return c
    return F.coerce(c)


def shifted_inertia(M: SparseSymmetricMatrix, T: NiceTreeDecomposition, c,
                    relabel: bool = True) -> tuple[Inertia, bool]:
    """Inertia of ``M - cI`` and whether a real-mode pivot was near zero."""
    shifted = M.shift_diagonal(c)
    D = congruent_diagonal(shifted, T, relabel=relabel, validate_input=False)
    return inertia(D, M.field), tolerance_sensitive(D, M.field)


def count_eigenvalues_leq(M: SparseSymmetricMatrix, T: NiceTreeDecomposition, c,
                          relabel: bool = True) -> int:
    """Number of eigenvalues of ``M`` that are ``<= c``."""
    c = _endpoint(c, M.field)
    if c == math.inf:
        return M.n
    if c == -math.inf:
        return 0
    ine, _ = shifted_inertia(M, T, c, relabel)
    return ine.n_minus + ine.n_zero


def count_eigenvalues_in(M: SparseSymmetricMatrix, T: NiceTreeDecomposition, a, b,
                         relabel: bool = True) -> int:
    """Number of eigenvalues in the half-open interval ``(a, b]``."""
    a, b = _endpoint(a, M.field), _endpoint(b, M.field)
    if not a < b:
        raise InvalidInterval(f"empty interval ({a}, {b}]")
    return count_eigenvalues_leq(M, T, b, relabel) - count_eigenvalues_leq(M, T, a, relabel)


def locate(M: SparseSymmetricMatrix, T: NiceTreeDecomposition, a, b,
           relabel: bool = True) -> tuple[int, bool]:
    """Like :func:`count_eigenvalues_in`, also reporting tolerance sensitivity."""
    a, b = _endpoint(a, M.field), _endpoint(b, M.field)
    if not a < b:
        raise InvalidInterval(f"empty interval ({a}, {b}]")
    total, sensitive = 0, False
    for c, sgn in ((b, 1), (a, -1)):
        if math.isinf(c):
            total += sgn * (M.n if c > 0 else 0)
            continue
        ine, flag = shifted_inertia(M, T, c, relabel)
        total += sgn * (ine.n_minus + ine.n_zero)
        sensitive |= flag
    return total, sensitive
