"""Dense reference computations and random instances for cross-checking.

Nothing here uses :mod:`twdiag.boxes`: the dense diagonalizer, Bareiss
determinant and trace replay are written from scratch so that agreement with
the tree DP is evidence rather than tautology.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .field import RATIONAL, Field, RealField
from .matrix import SparseSymmetricMatrix
from .treedecomp import TreeDecomposition


class MalformedTrace(ValueError):
    pass


@dataclass
class DenseResult:
    diagonal: list[tuple[int, object]]
    inertia: tuple[int, int, int]
    det: object
    rank: int


def dense_congruent_diagonalize(A: Sequence[Sequence], F: Field = RATIONAL) -> DenseResult:
    """Symmetric elimination with diagonal pivoting over the whole matrix.

    When every remaining diagonal entry is zero but some off-diagonal ``a``
    is not, the pair is first turned into ``diag(-a, a)``.
    """
    n = len(A)
    S = [list(row) for row in A]
    left = list(range(n))
    diag: list[tuple[int, object]] = []
    while left:
        cands = [i for i in left if not F.is_zero(S[i][i])]
        if cands:
            p = max(cands, key=lambda i: abs(S[i][i]))
        else:
            pair = next(((i, j) for i in left for j in left
                         if i < j and not F.is_zero(S[i][j])), None)
            if pair is None:
                diag.extend((i + 1, F.zero()) for i in left)
                break
            i, j = pair
            _congruence_add(S, j, i, F.coerce(1) / 2)
            _congruence_add(S, i, j, F.coerce(-1))
            p = i
        piv = S[p][p]
        left.remove(p)
        prow = list(S[p])
        for r in left:
            if F.is_zero(prow[r]):
                continue
            f = prow[r] / piv
            for s in left:
                S[r][s] = S[r][s] - f * prow[s]
            S[r][p] = S[p][r] = F.zero()
        diag.append((p + 1, piv))
    pos = sum(1 for _, d in diag if F.sign(d) > 0)
    neg = sum(1 for _, d in diag if F.sign(d) < 0)
    det = F.one()
    for _, d in diag:
        det = det * d
    return DenseResult(diag, (pos, neg, n - pos - neg), det, pos + neg)


def _congruence_add(S: list[list], t: int, s: int, c) -> None:
    n = len(S)
    for a in range(n):
        S[t][a] = S[t][a] + c * S[s][a]
    for a in range(n):
        S[a][t] = S[a][t] + c * S[a][s]


def bareiss_determinant(A: Sequence[Sequence]) -> Fraction:
    """Fraction-free determinant of a rational matrix (scaled to integers)."""
    n = len(A)
    if n == 0:
        return Fraction(1)
    rows = [[Fraction(x) for x in row] for row in A]
    scale = 1
    for row in rows:
        for x in row:
            scale = lcm(scale, x.denominator)
    M = [[int(x * scale) for x in row] for row in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return Fraction(sign * M[n - 1][n - 1], scale ** n)


def dense_eigen_count(A: Sequence[Sequence], c: float) -> int:
    """Eigenvalues ``<= c`` by a dense symmetric eigensolver."""
    import numpy as np

    w = np.linalg.eigvalsh(np.array(A, dtype=float))
    return int(np.sum(w <= c))


def replay_trace(M: SparseSymmetricMatrix, trace: Iterable[str], schedule: bool = False) -> list[list]:
    """Apply a recorded operation trace to a dense copy of ``M``.

    With ``schedule`` the replay starts from zero and adds each entry of
    ``M`` when its ``enter`` line appears, as the tree DP does; otherwise it
    starts from ``M`` itself. Both end at the same diagonal matrix.
    """
    n = M.n
    F = M.field
    z = F.zero()
    A = [[z] * n for _ in range(n)] if schedule else M.to_dense()
    for lineno, raw in enumerate(trace, 1):
        parts = raw.split()
        if not parts or parts[0] in ("node", "emit"):
            continue
        op = parts[0]
        try:
            if op == "addrow" and len(parts) == 4:
                t, s, c = int(parts[1]) - 1, int(parts[2]) - 1, F.parse(parts[3])
                _check_index(n, t, s)
                _congruence_add(A, t, s, c)
            elif op == "swap" and len(parts) == 3:
                a, b = int(parts[1]) - 1, int(parts[2]) - 1
                _check_index(n, a, b)
                A[a], A[b] = A[b], A[a]
                for row in A:
                    row[a], row[b] = row[b], row[a]
            elif op == "enter" and len(parts) == 3:
                u, v = int(parts[1]), int(parts[2])
                _check_index(n, u - 1, v - 1)
                if schedule:
                    x = M.get(u, v)
                    if x is None:
                        raise MalformedTrace(f"line {lineno}: entry ({u}, {v}) is zero in M")
                    A[u - 1][v - 1] = A[u - 1][v - 1] + x
                    if u != v:
                        A[v - 1][u - 1] = A[v - 1][u - 1] + x
            else:
                raise MalformedTrace(f"line {lineno}: cannot parse {raw.strip()!r}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, MalformedTrace):
                raise
            raise MalformedTrace(f"line {lineno}: {exc}") from None
    return A


def _check_index(n: int, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < n:
            raise MalformedTrace(f"vertex {i + 1} outside 1..{n}")


def trace_emits(trace: Iterable[str], F: Field = RATIONAL) -> list[tuple[int, object]]:
    out = []
    for raw in trace:
        parts = raw.split()
        if parts and parts[0] == "emit":
            out.append((int(parts[1]), F.parse(parts[2])))
    return out


# --- random instances -----------------------------------------------------

def random_decomposition(n: int, k: int, rng: random.Random, full: float = 0.7,
                         redundant: float = 0.0) -> TreeDecomposition:
    """Random width-<=k decomposition grown by k-tree style attachment.

    Each new vertex joins a random existing bag, keeping ``k`` of its
    vertices with probability ``full`` and a random smaller subset otherwise.
    ``redundant`` adds that fraction of extra nodes whose bags are subsets of
    a neighbour's, which nicification has to merge away.
    """
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    labels = list(range(1, n + 1))
    rng.shuffle(labels)
    bags = {1: tuple(labels[:k + 1])}
    edges = []
    for v in labels[k + 1:]:
        b = rng.choice(list(bags))
        base = list(bags[b])
        if len(base) > k:
            base.remove(rng.choice(base))
        size = len(base) if rng.random() < full else rng.randint(1, len(base))
        new = tuple(rng.sample(base, size)) + (v,)
        node = len(bags) + 1
        bags[node] = new
        edges.append((b, node))
    for _ in range(int(redundant * len(bags))):
        b = rng.choice(list(bags))
        src = list(bags[b])
        node = len(bags) + 1
        bags[node] = tuple(rng.sample(src, rng.randint(0, len(src))))
        edges.append((b, node))
    # shuffle node ids so that input order carries no structure
    ids = list(bags)
    rng.shuffle(ids)
    rename = {old: new for new, old in enumerate(ids, 1)}
    return TreeDecomposition(
        n,
        {rename[i]: b for i, b in bags.items()},
        [(rename[a], rename[b]) for a, b in edges],
        root=rng.choice(list(rename.values())),
    )


def random_instance(n: int, k: int, seed: int, *, zero_diag: float = 0.5,
                    density: float = 0.7, field: Field = RATIONAL,
                    redundant: float = 0.0) -> tuple[SparseSymmetricMatrix, TreeDecomposition]:
    """A random matrix supported on the pairs covered by a random decomposition.

    Rational mode uses small integers and halves/thirds; real mode draws
    uniform entries in [-1, 1]. ``zero_diag`` is the fraction of diagonal
    entries that are zero (rounded up); the rest are nonzero.
    """
    rng = random.Random(seed)
    T = random_decomposition(n, k, rng, redundant=redundant)
    real = isinstance(field, RealField)

    def value():
        if real:
            return rng.uniform(-1.0, 1.0) or 0.5
        num = rng.choice([-3, -2, -1, 1, 2, 3])
        return Fraction(num, rng.choice([1, 1, 1, 2, 3]))

    pairs = set()
    for b in T.bags.values():
        for i, u in enumerate(b):
            for w in b[i + 1:]:
                pairs.add((min(u, w), max(u, w)))
    triples = []
    for u, w in sorted(pairs):
        if rng.random() < density:
            triples.append((u, w, value()))
    zeros = set(rng.sample(range(1, n + 1), math.ceil(zero_diag * n)))
    for v in range(1, n + 1):
        if v not in zeros:
            triples.append((v, v, value()))
    return SparseSymmetricMatrix.from_entries(n, triples, field), T
