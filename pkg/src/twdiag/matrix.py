"""Sparse symmetric matrices over a :class:`~twdiag.field.Field`.

Vertices (row indices) are 1-based. Each unordered pair is stored once, and
per-vertex rows are kept as dicts so that the entries between a vertex and a
bag of size k+1 can be fetched with k+1 lookups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

from .field import RATIONAL, Field, FieldError, RationalField, RealField


class MatrixError(ValueError):
    pass


class IndexOutOfRange(MatrixError):
    pass


class AsymmetricInput(MatrixError):
    pass


class MatrixFormatError(MatrixError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class UnderlyingGraph:
    n: int
    edges: frozenset

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "UnderlyingGraph":
        norm = set()
        for u, v in edges:
            if u == v:
                continue
            norm.add((u, v) if u < v else (v, u))
        return cls(n, frozenset(norm))

    def neighbors(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(1, self.n + 1)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def __len__(self):
        return len(self.edges)


class SparseSymmetricMatrix:
    """Immutable sparse symmetric matrix.

    Build with :meth:`from_entries`; the constructor expects already
    canonical ``{(u, v): value}`` data with ``u <= v`` and no zeros.
    """

    __slots__ = ("n", "field", "_entries", "_rows", "_adj")

    def __init__(self, n: int, entries: Mapping[tuple[int, int], object], field: Field = RATIONAL):
        if n < 0:
            raise MatrixError("order must be nonnegative")
        self.n = n
        self.field = field
        self._entries = dict(entries)
        rows: list[dict] = [dict() for _ in range(n + 1)]
        for (u, v), val in self._entries.items():
            rows[u][v] = val
            rows[v][u] = val
        self._rows = rows
        self._adj = [sorted(u for u in rows[v] if u != v) for v in range(n + 1)]

    @classmethod
    def from_entries(cls, n: int, triples: Iterable[tuple[int, int, object]],
                     field: Field = RATIONAL) -> "SparseSymmetricMatrix":
        entries: dict[tuple[int, int], object] = {}
        seen: dict[tuple[int, int], object] = {}
        for u, v, value in triples:
            u, v = int(u), int(v)
            if not (1 <= u <= n and 1 <= v <= n):
                raise IndexOutOfRange(f"entry ({u}, {v}) outside 1..{n}")
            key = (u, v) if u <= v else (v, u)
            x = field.coerce(value)
            if key in seen:
                if seen[key] != x:
                    raise AsymmetricInput(
                        f"conflicting values for entry {key}: "
                        f"{field.format(seen[key])} vs {field.format(x)}")
                continue
            seen[key] = x
            entries[key] = x
        if isinstance(field, RealField) and field.scale is None:
            field = field.with_scale(max((abs(x) for x in entries.values()), default=1.0))
        entries = {k: x for k, x in entries.items() if not field.is_zero(x)}
        return cls(n, entries, field)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[object]], field: Field = RATIONAL) -> "SparseSymmetricMatrix":
        n = len(rows)
        triples = []
        for i in range(n):
            if len(rows[i]) != n:
                raise MatrixError("dense input is not square")
            for j in range(n):
                triples.append((i + 1, j + 1, rows[i][j]))
        return cls.from_entries(n, triples, field)

    def __getitem__(self, key: tuple[int, int]):
        u, v = key
        return self._rows[u].get(v, self.field.zero())

    def get(self, u: int, v: int, default=None):
        return self._rows[u].get(v, default)

    def row(self, v: int) -> Mapping[int, object]:
        """Nonzero entries of row ``v`` (diagonal included), keyed by column."""
        return self._rows[v]

    def neighbors(self, v: int) -> list[int]:
        return self._adj[v]

    def entries(self) -> Iterator[tuple[int, int, object]]:
        for (u, v), val in sorted(self._entries.items()):
            yield u, v, val

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def max_abs(self) -> float:
        return max((abs(float(x)) for x in self._entries.values()), default=0.0)

    def underlying_graph(self) -> UnderlyingGraph:
        return UnderlyingGraph(self.n, frozenset(k for k in self._entries if k[0] != k[1]))

    def shift_diagonal(self, c) -> "SparseSymmetricMatrix":
        """Return ``M - c I``; the off-diagonal support is untouched."""
        c = self.field.coerce(c)
        entries = {k: x for k, x in self._entries.items() if k[0] != k[1]}
        for v in range(1, self.n + 1):
            d = self._rows[v].get(v, self.field.zero()) - c
            if not self.field.is_zero(d):
                entries[(v, v)] = d
        return SparseSymmetricMatrix(self.n, entries, self.field)

    def relabel(self, perm: Mapping[int, int] | Sequence[int]) -> "SparseSymmetricMatrix":
        """Rename vertex ``v`` to ``perm[v]`` (a permutation of 1..n)."""
        entries = {}
        for (u, v), x in self._entries.items():
            a, b = perm[u], perm[v]
            entries[(a, b) if a <= b else (b, a)] = x
        return SparseSymmetricMatrix(self.n, entries, self.field)

    def with_field(self, field: Field) -> "SparseSymmetricMatrix":
        return SparseSymmetricMatrix.from_entries(self.n, self.entries(), field)

    def to_dense(self) -> list[list]:
        z = self.field.zero()
        out = [[z] * self.n for _ in range(self.n)]
        for (u, v), x in self._entries.items():
            out[u - 1][v - 1] = x
            out[v - 1][u - 1] = x
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseSymmetricMatrix):
            return NotImplemented
        return self.n == other.n and self._entries == other._entries

    def __repr__(self):
        return f"SparseSymmetricMatrix(n={self.n}, nnz={self.nnz}, field={self.field!r})"


# --- Matrix Market style I/O ---------------------------------------------

_HEADER = "%%MatrixMarket"


def read_matrix(fh: TextIO, field: Field | None = None) -> SparseSymmetricMatrix:
    """Parse symmetric coordinate text.

    The scalar kind declared in the header (``rational``/``integer`` or
    ``real``) picks the field unless ``field`` is given explicitly.
    """
    header = None
    size = None
    triples = []
    expected = 0
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if header is None:
            if not line.startswith(_HEADER):
                raise MatrixFormatError("missing %%MatrixMarket header", lineno)
            parts = line.split()
            if len(parts) != 5 or parts[1].lower() != "matrix" or parts[2].lower() != "coordinate":
                raise MatrixFormatError(f"unsupported header {line!r}", lineno)
            kind, sym = parts[3].lower(), parts[4].lower()
            if sym != "symmetric":
                raise MatrixFormatError("only symmetric matrices are supported", lineno)
            if kind not in ("rational", "integer", "real"):
                raise MatrixFormatError(f"unsupported scalar kind {kind!r}", lineno)
            if field is None:
                field = RealField() if kind == "real" else RATIONAL
            header = kind
            continue
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if size is None:
            if len(parts) != 3:
                raise MatrixFormatError("size line must be 'n n nnz'", lineno)
            try:
                rows, cols, expected = (int(p) for p in parts)
            except ValueError:
                raise MatrixFormatError("size line must hold integers", lineno) from None
            if rows != cols:
                raise MatrixFormatError("matrix is not square", lineno)
            size = rows
            continue
        if len(parts) != 3:
            raise MatrixFormatError("entry line must be 'u v value'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            val = field.parse(parts[2])
        except (ValueError, FieldError) as exc:
            raise MatrixFormatError(str(exc), lineno) from None
        triples.append((u, v, val))
    if header is None:
        raise MatrixFormatError("empty matrix file")
    if size is None:
        raise MatrixFormatError("missing size line")
    if len(triples) != expected:
        raise MatrixFormatError(f"expected {expected} entries, found {len(triples)}")
    return SparseSymmetricMatrix.from_entries(size, triples, field)


def write_matrix(M: SparseSymmetricMatrix, fh: TextIO) -> None:
    kind = "rational" if isinstance(M.field, RationalField) else "real"
    fh.write(f"{_HEADER} matrix coordinate {kind} symmetric\n")
    fh.write(f"{M.n} {M.n} {M.nnz}\n")
    for u, v, x in M.entries():
        fh.write(f"{v} {u} {M.field.format(x)}\n")


def load_matrix(path, field: Field | None = None) -> SparseSymmetricMatrix:
    with open(path) as fh:
        return read_matrix(fh, field)


def save_matrix(M: SparseSymmetricMatrix, path) -> None:
    with open(path, "w") as fh:
        write_matrix(M, fh)
