"""Bottom-up congruence diagonalization over a nice tree decomposition.

Every node hands its parent a *box*: a symmetric matrix over the vertices that
are still alive at that node, stored as the pair ``(n1, n2)``::

        | 0     n1 |
        | n1^T  n2 |

``n2`` is indexed by the node's bag (type-ii vertices, ascending) and ``n1``
holds buffered rows (type-i vertices) whose would-be pivot vanished. ``n1`` is
kept in row echelon form with a pivot in every row. Diagonal entries that are
finished are appended to a global :class:`DiagonalArray`.

All updates are paired row/column operations ``R_t += c R_s, C_t += c C_s``,
so the output diagonal is congruent to the input matrix and has the same
determinant.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator, TextIO

from .field import Field
from .matrix import SparseSymmetricMatrix
from .treedecomp import (Kind, NiceTreeDecomposition, relabel_by_forget_order,
                         validate)


class BoxError(ValueError):
    pass


class BagMismatch(BoxError):
    pass


class VertexAlreadyPresent(BoxError):
    pass


class VertexNotInBag(BoxError):
    pass


class InternalInvariantViolation(RuntimeError):
    pass


@dataclass
class Box:
    type_i: list[int]
    type_ii: list[int]
    n1: list[list]
    n2: list[list]

    @property
    def k1(self) -> int:
        return len(self.type_i)

    @property
    def k2(self) -> int:
        return len(self.type_ii)

    def labels(self) -> list[int]:
        return self.type_i + self.type_ii

    def dense(self, zero) -> list[list]:
        """The full symmetric block matrix, rows ordered as :meth:`labels`."""
        a, b = self.k1, self.k2
        out = [[zero] * (a + b) for _ in range(a + b)]
        for r in range(a):
            for c in range(b):
                out[r][a + c] = out[a + c][r] = self.n1[r][c]
        for r in range(b):
            for c in range(b):
                out[a + r][a + c] = self.n2[r][c]
        return out

    def check(self, F: Field, width: int | None = None) -> None:
        def fail(msg):
            raise InternalInvariantViolation(msg)

        k1, k2 = self.k1, self.k2
        if not 0 <= k1 <= k2:
            fail(f"box has {k1} type-i rows but only {k2} columns")
        if width is not None and k2 > width + 1:
            fail("box is wider than the decomposition")
        if any(a >= b for a, b in zip(self.type_ii, self.type_ii[1:])):
            fail("type-ii labels are not strictly increasing")
        if set(self.type_i) & set(self.type_ii):
            fail("a vertex is both type-i and type-ii")
        if len(self.n1) != k1 or any(len(r) != k2 for r in self.n1):
            fail("n1 has the wrong shape")
        if len(self.n2) != k2 or any(len(r) != k2 for r in self.n2):
            fail("n2 has the wrong shape")
        last = -1
        for row in self.n1:
            p = pivot(F, row)
            if p is None:
                fail("n1 has a row without pivot")
            if p <= last:
                fail("n1 is not in row echelon form")
            last = p
        for r in range(k2):
            for c in range(r):
                if self.n2[r][c] != self.n2[c][r]:
                    fail("n2 is not symmetric")


class DiagonalArray:
    """Append-only list of ``(vertex, d_v)`` pairs with distinct vertices."""

    def __init__(self):
        self.pairs: list[tuple[int, object]] = []
        self._seen: set[int] = set()

    def append(self, v: int, d) -> None:
        if v in self._seen:
            raise InternalInvariantViolation(f"vertex {v} diagonalized twice")
        self._seen.add(v)
        self.pairs.append((v, d))

    def __contains__(self, v) -> bool:
        return v in self._seen

    def __iter__(self) -> Iterator[tuple[int, object]]:
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def vertices(self) -> set[int]:
        return set(self._seen)

    def as_dict(self) -> dict[int, object]:
        return dict(self.pairs)

    def __repr__(self):
        return f"DiagonalArray({self.pairs!r})"


@dataclass
class OpCounter:
    """Field-operation tallies. Counting never changes results."""

    mul: int = 0
    div: int = 0
    add: int = 0
    row_ops: int = 0
    nodes: Counter = field(default_factory=Counter)
    row_ops_by_kind: Counter = field(default_factory=Counter)
    join_ops_per_row: Counter = field(default_factory=Counter)
    # join operations that left the target row all zero (so it is emitted)
    join_zeroing_ops: Counter = field(default_factory=Counter)

    def join_pivot_advances(self, v: int) -> int:
        return self.join_ops_per_row[v] - self.join_zeroing_ops[v]

    @property
    def field_ops(self) -> int:
        return self.mul + self.div + self.add

    def as_dict(self) -> dict:
        return {
            "field_ops": self.field_ops,
            "mul": self.mul,
            "div": self.div,
            "add": self.add,
            "row_ops": self.row_ops,
            "nodes": {k.value if isinstance(k, Kind) else k: v for k, v in sorted(self.nodes.items(), key=str)},
            "row_ops_by_kind": {k.value if isinstance(k, Kind) else k: v
                                for k, v in sorted(self.row_ops_by_kind.items(), key=str)},
            "max_join_ops_per_row": max(self.join_ops_per_row.values(), default=0),
            "max_join_pivot_advances": max((self.join_pivot_advances(v) for v in self.join_ops_per_row),
                                           default=0),
        }


def pivot(F: Field, row) -> int | None:
    for i, x in enumerate(row):
        if not F.is_zero(x):
            return i
    return None


def operation_counter() -> OpCounter:
    return OpCounter()


class _Engine:
    """State shared by the four node procedures during one run."""

    def __init__(self, M: SparseSymmetricMatrix, F: Field, diag: DiagonalArray,
                 counter: OpCounter | None, trace: list[str] | None,
                 out_label: list[int] | None):
        self.M = M
        self.F = F
        self.zero = F.zero()
        self.diag = diag
        self.counter = counter
        self.trace = trace
        self.out_label = out_label
        self.kind = None

    # -- bookkeeping ---------------------------------------------------------
    def _lab(self, v: int) -> int:
        return self.out_label[v] if self.out_label is not None else v

    def _record(self, target: int, source: int, coeff, length: int) -> None:
        if self.counter is not None:
            c = self.counter
            c.row_ops += 1
            c.row_ops_by_kind[self.kind] += 1
            c.mul += length
            c.add += length
        if self.trace is not None:
            self.trace.append(f"addrow {self._lab(target)} {self._lab(source)} {self.F.format(coeff)}")

    def _div(self, a, b):
        if self.counter is not None:
            self.counter.div += 1
        return a / b

    def _emit(self, v: int, d) -> None:
        self.diag.append(self._lab(v), d)
        if self.trace is not None:
            self.trace.append(f"emit {self._lab(v)} {self.F.format(d)}")

    def _sym_addrow(self, S: list[list], labels: list[int], t: int, s: int, c) -> None:
        """``R_t += c R_s`` then ``C_t += c C_s`` on a full symmetric matrix."""
        rt, rs = S[t], S[s]
        tt = rt[t] + 2 * c * rs[t] + c * c * rs[s]
        for a in range(len(S)):
            if a == t:
                continue
            val = rt[a] + c * rs[a]
            rt[a] = val
            S[a][t] = val
        rt[t] = tt
        self._record(labels[t], labels[s], c, len(S) + 2)

    def _clear_with_pivot(self, S: list[list], labels: list[int], s: int, skip: set[int]) -> None:
        """Use the diagonal entry ``S[s][s]`` to zero row/column ``s``."""
        piv = S[s][s]
        for q in range(len(S)):
            if q == s or q in skip:
                continue
            a = S[s][q]
            if self.F.is_zero(a):
                continue
            c = -self._div(a, piv)
            self._sym_addrow(S, labels, q, s, c)
            S[s][q] = S[q][s] = self.zero

    # -- node procedures -------------------------------------------------------
    def leaf(self, bag) -> Box:
        z = self.zero
        k = len(bag)
        return Box([], list(bag), [], [[z] * k for _ in range(k)])

    def introduce(self, bag, v: int, child: Box) -> Box:
        V = child.type_ii
        p = bisect_left(V, v)
        if p < len(V) and V[p] == v:
            raise VertexAlreadyPresent(f"vertex {v} is already in the bag")
        if list(bag) != V[:p] + [v] + V[p:]:
            raise BagMismatch(f"bag {list(bag)} is not {V} plus {v}")
        z = self.zero
        n1 = [row[:p] + [z] + row[p:] for row in child.n1]
        n2 = [row[:p] + [z] + row[p:] for row in child.n2]
        n2.insert(p, [z] * (len(V) + 1))
        return Box(list(child.type_i), list(bag), n1, n2)

    def join(self, bag, left: Box, right: Box) -> Box:
        F = self.F
        if left.type_ii != right.type_ii or list(bag) != left.type_ii:
            raise BagMismatch("join children carry different bags")
        if set(left.type_i) & set(right.type_i):
            raise InternalInvariantViolation("join children share a type-i row")
        k = len(bag)
        n2 = [[left.n2[r][c] + right.n2[r][c] for c in range(k)] for r in range(k)]
        if self.counter is not None:
            self.counter.add += k * k
        rows = [(lab, list(row)) for lab, row in zip(left.type_i, left.n1)]
        by_pivot = {pivot(F, row): i for i, (_, row) in enumerate(rows)}
        for w, row in zip(right.type_i, right.n1):
            r = list(row)
            touched = False
            while True:
                p = pivot(F, r)
                if p is None:
                    if touched and self.counter is not None:
                        self.counter.join_zeroing_ops[self._lab(w)] += 1
                    self._emit(w, self.zero)
                    break
                i = by_pivot.get(p)
                if i is None:
                    by_pivot[p] = len(rows)
                    rows.append((w, r))
                    break
                src_label, src = rows[i]
                c = -self._div(r[p], src[p])
                for a in range(p + 1, k):
                    r[a] = r[a] + c * src[a]
                r[p] = self.zero
                self._record(w, src_label, c, k - p)
                touched = True
                if self.counter is not None:
                    self.counter.join_ops_per_row[self._lab(w)] += 1
        rows.sort(key=lambda lr: pivot(F, lr[1]))
        return Box([lab for lab, _ in rows], list(bag), [row for _, row in rows], n2)

    def forget(self, bag, v: int, child: Box) -> Box:
        F, z = self.F, self.zero
        V = child.type_ii
        p = bisect_left(V, v)
        if p == len(V) or V[p] != v:
            raise VertexNotInBag(f"vertex {v} is not in the child bag")
        if list(bag) != V[:p] + V[p + 1:]:
            raise BagMismatch(f"bag {list(bag)} is not {V} minus {v}")
        n2 = [list(row) for row in child.n2]
        n1 = [list(row) for row in child.n1]
        I = list(child.type_i)

        # each entry of M enters exactly once, when its first endpoint is forgotten
        mrow = self.M.row(v)
        for q, u in enumerate(V):
            val = mrow.get(u)
            if val is None:
                continue
            n2[q][p] += val
            if q != p:
                n2[p][q] += val
            if self.counter is not None:
                self.counter.add += 1
            if self.trace is not None:
                self.trace.append(f"enter {self._lab(u)} {self._lab(v)}")

        d = n2[p][p]
        rest = [q for q in range(len(V)) if q != p]
        xs = [r for r in range(len(I)) if not F.is_zero(n1[r][p])]

        if not xs:
            y_nonzero = any(not F.is_zero(n2[p][q]) for q in rest)
            if not y_nonzero:
                self._emit(v, d)                                    # already isolated
            elif not F.is_zero(d):
                self._clear_with_pivot(n2, V, p, set())             # clear with d_v
                self._emit(v, n2[p][p])
            else:
                r = [n2[p][q] for q in rest]                        # buffer as type-i
                n1 = [row[:p] + row[p + 1:] for row in n1]
                pivots = {pivot(F, row): i for i, row in enumerate(n1)}
                while True:
                    pv = pivot(F, r)
                    if pv is None:
                        self._emit(v, z)
                        break
                    i = pivots.get(pv)
                    if i is None:
                        pos = bisect_left(sorted(pivots), pv)
                        n1.insert(pos, r)
                        I.insert(pos, v)
                        break
                    src = n1[i]
                    c = -self._div(r[pv], src[pv])
                    for a in range(pv + 1, len(r)):
                        r[a] = r[a] + c * src[a]
                    r[pv] = z
                    self._record(v, I[i], c, len(r) - pv)
                return Box(I, list(bag), n1, [[n2[a][b] for b in rest] for a in rest])
            n1 = [row[:p] + row[p + 1:] for row in n1]
            return Box(I, list(bag), n1, [[n2[a][b] for b in rest] for a in rest])

        # v touches a buffered row: pair v with the lowest buffered row u that touches column v
        t = xs[-1]
        u = I[t]
        alpha = n1[t][p]
        before = [pivot(F, row) for row in n1]
        for s in reversed(xs[:-1]):
            c = -self._div(n1[s][p], alpha)
            src, dst = n1[t], n1[s]
            for a in range(len(V)):
                if a != p:
                    dst[a] = dst[a] + c * src[a]
            dst[p] = z
            self._record(I[s], u, c, len(V))
        after = [pivot(F, row) for row in n1]
        if before != after:
            raise InternalInvariantViolation("pairing elimination moved a pivot")

        # local symmetric matrix over [v, u] + remaining bag
        labels = [v, u] + [V[q] for q in rest]
        m = len(labels)
        S = [[z] * m for _ in range(m)]
        S[0][0] = d
        S[0][1] = S[1][0] = alpha
        for j, q in enumerate(rest, 2):
            S[0][j] = S[j][0] = n2[p][q]
            S[1][j] = S[j][1] = n1[t][q]
            for jj, qq in enumerate(rest, 2):
                S[j][jj] = n2[q][qq]
        if not F.is_zero(d):
            self._sym_addrow(S, labels, 0, 1, -self._div(d, 2 * alpha))
            S[0][0] = z
        self._sym_addrow(S, labels, 1, 0, F.coerce(1) / 2)
        self._sym_addrow(S, labels, 0, 1, F.coerce(-1))
        S[0][1] = S[1][0] = z
        self._clear_with_pivot(S, labels, 0, {1})
        self._clear_with_pivot(S, labels, 1, {0})
        self._emit(v, S[0][0])
        self._emit(u, S[1][1])
        del I[t]
        del n1[t]
        n1 = [row[:p] + row[p + 1:] for row in n1]
        return Box(I, list(bag), n1, [row[2:] for row in S[2:]])


def congruent_diagonal(M: SparseSymmetricMatrix, T: NiceTreeDecomposition, *,
                       relabel: bool = True,
                       counter: OpCounter | None = None,
                       trace: list[str] | None = None,
                       check: bool = False,
                       validate_input: bool = True,
                       on_node: Callable[[int, Box, DiagonalArray], None] | None = None,
                       ) -> DiagonalArray:
    """Diagonalize ``M`` by congruence, processing ``T`` in post order.

    Returns the ``(vertex, d_v)`` pairs in emission order, in the original
    labels of ``M``. With ``relabel`` the vertices are renamed internally so
    that forget order runs ``n, n-1, ..., 1``; this only affects operation
    counts. ``trace`` collects ``enter``/``addrow``/``emit`` lines and
    ``node`` markers that :func:`twdiag.oracle.replay_trace` understands.
    ``on_node`` sees each box in the internal labels.
    """
    if validate_input:
        validate(T.to_tree(), M.underlying_graph())
    if T.bags[T.root]:
        raise BoxError("root bag must be empty")
    out_label = None
    if relabel:
        perm, inverse = relabel_by_forget_order(T)
        M = M.relabel(perm)
        T = T.relabel(perm)
        out_label = inverse
    diag = DiagonalArray()
    eng = _Engine(M, M.field, diag, counter, trace, out_label)
    width = T.width
    boxes: dict[int, Box] = {}
    for x in T.post_order:
        kind = T.kinds[x]
        eng.kind = kind
        if counter is not None:
            counter.nodes[kind] += 1
        if trace is not None:
            trace.append(f"node {x} {kind.value}")
        cs = T.children[x]
        bag = T.bags[x]
        if kind is Kind.LEAF:
            box = eng.leaf(bag)
        elif kind is Kind.INTRODUCE:
            box = eng.introduce(bag, T.vertex[x], boxes.pop(cs[0]))
        elif kind is Kind.FORGET:
            box = eng.forget(bag, T.vertex[x], boxes.pop(cs[0]))
        else:
            box = eng.join(bag, boxes.pop(cs[0]), boxes.pop(cs[1]))
        if check:
            box.check(M.field, width)
            live = set(box.type_i) | set(box.type_ii)
            done = {out_label[v] if out_label else v for v in live}
            if done & diag.vertices():
                raise InternalInvariantViolation("a diagonalized vertex is still in a box")
        if on_node is not None:
            on_node(x, box, diag)
        boxes[x] = box
    root_box = boxes.pop(T.root)
    if root_box.k1 or root_box.k2 or len(diag) != M.n:
        raise InternalInvariantViolation("root box is not empty after the run")
    return diag


def write_trace(lines: list[str], fh: TextIO) -> None:
    for line in lines:
        fh.write(line + "\n")
