"""Tree decompositions: PACE ``.td`` I/O, validation, and conversion to nice form.

A :class:`TreeDecomposition` is whatever the user hands us. A
:class:`NiceTreeDecomposition` is rooted, has an empty root bag, and every
node is a Leaf, Introduce, Forget or Join node. :func:`nicify` converts the
former into the latter without increasing the width.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

from .matrix import UnderlyingGraph


class DecompositionError(ValueError):
    pass


class NotATree(DecompositionError):
    pass


class EmptyDecomposition(DecompositionError):
    pass


class NotNice(DecompositionError):
    pass


class UncoveredVertex(DecompositionError):
    def __init__(self, v: int):
        self.vertex = v
        super().__init__(f"uncovered vertex {v}")


class UncoveredEdge(DecompositionError):
    def __init__(self, u: int, v: int):
        self.edge = (u, v)
        super().__init__(f"uncovered edge {u} {v}")


class DisconnectedOccurrences(DecompositionError):
    def __init__(self, v: int):
        self.vertex = v
        super().__init__(f"nodes containing vertex {v} are not connected")


class TDFormatError(DecompositionError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class TreeDecomposition:
    """Bags keyed by node id, undirected tree edges, optional root."""

    n: int
    bags: dict[int, tuple[int, ...]]
    edges: list[tuple[int, int]]
    root: int | None = None

    def __post_init__(self):
        self.bags = {i: tuple(sorted(set(b))) for i, b in self.bags.items()}
        self.edges = [(int(a), int(b)) for a, b in self.edges]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def __len__(self):
        return len(self.bags)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in self.bags}
        for a, b in self.edges:
            if a not in adj or b not in adj:
                raise NotATree(f"edge {a} {b} refers to an unknown node")
            adj[a].append(b)
            adj[b].append(a)
        for lst in adj.values():
            lst.sort()
        return adj

    def rooted(self, root: int | None = None) -> tuple[int, dict[int, int | None], dict[int, list[int]]]:
        """Orient the tree. Returns ``(root, parent, children)``; children sorted by id."""
        if not self.bags:
            raise EmptyDecomposition("decomposition has no nodes")
        adj = self.adjacency()
        if len(self.edges) != len(self.bags) - 1:
            raise NotATree(f"{len(self.bags)} nodes but {len(self.edges)} edges")
        if root is None:
            root = self.root if self.root is not None else (1 if 1 in self.bags else min(self.bags))
        if root not in self.bags:
            raise NotATree(f"root {root} is not a node")
        parent: dict[int, int | None] = {root: None}
        children: dict[int, list[int]] = {i: [] for i in self.bags}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y == parent[x]:
                    continue
                if y in parent:
                    raise NotATree("tree edges contain a cycle")
                parent[y] = x
                children[x].append(y)
                queue.append(y)
        if len(parent) != len(self.bags):
            raise NotATree("tree edges do not connect all nodes")
        return root, parent, children


def validate(T: TreeDecomposition, G: UnderlyingGraph) -> int:
    """Check the three decomposition properties against ``G``; return the width."""
    T.rooted()
    seen = set()
    for b in T.bags.values():
        seen.update(b)
    for v in range(1, G.n + 1):
        if v not in seen:
            raise UncoveredVertex(v)
    extra = [v for v in seen if not 1 <= v <= G.n]
    if extra:
        raise DecompositionError(f"bag vertex {min(extra)} outside 1..{G.n}")
    covered = set()
    for b in T.bags.values():
        for i, u in enumerate(b):
            for w in b[i + 1:]:
                covered.add((u, w))
    for e in sorted(G.edges):
        if e not in covered:
            raise UncoveredEdge(*e)
    # occurrence subgraphs are forests, so connected iff nodes - edges == 1
    node_count: dict[int, int] = {}
    for b in T.bags.values():
        for v in b:
            node_count[v] = node_count.get(v, 0) + 1
    for a, c in T.edges:
        for v in set(T.bags[a]).intersection(T.bags[c]):
            node_count[v] -= 1
    for v in sorted(node_count):
        if node_count[v] != 1:
            raise DisconnectedOccurrences(v)
    return T.width


# --- nice decompositions ---------------------------------------------------

class Kind(enum.Enum):
    LEAF = "Leaf"
    INTRODUCE = "Introduce"
    FORGET = "Forget"
    JOIN = "Join"


@dataclass
class NiceTreeDecomposition:
    n: int
    root: int
    bags: dict[int, tuple[int, ...]]
    children: dict[int, list[int]]
    kinds: dict[int, Kind]
    vertex: dict[int, int] = field(default_factory=dict)  # introduced/forgotten vertex
    parent: dict[int, int | None] = field(default_factory=dict)
    forget_node: dict[int, int] = field(default_factory=dict)
    post_order: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.parent:
            self.parent = {self.root: None}
            for x, cs in self.children.items():
                for c in cs:
                    self.parent[c] = x
        if not self.forget_node:
            for x, kind in self.kinds.items():
                if kind is Kind.FORGET:
                    v = self.vertex[x]
                    if v in self.forget_node:
                        raise NotNice(f"vertex {v} forgotten twice")
                    self.forget_node[v] = x
        if not self.post_order:
            self.post_order = _post_order(self.root, self.children)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def __len__(self):
        return len(self.bags)

    def kind_counts(self) -> dict[Kind, int]:
        counts = {k: 0 for k in Kind}
        for kind in self.kinds.values():
            counts[kind] += 1
        return counts

    @classmethod
    def from_tree(cls, T: TreeDecomposition, root: int | None = None) -> "NiceTreeDecomposition":
        """Classify an already-nice decomposition; raise :class:`NotNice` otherwise."""
        root, parent, children = T.rooted(root)
        if T.bags[root]:
            raise NotNice("root bag must be empty")
        kinds: dict[int, Kind] = {}
        vertex: dict[int, int] = {}
        for x, cs in children.items():
            b = set(T.bags[x])
            if not cs:
                kinds[x] = Kind.LEAF
            elif len(cs) == 2:
                if set(T.bags[cs[0]]) != b or set(T.bags[cs[1]]) != b:
                    raise NotNice(f"join node {x} has children with different bags")
                kinds[x] = Kind.JOIN
            elif len(cs) == 1:
                cb = set(T.bags[cs[0]])
                if len(b - cb) == 1 and cb <= b:
                    kinds[x] = Kind.INTRODUCE
                    vertex[x] = next(iter(b - cb))
                elif len(cb - b) == 1 and b <= cb:
                    kinds[x] = Kind.FORGET
                    vertex[x] = next(iter(cb - b))
                else:
                    raise NotNice(f"node {x} is neither introduce nor forget")
            else:
                raise NotNice(f"node {x} has {len(cs)} children")
        nice = cls(T.n, root, dict(T.bags), children, kinds, vertex, parent)
        missing = [v for v in range(1, T.n + 1) if v not in nice.forget_node]
        if missing:
            raise NotNice(f"vertex {missing[0]} is never forgotten")
        return nice

    def to_tree(self) -> TreeDecomposition:
        edges = [(c, x) for x, cs in self.children.items() for c in cs]
        return TreeDecomposition(self.n, dict(self.bags), edges, self.root)

    def relabel(self, perm: Mapping[int, int] | Sequence[int]) -> "NiceTreeDecomposition":
        bags = {x: tuple(sorted(perm[v] for v in b)) for x, b in self.bags.items()}
        vertex = {x: perm[v] for x, v in self.vertex.items()}
        return NiceTreeDecomposition(self.n, self.root, bags, self.children, dict(self.kinds),
                                     vertex, self.parent, post_order=list(self.post_order))

    def check(self) -> None:
        """Assert the structural invariants of a nice decomposition."""
        if self.bags[self.root]:
            raise NotNice("root bag is not empty")
        for x, kind in self.kinds.items():
            cs = self.children[x]
            b = set(self.bags[x])
            if kind is Kind.LEAF:
                ok = not cs
            elif kind is Kind.JOIN:
                ok = len(cs) == 2 and all(set(self.bags[c]) == b for c in cs)
            elif kind is Kind.INTRODUCE:
                v = self.vertex[x]
                ok = len(cs) == 1 and v in b and set(self.bags[cs[0]]) == b - {v}
            else:
                v = self.vertex[x]
                ok = len(cs) == 1 and v not in b and set(self.bags[cs[0]]) == b | {v}
            if not ok:
                raise NotNice(f"node {x} violates the {kind.value} rule")
        if sorted(self.forget_node) != list(range(1, self.n + 1)):
            raise NotNice("forget map is not a bijection onto the vertices")


def _post_order(root: int, children: Mapping[int, Sequence[int]]) -> list[int]:
    order = []
    stack = [(root, False)]
    while stack:
        x, done = stack.pop()
        if done:
            order.append(x)
            continue
        stack.append((x, True))
        for c in reversed(children[x]):
            stack.append((c, False))
    return order


def post_order(T: NiceTreeDecomposition) -> list[int]:
    return list(T.post_order)


def nicify(T: TreeDecomposition, root: int | None = None) -> NiceTreeDecomposition:
    """Build a nice decomposition of the same width with an empty root bag.

    Node ids of the result are assigned in post order, so ``post_order`` is
    ``1..m`` and the left child of a join always has the smaller id.
    """
    root, parent, children = T.rooted(root)
    bag: dict[int, set[int]] = {x: set(b) for x, b in T.bags.items()}
    next_id = max(bag) + 1

    # 1. merge every node whose bag is contained in its (surviving) parent's
    preorder = []
    stack = [root]
    while stack:
        x = stack.pop()
        preorder.append(x)
        stack.extend(reversed(children[x]))
    surv: dict[int, int] = {}  # node -> itself if kept, else its surviving ancestor
    kept = []
    for x in preorder:
        if x == root:
            surv[x] = x
            kept.append(x)
            continue
        p = surv[parent[x]]
        if bag[x] <= bag[p]:
            surv[x] = p
        else:
            surv[x] = x
            parent[x] = p
            kept.append(x)
    kids: dict[int, list[int]] = {x: [] for x in kept}
    for x in kept:
        if x != root:
            kids[parent[x]].append(x)
    children = kids

    # 2. pad bags smaller than the parent's with the parent's smallest vertices
    for x in _preorder(root, children):
        if x == root:
            continue
        p = parent[x]
        if len(bag[x]) < len(bag[p]):
            for v in sorted(bag[p] - bag[x]):
                if len(bag[x]) == len(bag[p]):
                    break
                bag[x].add(v)

    # 2b. on single-child chains above a branching node, pad each node up to
    # its child's size so that join-to-join paths shrink only at their top
    above_branch: dict[int, bool] = {}
    for x in _post_order(root, children):
        cs = children[x]
        if len(cs) != 1:
            above_branch[x] = len(cs) >= 2
            continue
        c = cs[0]
        above_branch[x] = above_branch[c]
        if x == root or not above_branch[c]:
            continue
        if len(bag[x]) < len(bag[c]):
            for v in sorted(bag[c] - bag[x]):
                if len(bag[x]) == len(bag[c]):
                    break
                bag[x].add(v)
        if bag[x] == bag[c]:
            # drop x; its only child takes its place
            p = parent[x]
            i = children[p].index(x)
            children[p][i] = c
            parent[c] = p
            children[x] = []

    # 3. expand every node with c >= 2 children into a caterpillar of c - 1 joins
    def new_node(b):
        nonlocal next_id
        node = next_id
        next_id += 1
        bag[node] = set(b)
        children[node] = []
        return node

    for x in _preorder(root, children):
        cs = children[x]
        if len(cs) < 2:
            continue
        spine = x
        for i in range(len(cs) - 1):
            left = new_node(bag[x])
            children[left] = [cs[i]]
            parent[cs[i]] = left
            if i < len(cs) - 2:
                right = new_node(bag[x])
            else:
                right = new_node(bag[x])
                children[right] = [cs[-1]]
                parent[cs[-1]] = right
            children[spine] = [left, right]
            parent[left] = parent[right] = spine
            spine = right

    # 4. subdivide single-child edges into alternating forget/introduce steps
    kinds: dict[int, Kind] = {}
    vertex: dict[int, int] = {}
    for x in list(_preorder(root, children)):
        cs = children[x]
        if not cs:
            kinds[x] = Kind.LEAF
            continue
        if len(cs) == 2:
            kinds[x] = Kind.JOIN
            continue
        c = cs[0]
        forgets = sorted(bag[c] - bag[x], reverse=True)
        intros = sorted(bag[x] - bag[c])
        steps = []
        for i in range(max(len(forgets), len(intros))):
            if i < len(forgets):
                steps.append((Kind.FORGET, forgets[i]))
            if i < len(intros):
                steps.append((Kind.INTRODUCE, intros[i]))
        if not steps:
            raise DecompositionError(f"node {x} repeats its child's bag")  # pragma: no cover
        below = c
        cur = set(bag[c])
        for kind, v in steps[:-1]:
            if kind is Kind.FORGET:
                cur.discard(v)
            else:
                cur.add(v)
            node = new_node(cur)
            children[node] = [below]
            parent[below] = node
            kinds[node] = kind
            vertex[node] = v
            below = node
        children[x] = [below]
        parent[below] = x
        kinds[x], vertex[x] = steps[-1]

    # 5. forget the root bag, largest label first
    for v in sorted(bag[root], reverse=True):
        node = new_node(bag[root] - {v})
        children[node] = [root]
        parent[root] = node
        parent[node] = None
        kinds[node] = Kind.FORGET
        vertex[node] = v
        root = node

    # renumber in post order
    order = _post_order(root, children)
    new_id = {x: i for i, x in enumerate(order, 1)}
    nice = NiceTreeDecomposition(
        n=T.n,
        root=new_id[root],
        bags={new_id[x]: tuple(sorted(bag[x])) for x in order},
        children={new_id[x]: [new_id[c] for c in children[x]] for x in order},
        kinds={new_id[x]: kinds[x] for x in order},
        vertex={new_id[x]: vertex[x] for x in order if x in vertex},
    )
    return nice


def _preorder(root: int, children: Mapping[int, Sequence[int]]) -> list[int]:
    out = []
    stack = [root]
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(reversed(children[x]))
    return out


def join_path_violations(T: NiceTreeDecomposition) -> list[str]:
    """Check the two join-path properties the operation-count bound relies on.

    (i) a join's bag is never larger than the bag of a join below it;
    (ii) between a join and the nearest join above it, the inner nodes read
    ``Forget, Introduce, Forget, ...`` (starting with Forget) followed only by
    Forget nodes.
    """
    problems = []
    for j in T.post_order:
        if T.kinds[j] is not Kind.JOIN:
            continue
        path = []
        x = T.parent[j]
        while x is not None and T.kinds[x] is not Kind.JOIN:
            path.append(x)
            x = T.parent[x]
        if x is None:
            continue
        if len(T.bags[x]) > len(T.bags[j]):
            problems.append(f"join {x} has a larger bag than descendant join {j}")
        kinds = [T.kinds[y] for y in path]
        i = 0
        while i < len(kinds) and kinds[i] is (Kind.FORGET if i % 2 == 0 else Kind.INTRODUCE):
            i += 1
        if any(k is not Kind.FORGET for k in kinds[i:]):
            problems.append(f"path from join {j} to join {x} is not alternating then forgets")
    return problems


def relabel_by_forget_order(T: NiceTreeDecomposition) -> tuple[list[int], list[int]]:
    """Label the i-th forgotten vertex (in post order) ``n - i + 1``.

    Returns ``(perm, inverse)`` as lists indexed by vertex (index 0 unused):
    ``perm[old] = new`` and ``inverse[new] = old``.
    """
    n = T.n
    perm = [0] * (n + 1)
    label = n
    for x in T.post_order:
        if T.kinds[x] is Kind.FORGET:
            perm[T.vertex[x]] = label
            label -= 1
    if label != 0:
        raise NotNice("not every vertex is forgotten")
    inverse = [0] * (n + 1)
    for old in range(1, n + 1):
        inverse[perm[old]] = old
    return perm, inverse


# --- PACE .td I/O ---------------------------------------------------------

def read_td(fh: TextIO) -> TreeDecomposition:
    header = None
    bags: dict[int, tuple[int, ...]] = {}
    edges = []
    root = None
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) >= 3 and parts[1] == "root":
                try:
                    root = int(parts[2])
                except ValueError:
                    raise TDFormatError("bad root comment", lineno) from None
            continue
        if parts[0] == "s":
            if header is not None:
                raise TDFormatError("duplicate 's td' line", lineno)
            if len(parts) != 5 or parts[1] != "td":
                raise TDFormatError("header must be 's td <bags> <width+1> <vertices>'", lineno)
            try:
                header = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise TDFormatError("header must hold integers", lineno) from None
            continue
        if header is None:
            raise TDFormatError("content before 's td' header", lineno)
        try:
            nums = [int(p) for p in parts[1:]] if parts[0] == "b" else [int(p) for p in parts]
        except ValueError:
            raise TDFormatError(f"non-integer token in {line!r}", lineno) from None
        if parts[0] == "b":
            if not nums:
                raise TDFormatError("bag line without id", lineno)
            i, vs = nums[0], nums[1:]
            if not 1 <= i <= header[0]:
                raise TDFormatError(f"bag id {i} outside 1..{header[0]}", lineno)
            if i in bags:
                raise TDFormatError(f"bag {i} defined twice", lineno)
            for v in vs:
                if not 1 <= v <= header[2]:
                    raise TDFormatError(f"vertex {v} outside 1..{header[2]}", lineno)
            bags[i] = tuple(vs)
        else:
            if len(nums) != 2:
                raise TDFormatError("edge line must be 'i j'", lineno)
            edges.append((nums[0], nums[1]))
    if header is None:
        raise TDFormatError("missing 's td' header")
    m, _, n = header
    for i in range(1, m + 1):
        bags.setdefault(i, ())
    for a, b in edges:
        if a not in bags or b not in bags:
            raise TDFormatError(f"edge {a} {b} refers to an unknown bag")
    return TreeDecomposition(n, bags, edges, root)


def write_td(T: TreeDecomposition | NiceTreeDecomposition, fh: TextIO) -> None:
    width1 = max((len(b) for b in T.bags.values()), default=0)
    ids = sorted(T.bags)
    fh.write(f"s td {len(ids)} {width1} {T.n}\n")
    if isinstance(T, NiceTreeDecomposition):
        fh.write(f"c root {T.root}\n")
        for x in ids:
            kind = T.kinds[x]
            extra = f" {T.vertex[x]}" if kind in (Kind.INTRODUCE, Kind.FORGET) else ""
            fh.write(f"c kind {x} {kind.value}{extra}\n")
        edges = [(c, x) for x in ids for c in T.children[x]]
    else:
        if T.root is not None:
            fh.write(f"c root {T.root}\n")
        edges = T.edges
    for x in ids:
        fh.write(" ".join(["b", str(x), *map(str, T.bags[x])]) + "\n")
    for a, b in edges:
        fh.write(f"{a} {b}\n")


def load_td(path) -> TreeDecomposition:
    with open(path) as fh:
        return read_td(fh)


def save_td(T, path) -> None:
    with open(path, "w") as fh:
        write_td(T, fh)


def as_nice(T: TreeDecomposition) -> NiceTreeDecomposition:
    """Use ``T`` as is when it is already nice, otherwise nicify it."""
    try:
        return NiceTreeDecomposition.from_tree(T)
    except NotNice:
        return nicify(T)
