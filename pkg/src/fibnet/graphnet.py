"""Trivalent string-net graphs.

A graph is stored as a rotation system: every vertex lists its incident darts
in counter-clockwise order, and a dart is ``(edge_id, side)`` with side 0 or 1
for the two ends of an edge.  Faces, the planar dual and F-move rewiring all
follow from the rotation.  Puncture vertices are degree-1 endpoints of tail
edges; they trap open string ends and are exempt from the branching rule.
"""
from __future__ import annotations

import collections
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, DataError

Dart = Tuple[str, int]


@dataclass(frozen=True)
class Graph:
    """Abstract multigraph on vertices ``0..n-1``; loops and parallel edges allowed."""

    n: int
    edges: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[object, object]],
                   vertices: Iterable[object] = ()) -> "Graph":
        index: Dict[object, int] = {}
        for v in vertices:
            index.setdefault(v, len(index))
        out = []
        for u, v in edges:
            index.setdefault(u, len(index))
            index.setdefault(v, len(index))
            out.append((index[u], index[v]))
        return cls(len(index), tuple(out))

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def components(self) -> int:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x
        for u, v in self.edges:
            parent[find(u)] = find(v)
        return len({find(x) for x in range(self.n)})

    def cyclomatic(self) -> int:
        return len(self.edges) - self.n + self.components()

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


class TrivalentGraph:
    """Planar graph with tails, given by a rotation system."""

    def __init__(self, rot: Dict[object, Sequence[Dart]], punctures: Iterable[object] = ()):
        self.rot: Dict[object, List[Dart]] = {}
        self.at: Dict[Dart, object] = {}
        self.punctures = set(punctures)
        for v, darts in rot.items():
            self._set_rot(v, darts)
        for e in self.edge_ids:
            if (e, 0) not in self.at or (e, 1) not in self.at:
                raise DataError(f"edge {e!r} has a free end")

    @classmethod
    def from_ccw(cls, ccw: Dict[object, Sequence[str]], punctures: Iterable[object] = ()) -> "TrivalentGraph":
        """Build from counter-clockwise edge lists; an edge's first mention is side 0."""
        seen: Dict[str, int] = collections.Counter()
        rot = {}
        for v, edges in ccw.items():
            darts = []
            for e in edges:
                darts.append((e, seen[e]))
                seen[e] += 1
            rot[v] = darts
        bad = [e for e, c in seen.items() if c != 2]
        if bad:
            raise DataError(f"edges {bad} do not have exactly two ends")
        return cls(rot, punctures)

    def _set_rot(self, v, darts):
        self.rot[v] = list(darts)
        for d in darts:
            self.at[d] = v

    def copy(self) -> "TrivalentGraph":
        return TrivalentGraph({v: list(r) for v, r in self.rot.items()}, self.punctures)

    @property
    def vertices(self) -> List[object]:
        return list(self.rot)

    @property
    def edge_ids(self) -> List[str]:
        return sorted({d[0] for d in self.at})

    @property
    def edges(self) -> Dict[str, Tuple[object, object]]:
        return {e: self.ends(e) for e in self.edge_ids}

    @property
    def tails(self) -> List[str]:
        return [e for e in self.edge_ids if self.is_tail(e)]

    @staticmethod
    def other(d: Dart) -> Dart:
        return (d[0], 1 - d[1])

    def ends(self, e: str) -> Tuple[object, object]:
        return self.at[(e, 0)], self.at[(e, 1)]

    def degree(self, v) -> int:
        return len(self.rot[v])

    def rot_from(self, v, d: Dart) -> List[Dart]:
        r = self.rot[v]
        i = r.index(d)
        return r[i:] + r[:i]

    def is_tail(self, e: str) -> bool:
        u, v = self.ends(e)
        return u in self.punctures or v in self.punctures

    def can_fmove(self, e: str) -> bool:
        if e not in self.edge_ids or self.is_tail(e):
            return False
        u, v = self.ends(e)
        return u != v and self.degree(u) == 3 and self.degree(v) == 3

    def fmove(self, e: str) -> Tuple[str, str, str, str]:
        """Rewire the graph by an F-move on ``e`` and return its outer legs.

        With ``u = (e, a, b)`` and ``v = (e, c, d)`` counter-clockwise, the
        move yields ``u = (e, b, c)`` and ``v = (e, d, a)``; the legs are
        ``(a, b, c, d)``.
        """
        if not self.can_fmove(e):
            raise DataError(f"no F-move on edge {e!r}")
        du = (e, 0)
        u, dv = self.at[du], (e, 1)
        v = self.at[dv]
        _, a, b = self.rot_from(u, du)
        _, c, d = self.rot_from(v, dv)
        self._set_rot(u, [du, b, c])
        self._set_rot(v, [dv, d, a])
        return a[0], b[0], c[0], d[0]

    def face_darts(self) -> List[List[Dart]]:
        seen = set()
        out = []
        for d0 in sorted(self.at, key=lambda d: (d[0], d[1])):
            if d0 in seen:
                continue
            f, d = [], d0
            while d not in seen:
                seen.add(d)
                f.append(d)
                o = self.other(d)
                r = self.rot[self.at[o]]
                d = r[(r.index(o) + 1) % len(r)]
            out.append(f)
        return out

    @property
    def faces(self) -> List[List[str]]:
        return [[d[0] for d in f] for f in self.face_darts()]

    def face_of_dart(self) -> Dict[Dart, int]:
        return {d: i for i, f in enumerate(self.face_darts()) for d in f}

    def euler_ok(self) -> bool:
        comps = Graph.from_edges(self.edges.values(), self.vertices).components()
        return len(self.vertices) - len(self.edge_ids) + len(self.faces) == 1 + comps

    def dual(self) -> "TrivalentGraph":
        """Planar dual as a rotation system; dual edge ids equal primal ids."""
        rot = {("f", i): list(f) for i, f in enumerate(self.face_darts())}
        return TrivalentGraph(rot)

    def to_graph(self, edges: Optional[Iterable[str]] = None) -> Graph:
        es = self.edge_ids if edges is None else list(edges)
        return Graph.from_edges([self.ends(e) for e in es], self.vertices if edges is None else ())

    def canon(self, start: Dart, relabel: Optional[dict] = None):
        """Breadth-first code of the rotation system from ``start``.

        Two connected maps are isomorphic (orientation and puncture labels
        preserved) iff some start dart gives equal codes.  Returns the code
        and the dart visiting order, which doubles as a dart correspondence.
        """
        relabel = relabel or {}
        num = {start: 0}
        order = [start]
        code = []
        i = 0
        while i < len(order):
            d = order[i]
            i += 1
            v = self.at[d]
            r = self.rot_from(v, d)
            for x in (self.other(d), r[1 % len(r)]):
                if x not in num:
                    num[x] = len(order)
                    order.append(x)
            lab = relabel.get(v, v) if v in self.punctures else None
            code.append((num[self.other(d)], num[r[1 % len(r)]], lab))
        return tuple(code), order

    def match(self, other: "TrivalentGraph", relabel: Optional[dict] = None) -> Optional[Dict[str, str]]:
        """Edge correspondence self -> other for an orientation-preserving map isomorphism.

        ``relabel`` renames punctures of ``self`` before comparison.
        """
        relabel = relabel or {}
        starts = sorted(self.at, key=lambda d: (d[0], d[1]))
        p = sorted(self.punctures, key=str)
        if p:
            start = self.rot[p[0]][0]
        else:
            start = starts[0]
        code, order = self.canon(start, relabel)
        for d in sorted(other.at, key=lambda d: (d[0], d[1])):
            c2, o2 = other.canon(d)
            if c2 == code:
                return {a[0]: b[0] for a, b in zip(order, o2)}
        return None

    def bridges(self) -> Dict[str, FrozenSet[object]]:
        """Non-tail bridge edges with the punctures on one side of each."""
        out = {}
        for e in self.edge_ids:
            if self.is_tail(e):
                continue
            u, v = self.ends(e)
            if u == v:
                continue
            seen, stack = {u}, [u]
            while stack:
                x = stack.pop()
                for d in self.rot[x]:
                    if d[0] == e:
                        continue
                    y = self.at[self.other(d)]
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if v not in seen:
                out[e] = frozenset(x for x in seen if x in self.punctures)
        return out

    def to_dict(self, qubit_of_edge: Optional[Dict[str, int]] = None) -> dict:
        d = {"vertices": [str(v) for v in self.vertices],
             "edges": [[e, str(u), str(v)] for e, (u, v) in self.edges.items()],
             "tails": self.tails,
             "faces": self.faces,
             "rotation": {str(v): [list(x) for x in r] for v, r in self.rot.items()},
             "punctures": sorted(str(p) for p in self.punctures)}
        if qubit_of_edge is not None:
            d["qubit_of_edge"] = dict(qubit_of_edge)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrivalentGraph":
        if "rotation" not in d:
            raise DataError("graph JSON needs a rotation system to rebuild faces")
        rot = {v: [tuple(x) for x in r] for v, r in d["rotation"].items()}
        return cls(rot, d.get("punctures", []))


@dataclass
class LatticeLayout:
    graph: TrivalentGraph
    qubit_of_edge: Dict[str, int]
    name: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        qs = sorted(self.qubit_of_edge.values())
        if qs != list(range(len(qs))):
            raise DataError("qubit map is not a bijection onto 0..n-1")
        missing = set(self.graph.edge_ids) - set(self.qubit_of_edge)
        if missing:
            raise DataError(f"edges without qubits: {sorted(missing)}")

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_of_edge)

    @property
    def edge_of_qubit(self) -> Dict[int, str]:
        return {q: e for e, q in self.qubit_of_edge.items()}

    def excited_edges(self, bits: str) -> List[str]:
        return [e for e, q in self.qubit_of_edge.items() if bits[q] == "1"]

    def to_dict(self) -> dict:
        d = self.graph.to_dict(self.qubit_of_edge)
        d["name"] = self.name
        if self.metadata:
            d["metadata"] = dict(self.metadata)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeLayout":
        g = TrivalentGraph.from_dict(d)
        q = d.get("qubit_of_edge") or {e: i for i, e in enumerate(g.edge_ids)}
        return cls(g, {k: int(v) for k, v in q.items()}, d.get("name", "custom"),
                   dict(d.get("metadata", {})))


@dataclass
class IsoClass:
    class_id: str
    representative: FrozenSet[str]
    members: List[str]
    multiplicity: int
    dual: Graph
    cyclomatic: int


def _vertex_checks(layout: LatticeLayout):
    g = layout.graph
    for v, darts in g.rot.items():
        if v in g.punctures:
            continue
        yield len(darts), [layout.qubit_of_edge[d[0]] for d in darts]


def validate_branching(layout: LatticeLayout, bits: str) -> bool:
    """True iff every vertex sees 0, 2 or 3 excited edge ends (0 or 2 at degree 2)."""
    if len(bits) != layout.n_qubits:
        raise DataError(f"bitstring length {len(bits)} != {layout.n_qubits}")
    for deg, qs in _vertex_checks(layout):
        c = sum(bits[q] == "1" for q in qs)
        if c == 1 or (deg < 3 and c == 3) or (deg == 1 and c):
            return False
    return True


def valid_mask(layout: LatticeLayout, n_total: Optional[int] = None) -> np.ndarray:
    """Boolean mask over basis indices of ``n_total`` qubits (layout qubits first)."""
    n = layout.n_qubits if n_total is None else n_total
    if n > 26:
        raise CapacityError("mask over more than 26 qubits")
    idx = np.arange(2 ** n, dtype=np.int64)
    ok = np.ones(2 ** n, dtype=bool)
    for deg, qs in _vertex_checks(layout):
        c = sum((idx >> q) & 1 for q in qs)
        bad = (c == 1)
        if deg < 3:
            bad |= c == 3
        if deg == 1:
            bad |= c > 0
        ok &= ~bad
    return ok


def has_tadpole(layout: LatticeLayout, bits: str) -> bool:
    """True if some excited bridge cuts off a puncture-free piece of string.

    Such a tadpole has zero amplitude in every string-net state, although
    each vertex on its own satisfies the branching rule.
    """
    g = layout.graph
    exc = set(layout.excited_edges(bits))
    adj: Dict[object, List[Tuple[str, object]]] = collections.defaultdict(list)
    for e in exc:
        u, v = g.ends(e)
        adj[u].append((e, v))
        adj[v].append((e, u))

    def side(start, cut):
        seen, stack = {start}, [start]
        while stack:
            x = stack.pop()
            for e, y in adj[x]:
                if e != cut and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen
    for e in exc:
        u, v = g.ends(e)
        if u == v:
            continue
        a = side(u, e)
        if v in a:
            continue
        b = side(v, e)
        if not (a & g.punctures) or not (b & g.punctures):
            return True
    return False


def enumerate_valid(layout: LatticeLayout, drop_tadpoles: bool = True) -> List[str]:
    """Branching-valid words in lexicographic order, tadpoles removed by default."""
    if layout.n_qubits > 20:
        raise CapacityError("enumeration limited to 20 string-net qubits")
    n = layout.n_qubits
    idx = np.nonzero(valid_mask(layout))[0]
    words = ["".join("1" if (int(i) >> q) & 1 else "0" for q in range(n)) for i in idx]
    if drop_tadpoles:
        words = [w for w in words if not has_tadpole(layout, w)]
    return sorted(words)


def excited_subgraph(layout: LatticeLayout, bits: str) -> Graph:
    g = layout.graph
    return Graph.from_edges([g.ends(e) for e in sorted(layout.excited_edges(bits))])


def smooth(g: Graph) -> Graph:
    """Suppress degree-2 vertices so that homeomorphic graphs become isomorphic."""
    edges = [list(e) for e in g.edges]
    alive = set(range(g.n))
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            inc = [i for i, (a, b) in enumerate(edges) if a == v or b == v]
            ends = sum((a == v) + (b == v) for a, b in (edges[i] for i in inc))
            if ends != 2 or len(inc) != 2:
                continue
            (a1, b1), (a2, b2) = edges[inc[0]], edges[inc[1]]
            x = b1 if a1 == v else a1
            y = b2 if a2 == v else a2
            for i in sorted(inc, reverse=True):
                edges.pop(i)
            edges.append([x, y])
            alive.discard(v)
            changed = True
            break
    keep = sorted(alive)
    pos = {v: i for i, v in enumerate(keep)}
    return Graph(len(keep), tuple((pos[a], pos[b]) for a, b in edges))


def _adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=int)
    for u, v in g.edges:
        a[u, v] += 1
        if u != v:
            a[v, u] += 1
    return a


def is_isomorphic(a: Graph, b: Graph, topological: bool = True) -> bool:
    """Exact multigraph isomorphism by degree-refined backtracking.

    With ``topological`` set, degree-2 vertices are smoothed away first, so a
    triangle and a square loop compare equal.
    """
    if topological:
        a, b = smooth(a), smooth(b)
    if a.n > 12 or b.n > 12:
        raise CapacityError("isomorphism search limited to 12 vertices")
    if a.n != b.n or len(a.edges) != len(b.edges):
        return False
    A, B = _adjacency(a), _adjacency(b)
    def signatures(M):
        deg = M.sum(axis=1) + np.diag(M)
        return [(int(deg[v]), int(M[v, v]),
                 tuple(sorted(int(deg[w]) for w in np.nonzero(M[v])[0] for _ in range(M[v, w]))))
                for v in range(len(M))]
    sa, sb = signatures(A), signatures(B)
    if sorted(sa) != sorted(sb):
        return False
    order = sorted(range(a.n), key=lambda v: -int(A[v].sum()))
    used = [False] * b.n
    m = {}

    def extend(i):
        if i == len(order):
            return True
        v = order[i]
        for w in range(b.n):
            if used[w] or sb[w] != sa[v]:
                continue
            if all(A[v, x] == B[w, m[x]] for x in m):
                m[v] = w
                used[w] = True
                if extend(i + 1):
                    return True
                del m[v]
                used[w] = False
        return False
    return extend(0)


def region_dual(g: TrivalentGraph, excited: Iterable[str]) -> Graph:
    """Dual of the subgraph formed by ``excited`` edges, embedded as in ``g``.

    Faces of the subgraph are unions of faces of ``g`` glued across edges not
    in the subgraph, which handles disconnected subgraphs and nested loops.
    The outer face is a vertex like any other.
    """
    exc = set(excited)
    fod = g.face_of_dart()
    nf = len(g.face_darts())
    parent = list(range(nf))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x
    for e in g.edge_ids:
        if e not in exc:
            parent[find(fod[(e, 0)])] = find(fod[(e, 1)])
    roots = sorted({find(i) for i in range(nf)})
    pos = {r: i for i, r in enumerate(roots)}
    edges = tuple((pos[find(fod[(e, 0)])], pos[find(fod[(e, 1)])]) for e in sorted(exc))
    return Graph(len(roots), edges)


def dual_graph(g: TrivalentGraph) -> Graph:
    """One vertex per face (outer included), one edge per primal edge."""
    if not g.at:
        return Graph(1)
    return region_dual(g, g.edge_ids)


def iso_classes(layout: LatticeLayout) -> List[IsoClass]:
    """Group valid words by the topology of their excited subgraphs.

    Class ids: ``G<c>`` with ``c`` the number of independent loops; when
    several classes share ``c`` a letter suffix is added in ascending order
    of the dual chromatic value at phi+2.
    """
    from .chromatic import chromatic_poly, eval_poly
    from .fibsym import PHI

    words = enumerate_valid(layout)
    groups: List[Tuple[Graph, List[str]]] = []
    for w in words:
        sub = excited_subgraph(layout, w)
        for rep, mem in groups:
            if is_isomorphic(rep, sub):
                mem.append(w)
                break
        else:
            groups.append((sub, [w]))
    info = []
    for sub, mem in groups:
        dual = region_dual(layout.graph, layout.excited_edges(mem[0]))
        val = eval_poly(chromatic_poly(dual), PHI + 2)
        info.append((sub.cyclomatic(), val, mem[0], sub, mem, dual))
    info.sort(key=lambda t: (t[0], t[1], t[2]))
    by_c = collections.Counter(t[0] for t in info)
    seen: Dict[int, int] = collections.Counter()
    out = []
    for c, _, _, sub, mem, dual in info:
        cid = f"G{c}"
        if by_c[c] > 1:
            cid += "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[seen[c]]
            seen[c] += 1
        out.append(IsoClass(cid, frozenset(layout.excited_edges(mem[0])), mem,
                            len(mem), dual, c))
    return out


def word_class(classes: Sequence[IsoClass]) -> Dict[str, str]:
    return {w: c.class_id for c in classes for w in c.members}


def load_graph_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def graph_from_json(obj: dict) -> Graph:
    """Abstract graph from graph JSON.

    ``edges`` entries are ``[id, u, v]`` or plain ``[u, v]``; vertex ids may
    be any JSON scalars.  Vertices listed under ``vertices`` but never used
    stay isolated.
    """
    if "edges" not in obj:
        raise DataError("graph JSON needs an 'edges' list")
    pairs = []
    for e in obj["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
            raise DataError(f"bad edge entry {e!r}")
        pairs.append(tuple(e[-2:]))
    return Graph.from_edges(pairs, obj.get("vertices", ()))
