"""Chromatic polynomials and the estimators built on string-net samples.

Polynomials are integer coefficient lists, ``coeffs[i]`` multiplying ``k**i``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import CapacityError, DataError
from .fibsym import PHI
from .graphnet import Graph, LatticeLayout, iso_classes

GOLDEN_K = PHI + 2


@dataclass(frozen=True)
class ChromPoly:
    coeffs: Tuple[int, ...]

    @property
    def degree(self) -> int:
        nz = [i for i, c in enumerate(self.coeffs) if c]
        return nz[-1] if nz else -1

    def __call__(self, k: float) -> float:
        return eval_poly(self, k)

    def __str__(self) -> str:
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c:
                mono = "" if i == 0 else ("k" if i == 1 else f"k^{i}")
                coef = str(c) if (abs(c) != 1 or i == 0) else ("-" if c < 0 else "")
                terms.append(f"{coef}{mono}")
        return " + ".join(terms).replace("+ -", "- ") or "0"


@dataclass
class ChromEstimate:
    class_id: str
    mean: float
    stderr: float
    multiplicity: int
    exact: float = float("nan")

    @property
    def relative_error(self) -> float:
        return abs(self.mean - self.exact) / abs(self.exact) if self.exact else float("nan")

    def to_dict(self) -> dict:
        return {"class": self.class_id, "multiplicity": self.multiplicity,
                "mean": self.mean, "stderr": self.stderr, "exact": self.exact,
                "relative_error": self.relative_error}


def _sub(p: List[int], q: List[int]) -> List[int]:
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)]


def _mul(p: List[int], q: List[int]) -> List[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _normalize(n: int, edges) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    """Drop parallel edges and sort, giving a hashable key."""
    es = sorted({(min(u, v), max(u, v)) for u, v in edges})
    return n, tuple(es)


@lru_cache(maxsize=200_000)
def _dc(n: int, edges: Tuple[Tuple[int, int], ...]) -> Tuple[int, ...]:
    if any(u == v for u, v in edges):
        return (0,)
    if not edges:
        return tuple([0] * n + [1])
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    # a vertex of degree 1 contributes a factor (k-1)
    for v in range(n):
        if len(adj[v]) == 1:
            rest = [(a - (a > v), b - (b > v)) for a, b in edges if v not in (a, b)]
            return tuple(_mul(list(_dc(*_normalize(n - 1, rest))), [-1, 1]))
    # isolated vertex contributes a factor k
    for v in range(n):
        if not adj[v]:
            rest = [(a - (a > v), b - (b > v)) for a, b in edges]
            return tuple(_mul(list(_dc(*_normalize(n - 1, rest))), [0, 1]))
    # delete/contract an edge at a max-degree vertex
    v = max(range(n), key=lambda x: len(adj[x]))
    w = max(adj[v], key=lambda x: len(adj[x]))
    e = (min(v, w), max(v, w))
    deleted = tuple(x for x in edges if x != e)
    keep, gone = e
    merged = []
    for a, b in deleted:
        a = keep if a == gone else a
        b = keep if b == gone else b
        merged.append((a - (a > gone), b - (b > gone)))
    p = list(_dc(*_normalize(n, deleted)))
    q = list(_dc(*_normalize(n - 1, merged)))
    return tuple(_sub(p, q))


def chromatic_poly(g: Graph) -> ChromPoly:
    """Exact chromatic polynomial by deletion-contraction.

    A loop anywhere gives the zero polynomial; parallel edges collapse.
    """
    if g.n > 14:
        raise CapacityError("deletion-contraction limited to 14 vertices")
    if g.n == 0:
        return ChromPoly((1,))
    c = list(_dc(*_normalize(g.n, g.edges)))
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return ChromPoly(tuple(c))


def deletion_contraction_step(g: Graph, edge_index: int) -> Tuple[Graph, Graph]:
    """The pair ``(G - e, G / e)`` for one edge, kept as multigraphs."""
    u, v = g.edges[edge_index]
    rest = [e for i, e in enumerate(g.edges) if i != edge_index]
    deleted = Graph(g.n, tuple(rest))
    if u == v:
        return deleted, deleted
    keep, gone = min(u, v), max(u, v)
    merged = []
    for a, b in rest:
        a = keep if a == gone else a
        b = keep if b == gone else b
        merged.append((a - (a > gone), b - (b > gone)))
    return deleted, Graph(g.n - 1, tuple(merged))


def eval_poly(p: ChromPoly, k: float) -> float:
    acc = 0.0
    for c in reversed(p.coeffs):
        acc = acc * k + c
    return acc


def eval_poly_int(p: ChromPoly, k: int) -> int:
    acc = 0
    for c in reversed(p.coeffs):
        acc = acc * k + c
    return acc


def coloring_oracle(g: Graph, k: int) -> int:
    """Count proper ``k``-colourings by enumerating all ``k**n`` assignments."""
    if g.n > 9:
        raise CapacityError("brute-force colouring limited to 9 vertices")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if g.n == 0:
        return 1
    if k == 0:
        return 0
    cols = np.array(list(itertools.product(range(k), repeat=g.n)), dtype=np.int8).reshape(-1, g.n)
    ok = np.ones(len(cols), dtype=bool)
    for u, v in g.edges:
        ok &= cols[:, u] != cols[:, v]
    return int(ok.sum())


def filter_invalid(counts: Dict[str, int], layout: LatticeLayout,
                   ancillas: Sequence[int] = ()) -> Tuple[Dict[str, float], float]:
    """Drop branching-violating words.

    Ancilla positions are traced out first.  Returns the surviving words as
    fractions of the retained total, and the invalid fraction of all counts.
    """
    from .graphnet import validate_branching
    total = sum(counts.values())
    if total <= 0:
        return {}, 0.0
    anc = set(ancillas)
    merged: Dict[str, float] = {}
    for w, c in counts.items():
        key = "".join(ch for i, ch in enumerate(w) if i not in anc)
        merged[key] = merged.get(key, 0) + c
    kept = {w: c for w, c in merged.items() if validate_branching(layout, w)}
    good = sum(kept.values())
    if good == 0:
        return {}, 1.0
    return {w: c / good for w, c in kept.items()}, 1.0 - good / total


def _class_counts(counts: Dict[str, float], layout: LatticeLayout):
    classes = iso_classes(layout)
    valid, _ = filter_invalid(counts, layout)
    total = sum(counts.values())
    out = []
    for c in classes:
        xs = np.array([valid.get(w, 0.0) * total for w in c.members], dtype=float)
        out.append((c, xs))
    return out


def _estimates(per_class, ref: float, ref_rel: float, prefactor: float,
               fallback: Sequence[str] = ("G3A", "G3B")) -> List[ChromEstimate]:
    """Class means with standard errors.

    The error has two parts added in quadrature: the member spread
    (Bessel-corrected, over sqrt(m)) and the relative error ``ref_rel`` of the
    shared reference count, which every member of every class divides by.
    A single-member class has no spread of its own and borrows the mean
    per-member spread of the ``fallback`` classes.
    """
    rows = []
    for c, xs in per_class:
        chi = prefactor * xs / ref
        spread = float(chi.std(ddof=1)) if len(chi) > 1 else float("nan")
        exact = eval_poly(chromatic_poly(c.dual), GOLDEN_K)
        rows.append([c, float(chi.mean()), spread, exact])
    pool = [r[2] for r in rows if r[0].class_id in fallback and r[0].multiplicity > 1]
    if not pool:
        pool = [r[2] for r in rows if r[0].multiplicity > 1]
    fill = float(np.mean(pool)) if pool else 0.0
    ests = []
    for c, mean, spread, exact in rows:
        if c.multiplicity == 1:
            spread = 0.0 if c.class_id == "G0" else fill
        err = math.hypot(spread / math.sqrt(c.multiplicity), mean * ref_rel)
        ests.append(ChromEstimate(c.class_id, mean, err, c.multiplicity, exact))
    return ests


def estimate_vacuum_ref(counts: Dict[str, float], layout: LatticeLayout) -> List[ChromEstimate]:
    """Estimate (phi+2) C([G]) / C(vac) per isomorphism class.

    ``mean`` averages over class members; the vacuum count's Poisson error
    enters ``stderr`` next to the member spread.
    """
    per = _class_counts(counts, layout)
    vac = [xs for c, xs in per if c.class_id == "G0"]
    ref = float(vac[0][0]) if vac else 0.0
    if ref <= 0:
        raise DataError("vacuum word has zero count; vacuum-reference estimator undefined")
    return _estimates(per, ref, 1 / math.sqrt(ref), GOLDEN_K)


def estimate_loop_ref(counts: Dict[str, float], layout: LatticeLayout,
                      loop_class: str = "G1") -> List[ChromEstimate]:
    """Estimate phi^2 (phi+2) C([G]) / mean C([loop]) per class."""
    per = _class_counts(counts, layout)
    loops = [xs for c, xs in per if c.class_id == loop_class]
    ref = float(loops[0].mean()) if loops else 0.0
    if ref <= 0:
        raise DataError("single-loop class has zero count; loop-reference estimator undefined")
    xs = loops[0]
    rel = float(xs.std(ddof=1) / math.sqrt(len(xs)) / ref) if len(xs) > 1 else 1 / math.sqrt(ref)
    return _estimates(per, ref, rel, PHI ** 2 * GOLDEN_K)
