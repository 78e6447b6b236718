"""Circuit builders for string-net preparation, anyons, braiding and sampling.

Every builder tracks the planar graph alongside the circuit: F-moves are
requested by edge name, the graph engine rewires the rotation system and
hands back the outer legs, and the matching unitary is appended.  The final
graph is the one the output state lives on, so branching checks always use
the right vertex structure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import fibsym as fs
from .anyon import charge_prediction
from .errors import CapacityError
from .graphnet import LatticeLayout, TrivalentGraph
from .statevec import Circuit, GateOp


@dataclass
class ExperimentSpec:
    name: str
    layout: LatticeLayout
    circuit: Circuit
    readout: List[Tuple[int, str]]
    expected: dict = field(default_factory=dict)

    @property
    def graph(self) -> TrivalentGraph:
        return self.layout.graph

    def q(self, edge: str) -> int:
        return self.layout.qubit_of_edge[edge]


class _Builder:
    """Circuit plus the planar graph it currently prepares."""

    def __init__(self, name: str, edges: Sequence[str], graph: TrivalentGraph):
        self.q = {e: i for i, e in enumerate(edges)}
        self.graph = graph
        self.circuit = Circuit(len(edges), name=name, roles={i: e for i, e in enumerate(edges)})

    def add(self, op: GateOp) -> GateOp:
        return self.circuit.append(op)

    def s(self, e):
        self.add(fs.s_op(self.q[e]))

    def x(self, e, label="X"):
        self.add(fs.x_op(self.q[e], label=label))

    def cnot(self, c, t):
        self.add(fs.cnot_op(self.q[c], self.q[t]))

    def r(self, c, t, conj=False):
        self.add(fs.rmove_op(self.q[c], self.q[t], conj))

    def fmove(self, e: str, rep: Optional[Dict[str, str]] = None) -> Tuple[str, ...]:
        """F-move on edge ``e``; ``rep`` substitutes legs known to carry equal labels."""
        legs = self.graph.fmove(e)
        use = [rep.get(x, x) for x in legs] if rep else list(legs)
        self.add(fs.fmove_from_legs([self.q[x] for x in use], self.q[e]))
        return legs

    def fmove_parts(self, e: str) -> List[GateOp]:
        legs = self.graph.fmove(e)
        return fs.fmove_parts([self.q[x] for x in legs], self.q[e])

    def layout(self, name, **meta) -> LatticeLayout:
        return LatticeLayout(self.graph.copy(), dict(self.q), name, meta)


def _rot(spec: Dict[str, Sequence[Tuple[str, int]]], punctures=()) -> TrivalentGraph:
    return TrivalentGraph({v: list(d) for v, d in spec.items()}, punctures)


# ---------------------------------------------------------------- minimal SNC

def build_min_snc() -> ExperimentSpec:
    """Two beads joined through a 3-qubit F-move into the theta string-net."""
    dumbbell = _rot({"A": [("Q2", 0), ("Q1", 0), ("Q1", 1)],
                     "B": [("Q2", 1), ("Q3", 0), ("Q3", 1)]})
    b = _Builder("min_snc", ["Q1", "Q2", "Q3"], dumbbell)
    b.s("Q1")
    b.s("Q3")
    b.fmove("Q2")
    phi = fs.PHI
    z = 5 * phi ** 2
    probs = {"000": 1 / z, "110": phi ** 2 / z, "011": phi ** 2 / z,
             "101": phi ** 2 / z, "111": phi ** 3 / z}
    return ExperimentSpec("min_snc", b.layout("min3"), b.circuit,
                          [(i, e) for e, i in b.q.items()], {"probabilities": probs})


# ---------------------------------------------------------------- strips

def _strand(n: int) -> Tuple[List[str], TrivalentGraph, Dict[str, str]]:
    """Bead strand: single-qubit end beads, two-qubit inner beads, empty bridges.

    Inner bead ``i`` is a circle between vertices ``u<i>`` (west) and
    ``w<i>`` (east) with top arc ``a<i>`` and bottom arc ``c<i>``; bridge
    ``b<i>`` joins bead ``i`` to bead ``i+1``.
    """
    rot = {"w0": [("b0", 0), ("a0", 0), ("a0", 1)]}
    edges = ["a0", "b0"]
    rep = {}
    for i in range(1, n - 1):
        rot[f"u{i}"] = [(f"b{i-1}", 1), (f"c{i}", 1), (f"a{i}", 0)]
        rot[f"w{i}"] = [(f"b{i}", 0), (f"a{i}", 1), (f"c{i}", 0)]
        edges += [f"a{i}", f"c{i}", f"b{i}"]
        rep[f"c{i}"] = f"a{i}"
    m = n - 1
    rot[f"u{m}"] = [(f"b{m-1}", 1), (f"a{m}", 0), (f"a{m}", 1)]
    edges.append(f"a{m}")
    return edges, _rot(rot), rep


def _strip_builder(n: int, name: str) -> _Builder:
    edges, g, rep = _strand(n)
    b = _Builder(name, edges, g)
    for i in range(n):
        b.s(f"a{i}")
    for i in range(1, n - 1):
        b.cnot(f"a{i}", f"c{i}")
    # both arcs of a bead hold the same label here, so each F-move only
    # needs one arc per bead: a parallel layer of 3-qubit F-moves
    for i in range(n - 1):
        b.fmove(f"b{i}", rep)
    return b


def build_strip(n_plaquettes: int) -> ExperimentSpec:
    """Folded strip of ``n`` plaquettes from a bead strand (not yet sewn)."""
    n = n_plaquettes
    if not 2 <= n <= 8:
        raise CapacityError("strip length must be in 2..8")
    b = _strip_builder(n, f"strip({n})")
    side = math.ceil(math.sqrt(n))
    meta = {"fmove_layers": 1, "f3_count": n - 1, "f5_count": 0,
            "sewing_fmove_depth_2d": 2 * side,
            "note": "sewing an N x N patch takes about 2N sequential 5-qubit F-move layers"}
    b.circuit.metadata.update(meta)
    return ExperimentSpec(f"strip({n})", b.layout(f"strip({n})", **meta), b.circuit,
                          [(i, e) for e, i in b.q.items()])


def build_lattice2x2() -> ExperimentSpec:
    """Four-bead strand, folded strip, then two sewing 5-qubit F-moves."""
    b = _strip_builder(4, "lattice2x2")
    b.fmove("a1")
    b.fmove("c2")
    meta = {"fmove_layers": 3, "f3_count": 3, "f5_count": 2,
            "hardware_ancillas": 2,
            "note": "hardware runs add one ancilla per 5-qubit F-move; not simulated"}
    b.circuit.metadata.update(meta)
    return ExperimentSpec("lattice2x2", b.layout("lattice2x2", **meta), b.circuit,
                          [(i, e) for e, i in b.q.items()])


# ---------------------------------------------------------------- anyons

_ANYON_CONJ = {"tau1": False, "1tau": True}


def _pair_gadget(b: _Builder, up, down, g, t_left, t_right, conj):
    """Create an anyon pair on the edge ``up``-``down`` split by a 2-valent vertex.

    Both tails start in |1>, an F-move on the empty bridge ``g`` attaches
    them, and a controlled R (or R*) dresses the crossing.
    """
    b.x(t_left)
    b.x(t_right)
    b.add(fs.fmove_from_legs([b.q[up], b.q[down], b.q[t_left], b.q[t_right]], b.q[g]))
    b.r(up, g, conj)


def _anyon_pair_builder(anyon: str) -> _Builder:
    if anyon not in _ANYON_CONJ:
        raise ValueError(f"anyon must be one of {sorted(_ANYON_CONJ)}")
    # graph after the pair is created: theta whose middle edge is split
    # into Q2 (A-X) and Q4 (Y-B), bridge Q6, tails Q5 and Q7
    g = _rot({"A": [("Q2", 0), ("Q3", 0), ("Q1", 0)],
              "B": [("Q4", 1), ("Q1", 1), ("Q3", 1)],
              "X": [("Q2", 1), ("Q6", 0), ("Q7", 0)],
              "Y": [("Q6", 1), ("Q5", 0), ("Q4", 0)],
              "P5": [("Q5", 1)], "P7": [("Q7", 1)]}, punctures=("P5", "P7"))
    b = _Builder(f"anyon_pair({anyon})", [f"Q{i}" for i in range(1, 8)], g)
    b.s("Q1")
    b.s("Q3")
    b.add(fs.fmove_op([b.q["Q1"], b.q["Q3"]], b.q["Q2"], "3q"))
    b.cnot("Q2", "Q4")
    _pair_gadget(b, "Q2", "Q4", "Q6", "Q5", "Q7", _ANYON_CONJ[anyon])
    return b


def build_anyon_pair(anyon: str = "tau1") -> ExperimentSpec:
    b = _anyon_pair_builder(anyon)
    meta = {"pinned": ["Q5", "Q7"]}
    return ExperimentSpec(f"anyon_pair({anyon})", b.layout("anyon_pair", **meta), b.circuit,
                          [(i, e) for e, i in b.q.items()], {"pinned_prob_one": 1.0})


def build_charge_measure(anyon: str = "tau1", graph: str = "2d") -> ExperimentSpec:
    """Deform the anyon-pair graph into two tubes joined at Q6, optionally apply U x U.

    The tubes are ``(alpha, beta) = (Q4, Q1)`` and ``(Q2, Q3)``.
    """
    if graph not in ("2d", "3d"):
        raise ValueError("graph must be '2d' or '3d'")
    b = _anyon_pair_builder(anyon)
    for e in ("Q2", "Q4", "Q6"):
        b.fmove(e)
    if graph == "3d":
        u = fs.charge_unitary()
        b.add(GateOp("UnitaryK", (b.q["Q4"], b.q["Q1"]), u, label="U"))
        b.add(GateOp("UnitaryK", (b.q["Q2"], b.q["Q3"]), u, label="U"))
    name = f"charge_measure({anyon},{graph})"
    meta = {"tubes": [["Q4", "Q1"], ["Q2", "Q3"]], "pinned": ["Q5", "Q6", "Q7"]}
    b.circuit.metadata.update(meta)
    return ExperimentSpec(name, b.layout("charge_" + graph, **meta), b.circuit,
                          [(i, e) for e, i in b.q.items()],
                          {"prob_one": charge_prediction(anyon, graph)})


# ---------------------------------------------------------------- braiding

BRAID_EDGES = ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9", "Q10", "Q11"]
# F-move edges that exchange anyons 2 and 3, in the frame of the start graph
BRAID_SEQUENCE = ("Q6", "Q1", "Q9", "Q5")


def braid_start_graph() -> TrivalentGraph:
    """Three-plaquette graph carrying two anyon pairs.

    Theta on A, B with arcs Q1-Q4 (left, split at bridge Q6) and Q3-Q5
    (right, split at bridge Q9); Q2 is the middle edge.  Tails: anyon 1 on
    Q7, anyon 2 on Q8, anyon 3 on Q10, anyon 4 on Q11.
    """
    return _rot({
        "A": [("Q1", 0), ("Q2", 0), ("Q3", 0)],
        "B": [("Q5", 1), ("Q2", 1), ("Q4", 1)],
        "XA": [("Q1", 1), ("Q6", 0), ("Q8", 0)],
        "YA": [("Q6", 1), ("Q7", 0), ("Q4", 0)],
        "XB": [("Q3", 1), ("Q9", 0), ("Q11", 0)],
        "YB": [("Q9", 1), ("Q10", 0), ("Q5", 0)],
        "P1": [("Q7", 1)], "P2": [("Q8", 1)], "P3": [("Q10", 1)], "P4": [("Q11", 1)],
    }, punctures=("P1", "P2", "P3", "P4"))


SWAP_23 = {"P2": "P3", "P3": "P2"}


def build_braid(control: bool = False, n_braids: int = 1) -> ExperimentSpec:
    """Create two anyon pairs, exchange anyons 2 and 3, fuse 1 with 3.

    Each exchange is four 5-qubit F-moves that take the graph to a copy of
    itself with punctures 2 and 3 swapped; repeated exchanges follow the edge
    correspondence of that graph isomorphism.  The fusing F-move acts on the
    image of Q2, whose label afterwards is the logical readout (root edge).

    ``control`` adds two X errors: one on Q2 ahead of the 3-qubit F-move, one
    on Q4 inside the first exchange F-move, right before its last
    controlled-X stage.
    """
    g0 = braid_start_graph()
    b = _Builder("braid_control" if control else "braid", BRAID_EDGES, g0.copy())
    b.s("Q1")
    b.s("Q3")
    if control:
        b.x("Q2", label="Xerr")
    b.add(fs.fmove_op([b.q["Q1"], b.q["Q3"]], b.q["Q2"], "3q"))
    b.cnot("Q1", "Q4")
    b.cnot("Q3", "Q5")
    _pair_gadget(b, "Q1", "Q4", "Q6", "Q7", "Q8", False)
    _pair_gadget(b, "Q3", "Q5", "Q9", "Q10", "Q11", False)

    frame = {e: e for e in BRAID_EDGES}
    for k in range(n_braids):
        for j, e in enumerate(BRAID_SEQUENCE):
            if control and k == 0 and j == 0:
                parts = b.fmove_parts(frame[e])
                for p in parts[:4]:
                    b.add(p)
                b.x("Q4", label="Xerr")
                for p in parts[4:]:
                    b.add(p)
            else:
                b.fmove(frame[e])
        iso = g0.match(b.graph, SWAP_23) if k % 2 == 0 else g0.match(b.graph)
        if iso is None:
            raise RuntimeError("exchange did not return to the start graph")
        frame = iso
    root = frame["Q2"]
    b.fmove(root)
    s1, s2 = fs.braid_matrices()
    amp = np.linalg.matrix_power(s2, n_braids) @ np.array([1, 0])
    ratio = abs(amp[1]) ** 2 / abs(amp[0]) ** 2 if abs(amp[0]) > 0 else float("inf")
    if control:
        ratio = 0.328
    meta = {"root": root, "n_braids": n_braids, "control": control,
            "exchange_edges": list(BRAID_SEQUENCE), "hardware_ancillas": 2}
    b.circuit.metadata.update(meta)
    return ExperimentSpec(b.circuit.name, b.layout("braid", **meta), b.circuit,
                          [(b.q[root], "root")], {"ratio": ratio})
