"""Fibonacci category data and the gate matrices built from it.

Labels are bits: 0 is the vacuum string, 1 is the tau string.  The F-move
convention used throughout: four outer legs ``(i, j, k, l)`` listed around the
moved edge, internal label ``m`` for the pairing ``(i j)(k l)`` and ``n`` for the
pairing ``(j k)(l i)``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError
from .statevec import GateOp

PHI = (1 + math.sqrt(5)) / 2
D = math.sqrt(1 + PHI ** 2)
THETA = math.atan(math.sqrt(PHI))
THETA_PRIME = 2 * math.atan(PHI)
_SQ = math.sqrt(PHI)

R_ONE = cmath.exp(4j * math.pi / 5)
R_TAU = cmath.exp(-3j * math.pi / 5)

TAU = "tau"  # placeholder for an outer leg pinned to label 1


@dataclass(frozen=True)
class FibConstants:
    phi: float = PHI
    D: float = D
    theta: float = THETA
    theta_prime: float = THETA_PRIME
    d: Dict[int, float] = field(default_factory=lambda: {0: 1.0, 1: PHI})


FIB = FibConstants()

# Nonzero F-symbols F^{ijm}_{kln}; every other label combination is 0.
F_TABLE: Dict[Tuple[int, ...], float] = {
    (0, 0, 0, 0, 0, 0): 1.0,
    (0, 0, 0, 1, 1, 1): 1.0,
    (0, 1, 1, 0, 1, 1): 1.0,
    (0, 1, 1, 1, 0, 0): 1.0,
    (0, 1, 1, 1, 1, 1): 1.0,
    (1, 0, 1, 0, 1, 0): 1.0,
    (1, 0, 1, 1, 0, 1): 1.0,
    (1, 0, 1, 1, 1, 1): 1.0,
    (1, 1, 0, 0, 0, 1): 1.0,
    (1, 1, 0, 1, 1, 0): 1 / PHI,
    (1, 1, 0, 1, 1, 1): 1 / _SQ,
    (1, 1, 1, 0, 1, 1): 1.0,
    (1, 1, 1, 1, 0, 1): 1.0,
    (1, 1, 1, 1, 1, 0): 1 / _SQ,
    (1, 1, 1, 1, 1, 1): -1 / PHI,
}

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def branching_ok(a: int, b: int, c: int) -> bool:
    """A trivalent vertex may carry 0, 2 or 3 tau strings."""
    return a + b + c != 1


def f_symbol(i: int, j: int, m: int, k: int, l: int, n: int) -> float:
    return F_TABLE.get((i, j, m, k, l, n), 0.0)


def r_symbol(i: int, j: int, k: int) -> complex:
    """Braiding phase for strings ``i``, ``j`` fusing to ``k``."""
    if not branching_ok(i, j, k):
        raise DomainError(f"labels {(i, j, k)} violate the branching rule")
    if i == 1 and j == 1:
        return R_ONE if k == 0 else R_TAU
    return 1.0 + 0j


def r_symbol_star(i: int, j: int, k: int) -> complex:
    return r_symbol(i, j, k).conjugate()


def ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def modular_s() -> np.ndarray:
    return np.array([[1, PHI], [PHI, -1]], dtype=complex) / D


def f_block(i: int, j: int, k: int, l: int) -> np.ndarray:
    """Unitary 2x2 action on the internal label for fixed outer legs.

    Entry ``[n, m]`` is the amplitude for ``m -> n``.  On branching-valid
    inputs this is the F-symbol table.  When only one internal value is
    allowed the block is completed to a permutation so that the whole
    operator stays unitary (the invalid input goes to the invalid output).
    """
    b = np.array([[f_symbol(i, j, m, k, l, n) for m in (0, 1)] for n in (0, 1)])
    nz = np.argwhere(b != 0)
    if len(nz) == 0:
        return np.eye(2)
    if len(nz) == 1:
        n0, m0 = nz[0]
        b[1 - n0, 1 - m0] = 1.0
    return b


Leg = Union[int, str]


def _expand_legs(outer: Sequence[Leg], variant: str) -> List[Leg]:
    o = list(outer)
    if variant == "5q":
        if len(o) != 4:
            raise ValueError("5q F-move takes four outer qubits")
        return o
    if variant == "3q":
        if len(o) != 2:
            raise ValueError("3q F-move takes two outer qubits (i=j, k=l)")
        return [o[0], o[0], o[1], o[1]]
    if variant == "4q":
        if len(o) != 3:
            raise ValueError("4q F-move takes three outer qubits (i=l)")
        return [o[0], o[1], o[2], o[0]]
    if variant == "4q_tau":
        if len(o) != 3:
            raise ValueError("4q_tau F-move takes three outer qubits (l fixed to 1)")
        return [o[0], o[1], o[2], TAU]
    raise ValueError(f"unknown F-move variant {variant!r}")


def _distinct(legs: Sequence[Leg]) -> List[int]:
    out: List[int] = []
    for q in legs:
        if q != TAU and q not in out:
            out.append(int(q))
    return out


def _controlled_on_legs(legs: Sequence[Leg], target: int, block_of) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Assemble sum over leg values of |legs><legs| (x) block_of(i,j,k,l)."""
    qs = _distinct(legs)
    if target in qs:
        raise ValueError("target qubit repeated among outer legs")
    order = tuple(qs) + (target,)
    k = len(order)
    u = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for bits in itertools.product((0, 1), repeat=k - 1):
        val = dict(zip(qs, bits))
        labels = [1 if q == TAU else val[q] for q in legs]
        blk = block_of(*labels)
        base = sum(b << (k - 1 - p) for p, b in enumerate(bits))
        u[base:base + 2, base:base + 2] = blk
    return u, order


def fmove_op(outer: Sequence[Leg], target: int, variant: str = "5q",
             noise_weight: float = 1.0) -> GateOp:
    """F-move on ``target`` with outer legs ``outer`` as a UnitaryK op.

    Outer qubits may be passed once per identified pair through ``variant``;
    a leg given as ``TAU`` is pinned to label 1.
    """
    legs = _expand_legs(outer, variant)
    if variant == "5q" and len(set(legs)) != 4:
        raise ValueError("duplicate qubits in 5q F-move")
    u, order = _controlled_on_legs(legs, int(target), f_block)
    return GateOp("UnitaryK", order, u, noise_weight=noise_weight,
                  label=f"F{len(order)}({','.join(map(str, legs))};{target})")


def fmove_from_legs(legs: Sequence[int], target: int, noise_weight: float = 1.0) -> GateOp:
    """F-move for an explicit leg list in which identified legs repeat."""
    legs = list(legs)
    if len(legs) != 4:
        raise ValueError("need four legs")
    u, order = _controlled_on_legs(legs, int(target), f_block)
    return GateOp("UnitaryK", order, u, noise_weight=noise_weight,
                  label=f"F{len(order)}({','.join(map(str, legs))};{target})")


def fmove_parts(legs: Sequence[int], target: int, noise_weight: float = 1.0) -> List[GateOp]:
    """The same F-move split into six ops whose time-ordered product is exact.

    Parts: label permutation on the sectors with some vacuum leg, then on the
    all-tau sector Z, X, Ry(-theta), X, Ry(theta) on the target.  Used only
    where an error has to be injected part-way through an F-move.
    """
    legs = list(legs)
    allt = lambda *b: all(b)
    eye = np.eye(2)
    perm = lambda *b: eye if allt(*b) else f_block(*b)
    cz = lambda *b: np.diag([1.0, -1.0]) if allt(*b) else eye
    cx = lambda *b: X.real if allt(*b) else eye
    ops = []
    for name, fn in (("Fperm", perm), ("FcZ", cz), ("FcX", cx)):
        u, order = _controlled_on_legs(legs, int(target), fn)
        ops.append(GateOp("UnitaryK", order, u, noise_weight=noise_weight, label=name))
    ops.append(GateOp("Unitary1", (target,), ry(-THETA), noise_weight=noise_weight, label="Ry(-theta)"))
    ops.append(GateOp("UnitaryK", ops[2].targets, ops[2].matrix, noise_weight=noise_weight, label="FcX"))
    ops.append(GateOp("Unitary1", (target,), ry(THETA), noise_weight=noise_weight, label="Ry(theta)"))
    return ops


def rmove_op(control: int, target: int, conjugate: bool = False,
             noise_weight: float = 1.0) -> GateOp:
    if control == target:
        raise ValueError("R-move control equals target")
    ph = np.array([R_ONE, R_TAU])
    if conjugate:
        ph = ph.conj()
    return GateOp("ControlledUnitary1", (target,), np.diag(ph), ((control, 1),),
                  noise_weight=noise_weight, label="R*" if conjugate else "R")


def s_op(q: int, noise_weight: float = 1.0) -> GateOp:
    return GateOp("Unitary1", (q,), modular_s(), noise_weight=noise_weight, label="S")


def x_op(q: int, noise_weight: float = 1.0, label: str = "X") -> GateOp:
    return GateOp("Unitary1", (q,), X, noise_weight=noise_weight, label=label)


def cnot_op(control: int, target: int, noise_weight: float = 1.0) -> GateOp:
    return GateOp("ControlledUnitary1", (target,), X, ((control, 1),),
                  noise_weight=noise_weight, label="CNOT")


def tube_vectors() -> Dict[str, np.ndarray]:
    """Tube states on the two unpinned edges, indexed ``2*alpha + beta``."""
    e = cmath.exp
    pi = math.pi
    return {
        "11": np.array([1, 0, 0, PHI], dtype=complex) / D,
        "t1": np.array([0, 1, e(-4j * pi / 5), _SQ * e(3j * pi / 5)]) / D,
        "1t": np.array([0, 1, e(4j * pi / 5), _SQ * e(-3j * pi / 5)]) / D,
        "tt_1": np.array([PHI, 0, 0, -1], dtype=complex) / D,
        "tt_t": np.array([0, _SQ, _SQ, 1 / PHI], dtype=complex) / D,
    }


def charge_unitary() -> np.ndarray:
    """Basis change taking the pinned-tube states to 3D-picture product words.

    ``t1 -> |10>``, ``1t -> |01>``, ``tt_t -> |11>`` and ``|00> -> |00>``,
    built as the sum of ket-bra pairs so row ``w`` is the conjugated tube
    vector mapped to word ``w``.
    """
    tv = tube_vectors()
    u = np.zeros((4, 4), dtype=complex)
    u[0b00, 0b00] = 1.0
    u[0b10] = tv["t1"].conj()
    u[0b01] = tv["1t"].conj()
    u[0b11] = tv["tt_t"].conj()
    return u


def braid_matrices() -> Tuple[np.ndarray, np.ndarray]:
    """Logical braid generators on the three-anyon fusion space."""
    s1 = np.diag([R_ONE.conjugate(), R_TAU.conjugate()])
    s2 = np.array([[R_ONE / PHI, R_TAU / _SQ],
                   [R_TAU / _SQ, -1 / PHI]], dtype=complex)
    return s1, s2
