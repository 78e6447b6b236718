"""Closed-form predictions for anyon experiments.

These never touch the circuit builders: tube states come from the fusion
basis formulas and braid outcomes from the logical generators, so they serve
as an independent check on the simulated circuits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .fibsym import PHI, braid_matrices, tube_vectors

TUBE_LABELS = ("11", "t1", "1t", "tt_1", "tt_t", "tt_1t", "tt_t1")
_PINNED = {"11": (0, 0), "t1": (1, 1), "1t": (1, 1), "tt_1": (0, 0),
           "tt_t": (1, 1), "tt_1t": (1, 0), "tt_t1": (0, 1)}


@dataclass(frozen=True)
class TubeState:
    """Tube state factorised as ``|k l> (x) vector`` with ``vector`` on ``(alpha, beta)``."""

    label: str
    vector: np.ndarray
    pinned: Tuple[int, int]

    def full(self) -> np.ndarray:
        """Four-qubit amplitudes in Kronecker order ``(k, l, alpha, beta)``."""
        k, l = self.pinned
        out = np.zeros(16, dtype=complex)
        base = (k << 3) | (l << 2)
        out[base:base + 4] = self.vector
        return out


def tube_state(label: str) -> TubeState:
    if label not in TUBE_LABELS:
        raise ValueError(f"unknown tube label {label!r}")
    tv = tube_vectors()
    if label in tv:
        vec = tv[label]
    else:
        # the two nilpotent states are single product words with alpha=beta=1
        vec = np.array([0, 0, 0, 1], dtype=complex)
    return TubeState(label, vec, _PINNED[label])


def charge_prediction(anyon: str, graph: str) -> Dict[str, float]:
    """prob_one per qubit after the charge-measurement protocol."""
    if anyon not in ("tau1", "1tau") or graph not in ("2d", "3d"):
        raise ValueError("anyon in {tau1, 1tau}, graph in {2d, 3d}")
    out = {q: 1.0 for q in ("Q5", "Q6", "Q7")}
    if graph == "2d":
        p = PHI ** 2 / (PHI ** 2 + 1)
        out.update({q: p for q in ("Q1", "Q2", "Q3", "Q4")})
    else:
        hi, lo = ("Q4", "Q2"), ("Q1", "Q3")
        if anyon == "1tau":
            hi, lo = lo, hi
        out.update({q: 1.0 for q in hi})
        out.update({q: 0.0 for q in lo})
    return dict(sorted(out.items(), key=lambda kv: int(kv[0][1:])))


def braid_prediction(gate: str, initial: int = 0) -> Tuple[complex, complex, float]:
    s1, s2 = braid_matrices()
    m = {"sigma1": s1, "sigma2": s2}[gate]
    v = m @ np.eye(2)[initial]
    a0, a1 = complex(v[0]), complex(v[1])
    ratio = abs(a1) ** 2 / abs(a0) ** 2 if abs(a0) > 0 else float("inf")
    return a0, a1, ratio
