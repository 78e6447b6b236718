"""Dense statevector engine.

Basis convention: basis index ``b`` holds qubit ``i`` at bit ``i`` (qubit 0 is
the least significant bit).  Textual bitstrings render qubit 0 leftmost, so
``"100"`` is the state with only qubit 0 set.

Gate matrices act on their ``targets`` in Kronecker order: for targets
``(t0, t1, ..., tk-1)`` the matrix row index is ``sum(bit(t_i) << (k-1-i))``,
i.e. ``t0`` is the most significant factor, as in ``np.kron(A_t0, A_t1)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, DataError

MAX_QUBITS = 26
UNITARY_TOL = 1e-10

KINDS = ("Unitary1", "ControlledUnitary1", "UnitaryK", "NoiseMarker")

SampleCounts = Dict[str, int]


@dataclass
class StateVector:
    """Amplitudes of an ``n_qubits`` register, stored as a flat complex array."""

    n_qubits: int
    amps: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def amplitude(self, bits: str) -> complex:
        return complex(self.amps[index_of(bits)])

    def to_json(self) -> str:
        return json.dumps(
            {"n_qubits": self.n_qubits,
             "amps": [[float(a.real), float(a.imag)] for a in self.amps]})

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        obj = json.loads(text)
        n = int(obj["n_qubits"])
        amps = np.array([complex(re, im) for re, im in obj["amps"]])
        if amps.size != 2 ** n:
            raise DataError("amplitude count does not match n_qubits")
        return cls(n, amps)


@dataclass
class GateOp:
    """One circuit instruction.

    ``controls`` is a tuple of ``(qubit, required_bit)``.  ``noise_weight``
    scales the error probability noiselab attaches after the op; 0 marks an
    op as noiseless.  A ``NoiseMarker`` applies no unitary and exists only as
    an error insertion point.
    """

    kind: str
    targets: Tuple[int, ...]
    matrix: Optional[np.ndarray] = None
    controls: Tuple[Tuple[int, int], ...] = ()
    noise_weight: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        self.targets = tuple(int(t) for t in self.targets)
        self.controls = tuple((int(q), int(b)) for q, b in self.controls)
        k = len(self.targets)
        if len(set(self.targets)) != k:
            raise ValueError("duplicate target qubits")
        if set(q for q, _ in self.controls) & set(self.targets):
            raise ValueError("control qubits overlap targets")
        if self.noise_weight < 0:
            raise ValueError("noise_weight must be nonnegative")
        if self.kind == "NoiseMarker":
            self.matrix = np.eye(2 ** k, dtype=complex)
            return
        if self.kind in ("Unitary1", "ControlledUnitary1") and k != 1:
            raise ValueError(f"{self.kind} takes exactly one target")
        if self.kind == "ControlledUnitary1" and not self.controls:
            raise ValueError("ControlledUnitary1 needs at least one control")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2 ** k, 2 ** k):
            raise ValueError(f"matrix shape {m.shape} does not fit {k} targets")
        if np.max(np.abs(m.conj().T @ m - np.eye(2 ** k))) > UNITARY_TOL:
            raise ValueError("matrix is not unitary")
        self.matrix = m

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(q for q, _ in self.controls) + self.targets

    def inverse(self) -> "GateOp":
        return GateOp(self.kind, self.targets, self.matrix.conj().T,
                      self.controls, self.noise_weight, self.label + "^-1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "targets": list(self.targets),
                "controls": [list(c) for c in self.controls],
                "matrix": [[[float(z.real), float(z.imag)] for z in row]
                           for row in self.matrix],
                "noise_weight": self.noise_weight, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "GateOp":
        m = np.array([[complex(re, im) for re, im in row] for row in d["matrix"]])
        return cls(d["kind"], tuple(d["targets"]), m,
                   tuple(tuple(c) for c in d.get("controls", [])),
                   d.get("noise_weight", 1.0), d.get("label", ""))


@dataclass
class Circuit:
    n_qubits: int
    ops: List[GateOp] = field(default_factory=list)
    name: str = ""
    roles: Dict[int, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def append(self, op: GateOp) -> GateOp:
        for q in op.support:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")
        self.ops.append(op)
        return op

    def extend(self, ops: Iterable[GateOp]) -> None:
        for op in ops:
            self.append(op)

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.ops), self.name,
                       dict(self.roles), dict(self.metadata))

    def count_by_label(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for op in self.ops:
            key = op.label.split("(")[0] or op.kind
            out[key] = out.get(key, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {"name": self.name, "n_qubits": self.n_qubits,
                "roles": {str(k): v for k, v in self.roles.items()},
                "metadata": self.metadata,
                "ops": [op.to_dict() for op in self.ops]}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        c = cls(int(d["n_qubits"]), name=d.get("name", ""),
                roles={int(k): v for k, v in d.get("roles", {}).items()},
                metadata=d.get("metadata", {}))
        c.extend(GateOp.from_dict(o) for o in d["ops"])
        return c


def new_zero_state(n: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count {n} outside 1..{MAX_QUBITS}")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def basis_state(bits: str) -> StateVector:
    """Computational basis state from a qubit-0-leftmost bitstring."""
    s = new_zero_state(len(bits))
    s.amps[0] = 0.0
    s.amps[index_of(bits)] = 1.0
    return s


def from_amplitudes(amps: Sequence[complex]) -> StateVector:
    a = np.asarray(amps, dtype=complex)
    n = int(round(np.log2(a.size)))
    if 2 ** n != a.size:
        raise DataError("amplitude count is not a power of two")
    return StateVector(n, a / np.linalg.norm(a))


def index_of(bits: str) -> int:
    return sum(1 << q for q, c in enumerate(bits) if c == "1")


def bitstring(index: int, n: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


def _axis(n: int, q: int) -> int:
    # reshape((2,)*n) puts the most significant bit on axis 0
    return n - 1 - q


def apply(state: StateVector, op: GateOp) -> StateVector:
    """Apply ``op`` in place and return the state."""
    n = state.n_qubits
    for q in op.support:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    if op.kind == "NoiseMarker":
        return state
    k = len(op.targets)
    psi = state.amps.reshape((2,) * n)
    idx = [slice(None)] * n
    for q, b in op.controls:
        idx[_axis(n, q)] = b
    removed = sorted(_axis(n, q) for q, _ in op.controls)
    axes = [a - sum(r < a for r in removed) for a in (_axis(n, t) for t in op.targets)]
    sub = psi[tuple(idx)] if op.controls else psi
    u = op.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(u, sub, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    if op.controls:
        psi[tuple(idx)] = out
    else:
        state.amps = out.reshape(-1)
    return state


def run(circuit: Circuit, state: Optional[StateVector] = None) -> StateVector:
    """Run a circuit noiselessly, starting from ``|0...0>`` unless given a state."""
    s = new_zero_state(circuit.n_qubits) if state is None else state.copy()
    for op in circuit.ops:
        apply(s, op)
    return s


def prob_one(state: StateVector, q: int) -> float:
    if not 0 <= q < state.n_qubits:
        raise IndexError(f"qubit {q} out of range")
    p = state.probabilities().reshape((2,) * state.n_qubits)
    return float(np.take(p, 1, axis=_axis(state.n_qubits, q)).sum())


def marginal(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Joint distribution of ``qubits``, indexed in Kronecker order of the list."""
    n = state.n_qubits
    p = state.probabilities().reshape((2,) * n)
    keep = [_axis(n, q) for q in qubits]
    rest = tuple(a for a in range(n) if a not in keep)
    p = p.sum(axis=rest)
    order = sorted(keep)
    return np.transpose(p, [order.index(a) for a in keep]).reshape(-1)


def sample(state: StateVector, shots: int, seed: Optional[int] = None) -> SampleCounts:
    """Multinomial draw of ``shots`` bitstrings from ``|amps|^2``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = state.probabilities()
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    nz = np.nonzero(draws)[0]
    return {bitstring(int(i), state.n_qubits): int(draws[i]) for i in nz}


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n_qubits != b.n_qubits:
        raise DataError("fidelity of states with different qubit counts")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def embed(op: GateOp, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of ``op``; a slow reference used by tests."""
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for b in range(2 ** n):
        s = StateVector(n, np.eye(2 ** n, dtype=complex)[b])
        out[:, b] = apply(s, op).amps
    return out
