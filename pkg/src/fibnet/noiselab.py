"""Noise injection, readout mitigation and zero-noise extrapolation.

Noisy runs are Monte Carlo trajectories over stochastic error patterns.  Each
trajectory is a pure-state run in which, after every op with
``noise_weight > 0``, a random non-identity Pauli word hits the op's support
with probability ``min(1, lam * p * noise_weight)``.  A coherent over-rotation
``Z(lam * eps)`` on the first target follows every multi-qubit op.

Amplification scales probabilities and angles by ``lam`` (no gate folding).
Readout error is not amplified.

Trajectories with the same error pattern give the same state, so patterns are
drawn first and each distinct one is simulated once, starting from the cached
noiseless state just before its first deviation.  Sampling ``shots`` words
from the trajectory mixture is the same multinomial draw as assigning shots to
trajectories first and sampling each.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, DomainError
from .statevec import Circuit, GateOp, SampleCounts, StateVector, apply, bitstring, new_zero_state

CONDITION_GUARD = 0.05


@dataclass
class NoiseModel:
    """Gate, coherent and readout error rates.

    ``readout`` lists ``(eps0, eps1) = (p(1|0), p(0|1))`` per qubit.  A single
    entry applies to every qubit; an empty list means perfect readout.
    """

    p_1q: float = 0.0
    p_kq: float = 0.0
    coherent_eps: float = 0.0
    readout: List[Tuple[float, float]] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.readout = [(float(a), float(b)) for a, b in self.readout]
        for name in ("p_1q", "p_kq"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        for e0, e1 in self.readout:
            if not (0.0 <= e0 <= 1.0 and 0.0 <= e1 <= 1.0):
                raise ValueError("readout probabilities outside [0, 1]")

    @property
    def is_zero(self) -> bool:
        return (self.p_1q == 0 and self.p_kq == 0 and self.coherent_eps == 0
                and all(e0 == 0 and e1 == 0 for e0, e1 in self.readout))

    def error_prob(self, op: GateOp, lam: float = 1.0) -> float:
        p = self.p_1q if len(op.support) == 1 else self.p_kq
        return min(1.0, lam * p * op.noise_weight)

    def readout_for(self, q: int) -> Tuple[float, float]:
        if not self.readout:
            return (0.0, 0.0)
        if len(self.readout) == 1:
            return self.readout[0]
        return self.readout[q] if q < len(self.readout) else (0.0, 0.0)

    def to_dict(self) -> dict:
        return {"p_1q": self.p_1q, "p_kq": self.p_kq, "coherent_eps": self.coherent_eps,
                "readout": [list(r) for r in self.readout], "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        known = {"p_1q", "p_kq", "coherent_eps", "readout", "seed"}
        extra = set(d) - known
        if extra:
            raise DataError(f"unknown noise model fields {sorted(extra)}")
        try:
            return cls(float(d.get("p_1q", 0.0)), float(d.get("p_kq", 0.0)),
                       float(d.get("coherent_eps", 0.0)),
                       [tuple(r) for r in d.get("readout", [])], int(d.get("seed", 0)))
        except (TypeError, ValueError) as exc:
            raise DataError(f"bad noise model: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path: str) -> "NoiseModel":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: {exc}") from exc


# --- trajectories -------------------------------------------------------------

def _pauli_word(code: int, k: int) -> List[int]:
    """Base-4 digits of ``code``, first support qubit most significant."""
    return [(code >> (2 * (k - 1 - i))) & 3 for i in range(k)]


class _Kernels:
    """Paulis and Z rotations as index gathers and phase vectors."""

    def __init__(self, n: int):
        idx = np.arange(2 ** n)
        self.flip = [idx ^ (1 << q) for q in range(n)]
        self.bit = [((idx >> q) & 1).astype(bool) for q in range(n)]

    def pauli(self, state: StateVector, q: int, d: int) -> None:
        a = state.amps
        if d == 1:
            state.amps = a[self.flip[q]]
        elif d == 2:
            state.amps = a[self.flip[q]] * np.where(self.bit[q], 1j, -1j)
        elif d == 3:
            state.amps = np.where(self.bit[q], -a, a)

    def word(self, state: StateVector, support: Sequence[int], code: int) -> None:
        for q, d in zip(support, _pauli_word(code, len(support))):
            if d:
                self.pauli(state, q, d)

    def rz(self, state: StateVector, q: int, angle: float) -> None:
        state.amps = state.amps * np.where(self.bit[q], np.exp(0.5j * angle), np.exp(-0.5j * angle))


@dataclass
class _Site:
    op_index: int
    support: Tuple[int, ...]
    prob: float
    coherent_q: Optional[int]


def _sites(circuit: Circuit, model: NoiseModel, lam: float) -> List[_Site]:
    out = []
    for i, op in enumerate(circuit.ops):
        if op.noise_weight <= 0:
            continue
        multi = len(op.support) > 1
        out.append(_Site(i, op.support, model.error_prob(op, lam),
                         op.targets[0] if multi else None))
    return out


def _draw_patterns(sites: List[_Site], n_traj: int, twirl: bool, coherent: bool,
                   rng: np.random.Generator) -> Dict[tuple, int]:
    """Error patterns with multiplicities.

    A pattern entry per site is ``(pauli_code, sign)``: ``sign`` is the
    coherent angle's sign after twirling.  Conjugating ``Z(a)`` on one qubit by
    X or Y flips the angle and I or Z keeps it; a Pauli error word is fixed up
    to a global phase by any Pauli conjugation.  So the twirl only enters
    through the sign, and is skipped when there is no coherent term.
    """
    s = len(sites)
    if s == 0:
        return {(): n_traj}
    probs = np.array([x.prob for x in sites])
    hit = rng.random((n_traj, s)) < probs
    codes = np.zeros((n_traj, s), dtype=np.int64)
    for j, x in enumerate(sites):
        k = len(x.support)
        rows = np.nonzero(hit[:, j])[0]
        codes[rows, j] = rng.integers(1, 4 ** k, size=len(rows))
    signs = np.ones((n_traj, s), dtype=np.int8)
    if twirl and coherent:
        for j, x in enumerate(sites):
            if x.coherent_q is None:
                continue
            k = len(x.support)
            tw = rng.integers(0, 4 ** k, size=n_traj)
            pos = x.support.index(x.coherent_q)
            digit = (tw >> (2 * (k - 1 - pos))) & 3
            signs[:, j] = np.where((digit == 1) | (digit == 2), -1, 1)
    rows = np.concatenate([codes, signs.astype(np.int64)], axis=1)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return {tuple(int(v) for v in r): int(c) for r, c in zip(uniq, counts)}


def trajectory_distributions(circuit: Circuit, model: NoiseModel, lam: float = 1.0,
                             n_traj: int = 10_000, twirl: bool = False,
                             seed: Optional[int] = None) -> List[Tuple[int, np.ndarray]]:
    """``(multiplicity, probabilities)`` for each distinct trajectory.

    Probabilities are before readout error.  Multiplicities sum to ``n_traj``.
    """
    if lam < 1:
        raise ValueError(f"stretch factor {lam} must be >= 1")
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    rng = np.random.default_rng(np.random.SeedSequence(model.seed if seed is None else seed))
    sites = _sites(circuit, model, lam)
    angle = lam * model.coherent_eps
    patterns = _draw_patterns(sites, n_traj, twirl, angle != 0, rng)
    site_at = {x.op_index: j for j, x in enumerate(sites)}
    s = len(sites)

    kern = _Kernels(circuit.n_qubits)

    def noise(state, j, code, sign):
        x = sites[j]
        if code:
            kern.word(state, x.support, code)
        if angle and x.coherent_q is not None:
            kern.rz(state, x.coherent_q, sign * angle)

    # noiseless-pattern states just after each op's unitary, before its noise
    pre = []
    st = new_zero_state(circuit.n_qubits)
    for i, op in enumerate(circuit.ops):
        apply(st, op)
        pre.append(st.copy())
        if i in site_at:
            noise(st, site_at[i], 0, 1)
    base = st

    out = []
    for pat, mult in patterns.items():
        codes, signs = pat[:s], pat[s:]
        dev = [j for j in range(s) if codes[j] or signs[j] != 1]
        if not dev:
            out.append((mult, base.probabilities()))
            continue
        first = sites[dev[0]].op_index
        st = pre[first].copy()
        for i in range(first, len(circuit.ops)):
            if i != first:
                apply(st, circuit.ops[i])
            j = site_at.get(i)
            if j is not None:
                noise(st, j, codes[j], signs[j])
        out.append((mult, st.probabilities()))
    return out


def apply_readout(probs: np.ndarray, n: int, model: NoiseModel) -> np.ndarray:
    """Push a full-register distribution through the per-qubit confusion model."""
    p = probs.reshape((2,) * n)
    for q in range(n):
        e0, e1 = model.readout_for(q)
        if e0 == 0 and e1 == 0:
            continue
        m = np.array([[1 - e0, e1], [e0, 1 - e1]])
        ax = n - 1 - q
        p = np.moveaxis(np.tensordot(m, p, axes=([1], [ax])), 0, ax)
    return p.reshape(-1)


def _default_traj(shots: int) -> int:
    return int(min(shots, 10_000))


def run_noisy(circuit: Circuit, model: NoiseModel, lam: float = 1.0, shots: int = 1000,
              twirl: bool = False, seed: Optional[int] = None,
              n_traj: Optional[int] = None) -> SampleCounts:
    """Sample ``shots`` words from the noisy circuit, readout errors included."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    seed = model.seed if seed is None else seed
    traj = trajectory_distributions(circuit, model, lam, n_traj or _default_traj(shots), twirl, seed)
    total = sum(m for m, _ in traj)
    p = sum(m * pr for m, pr in traj) / total
    p = apply_readout(p, circuit.n_qubits, model)
    p = np.clip(p, 0, None)
    p /= p.sum()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    draws = rng.multinomial(shots, p)
    return {bitstring(int(i), circuit.n_qubits): int(draws[i]) for i in np.nonzero(draws)[0]}


def z_of_probs(probs: np.ndarray, n: int, q: int) -> float:
    p = probs.reshape((2,) * n)
    p1 = float(np.take(p, 1, axis=n - 1 - q).sum())
    return 1.0 - 2.0 * p1 / float(p.sum())


def z_from_counts(counts: Dict[str, float], q: int) -> Tuple[float, float]:
    """``<Z>`` of qubit ``q`` and its binomial stderr."""
    n = sum(counts.values())
    if n <= 0:
        raise DataError("empty counts")
    ones = sum(c for w, c in counts.items() if w[q] == "1")
    z = 1.0 - 2.0 * ones / n
    return z, math.sqrt(max(1.0 - z * z, 0.0) / n)


def noisy_expectations(circuit: Circuit, model: NoiseModel, qubits: Sequence[int],
                       lam: float = 1.0, shots: int = 100_000, twirl: bool = False,
                       seed: Optional[int] = None,
                       n_traj: Optional[int] = None) -> Dict[int, Tuple[float, float]]:
    """Raw (readout-affected) ``<Z>`` per qubit with stderr.

    The stderr adds the finite-trajectory spread to the shot noise, since the
    trajectory mixture is itself a sample of the noise channel.
    """
    seed = model.seed if seed is None else seed
    n = circuit.n_qubits
    traj = trajectory_distributions(circuit, model, lam, n_traj or _default_traj(shots), twirl, seed)
    w = np.array([m for m, _ in traj], dtype=float)
    total = w.sum()
    p = sum(wi * pi for wi, (_, pi) in zip(w, traj)) / total
    p = np.clip(apply_readout(p, n, model), 0, None)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    draws = rng.multinomial(shots, p / p.sum())
    counts = {bitstring(int(i), n): int(draws[i]) for i in np.nonzero(draws)[0]}
    out = {}
    for q in qubits:
        z, dz = z_from_counts(counts, q)
        e0, e1 = model.readout_for(q)
        # readout maps each trajectory's <Z> affinely, scaling its spread
        zt = np.array([z_of_probs(pi, n, q) for _, pi in traj]) * (1 - e0 - e1)
        mean = float(np.dot(w, zt) / total)
        var_t = float(np.dot(w, (zt - mean) ** 2) / max(total - 1, 1))
        out[q] = (z, math.sqrt(dz ** 2 + var_t / total))
    return out


# --- readout mitigation -------------------------------------------------------

def _check_conditioning(e0: float, e1: float) -> None:
    if 1 - e0 - e1 <= CONDITION_GUARD:
        raise DataError(f"confusion matrix ill-conditioned (1 - eps0 - eps1 = {1 - e0 - e1:.3g})")


def forward_readout_z(z: float, e0: float, e1: float) -> float:
    return (1 - e0 - e1) * z + (e1 - e0)


def mitigate_readout(value: Union[float, Dict[str, float]],
                     readout: Union[Tuple[float, float], Sequence[Tuple[float, float]], NoiseModel],
                     qubits: Optional[Sequence[int]] = None):
    """Invert the confusion model.

    A float is read as ``<Z>`` of one qubit and inverted with the scalar
    formula; ``readout`` is then one ``(eps0, eps1)`` pair.  A dict of
    bitstring counts or probabilities is inverted qubit by qubit, clipped at 0
    and renormalized; the result lists every word of the register.  ``qubits``
    picks the readout entries for the string positions (default: identity).
    """
    if isinstance(value, dict):
        if not value:
            raise DataError("empty distribution")
        n = len(next(iter(value)))
        qs = list(range(n)) if qubits is None else list(qubits)
        if isinstance(readout, NoiseModel):
            pairs = [readout.readout_for(q) for q in qs]
        elif len(readout) == 2 and not isinstance(readout[0], (tuple, list)):
            pairs = [tuple(readout)] * n
        else:
            pairs = [tuple(readout[q]) for q in qs]
        total = float(sum(value.values()))
        p = np.zeros(2 ** n)
        for w, c in value.items():
            p[int(w[::-1], 2)] += c / total
        p = p.reshape((2,) * n)
        for pos, (e0, e1) in enumerate(pairs):
            if e0 == 0 and e1 == 0:
                continue
            _check_conditioning(e0, e1)
            minv = np.linalg.inv(np.array([[1 - e0, e1], [e0, 1 - e1]]))
            ax = n - 1 - pos
            p = np.moveaxis(np.tensordot(minv, p, axes=([1], [ax])), 0, ax)
        p = np.clip(p.reshape(-1), 0, None)
        p /= p.sum()
        return {bitstring(i, n): float(p[i]) for i in range(2 ** n)}
    if isinstance(readout, NoiseModel):
        e0, e1 = readout.readout_for(0 if qubits is None else qubits[0])
    else:
        e0, e1 = readout
    _check_conditioning(e0, e1)
    return (float(value) - (e1 - e0)) / (1 - e0 - e1)


# --- zero-noise extrapolation -------------------------------------------------

@dataclass
class BootstrapResult:
    samples: np.ndarray
    point: float
    std: float
    ci: Tuple[float, float]
    skewness: float
    n_failed: int = 0

    def to_dict(self) -> dict:
        return {"point": self.point, "std": self.std, "ci95": list(self.ci),
                "skewness": self.skewness, "n_samples": int(self.samples.size),
                "n_failed": self.n_failed}


@dataclass
class ZNEResult:
    lambdas: List[float]
    values: List[float]
    stderr: List[float]
    fit: Tuple[float, float, float]
    extrapolated: float
    r_squared: float
    converged: bool = True
    unmitigated: bool = False
    excluded: List[float] = field(default_factory=list)
    bootstrap: Optional[BootstrapResult] = None

    def model(self, lam):
        a, k, b = self.fit
        return a * np.exp(-k * np.asarray(lam, dtype=float)) + b

    def to_dict(self) -> dict:
        a, k, b = self.fit
        d = {"lambdas": self.lambdas, "values": self.values, "stderr": self.stderr,
             "fit": {"A": a, "k": k, "B": b}, "extrapolated": self.extrapolated,
             "r_squared": self.r_squared, "converged": self.converged,
             "unmitigated": self.unmitigated, "excluded": self.excluded}
        d["bootstrap"] = self.bootstrap.to_dict() if self.bootstrap else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _initial_guess(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    tail = max(2, len(y) // 4)
    b = float(y[-tail:].mean())
    mid = len(y) // 2
    d0, d1 = y[0] - b, y[mid] - b
    if d0 != 0 and d1 / d0 > 0 and x[mid] > x[0]:
        k = -math.log(d1 / d0) / (x[mid] - x[0])
    else:
        k = 1.0
    if not math.isfinite(k) or k <= 0:
        k = 1.0
    a = float(d0 * math.exp(k * x[0]))
    return a, k, b


def _g(k: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``(1 - exp(-k x)) / k`` and its k-derivative, continuous through k = 0."""
    if abs(k) < 1e-8:
        return x - 0.5 * k * x ** 2, -0.5 * x ** 2 + k * x ** 3 / 3
    e = np.exp(-k * x)
    g = -np.expm1(-k * x) / k
    return g, (x * e - g) / k


def _gauss_newton(x, y, w, p0, max_iter, tol):
    """Gauss-Newton with step halving.

    Works in ``(c, s, k)`` with ``A exp(-k x) + B = c + s (1 - exp(-k x)) / k``,
    ``c = A + B`` and ``s = -A k``.  Near-linear data pushes A and B off to
    infinity while c stays finite; this form keeps the problem well posed.
    """
    a0, k0, b0 = p0
    p = np.array([a0 + b0, -a0 * k0, k0], dtype=float)

    def resid(p):
        return (y - (p[0] + p[1] * _g(p[2], x)[0])) * w

    r = resid(p)
    cost = float(r @ r)
    for _ in range(max_iter):
        g, dg = _g(p[2], x)
        jac = np.column_stack([np.ones_like(x), g, p[1] * dg]) * w[:, None]
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        t = 1.0
        while t > 1e-10:
            trial = p + t * step
            rt = resid(trial)
            ct = float(rt @ rt)
            if np.all(np.isfinite(trial)) and ct <= cost:
                break
            t *= 0.5
        else:
            # no descent direction left: a stationary point
            return p, cost, True
        done = (np.max(np.abs(trial - p) / np.maximum(np.abs(trial), 1e-12)) < tol
                or cost - ct <= tol * cost)
        p, r, cost = trial, rt, ct
        if done:
            return p, cost, True
    return p, cost, False


def _abk(p) -> Tuple[float, float, float]:
    c, s, k = (float(v) for v in p)
    if k == 0:
        return float("inf") if s else 0.0, 0.0, c
    a = -s / k
    return a, k, c - a


def zne_extrapolate(lambdas: Sequence[float], values: Sequence[float],
                    stderr: Optional[Sequence[float]] = None, noise_floor: Optional[float] = None,
                    max_iter: int = 200, tol: float = 1e-10) -> ZNEResult:
    """Fit ``A exp(-k lam) + B`` and report ``A + B`` as the zero-noise value.

    Points with ``|value| < noise_floor`` are left out of the fit.  Stderr,
    when all positive, weights the residuals.  A fit that diverges returns
    the raw ``lam = 1`` value marked ``unmitigated``.
    """
    x_all = np.asarray(lambdas, dtype=float)
    y_all = np.asarray(values, dtype=float)
    s_all = np.zeros_like(y_all) if stderr is None else np.asarray(stderr, dtype=float)
    if not (x_all.shape == y_all.shape == s_all.shape):
        raise ValueError("lambdas, values and stderr differ in length")
    if len(x_all) and (abs(x_all[0] - 1) > 1e-12 or np.any(np.diff(x_all) <= 0)):
        raise ValueError("lambdas must be strictly increasing and start at 1")
    keep = np.ones(len(x_all), dtype=bool)
    if noise_floor is not None:
        keep &= np.abs(y_all) >= noise_floor
    if keep.sum() < 4:
        raise ValueError("need at least 4 stretch factors above the noise floor")
    x, y, s = x_all[keep], y_all[keep], s_all[keep]
    excluded = [float(v) for v in x_all[~keep]]
    base = dict(lambdas=[float(v) for v in x_all], values=[float(v) for v in y_all],
                stderr=[float(v) for v in s_all], excluded=excluded)
    if np.ptp(y) <= 1e-12 * max(1.0, float(np.abs(y).max())):
        m = float(y.mean())
        return ZNEResult(fit=(0.0, 0.0, m), extrapolated=m, r_squared=1.0, **base)
    w = 1.0 / s if np.all(s > 0) else np.ones_like(y)
    # trial steps at large k overflow; those are rejected by the line search
    with np.errstate(over="ignore", invalid="ignore"):
        p, _, ok = _gauss_newton(x, y, w, _initial_guess(x, y), max_iter, tol)
    if not ok or not np.all(np.isfinite(p)):
        return ZNEResult(fit=_abk(p), extrapolated=float(y_all[0]),
                         r_squared=0.0, converged=False, unmitigated=True, **base)
    fit = p[0] + p[1] * _g(p[2], x)[0]
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ZNEResult(fit=_abk(p), extrapolated=float(p[0]), r_squared=r2, **base)


def _skew(v: np.ndarray) -> float:
    sd = v.std()
    return float(np.mean((v - v.mean()) ** 3) / sd ** 3) if sd > 0 else 0.0


def bootstrap(lambdas: Sequence[float], values: Sequence[float], stderr: Sequence[float],
              n_resamples: int = 1000, seed: int = 0,
              refit: Optional[Callable[..., ZNEResult]] = None,
              transform: Optional[Callable[[float], float]] = None,
              **fit_kwargs) -> BootstrapResult:
    """Parametric bootstrap of the extrapolated value.

    Each point is redrawn from a normal with its own stderr and the fit is
    redone.  ``transform`` maps each extrapolated value (e.g. to a ratio)
    before the statistics are taken.  Resamples whose fit fails are dropped
    and counted in ``n_failed``.
    """
    if n_resamples < 100:
        raise ValueError("n_resamples must be >= 100")
    refit = refit or zne_extrapolate
    tf = transform or (lambda v: v)
    y = np.asarray(values, dtype=float)
    s = np.asarray(stderr, dtype=float)
    point = tf(refit(lambdas, y, s, **fit_kwargs).extrapolated)
    rng = np.random.default_rng(seed)
    draws = y + rng.standard_normal((n_resamples, y.size)) * s
    out, failed = [], 0
    for row in draws:
        r = refit(lambdas, row, s, **fit_kwargs)
        if r.unmitigated:
            failed += 1
            continue
        out.append(tf(r.extrapolated))
    v = np.array(out, dtype=float)
    if v.size == 0:
        return BootstrapResult(v, point, float("nan"), (float("nan"),) * 2, float("nan"), failed)
    lo, hi = np.percentile(v, [2.5, 97.5])
    return BootstrapResult(v, float(point), float(v.std(ddof=1)) if v.size > 1 else 0.0,
                           (float(lo), float(hi)), _skew(v), failed)


def transform_bootstrap(b: BootstrapResult, f: Callable[[float], float]) -> BootstrapResult:
    """The same resamples pushed through ``f``."""
    v = np.array([f(x) for x in b.samples], dtype=float)
    if v.size == 0:
        return BootstrapResult(v, f(b.point), float("nan"), (float("nan"),) * 2, float("nan"), b.n_failed)
    lo, hi = np.percentile(v, [2.5, 97.5])
    return BootstrapResult(v, float(f(b.point)), float(v.std(ddof=1)) if v.size > 1 else 0.0,
                           (float(lo), float(hi)), _skew(v), b.n_failed)


def propagate_ratio_error(z: float, dz: float) -> Tuple[float, float]:
    """``r = (1 - z) / (1 + z)`` and its first-order error ``2 dz / (1 + z)^2``."""
    if z == -1:
        raise DomainError("ratio undefined at z = -1")
    return (1 - z) / (1 + z), 2 * abs(dz) / (1 + z) ** 2


def ratio(z: float) -> float:
    return propagate_ratio_error(z, 0.0)[0]


def zne_expectations(circuit: Circuit, model: NoiseModel, qubits: Sequence[int],
                     lambdas: Sequence[float], shots: int = 100_000, twirl: bool = True,
                     mitigate: bool = True, seed: Optional[int] = None,
                     n_traj: Optional[int] = None, noise_floor: Optional[float] = None,
                     n_boot: int = 0, transform=None) -> Dict[int, ZNEResult]:
    """Twirled, readout-mitigated ``<Z>`` per stretch factor, extrapolated to 0.

    One noisy run per stretch factor serves every qubit.  Each stretch factor
    gets its own seed stream.  With ``n_boot`` each result carries a bootstrap
    of the (transformed) extrapolated value.
    """
    seed = model.seed if seed is None else seed
    zs = {q: [] for q in qubits}
    ss = {q: [] for q in qubits}
    for i, lam in enumerate(lambdas):
        got = noisy_expectations(circuit, model, qubits, lam, shots, twirl,
                                 seed=seed * 1000 + i, n_traj=n_traj)
        for q in qubits:
            z, dz = got[q]
            e0, e1 = model.readout_for(q)
            if mitigate and (e0 or e1):
                z = mitigate_readout(z, (e0, e1))
                dz = dz / (1 - e0 - e1)
            zs[q].append(z)
            ss[q].append(dz)
    out = {}
    for q in qubits:
        res = zne_extrapolate(lambdas, zs[q], ss[q], noise_floor=noise_floor)
        if n_boot:
            res.bootstrap = bootstrap(lambdas, zs[q], ss[q], n_boot, seed, transform=transform,
                                      noise_floor=noise_floor)
        out[q] = res
    return out


def zne_expectation(circuit: Circuit, model: NoiseModel, qubit: int,
                    lambdas: Sequence[float], **kwargs) -> ZNEResult:
    return zne_expectations(circuit, model, [qubit], lambdas, **kwargs)[qubit]
