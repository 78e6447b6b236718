"""Acceptance checks, one per criterion.

Each ``check_acN`` returns ``(passed, detail)``; the matching test prints one
``AC<N> PASS|FAIL`` line and asserts.  Run the file directly to get the eight
lines without pytest.
"""
import itertools
import math
import sys

import numpy as np
import pytest

from fibnet import anyon
from fibnet import chromatic as ch
from fibnet import dsnp
from fibnet import fibsym as fs
from fibnet import graphnet as gn
from fibnet import noiselab as nl
from fibnet import statevec as sv
from fibnet.fibsym import PHI

K = PHI + 2
LAMBDAS = [1 + 0.5 * i for i in range(11)]


def ac1():
    spec = dsnp.build_min_snc()
    st = sv.run(spec.circuit)
    z = 5 * PHI ** 2
    want = {"000": 1 / z, "011": PHI ** 2 / z, "101": PHI ** 2 / z, "110": PHI ** 2 / z,
            "111": PHI ** 3 / z}
    err = max(abs(abs(st.amplitude(w)) ** 2 - p) for w, p in want.items())
    invalid = 1 - sum(abs(st.amplitude(w)) ** 2 for w in gn.enumerate_valid(spec.layout))
    analytic = np.zeros(8, dtype=complex)
    for w, p in want.items():
        analytic[sv.index_of(w)] = math.sqrt(p)
    fid = sv.fidelity(st, sv.from_amplitudes(analytic))
    ok = err < 1e-10 and abs(invalid) < 1e-10 and abs(fid - 1) < 1e-10
    return ok, f"max prob error {err:.1e}, invalid mass {abs(invalid):.1e}, fidelity-1 {fid - 1:.1e}"


def ac2():
    p2 = PHI ** 2 / (PHI ** 2 + 1)
    worst_exact, worst_pin = 0.0, 0.0
    for a, g in itertools.product(("tau1", "1tau"), ("2d", "3d")):
        spec = dsnp.build_charge_measure(a, g)
        st = sv.run(spec.circuit)
        want = anyon.charge_prediction(a, g)
        for e in ("Q1", "Q2", "Q3", "Q4"):
            worst_exact = max(worst_exact, abs(sv.prob_one(st, spec.q(e)) - want[e]))
        for e in ("Q5", "Q6", "Q7"):
            worst_pin = max(worst_pin, abs(sv.prob_one(st, spec.q(e)) - 1))
    patterns = (anyon.charge_prediction("tau1", "3d"), anyon.charge_prediction("1tau", "3d"))
    pattern_ok = ([patterns[0][e] for e in ("Q4", "Q2", "Q1", "Q3")] == [1, 1, 0, 0]
                  and [patterns[1][e] for e in ("Q4", "Q2", "Q1", "Q3")] == [0, 0, 1, 1]
                  and anyon.charge_prediction("tau1", "2d")["Q1"] == p2)
    spec = dsnp.build_charge_measure("tau1", "2d")
    model = nl.NoiseModel(p_kq=0.005, readout=[(0.02, 0.05)], seed=2024)
    qs = [spec.q(e) for e in ("Q1", "Q2", "Q3", "Q4")]
    res = nl.zne_expectations(spec.circuit, model, qs, LAMBDAS, shots=100_000, twirl=True,
                              mitigate=True, seed=2024)
    noisy = [(1 - r.extrapolated) / 2 for r in res.values()]
    dev = max(abs(p - p2) for p in noisy)
    ok = worst_exact < 1e-9 and worst_pin < 1e-10 and pattern_ok and dev < 0.04
    return ok, (f"exact error {worst_exact:.1e}, pinned error {worst_pin:.1e}, "
                f"noisy Q1-Q4 {', '.join(f'{p:.4f}' for p in noisy)} (max |dev| {dev:.4f} < 0.04)")


def ac3():
    spec = dsnp.build_braid()
    root = spec.readout[0][0]
    p1 = sv.prob_one(sv.run(spec.circuit), root)
    r_exact = p1 / (1 - p1)
    ctl = dsnp.build_braid(control=True)
    c1 = sv.prob_one(sv.run(ctl.circuit), ctl.readout[0][0])
    r_ctl = c1 / (1 - c1)
    model = nl.NoiseModel(p_kq=0.003, readout=[(0.02, 0.05)], seed=7)
    res = nl.zne_expectation(spec.circuit, model, root, LAMBDAS, shots=1_000_000, twirl=True,
                             seed=7, n_boot=1000, transform=nl.ratio)
    r_zne = nl.ratio(res.extrapolated)
    rel = abs(r_zne - PHI) / PHI
    skew = res.bootstrap.skewness
    ok = abs(r_exact - PHI) < 1e-8 and abs(r_ctl - 0.328) < 1e-3 and rel < 0.08 and skew > 0
    return ok, (f"noiseless {r_exact:.10f}, control {r_ctl:.4f}, ZNE over {len(LAMBDAS)} "
                f"stretch factors {r_zne:.4f} ({100 * rel:.2f}% off, < 8%), "
                f"bootstrap std {res.bootstrap.std:.3f} skew {skew:+.2f}")


CLASS_VALUES = {"G1": 9.4721, "G2A": 15.3262, "G2B": 24.7984, "G3A": 9.4721,
                "G3B": 24.7984, "G4": 5.8541}


def ac4():
    spec = dsnp.build_lattice2x2()
    st = sv.run(spec.circuit)
    valid = gn.enumerate_valid(spec.layout)
    classes = gn.iso_classes(spec.layout)
    p0 = abs(st.amplitude("0" * 9)) ** 2
    word_err = 0.0
    class_err = 0.0
    for c in classes:
        exact = ch.eval_poly(ch.chromatic_poly(c.dual), K)
        for w in c.members:
            word_err = max(word_err, abs(K * abs(st.amplitude(w)) ** 2 / p0 - exact))
        if c.class_id in CLASS_VALUES:
            class_err = max(class_err, abs(exact - CLASS_VALUES[c.class_id]))
    ok = (word_err < 1e-8 and class_err < 1e-3 and len(valid) == 47 and len(classes) == 7
          and sum(c.multiplicity for c in classes) == 47)
    return ok, (f"{len(valid)} valid words, {len(classes)} classes, max word error "
                f"{word_err:.1e}, max class value error {class_err:.1e}")


def ac5():
    spec = dsnp.build_lattice2x2()
    counts = sv.sample(sv.run(spec.circuit), 10_000_000, seed=20240)
    worst = {}
    phi_hat = None
    for name, fn in (("vacuum", ch.estimate_vacuum_ref), ("loop", ch.estimate_loop_ref)):
        z = 0.0
        for e in fn(counts, spec.layout):
            if e.class_id == "G0":
                continue
            z = max(z, abs(e.mean - e.exact) / e.stderr)
            if name == "vacuum" and e.class_id == "G1":
                phi_hat = math.sqrt(e.mean / K)
        worst[name] = z
    phi_rel = abs(phi_hat - PHI) / PHI
    ok = max(worst.values()) < 3 and phi_rel < 0.02
    return ok, (f"max |z| vacuum-ref {worst['vacuum']:.2f}, loop-ref {worst['loop']:.2f} (< 3); "
                f"phi estimate {phi_hat:.5f} ({100 * phi_rel:.3f}% off, < 2%)")


def ac6():
    rng = np.random.default_rng(6)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        m = int(rng.integers(0, min(14, len(pairs)) + 1))
        idx = rng.choice(len(pairs), size=m, replace=False) if m else []
        g = gn.Graph(n, tuple(pairs[i] for i in idx))
        p = ch.chromatic_poly(g)
        for k in (1, 2, 3, 4):
            mismatches += ch.eval_poly_int(p, k) != ch.coloring_oracle(g, k)
    k3 = gn.Graph(3, ((0, 1), (1, 2), (0, 2)))
    k3_ok = (ch.coloring_oracle(k3, 3) == 6 and ch.eval_poly_int(ch.chromatic_poly(k3), 3) == 6
             and ch.chromatic_poly(k3).coeffs == (0, 2, -3, 1))
    return mismatches == 0 and k3_ok, f"200 graphs x 4 k values, {mismatches} mismatches; K3 checks {k3_ok}"


def ac7():
    a, k, b = 0.8, 0.975, 0.01
    lams = np.array(LAMBDAS)
    y = a * np.exp(-k * lams) + b
    r = nl.zne_extrapolate(lams, y)
    fit_err = max(abs(r.fit[0] - a), abs(r.fit[1] - k), abs(r.fit[2] - b))
    s = np.full(lams.size, 0.005)
    yn = y + np.random.default_rng(7).standard_normal(lams.size) * s
    rn = nl.zne_extrapolate(lams, yn, s)
    boot = nl.bootstrap(lams, yn, s, 1000, seed=7)
    nsig = abs(rn.extrapolated - (a + b)) / boot.std
    p = np.random.default_rng(70).dirichlet(np.ones(16))
    pairs = [(0.02, 0.05), (0.01, 0.03), (0.04, 0.01), (0.03, 0.03)]
    noisy = nl.apply_readout(p, 4, nl.NoiseModel(readout=pairs))
    back = nl.mitigate_readout({sv.bitstring(i, 4): float(x) for i, x in enumerate(noisy)}, pairs)
    ro_err = max(abs(back[sv.bitstring(i, 4)] - p[i]) for i in range(16))
    ok = fit_err < 1e-6 and nsig < 2 and ro_err < 1e-12
    return ok, (f"noiseless (A,k,B) error {fit_err:.1e}; noisy extrapolation {nsig:.2f} "
                f"stderr from truth; readout round trip {ro_err:.1e}")


def ac8():
    rng = np.random.default_rng(8)
    # norm drift
    n = 6
    st = sv.new_zero_state(n)
    for _ in range(10_000):
        k_ = int(rng.integers(1, 4))
        qs = tuple(int(x) for x in rng.choice(n, size=k_, replace=False))
        m = rng.normal(size=(2 ** k_,) * 2) + 1j * rng.normal(size=(2 ** k_,) * 2)
        u, _ = np.linalg.qr(m)
        sv.apply(st, sv.GateOp("Unitary1" if k_ == 1 else "UnitaryK", qs, u))
    drift = abs(st.norm() - 1)
    # F-move involution on valid subspaces
    finv = 0.0
    for spec in (dsnp.build_min_snc(), dsnp.build_strip(3), dsnp.build_lattice2x2()):
        lay = spec.layout
        mask = gn.valid_mask(lay)
        for e in lay.graph.edge_ids:
            g = lay.graph.copy()
            if not g.can_fmove(e):
                continue
            legs = g.fmove(e)
            op = fs.fmove_from_legs([lay.qubit_of_edge[x] for x in legs], lay.qubit_of_edge[e])
            amps = (rng.normal(size=mask.size) + 1j * rng.normal(size=mask.size)) * mask
            psi = sv.StateVector(lay.n_qubits, amps / np.linalg.norm(amps))
            twice = sv.apply(sv.apply(psi.copy(), op), op)
            finv = max(finv, float(np.max(np.abs(twice.amps - psi.amps))))
    # branching under builders
    builders = [dsnp.build_min_snc(), dsnp.build_strip(2), dsnp.build_strip(5),
                dsnp.build_lattice2x2(), dsnp.build_anyon_pair("tau1"), dsnp.build_anyon_pair("1tau")]
    leak = 0.0
    for spec in builders:
        probs = sv.run(spec.circuit).probabilities()
        leak = max(leak, float(probs[~gn.valid_mask(spec.layout)].sum()))
    # tube basis and charge unitary
    vecs = np.array([anyon.tube_state(l).full() for l in anyon.TUBE_LABELS])
    gram = float(np.max(np.abs(vecs.conj() @ vecs.T - np.eye(len(vecs)))))
    u, tv = fs.charge_unitary(), fs.tube_vectors()
    rows = max(float(np.max(np.abs(u[w] - tv[l].conj())))
               for w, l in ((0b10, "t1"), (0b01, "1t"), (0b11, "tt_t")))
    ok = drift < 1e-8 and finv < 1e-10 and leak < 1e-10 and gram < 1e-12 and rows < 1e-12
    return ok, (f"norm drift {drift:.1e}, F involution {finv:.1e}, leaked mass {leak:.1e}, "
                f"Gram {gram:.1e}, U rows {rows:.1e}")


CHECKS = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8]


def line(i, ok, detail):
    return f"AC{i} {'PASS' if ok else 'FAIL'}: {detail}"


@pytest.mark.parametrize("i", range(1, 9))
def test_acceptance(i, capsys):
    ok, detail = CHECKS[i - 1]()
    with capsys.disabled():
        print("\n" + line(i, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [CHECKS[i - 1]() for i in range(1, 9)]
    for i, (ok, detail) in enumerate(results, 1):
        print(line(i, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
