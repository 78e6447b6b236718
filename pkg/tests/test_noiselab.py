import json
import math

import numpy as np
import pytest

from fibnet import dsnp
from fibnet import graphnet as gn
from fibnet import noiselab as nl
from fibnet import statevec as sv
from fibnet.errors import DataError, DomainError
from fibnet.fibsym import PHI

A, K, B = 0.8, 0.975, 0.01
LAMS = np.arange(1, 6.01, 0.5)


def synth(lams=LAMS):
    return A * np.exp(-K * lams) + B


# --- noise model --------------------------------------------------------------

def test_model_json_roundtrip(tmp_path):
    m = nl.NoiseModel(p_1q=0.001, p_kq=0.005, coherent_eps=0.02, readout=[(0.02, 0.05)], seed=7)
    path = tmp_path / "noise.json"
    path.write_text(m.to_json())
    assert nl.NoiseModel.load(str(path)) == m
    with pytest.raises(DataError):
        nl.NoiseModel.from_dict({"p_kq": 0.1, "depolarizing": 0.2})
    with pytest.raises(ValueError):
        nl.NoiseModel(p_kq=1.5)


def test_scaling_rule():
    op = dsnp.build_min_snc().circuit.ops[-1]
    assert len(op.support) == 3
    m = nl.NoiseModel(p_kq=0.005)
    assert math.isclose(m.error_prob(op, 2.0), 0.01)
    assert m.error_prob(op, 1e6) == 1.0


def test_readout_broadcast():
    m = nl.NoiseModel(readout=[(0.01, 0.02)])
    assert m.readout_for(5) == (0.01, 0.02)
    assert nl.NoiseModel().readout_for(0) == (0.0, 0.0)


def test_zero_model_matches_noiseless():
    spec = dsnp.build_lattice2x2()
    exact = sv.run(spec.circuit).probabilities()
    traj = nl.trajectory_distributions(spec.circuit, nl.NoiseModel(), 3.0, n_traj=50, seed=1)
    assert len(traj) == 1 and traj[0][0] == 50
    assert np.allclose(traj[0][1], exact, atol=1e-14)
    counts = nl.run_noisy(spec.circuit, nl.NoiseModel(), 2.0, shots=20000, seed=4)
    assert sum(counts.values()) == 20000
    valid = set(gn.enumerate_valid(spec.layout))
    assert set(counts) <= valid


def test_lambda_below_one():
    c = dsnp.build_min_snc().circuit
    with pytest.raises(ValueError):
        nl.run_noisy(c, nl.NoiseModel(p_kq=0.01), lam=0.5)


def test_run_noisy_deterministic():
    c = dsnp.build_min_snc().circuit
    m = nl.NoiseModel(p_kq=0.05, coherent_eps=0.1, readout=[(0.02, 0.05)])
    assert nl.run_noisy(c, m, 2, 5000, twirl=True, seed=9) == nl.run_noisy(c, m, 2, 5000, twirl=True, seed=9)


def test_noise_leaks_out_of_valid_subspace():
    spec = dsnp.build_min_snc()
    counts = nl.run_noisy(spec.circuit, nl.NoiseModel(p_kq=0.2), 1.0, 20000, seed=2)
    bad = sum(c for w, c in counts.items() if not gn.validate_branching(spec.layout, w))
    assert bad > 0


@pytest.mark.parametrize("name", ["charge", "lattice"])
def test_pauli_noise_decay_rate_positive(name):
    spec = dsnp.build_charge_measure("tau1", "2d") if name == "charge" else dsnp.build_lattice2x2()
    m = nl.NoiseModel(p_1q=0.012, p_kq=0.06)
    qs = [q for q, _ in spec.readout]
    res = nl.zne_expectations(spec.circuit, m, qs, list(range(1, 9)), shots=10 ** 6,
                              twirl=False, seed=0, n_traj=5000)
    for r in res.values():
        assert r.fit[1] > 0
        assert abs(r.values[-1]) < abs(r.values[0])


def test_twirl_improves_exponential_fit():
    spec = dsnp.build_braid()
    root = spec.readout[0][0]
    m = nl.NoiseModel(coherent_eps=0.4)
    lams = [1, 2, 3, 4, 5, 6]
    r2 = {}
    for tw in (False, True):
        zs = [nl.noisy_expectations(spec.circuit, m, [root], lam, 10 ** 6, tw, seed=5, n_traj=3000)[root][0]
              for lam in lams]
        r2[tw] = nl.zne_extrapolate(lams, zs).r_squared
    assert r2[True] >= r2[False]


def test_zero_noise_pipeline_unbiased():
    spec = dsnp.build_charge_measure("tau1", "2d")
    q = spec.q("Q1")
    r = nl.zne_expectation(spec.circuit, nl.NoiseModel(), q, [1, 2, 3, 4, 5, 6], shots=200000,
                           seed=1, n_boot=300)
    want = 1 - 2 * PHI ** 2 / (PHI ** 2 + 1)
    # every point is an unbiased shot-noise sample; the fit amplifies that
    # noise, so the tolerance is the bootstrap spread of the extrapolation
    assert all(abs(v - want) < 4 * s for v, s in zip(r.values, r.stderr))
    assert abs(r.extrapolated - want) < 2 * r.bootstrap.std


# --- readout ------------------------------------------------------------------

def test_readout_identity():
    assert nl.mitigate_readout(0.3, (0.0, 0.0)) == 0.3


def test_readout_scalar_roundtrip():
    zp = nl.forward_readout_z(1.0, 0.02, 0.05)
    assert abs(zp - 0.96) < 1e-15
    assert abs(nl.mitigate_readout(zp, (0.02, 0.05)) - 1.0) < 1e-12


def test_readout_distribution():
    out = nl.mitigate_readout({"0": 0.97, "1": 0.03}, (0.03, 0.0))
    assert abs(out["0"] - 1.0) < 1e-12 and abs(out["1"]) < 1e-12


def test_readout_inverts_forward_model_on_distribution():
    spec = dsnp.build_min_snc()
    p = sv.run(spec.circuit).probabilities()
    m = nl.NoiseModel(readout=[(0.02, 0.05), (0.01, 0.03), (0.04, 0.02)])
    noisy = nl.apply_readout(p, 3, m)
    back = nl.mitigate_readout({sv.bitstring(i, 3): float(x) for i, x in enumerate(noisy)}, m)
    assert max(abs(back[sv.bitstring(i, 3)] - p[i]) for i in range(8)) < 1e-12


def test_readout_clips_negative():
    out = nl.mitigate_readout({"0": 1.0}, (0.0, 0.1))
    assert out["1"] == 0.0 and out["0"] == 1.0


def test_readout_conditioning_guard():
    with pytest.raises(DataError):
        nl.mitigate_readout(0.1, (0.5, 0.48))


# --- extrapolation ------------------------------------------------------------

def test_zne_recovers_noiseless():
    r = nl.zne_extrapolate(LAMS, synth())
    a, k, b = r.fit
    assert max(abs(a - A), abs(k - K), abs(b - B)) < 1e-6
    assert abs(r.extrapolated - (A + B)) < 1e-6
    assert r.converged and not r.unmitigated and r.r_squared > 1 - 1e-12


def test_zne_noisy_within_two_sigma():
    rng = np.random.default_rng(11)
    s = np.full(LAMS.size, 0.005)
    y = synth() + rng.standard_normal(LAMS.size) * s
    r = nl.zne_extrapolate(LAMS, y, s)
    b = nl.bootstrap(LAMS, y, s, 500, seed=3)
    assert abs(r.extrapolated - (A + B)) < 2 * b.std


def test_zne_two_sigma_coverage():
    rng = np.random.default_rng(12)
    s = np.full(LAMS.size, 0.005)
    hits = 0
    for _ in range(40):
        y = synth() + rng.standard_normal(LAMS.size) * s
        r = nl.zne_extrapolate(LAMS, y, s)
        b = nl.bootstrap(LAMS, y, s, 200, seed=int(rng.integers(1 << 30)))
        hits += abs(r.extrapolated - (A + B)) < 2 * b.std
    assert hits >= 34


def test_zne_constant():
    r = nl.zne_extrapolate([1, 2, 3, 4], [0.4] * 4)
    assert r.extrapolated == 0.4 and r.fit == (0.0, 0.0, 0.4)


def test_zne_noise_floor_and_preconditions():
    y = list(synth()[:6]) + [0.001] * 5
    r = nl.zne_extrapolate(LAMS, y, noise_floor=0.02)
    assert len(r.excluded) == 5
    assert abs(r.extrapolated - (A + B)) < 1e-6
    with pytest.raises(ValueError):
        nl.zne_extrapolate([1, 2, 3], [0.5, 0.4, 0.3])
    with pytest.raises(ValueError):
        nl.zne_extrapolate([1, 3, 2, 4], [0.5, 0.4, 0.3, 0.2])


def test_zne_json():
    r = nl.zne_extrapolate(LAMS, synth())
    d = json.loads(r.to_json())
    assert set(d["fit"]) == {"A", "k", "B"} and d["extrapolated"] == r.extrapolated


# --- bootstrap and ratios -------------------------------------------------------

def test_bootstrap_zero_stderr():
    b = nl.bootstrap(LAMS, synth(), np.zeros(LAMS.size), 100)
    assert b.std < 1e-9 and np.allclose(b.samples, A + B, atol=1e-9)


def test_bootstrap_deterministic_and_monotone():
    s = np.full(LAMS.size, 0.004)
    b1 = nl.bootstrap(LAMS, synth(), s, 300, seed=5)
    again = nl.bootstrap(LAMS, synth(), s, 300, seed=5)
    b2 = nl.bootstrap(LAMS, synth(), 2 * s, 300, seed=5)
    assert np.array_equal(b1.samples, again.samples)
    assert b2.std / b1.std > 1
    with pytest.raises(ValueError):
        nl.bootstrap(LAMS, synth(), s, 50)


def test_ratio_bootstrap_positive_skew():
    lams = np.arange(1, 6.01, 0.5)
    z0 = 1 - 2 * PHI / (1 + PHI)
    y = (z0 - 0.1) * np.exp(-0.3 * lams) + 0.1
    b = nl.bootstrap(lams, y, np.full(lams.size, 0.01), 1000, seed=2, transform=nl.ratio)
    assert abs(b.point - PHI) < 1e-6
    assert b.skewness > 0


def test_propagate_ratio_error():
    assert abs(nl.ratio(-0.24) - 1.631578947) < 1e-6
    assert nl.propagate_ratio_error(0.0, 0.01) == (1.0, 0.02)
    assert abs(nl.propagate_ratio_error(0.5, 0.01)[1] - 0.0088889) < 1e-6
    with pytest.raises(DomainError):
        nl.propagate_ratio_error(-1.0, 0.1)


def test_braid_zne_within_five_percent():
    spec = dsnp.build_braid()
    root = spec.readout[0][0]
    model = nl.NoiseModel(p_kq=0.003, seed=3)
    r = nl.zne_expectation(spec.circuit, model, root, list(LAMS), shots=10 ** 6, seed=3)
    assert r.converged and not r.unmitigated
    assert abs(nl.ratio(r.extrapolated) - PHI) / PHI < 0.05
