import numpy as np
import pytest

from fibnet import anyon
from fibnet import dsnp
from fibnet import graphnet as gn
from fibnet import statevec as sv
from fibnet.errors import CapacityError
from fibnet.fibsym import PHI


def leaked(spec, drop_tadpoles=False):
    st = sv.run(spec.circuit)
    good = gn.enumerate_valid(spec.layout, drop_tadpoles=drop_tadpoles)
    return 1 - sum(abs(st.amplitude(w)) ** 2 for w in good)


def root_ratio(spec):
    st = sv.run(spec.circuit)
    p1 = sv.prob_one(st, spec.readout[0][0])
    return p1 / (1 - p1)


def test_min_snc_probabilities():
    spec = dsnp.build_min_snc()
    st = sv.run(spec.circuit)
    for w, p in spec.expected["probabilities"].items():
        assert abs(abs(st.amplitude(w)) ** 2 - p) < 1e-10
    assert abs(spec.expected["probabilities"]["000"] - 0.0764) < 1e-4
    assert abs(spec.expected["probabilities"]["111"] - 0.3236) < 1e-4
    assert spec.circuit.count_by_label() == {"S": 2, "F3": 1}


def test_strip2_matches_min_snc():
    a, b = dsnp.build_min_snc(), dsnp.build_strip(2)
    m = a.graph.match(b.graph)
    assert m is not None
    sa, sb = sv.run(a.circuit), sv.run(b.circuit)
    qa, qb = a.layout.qubit_of_edge, b.layout.qubit_of_edge
    for w in gn.enumerate_valid(a.layout):
        wb = ["0"] * 3
        for e, q in qa.items():
            wb[qb[m[e]]] = w[q]
        assert abs(sa.amplitude(w) - sb.amplitude("".join(wb))) < 1e-12


def test_strip4_is_lattice_prefix():
    strip, lat = dsnp.build_strip(4), dsnp.build_lattice2x2()
    n = len(strip.circuit.ops)
    assert len(lat.circuit.ops) == n + 2
    for a, b in zip(strip.circuit.ops, lat.circuit.ops[:n]):
        assert a.targets == b.targets and np.allclose(a.matrix, b.matrix)
    assert strip.layout.metadata["sewing_fmove_depth_2d"] == 4


def test_strip_capacity():
    with pytest.raises(CapacityError):
        dsnp.build_strip(9)
    with pytest.raises(CapacityError):
        dsnp.build_strip(1)


BUILDERS = {
    "min_snc": dsnp.build_min_snc,
    "strip3": lambda: dsnp.build_strip(3),
    "strip5": lambda: dsnp.build_strip(5),
    "lattice2x2": dsnp.build_lattice2x2,
    "anyon_tau1": lambda: dsnp.build_anyon_pair("tau1"),
    "anyon_1tau": lambda: dsnp.build_anyon_pair("1tau"),
}


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_keep_mass_on_valid_words(name):
    assert leaked(BUILDERS[name]()) < 1e-10


def test_lattice_tadpole_mass_zero():
    assert leaked(dsnp.build_lattice2x2(), drop_tadpoles=True) < 1e-10


@pytest.mark.parametrize("anyon_", ["tau1", "1tau"])
def test_anyon_pair_pins(anyon_):
    spec = dsnp.build_anyon_pair(anyon_)
    st = sv.run(spec.circuit)
    for e in spec.layout.metadata["pinned"]:
        assert abs(sv.prob_one(st, spec.q(e)) - 1) < 1e-10


@pytest.mark.parametrize("anyon_", ["tau1", "1tau"])
@pytest.mark.parametrize("graph", ["2d", "3d"])
def test_charge_measure(anyon_, graph):
    spec = dsnp.build_charge_measure(anyon_, graph)
    st = sv.run(spec.circuit)
    want = anyon.charge_prediction(anyon_, graph)
    assert want == spec.expected["prob_one"]
    for e, p in want.items():
        assert abs(sv.prob_one(st, spec.q(e)) - p) < 1e-9


def test_charge_bad_graph():
    with pytest.raises(ValueError):
        dsnp.build_charge_measure("tau1", "4d")


def test_braid_ratio():
    spec = dsnp.build_braid()
    assert spec.circuit.n_qubits == 11
    assert abs(root_ratio(spec) - PHI) < 1e-8
    assert abs(spec.expected["ratio"] - PHI) < 1e-12


def test_braid_control():
    spec = dsnp.build_braid(control=True)
    assert abs(root_ratio(spec) - 0.328) < 1e-3
    assert sum(op.label == "Xerr" for op in spec.circuit.ops) == 2


def test_braid_without_exchange():
    spec = dsnp.build_braid(n_braids=0)
    assert root_ratio(spec) < 1e-12


def test_double_braid_follows_sigma2_squared():
    spec = dsnp.build_braid(n_braids=2)
    assert abs(root_ratio(spec) - spec.expected["ratio"]) < 1e-8


def test_sigma2_coefficients():
    a0, a1, ratio = anyon.braid_prediction("sigma2")
    assert abs(abs(a0) ** 2 - 1 / PHI ** 2) < 1e-12
    assert abs(abs(a1) ** 2 - 1 / PHI) < 1e-12
    assert abs(ratio - PHI) < 1e-12
    assert anyon.braid_prediction("sigma1")[2] == 0
