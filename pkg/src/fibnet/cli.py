"""``fibnet`` command line.

Every command writes JSON (``estimate`` can also write CSV) to ``--out`` or
stdout.  Exit codes: 0 success, 2 usage, 3 data or estimator error,
4 capacity.  ``FIBNET_SEED`` sets the default seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import chromatic as ch
from . import dsnp, noiselab as nl, statevec as sv
from .errors import CapacityError, DataError, DomainError
from .graphnet import graph_from_json

EXIT_USAGE, EXIT_DATA, EXIT_CAPACITY = 2, 3, 4
STATE_DUMP_MAX = 14
DEFAULT_LAMBDAS = "1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6"

LAYOUT_HELP = ("min3, two_plaquette, strip:N (2..8), lattice2x2, anyon_pair:tau1|1tau, "
               "charge:tau1|1tau:2d|3d, braid, braid_control")


class UsageError(Exception):
    pass


def build_layout(name: str) -> dsnp.ExperimentSpec:
    """Experiment for a layout name; unknown names raise UsageError."""
    if name == "min3":
        return dsnp.build_min_snc()
    if name == "two_plaquette":
        return dsnp.build_strip(2)
    if name == "lattice2x2":
        return dsnp.build_lattice2x2()
    if name == "braid":
        return dsnp.build_braid()
    if name == "braid_control":
        return dsnp.build_braid(control=True)
    m = re.fullmatch(r"strip[:(](\d+)\)?", name)
    if m:
        return dsnp.build_strip(int(m.group(1)))
    m = re.fullmatch(r"anyon_pair:(tau1|1tau)", name)
    if m:
        return dsnp.build_anyon_pair(m.group(1))
    m = re.fullmatch(r"charge:(tau1|1tau):(2d|3d)", name)
    if m:
        return dsnp.build_charge_measure(m.group(1), m.group(2))
    raise UsageError(f"unknown layout {name!r}; choose from {LAYOUT_HELP}")


def _default_seed() -> int:
    raw = os.environ.get("FIBNET_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"FIBNET_SEED={raw!r} is not an integer")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _emit(obj, out: Optional[str], text: Optional[str] = None) -> None:
    body = text if text is not None else json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _lambdas(text: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --lambdas {text!r}")
    return vals


def _noise(path: Optional[str]) -> Optional[nl.NoiseModel]:
    if not path:
        return None
    return nl.NoiseModel.from_dict(_read_json(path))


def _ancillas(spec: dsnp.ExperimentSpec) -> List[int]:
    used = set(spec.layout.qubit_of_edge.values())
    return [q for q in range(spec.circuit.n_qubits) if q not in used]


# --- commands -------------------------------------------------------------------

def cmd_prepare(args) -> None:
    spec = build_layout(args.layout)
    out = {"experiment": spec.name, "layout": spec.layout.to_dict(),
           "circuit": spec.circuit.to_dict(),
           "readout": [[q, role] for q, role in spec.readout],
           "expected": spec.expected}
    if spec.circuit.n_qubits <= STATE_DUMP_MAX:
        st = sv.run(spec.circuit)
        out["state"] = {"n_qubits": st.n_qubits,
                        "amps": [[float(a.real), float(a.imag)] for a in st.amps]}
    _emit(out, args.out)


def cmd_sample(args) -> None:
    spec = build_layout(args.layout)
    seed = args.seed
    model = _noise(args.noise)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    if model is None:
        if args.lam != 1.0:
            raise UsageError("--lambda needs --noise")
        counts = sv.sample(sv.run(spec.circuit), args.shots, seed)
    else:
        counts = nl.run_noisy(spec.circuit, model, args.lam, args.shots, args.twirl, seed)
    anc = _ancillas(spec)
    _, invalid = ch.filter_invalid(counts, spec.layout, anc)
    out: Dict[str, object] = dict(sorted(counts.items()))
    out.update({"n_qubits": spec.circuit.n_qubits, "ancilla_qubits": anc,
                "layout": args.layout, "shots": args.shots, "seed": seed,
                "lambda": args.lam, "invalid_mass": invalid})
    _emit(out, args.out)


def read_counts(obj: dict) -> Dict[str, int]:
    words = {k: v for k, v in obj.items() if re.fullmatch(r"[01]+", k)}
    if not words:
        raise DataError("counts file holds no bitstrings")
    if len({len(w) for w in words}) != 1:
        raise DataError("bitstrings of mixed length")
    for w, c in words.items():
        if not isinstance(c, (int, float)) or c < 0:
            raise DataError(f"bad count for {w!r}")
    return words


def cmd_estimate(args) -> None:
    spec = build_layout(args.layout)
    obj = _read_json(args.counts)
    counts = read_counts(obj)
    anc = obj.get("ancilla_qubits", _ancillas(spec))
    n = len(next(iter(counts)))
    if n - len(anc) != spec.layout.n_qubits:
        raise DataError(f"{n}-bit words do not fit layout {args.layout!r}")
    if anc:
        merged: Dict[str, float] = {}
        for w, c in counts.items():
            k = "".join(b for i, b in enumerate(w) if i not in set(anc))
            merged[k] = merged.get(k, 0) + c
        counts = merged
    fn = ch.estimate_vacuum_ref if args.method == "vacuum" else ch.estimate_loop_ref
    rows = [e.to_dict() for e in fn(counts, spec.layout)]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["class", "multiplicity", "mean", "stderr",
                                            "exact", "relative_error"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _emit(None, args.out, buf.getvalue())
    else:
        _emit({"method": args.method, "layout": args.layout, "estimates": rows}, args.out)


def cmd_charge(args) -> None:
    spec = build_layout(f"charge:{args.anyon}:{args.graph}")
    names = {q: role for q, role in spec.readout}
    expected = spec.expected["prob_one"]
    model = _noise(args.noise)
    out = {"experiment": spec.name, "expected_prob_one": expected}
    if model is None:
        st = sv.run(spec.circuit)
        out["prob_one"] = {names[q]: sv.prob_one(st, q) for q in sorted(names)}
        _emit(out, args.out)
        return
    qs = sorted(names)
    lams = _lambdas(args.lambdas) if args.zne else [1.0]
    if args.zne:
        res = nl.zne_expectations(spec.circuit, model, qs, lams, args.shots, args.twirl,
                                  seed=args.seed)
        out["prob_one"] = {names[q]: (1 - r.extrapolated) / 2 for q, r in res.items()}
        out["zne"] = {names[q]: r.to_dict() for q, r in res.items()}
    else:
        raw = nl.noisy_expectations(spec.circuit, model, qs, 1.0, args.shots, args.twirl,
                                    seed=args.seed)
        out["prob_one"] = {}
        for q in qs:
            z, _ = raw[q]
            e0, e1 = model.readout_for(q)
            if e0 or e1:
                z = nl.mitigate_readout(z, (e0, e1))
            out["prob_one"][names[q]] = (1 - z) / 2
    out["noise"] = model.to_dict()
    _emit(out, args.out)


def cmd_braid(args) -> None:
    spec = dsnp.build_braid(control=args.control, n_braids=args.n_braids)
    root = spec.readout[0][0]
    model = _noise(args.noise)
    out = {"experiment": spec.name, "root_qubit": root, "expected_ratio": spec.expected["ratio"]}
    st = sv.run(spec.circuit)
    p1 = sv.prob_one(st, root)
    out["noiseless_ratio"] = p1 / (1 - p1) if p1 < 1 else float("inf")
    if model is None:
        out["ratio"] = out["noiseless_ratio"]
        _emit(out, args.out)
        return
    if args.bootstrap and args.bootstrap < 100:
        raise UsageError("--bootstrap needs 0 or at least 100 resamples")
    lams = _lambdas(args.lambdas)
    res = nl.zne_expectation(spec.circuit, model, root, lams, shots=args.shots,
                             twirl=args.twirl, seed=args.seed, n_boot=args.bootstrap)
    dz = res.bootstrap.std if res.bootstrap else 0.0
    r, dr = nl.propagate_ratio_error(res.extrapolated, dz)
    out.update({"ratio": r, "ratio_stderr": dr, "z_extrapolated": res.extrapolated,
                "z_stderr": dz, "unmitigated": res.unmitigated, "zne": res.to_dict(),
                "noise": model.to_dict()})
    if res.bootstrap is not None:
        out["ratio_bootstrap"] = nl.transform_bootstrap(res.bootstrap, nl.ratio).to_dict()
    _emit(out, args.out)


def _parse_k(text: str) -> float:
    if text == "golden":
        return ch.GOLDEN_K
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--k takes a number or 'golden', not {text!r}")


def cmd_chromatic(args) -> None:
    g = graph_from_json(_read_json(args.graph))
    k = _parse_k(args.k)
    p = ch.chromatic_poly(g)
    _emit({"n_vertices": g.n, "n_edges": len(g.edges), "coefficients": list(p.coeffs),
           "polynomial": str(p), "k": args.k, "k_value": k, "value": ch.eval_poly(p, k)},
          args.out)


def cmd_oracle(args) -> None:
    g = graph_from_json(_read_json(args.graph))
    if args.k_int < 0:
        raise UsageError("--k-int must be >= 0")
    brute = ch.coloring_oracle(g, args.k_int)
    dc = ch.eval_poly_int(ch.chromatic_poly(g), args.k_int)
    _emit({"k": args.k_int, "brute_force": brute, "deletion_contraction": dc,
           "equal": brute == dc}, args.out)


# --- parser ---------------------------------------------------------------------

class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults only where they carry information."""

    def _get_help_string(self, action):
        if action.default is None or isinstance(action.default, bool):
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    p = argparse.ArgumentParser(prog="fibnet", formatter_class=fmt,
                                description="Fibonacci string-net experiments on a statevector simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--out", help="output file; stdout when omitted")
        if seed:
            sp.add_argument("--seed", type=int, default=None,
                            help="RNG seed; $FIBNET_SEED or 0 when omitted")

    sp = sub.add_parser("prepare", formatter_class=fmt, help="dump a circuit (and small states)")
    sp.add_argument("--layout", required=True, help=LAYOUT_HELP)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_prepare)

    sp = sub.add_parser("sample", formatter_class=fmt, help="sample bitstrings")
    sp.add_argument("--layout", required=True, help=LAYOUT_HELP)
    sp.add_argument("--shots", type=int, default=100_000)
    sp.add_argument("--noise", help="noise model JSON file")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0, help="noise stretch factor")
    sp.add_argument("--twirl", action="store_true", help="twirl noise insertion points")
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("estimate", formatter_class=fmt, help="chromatic estimates from counts")
    sp.add_argument("--counts", required=True, help="counts JSON from 'sample'")
    sp.add_argument("--layout", required=True, help=LAYOUT_HELP)
    sp.add_argument("--method", choices=("vacuum", "loop"), default="vacuum")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_estimate)

    def zne_flags(sp):
        sp.add_argument("--noise", help="noise model JSON file; omit for exact noiseless output")
        sp.add_argument("--shots", type=int, default=100_000, help="shots per stretch factor")
        sp.add_argument("--lambdas", default=DEFAULT_LAMBDAS, help="comma-separated stretch factors")
        sp.add_argument("--no-twirl", dest="twirl", action="store_false",
                        help="leave noise insertion points untwirled")

    sp = sub.add_parser("charge", formatter_class=fmt, help="anyon charge certification")
    sp.add_argument("--anyon", choices=("tau1", "1tau"), default="tau1")
    sp.add_argument("--graph", choices=("2d", "3d"), default="2d")
    zne_flags(sp)
    sp.add_argument("--zne", action="store_true", help="extrapolate to zero noise")
    common(sp)
    sp.set_defaults(func=cmd_charge)

    sp = sub.add_parser("braid", formatter_class=fmt, help="exchange anyons, read the root edge")
    sp.add_argument("--control", action="store_true", help="insert the two X errors")
    sp.add_argument("--n-braids", type=int, default=1, help="number of exchanges")
    zne_flags(sp)
    sp.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples (0 to skip)")
    common(sp)
    sp.set_defaults(func=cmd_braid)

    sp = sub.add_parser("chromatic", formatter_class=fmt, help="chromatic polynomial of a graph")
    sp.add_argument("--graph", required=True, help="graph JSON file")
    sp.add_argument("--k", default="golden", help="evaluation point, a number or 'golden' (phi+2)")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_chromatic)

    sp = sub.add_parser("oracle", formatter_class=fmt, help="brute-force colouring count")
    sp.add_argument("--graph", required=True, help="graph JSON file")
    sp.add_argument("--k-int", type=int, required=True)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fibnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"fibnet: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DataError, DomainError) as exc:
        print(f"fibnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"fibnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
