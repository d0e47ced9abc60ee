"""Command-line interface: ``stoqaqc <command> [options]``.

Exit status is 0 on success, 1 on domain errors (bad circuits, cap
violations, failed checks) and 2 on usage errors. JSON outputs are
deterministic for a fixed seed; the wall-clock timestamp of a run goes to a
``<out>.meta.json`` sidecar next to the main output file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from importlib import resources
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import Schedule, evolve, phase_aligned_distance
from .circuit import CapExceededError, CircuitSyntaxError, QuantumState, load_circuit, parse_circuit, run_circuit
from .corpus import corpus
from .css import encode_circuit, noisy_measurement_experiment, steane_code
from .hamiltonian import build_domain_wall, build_unary, check_stoquastic
from .measurement import (
    AdaptivePolicy,
    MeasurementPlan,
    PolicyError,
    accept_fraction,
    exact_distribution,
    sample,
    sample_adaptive,
)
from .shor import FactoringError, factor
from .spectral import ConvergenceError, gap_scan, ground_state, history_amplitudes
from .unionjack import build_union_jack, max_term_locality
from .verification import certify

__all__ = ["main", "build_parser", "load_schema", "SCHEMA_VERSION", "SCRATCH_ENV"]

SCHEMA_VERSION = 1
SCRATCH_ENV = "STOQAQC_SCRATCH"


class DomainError(Exception):
    """Raised for failures that map to exit status 1."""


# ---------------------------------------------------------------- helpers


def load_schema(name: str) -> dict:
    """Published JSON schema for a command output, e.g. ``load_schema("gap")``."""
    text = resources.files("stoqaqc").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    scratch = os.environ.get(SCRATCH_ENV)
    if not p.is_absolute() and scratch:
        p = Path(scratch) / p
    return p


def _write(path: str | None, text: str, argv: list[str]) -> None:
    p = _resolve(path)
    if p is None:
        sys.stdout.write(text)
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "argv": argv,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
    }
    p.with_name(p.name + ".meta.json").write_text(_dumps(meta))


def _fmt(args) -> str:
    if getattr(args, "format", None):
        return args.format
    out = getattr(args, "out", None)
    return "csv" if out and str(out).endswith(".csv") else "json"


def _hamiltonian(args):
    c = load_circuit(args.circuit)
    build = build_unary if args.clock == "unary" else build_domain_wall
    return c, build(c, pad=args.pad)


def _accept(args, ih) -> tuple[int, ...]:
    if getattr(args, "accept", None):
        return tuple(int(v) for v in args.accept.split(","))
    return ih.accept


def _state(args, ih) -> tuple[QuantumState, dict]:
    """Exact history state, a loaded state file, or an evolved state."""
    if getattr(args, "state", None):
        st = QuantumState.from_dict(json.loads(Path(args.state).read_text()))
        if st.basis != ih.basis:
            raise DomainError("state file basis does not match the Hamiltonian")
        return st, {"source": "file"}
    if getattr(args, "tf", None) is not None:
        res = evolve(ih, Schedule(args.tf, args.schedule), tol=args.tol)
        return res.state, {"source": "evolved", "t_f": args.tf, "schedule": args.schedule, "eps": res.eps}
    return QuantumState(history_amplitudes(ih.circuit, ih.basis), ih.basis), {"source": "history"}


def _add_circuit(p, clock_default="unary"):
    p.add_argument("--circuit", required=True, help="circuit text file")
    p.add_argument("--clock", choices=("unary", "domain-wall"), default=clock_default)
    p.add_argument("--pad", action="store_true", help="append T-1 identity gates (p_clock = 1/2)")


def _add_output(p, formats=("json",)):
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=formats, help="output format (inferred from --out)")
    p.add_argument("--seed", type=int, default=0)


def _add_state(p):
    p.add_argument("--state", help="QuantumState JSON file (default: exact history state)")
    p.add_argument("--tf", type=float, help="evolve adiabatically for this total time first")
    p.add_argument("--schedule", choices=("linear", "smooth"), default="smooth")
    p.add_argument("--tol", type=float, default=1e-9)


# ---------------------------------------------------------------- commands


def cmd_build(args, argv):
    c, ih = _hamiltonian(args)
    if _fmt(args) == "coo":
        _write(args.out, ih.final.to_coo_text(), argv)
        return 0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "clock": args.clock,
        "padded": args.pad,
        "T": ih.circuit.T,
        "accept": list(ih.accept),
        "basis": ih.basis.to_dict(),
        "initial": ih.initial.to_dict(),
        "final": ih.final.to_dict(),
        "max_locality": max_term_locality(ih),
    }
    _write(args.out, _dumps(doc), argv)
    return 0


def cmd_check_stoquastic(args, argv):
    _, ih = _hamiltonian(args)
    rows = []
    for s in np.linspace(0.0, 1.0, args.points):
        rep = check_stoquastic(ih(float(s)), args.tol)
        rows.append({"s": float(s), "ok": rep.ok, "violations": len(rep.violations)})
    ok = all(r["ok"] for r in rows)
    doc = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "tol": args.tol, "ok": ok, "points": rows}
    _write(args.out, _dumps(doc), argv)
    return 0 if ok else 1


def cmd_gap(args, argv):
    _, ih = _hamiltonian(args)
    scan = gap_scan(ih, np.linspace(0.0, 1.0, args.grid), refine=args.refine, seed=args.seed)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "s_min": scan.s_min,
        "min_gap": scan.min_gap,
        "n_points": int(scan.s.size),
    }
    if _fmt(args) == "csv":
        _write(args.out, scan.to_csv(), argv)
        sys.stdout.write(_dumps(summary))
    else:
        doc = scan.to_dict()
        doc["seed"] = args.seed
        _write(args.out, _dumps(doc), argv)
        if args.out:
            sys.stdout.write(_dumps(summary))
    return 0


def cmd_evolve(args, argv):
    _, ih = _hamiltonian(args)
    gaps = None
    if args.schedule == "local-adaptive":
        gaps = gap_scan(ih, np.linspace(0.0, 1.0, 51), refine=0, seed=args.seed)
    res = evolve(ih, Schedule(args.tf, args.schedule, gaps), tol=args.tol, trace_points=args.trace)
    if _fmt(args) == "csv":
        _write(args.out, res.trace_csv(), argv)
        return 0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "t_f": args.tf,
        "schedule": args.schedule,
        "tol": args.tol,
        "eps": res.eps,
        "overlap": res.overlap,
        "steps": res.steps,
        "rejected": res.rejected,
        "norm_drift": res.norm_drift,
        "trace": [dict(zip(("t", "s", "overlap_ground", "norm"), row)) for row in res.trace],
    }
    if args.save_state:
        target = _resolve(args.save_state)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(_dumps(res.state.to_dict()))
    _write(args.out, _dumps(doc), argv)
    return 0


def _records_csv(recs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["shot", "clock_accept", "outcome_bits"])
    for r in recs:
        w.writerow([r.shot, int(r.accepted), r.outcome_bits])
    return buf.getvalue()


def cmd_sample(args, argv):
    _, ih = _hamiltonian(args)
    state, source = _state(args, ih)
    plan = MeasurementPlan.from_string(args.bases, _accept(args, ih), args.shots, args.seed)
    if len(plan.bases) != ih.basis.n_work:
        raise DomainError(f"--bases has {len(plan.bases)} entries for {ih.basis.n_work} work qubits")
    recs = sample(state, plan)
    if _fmt(args) == "csv":
        _write(args.out, _records_csv(recs), argv)
        return 0
    exact = exact_distribution(state, plan)
    counts: dict[str, int] = {}
    for r in recs:
        if r.accepted:
            counts[r.outcome_bits] = counts.get(r.outcome_bits, 0) + 1
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "plan": plan.to_dict(),
        "state": source,
        "shots": args.shots,
        "accept_fraction": accept_fraction(recs),
        "p_clock": exact.p_clock,
        "counts": dict(sorted(counts.items())),
        "exact": exact.as_dict(),
    }
    _write(args.out, _dumps(doc), argv)
    return 0


def _feedforward(bases: str) -> AdaptivePolicy:
    """First qubit in the listed basis; later X/Y choices swap when the running parity is odd."""
    order = [(q, b) for q, b in enumerate(bases) if b != "-"]
    swap = {"X": "Y", "Y": "X", "Z": "Z"}

    def fn(history):
        if len(history) == len(order):
            return None
        q, b = order[len(history)]
        parity = sum(h[2] for h in history) % 2
        return q, swap[b] if parity else b

    return AdaptivePolicy(fn)


def cmd_adaptive_sample(args, argv):
    _, ih = _hamiltonian(args)
    state, source = _state(args, ih)
    if len(args.bases) != ih.basis.n_work:
        raise DomainError(f"--bases has {len(args.bases)} entries for {ih.basis.n_work} work qubits")
    if args.policy == "fixed":
        policy = AdaptivePolicy.fixed([None if b == "-" else b for b in args.bases])
    else:
        policy = _feedforward(args.bases)
    recs = sample_adaptive(state, policy, args.shots, _accept(args, ih), args.seed)
    if _fmt(args) == "csv":
        _write(args.out, _records_csv(recs), argv)
        return 0
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "policy": args.policy,
        "state": source,
        "shots": args.shots,
        "accept_fraction": accept_fraction(recs),
        "records": [
            {"shot": r.shot, "clock": r.clock, "accepted": r.accepted, "qubits": list(r.qubits),
             "bases": list(r.bases), "outcome": list(r.outcome)}
            for r in recs
        ],
    }
    _write(args.out, _dumps(doc), argv)
    return 0


def cmd_factor(args, argv):
    res = factor(args.N, seed=args.seed, R=args.R, l=args.l, retries=args.retries)
    _write(args.out, _dumps(res.to_dict()), argv)
    return 0


def cmd_verify(args, argv):
    c = load_circuit(args.circuit)
    build = build_unary if args.clock == "unary" else build_domain_wall
    ih = build(c, pad=args.pad)
    state, source = _state(args, ih)
    rep = certify(state, ih, args.eps_ver, shots=args.shots, seed=args.seed, confidence=args.confidence)
    doc = rep.to_dict()
    doc["seed"] = args.seed
    doc["state"] = source
    _write(args.out, _dumps(doc), argv)
    return 0


def cmd_unionjack(args, argv):
    lattice, circuit = build_union_jack(args.rows, args.cols, args.init, args.triangles)
    doc = lattice.to_dict()
    doc["seed"] = args.seed
    doc["circuit"] = str(circuit)
    if args.hamiltonian:
        doc["max_locality"] = max_term_locality(build_domain_wall(circuit))
    _write(args.out, _dumps(doc), argv)
    return 0


def cmd_css_experiment(args, argv):
    if args.circuit:
        c = load_circuit(args.circuit)
    else:
        c = parse_circuit("work 0 1\nID\n" if args.basis == "X" else "work 1 0\nID\n")
    enc, blocks = encode_circuit(c, [args.wire])
    state = run_circuit(enc)
    rep = noisy_measurement_experiment(state, blocks[0], args.basis, args.p, args.shots, args.seed)
    doc = rep.to_dict()
    doc["code"] = steane_code().to_dict()
    doc["block"] = list(blocks[0])
    _write(args.out, _dumps(doc), argv)
    return 0


def _corpus_case(item):
    name, circuit = item
    row = {"name": name, "width": circuit.width, "T": circuit.T}
    ok = True
    for clock, build in (("unary", build_unary), ("domain-wall", build_domain_wall)):
        ih = build(circuit)
        e0, g = ground_state(ih.final)
        dist = phase_aligned_distance(g, history_amplitudes(ih.circuit, ih.basis))
        stoq = all(check_stoquastic(ih(float(s))).ok for s in np.linspace(0, 1, 21))
        good = dist <= 1e-8 and abs(e0) <= 1e-10 and stoq
        row[clock] = {"distance": dist, "E0": e0, "stoquastic": stoq, "ok": good}
        ok = ok and good
    row["ok"] = ok
    return row


def cmd_corpus(args, argv):
    items = [(case.name, case.circuit) for case in corpus()]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_corpus_case, items))
    else:
        rows = [_corpus_case(it) for it in items]
    ok = all(r["ok"] for r in rows)
    if _fmt(args) == "table":
        lines = [f"{'case':<20} {'unary':>6} {'dw':>6}"]
        for r in rows:
            lines.append(
                f"{r['name']:<20} {'PASS' if r['unary']['ok'] else 'FAIL':>6} {'PASS' if r['domain-wall']['ok'] else 'FAIL':>6}"
            )
        _write(args.out, "\n".join(lines) + "\n", argv)
    else:
        doc = {"schema_version": SCHEMA_VERSION, "seed": args.seed, "ok": ok, "cases": rows}
        _write(args.out, _dumps(doc), argv)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stoqaqc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="lower a circuit to the clock Hamiltonian pair")
    _add_circuit(p)
    _add_output(p, ("json", "coo"))
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check-stoquastic", help="check off-diagonal signs along H(s)")
    _add_circuit(p)
    _add_output(p)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_check_stoquastic)

    p = sub.add_parser("gap", help="scan the spectral gap of H(s)")
    _add_circuit(p)
    _add_output(p, ("json", "csv"))
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--refine", type=int, default=3)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("evolve", help="simulate the adiabatic sweep")
    _add_circuit(p)
    _add_output(p, ("json", "csv"))
    p.add_argument("--tf", type=float, required=True)
    p.add_argument("--schedule", choices=("linear", "smooth", "local-adaptive"), default="linear")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--trace", type=int, default=0, help="number of trace checkpoints")
    p.add_argument("--save-state", help="write the final QuantumState JSON here")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sample", help="clock-conditioned Pauli sampling")
    _add_circuit(p)
    _add_output(p, ("json", "csv"))
    _add_state(p)
    p.add_argument("--bases", required=True, help="one of X/Y/Z/- per work qubit, e.g. ZZ")
    p.add_argument("--accept", help="comma-separated accepted clock values")
    p.add_argument("--shots", type=int, default=1000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("adaptive-sample", help="sequential single-qubit measurements")
    _add_circuit(p)
    _add_output(p, ("json", "csv"))
    _add_state(p)
    p.add_argument("--bases", required=True)
    p.add_argument("--policy", choices=("fixed", "feedforward"), default="fixed")
    p.add_argument("--accept")
    p.add_argument("--shots", type=int, default=100)
    p.set_defaults(func=cmd_adaptive_sample)

    p = sub.add_parser("factor", help="factor N by iterative phase estimation")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--R", type=int, default=30)
    p.add_argument("--l", type=int)
    p.add_argument("--retries", type=int, default=25)
    _add_output(p)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("verify", help="energy-based overlap certification")
    _add_circuit(p, clock_default="domain-wall")
    _add_output(p)
    _add_state(p)
    p.add_argument("--eps-ver", type=float, default=0.1)
    p.add_argument("--shots", type=int, help="sampled mode (default: exact)")
    p.add_argument("--confidence", type=float, default=0.95)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("unionjack", help="export a union-jack lattice")
    p.add_argument("--rows", type=int, default=1)
    p.add_argument("--cols", type=int, default=1)
    p.add_argument("--init", choices=("zero-control", "all-plus"), default="zero-control")
    p.add_argument("--triangles", type=int)
    p.add_argument("--hamiltonian", action="store_true", help="also report the term locality")
    _add_output(p)
    p.set_defaults(func=cmd_unionjack)

    p = sub.add_parser("css-experiment", help="noisy transversal readout of a Steane block")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--basis", choices=("X", "Y", "Z"), default="Z")
    p.add_argument("--circuit", help="encode a wire of this circuit (default: |0> or |+>)")
    p.add_argument("--wire", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_css_experiment)

    p = sub.add_parser("corpus", help="run the regression corpus")
    _add_output(p, ("json", "table"))
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_corpus)
    return parser


_DOMAIN = (
    DomainError,
    ValueError,
    CapExceededError,
    CircuitSyntaxError,
    ConvergenceError,
    FactoringError,
    PolicyError,
    OSError,
    json.JSONDecodeError,
)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except _DOMAIN as exc:
        print(f"stoqaqc {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
