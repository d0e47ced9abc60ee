"""Prepare a padded history state adiabatically, then sample it.

With T-1 identity gates appended, half of the clock values land after the
circuit has finished, so clock-conditioned sampling accepts about half the
shots and the accepted outcomes follow the circuit's output distribution.
"""

from __future__ import annotations

from collections import Counter

from stoqaqc.adiabatic import Schedule, evolve
from stoqaqc.circuit import parse_circuit, run_circuit
from stoqaqc.hamiltonian import build_unary
from stoqaqc.measurement import MeasurementPlan, exact_distribution, sample

circuit = parse_circuit("work 2 1\nCNOT 2 0\nCNOT 2 1\n")  # GHZ on three work qubits
ih = build_unary(circuit, pad=True)

for t_f in (8.0, 64.0, 512.0):
    res = evolve(ih, Schedule(t_f, "smooth"))
    print(f"t_f = {t_f:6.0f}   distance to history state {res.eps:.2e}   ({res.steps} steps)")

for bases in ("ZZZ", "XXX"):
    plan = MeasurementPlan.from_string(bases, ih.accept, shots=20_000, seed=1)
    recs = sample(res.state, plan)
    kept = [r.outcome_bits for r in recs if r.accepted]
    exact = exact_distribution(run_circuit(circuit), MeasurementPlan.from_string(bases)).probs
    top = {k: round(v / len(kept), 3) for k, v in sorted(Counter(kept).items())}
    print(f"{bases}: accepted {len(kept) / len(recs):.3f} of shots; empirical {top}")
    print(f"      exact {[round(float(p), 3) for p in exact]}")
