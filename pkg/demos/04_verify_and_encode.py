"""Certify a noisy history state by its energy, then read out an encoded wire.

The first part adds noise of growing size to a history state and shows where
the energy test stops certifying overlap. The second part encodes a wire in
the Steane code and compares noisy transversal readout with and without
decoding.
"""

from __future__ import annotations

import numpy as np

from stoqaqc.circuit import Circuit, Gate, run_circuit
from stoqaqc.corpus import corpus_case
from stoqaqc.css import encode_circuit, noisy_measurement_experiment
from stoqaqc.hamiltonian import build_domain_wall
from stoqaqc.spectral import history_state
from stoqaqc.verification import certify, final_gap

circuit = corpus_case("ghz3").circuit
ih = build_domain_wall(circuit)
gap = final_gap(ih)
hist = history_state(circuit, kind="domain_wall").amplitudes
rng = np.random.default_rng(4)
noise = rng.standard_normal(hist.size)
noise /= np.linalg.norm(noise)
for eta in (0.01, 0.1, 0.3, 1.0):
    psi = hist + eta * noise
    psi /= np.linalg.norm(psi)
    exact = certify(psi, ih, 0.2, gap=gap)
    sampled = certify(psi, ih, 0.2, gap=gap, shots=2_000_000, seed=1)
    print(f"noise {eta:4.2f}: E = {exact.energy:.5f} (threshold {0.2 * gap:.4f}) passed {exact.passed};  "
          f"sampled {sampled.energy:.4f} +- {sampled.half_width:.4f} passed {sampled.passed}")

enc, blocks = encode_circuit(Circuit(1, 0, (Gate("ID", ()),)))
for p in (0.001, 0.01, 0.05):
    rep = noisy_measurement_experiment(run_circuit(enc), blocks[0], "Z", p, 50_000, seed=2)
    print(f"flip rate {p:5.3f}: logical error {rep.logical_error_rate:.5f}  (unencoded {p})")
