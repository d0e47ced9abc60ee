"""Lower a Bell-pair circuit to its clock Hamiltonian and look at the spectrum.

The ground state of H_final is the history state of the circuit, and every
H(s) on the interpolation path is stoquastic.
"""

from __future__ import annotations

import numpy as np

from stoqaqc.adiabatic import phase_aligned_distance
from stoqaqc.circuit import parse_circuit
from stoqaqc.hamiltonian import build_domain_wall, build_unary, check_stoquastic
from stoqaqc.spectral import gap_scan, history_state, lowest_eigenpairs

circuit = parse_circuit("work 1 1\nCNOT 1 0\n")

for kind, build in (("unary", build_unary), ("domain_wall", build_domain_wall)):
    ih = build(circuit)
    vals, vecs, _, _ = lowest_eigenpairs(ih.final.matrix(), 3)
    dist = phase_aligned_distance(vecs[:, 0], history_state(circuit, kind=kind).amplitudes)
    stoq = all(check_stoquastic(ih(s)).ok for s in np.linspace(0, 1, 21))
    scan = gap_scan(ih)
    print(f"{kind:12s} dim {ih.dimension:3d}  E0..2 {np.round(vals, 4)}  "
          f"|ground - history| {dist:.1e}  stoquastic {stoq}  min gap {scan.min_gap:.4f} at s={scan.s_min:.3f}")
