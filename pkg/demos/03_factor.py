"""Factor 15 and 21 by iterative phase estimation on modular-exponentiation permutations."""

from __future__ import annotations

from stoqaqc.shor import OrderFindingInstance, factor, run_phase_estimation, ideal_bits

import numpy as np

inst = OrderFindingInstance(15, 7, l=9, R=30)
rng = np.random.default_rng(0)
tr = run_phase_estimation(inst, rng)
print(f"order of 7 mod 15 is {inst.order}; eigenstate label s={tr.s_true}")
print(f"estimated bits {tr.bits}   ideal {ideal_bits(tr.s_true, inst.order, inst.l)}")

for N in (15, 21):
    res = factor(N, seed=3)
    print(f"N={N}: factor {res.factor} after {len(res.attempts)} attempt(s): {[a['outcome'] for a in res.attempts]}")
