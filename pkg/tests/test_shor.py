from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import beta

from stoqaqc.circuit import apply_gate
from stoqaqc.hamiltonian import build_unary, check_stoquastic
from stoqaqc.shor import (
    FactoringError,
    OrderFindingInstance,
    StageOutcomes,
    controlled_modexp_gate,
    eigenstate,
    fig3_circuit,
    extract_bits,
    factor,
    ideal_bits,
    modexp_gate,
    multiplicative_order,
    recover_order,
    run_phase_estimation,
    run_stage,
    shor_as_circuit,
    shortcut_distribution,
    stage_probabilities,
    statevector_distribution,
)
from stoqaqc.spectral import history_state


def _perm_map(g):
    return dict(enumerate(g.table))


def test_modexp_15_7_cycle():
    m = _perm_map(modexp_gate(15, 7, 0))
    assert (m[1], m[7], m[4], m[13]) == (7, 4, 13, 1)
    # oracle: direct modular arithmetic, fixed points above N
    assert all(m[y] == (7 * y) % 15 for y in range(15))
    assert m[0] == 0 and m[15] == 15


def test_modexp_squared():
    m = _perm_map(modexp_gate(15, 7, 1))
    assert m[1] == 4 and m[4] == 1
    assert all(m[y] == (49 * y) % 15 for y in range(15))


@given(st.integers(3, 60))
def test_modexp_x1_identity(N):
    assert modexp_gate(N, 1, 0).table == tuple(range(len(modexp_gate(N, 1, 0).table)))


def test_modexp_rejects_non_coprime():
    with pytest.raises(ValueError):
        modexp_gate(15, 5, 0)
    with pytest.raises(ValueError):
        OrderFindingInstance(15, 6)
    with pytest.raises(ValueError):
        OrderFindingInstance(15, 15)


def test_stage_example_values():
    px, py = stage_probabilities(0.25)
    assert 2 * px - 1 == pytest.approx(0.0, abs=1e-15) and 2 * py - 1 == pytest.approx(1.0)
    inst = OrderFindingInstance(15, 7, R=30)
    out = run_stage(inst, 0, 0, np.random.default_rng(0))
    assert np.all(out.x_outcomes == 0) and out.mean_x == 1.0


def test_eigenstates_15_7():
    N, x, r = 15, 7, 4
    g = modexp_gate(N, x, 0)
    total = np.zeros(16, complex)
    for s in range(r):
        u = eigenstate(N, x, s)
        assert np.abs(apply_gate(u, g, 4) - np.exp(2j * np.pi * s / r) * u).max() <= 1e-12
        total += u
    one = np.zeros(16)
    one[1] = 1
    assert np.abs(total / math.sqrt(r) - one).max() <= 1e-12


@pytest.mark.parametrize("s", range(4))
def test_controlled_round_statevector(s):
    # control |+> (MSB) times |u_s> on 4 register qubits; measure the control
    N, x = 15, 7
    psi = np.kron(np.array([1, 1]) / math.sqrt(2), eigenstate(N, x, s))
    out = apply_gate(psi, controlled_modexp_gate(N, x, 0, 0, (1, 2, 3, 4)), 5).reshape(2, 16)
    rho10 = np.vdot(out[0], out[1])  # control coherence <1|rho|0>
    mean_x = 2 * rho10.real
    mean_y = 2 * rho10.imag
    px, py = stage_probabilities(s / 4)
    assert abs((1 + mean_x) / 2 - px) <= 1e-10
    assert abs((1 + mean_y) / 2 - py) <= 1e-10


def test_extract_exact_three_quarters():
    assert ideal_bits(3, 4, 2) == [1, 1]
    assert ideal_bits(0, 4, 3) == [0, 0, 0]
    assert ideal_bits(1, 4, 2) == [0, 1]


def _stage(k, x_bits, y_bits):
    return StageOutcomes(k, np.array(x_bits, dtype=np.int8), np.array(y_bits, dtype=np.int8))


def test_extract_low_confidence_flag():
    stages = [_stage(0, [0, 1, 0, 1], [0, 1, 1, 0]), _stage(1, [1, 1], [0, 1])]
    bits, low = extract_bits(stages)
    assert 0 in low and set(bits) <= {0, 1}
    with pytest.raises(ValueError):
        extract_bits([_stage(1, [0], [0])])


def test_theta_range():
    st_ = _stage(0, [1, 1, 1], [0, 0, 0])
    # <X> = -1, <Y> = +1
    assert -math.pi < st_.theta <= math.pi
    assert st_.theta == pytest.approx(3 * math.pi / 4)
    assert _stage(0, [1], [1]).theta == pytest.approx(-3 * math.pi / 4)
    assert _stage(0, [1, 1], [0, 1]).theta == pytest.approx(math.pi)


def test_recover_order_examples():
    assert recover_order([1, 1], 15, 7) == 4
    assert recover_order([1, 0], 15, 4) == 2
    assert recover_order([0, 0, 0], 15, 7) is None


@pytest.mark.parametrize("N, x", [(15, 7), (15, 2), (21, 2), (21, 5), (33, 5), (35, 3)])
def test_ideal_bits_recover_order(N, x):
    inst = OrderFindingInstance(N, x)
    r = inst.order
    assert r == multiplicative_order(x, N)
    hits = [recover_order(ideal_bits(s, r, inst.l), N, x) for s in range(r)]
    # s coprime to r always recovers r exactly
    for s, got in enumerate(hits):
        if math.gcd(s, r) == 1:
            assert got == r


@pytest.mark.parametrize("s", range(4))
def test_r4_zero_error_1000_trials(s):
    inst = OrderFindingInstance(15, 7, l=9, R=30)
    rng = np.random.default_rng(100 + s)
    ideal = ideal_bits(s, 4, inst.l)
    errors = sum(run_phase_estimation(inst, rng, s).bits != ideal for _ in range(1000))
    assert errors == 0


@pytest.mark.parametrize("N, x, trials", [(21, 2, 2000), (15, 7, 2000)])
def test_failure_rate_below_hoeffding_envelope(N, x, trials):
    inst = OrderFindingInstance(N, x, R=30)
    c = math.cos(math.pi / 4)
    envelope = 4 * inst.l * math.exp(-inst.R * c**2 / 2)
    rng = np.random.default_rng(2024)
    r = inst.order
    fails = 0
    for _ in range(trials):
        tr = run_phase_estimation(inst, rng)
        fails += tr.bits != ideal_bits(tr.s_true, r, inst.l)
    upper = beta.ppf(0.99, fails + 1, trials - fails) if fails < trials else 1.0
    assert upper <= envelope


@pytest.mark.parametrize("N, choices", [(15, {3, 5}), (21, {3, 7})])
def test_factor_end_to_end(N, choices):
    for seed in range(20):
        res = factor(N, seed=seed)
        assert res.factor in choices and N % res.factor == 0
        assert factor(N, seed=seed).to_dict() == res.to_dict()


def test_factor_order_finding_path():
    # seeds where the first draw is coprime exercise order finding
    hits = 0
    for seed in range(60):
        res = factor(21, seed=seed)
        if res.attempts[-1]["outcome"] == "factor":
            hits += 1
            assert res.factor in (3, 7)
    assert hits >= 5


@pytest.mark.parametrize("N", [9, 27, 25, 13, 16, 1])
def test_factor_rejects(N):
    with pytest.raises(ValueError):
        factor(N)


def test_factor_retry_budget():
    # one phase bit gives phase 0 or 1/2, so order 6 is never found; seeds that
    # skip the gcd shortcut exhaust a single-retry budget
    exhausted = 0
    for seed in range(40):
        try:
            res = factor(21, seed=seed, l=1, retries=1)
            assert res.attempts[-1]["outcome"] in ("gcd", "factor")
        except FactoringError:
            exhausted += 1
    assert exhausted > 0


@pytest.mark.parametrize(
    "stages, bases",
    [((0,), ("X",)), ((0, 0), ("X", "Y")), ((0, 1), ("Y", "Y")), ((0, 0, 1, 1), ("X", "Y", "X", "Y"))],
)
def test_shortcut_equals_statevector(stages, bases):
    a = shortcut_distribution(15, 7, stages, bases)
    b = statevector_distribution(15, 7, stages, bases)
    assert 0.5 * np.abs(a - b).sum() <= 1e-10


def test_shor_circuit_stoquastic():
    c = shor_as_circuit(OrderFindingInstance(15, 7))
    assert c.width == 5 and c.m == 1
    ih = build_unary(c)
    for s in np.linspace(0, 1, 11):
        assert check_stoquastic(ih(float(s))).ok


def test_shor_circuit_trivial_base():
    c = fig3_circuit(3, 1, [0])
    assert c.gates[1].table == tuple(range(len(c.gates[1].table)))
    psi = history_state(c, pad=True).amplitudes.reshape(2**c.width, -1)
    # after the X gate the work state never changes again
    assert np.allclose(psi[:, 1:], psi[:, [1]])


def test_transcript_json_shape():
    res = factor(15, seed=3)
    d = res.to_dict()
    assert {"N", "x", "l", "R", "stages", "bits", "r", "factor", "seed"} <= set(d)
    inst = OrderFindingInstance(15, 7)
    tr = run_phase_estimation(inst, np.random.default_rng(0)).to_dict()
    assert set(tr["stages"][0]) == {"k", "x_outcomes", "y_outcomes", "theta"}
    assert all(v in (-1, 1) for v in tr["stages"][0]["x_outcomes"])
