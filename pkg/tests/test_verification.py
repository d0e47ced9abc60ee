from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stoqaqc.adiabatic import Schedule, evolve
from stoqaqc.circuit import parse_circuit
from stoqaqc.corpus import corpus
from stoqaqc.hamiltonian import build_domain_wall, build_unary
from stoqaqc.spectral import gap_scan, history_state
from stoqaqc.verification import (
    certify,
    energy_estimate,
    final_gap,
    ground_overlap,
    pauli_decomposition,
    pauli_expectation,
)

BELL = parse_circuit("work 1 1\nCNOT 1 0\n")
PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]),
}


def _pauli_matrix(xm, zm, n):
    out = np.ones((1, 1))
    for q in range(n):
        bit = n - 1 - q
        x, z = (xm >> bit) & 1, (zm >> bit) & 1
        out = np.kron(out, PAULI["IZXY"[2 * x + z]])
    return out


def _spectrum(h):
    return np.linalg.eigh(h.matrix().toarray())


@pytest.mark.parametrize("case", corpus()[:12], ids=lambda c: c.name)
def test_pauli_reconstruction(case):
    h = build_domain_wall(case.circuit).final
    n = h.basis.n_qubits
    recon = sum(c * _pauli_matrix(xm, zm, n) for (xm, zm), c in pauli_decomposition(h).items())
    assert np.abs(recon - h.matrix().toarray()).max() <= 1e-12


@given(st.integers(0, 7), st.integers(0, 7), st.integers(0, 2**16))
def test_pauli_expectation_matches_matrix(xm, zm, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    ref = np.vdot(psi, _pauli_matrix(xm, zm, 3) @ psi).real
    assert pauli_expectation(psi, xm, zm) == pytest.approx(ref, abs=1e-12)


def test_unary_basis_rejected():
    with pytest.raises(ValueError):
        pauli_decomposition(build_unary(BELL).final)


def test_exact_history_energy_zero():
    for case in corpus():
        h = build_domain_wall(case.circuit).final
        e = energy_estimate(history_state(case.circuit, kind="domain_wall"), h)
        assert abs(e.value) <= 1e-10 and e.half_width == 0.0 and e.exact


def test_two_level_superposition():
    h = build_domain_wall(BELL).final
    vals, vecs = _spectrum(h)
    eps = 0.03
    psi = math.sqrt(1 - eps) * vecs[:, 0] + math.sqrt(eps) * vecs[:, 1]
    e = energy_estimate(psi, h).value
    assert e == pytest.approx(eps * vals[1], abs=1e-12)
    assert e >= eps * (vals[1] - vals[0]) - 1e-12


@pytest.mark.parametrize("case", corpus()[:14], ids=lambda c: c.name)
def test_corrupted_history_energy_bound(case):
    c = case.circuit
    h = build_domain_wall(c).final
    vals, vecs = _spectrum(h)
    delta = vals[1] - vals[0]
    psi = history_state(c, kind="domain_wall").amplitudes
    nq = h.basis.n_qubits
    # flip work qubit 0 in every branch
    flipped = psi[np.arange(psi.size) ^ (1 << (nq - 1))]
    e = energy_estimate(flipped, h).value
    alpha0 = ground_overlap(flipped, vecs[:, 0])
    assert e >= delta * (1 - alpha0) - 1e-12


def test_certify_examples():
    ih = build_domain_wall(BELL)
    vals, vecs = _spectrum(ih.final)
    rep = certify(vecs[:, 0], ih, 0.01)
    assert rep.passed and rep.overlap_bound == pytest.approx(0.99)
    assert rep.fidelity_bound == pytest.approx(math.sqrt(0.99))
    bad = certify(vecs[:, 1], ih, 0.01)
    assert not bad.passed and bad.energy >= bad.gap - 1e-12
    with pytest.raises(ValueError):
        certify(vecs[:, 0], ih, 0.01, gap=0.0)
    with pytest.raises(ValueError):
        certify(vecs[:, 0], ih, 1.5)


def test_certify_accepts_gap_scan():
    ih = build_domain_wall(BELL)
    scan = gap_scan(ih, np.linspace(0, 1, 11), refine=0)
    rep = certify(history_state(BELL, kind="domain_wall"), ih, 0.05, gap=scan)
    assert rep.gap == pytest.approx(final_gap(ih))
    assert rep.passed


@pytest.mark.parametrize("t_f", [2.0, 10.0, 40.0, 160.0])
def test_certify_evolved_state_consistent_with_overlap(t_f):
    c = parse_circuit("work 1 0\nX 0\n")
    ih = build_domain_wall(c)
    res = evolve(ih, Schedule(t_f, "smooth"))
    _, vecs = _spectrum(ih.final)
    alpha0 = ground_overlap(res.state, vecs[:, 0])
    for eps_ver in (0.001, 0.01, 0.1, 0.5):
        rep = certify(res.state, ih, eps_ver)
        if rep.passed:
            assert alpha0 > 1 - eps_ver


@pytest.mark.parametrize("case", corpus()[:10], ids=lambda c: c.name)
def test_no_false_accepts_exact_mode(case):
    ih = build_domain_wall(case.circuit)
    vals, vecs = _spectrum(ih.final)
    rng = np.random.default_rng(len(case.name))
    for _ in range(20):
        psi = vecs[:, 0] + rng.uniform(0.0, 0.5) * rng.standard_normal(vecs.shape[0])
        psi /= np.linalg.norm(psi)
        for eps_ver in (0.01, 0.1, 0.3):
            rep = certify(psi, ih, eps_ver, gap=vals[1] - vals[0])
            if rep.passed:
                assert ground_overlap(psi, vecs[:, 0]) > 1 - eps_ver


def test_sampled_estimate_and_rate():
    h = build_domain_wall(BELL).final
    _, vecs = _spectrum(h)
    psi = (vecs[:, 0] + 0.4 * vecs[:, 3]) / math.sqrt(1.16)
    exact = energy_estimate(psi, h).value
    budgets = np.array([2_000, 8_000, 32_000, 128_000])
    errs = []
    for n in budgets:
        runs = [energy_estimate(psi, h, shots=int(n), seed=s) for s in range(40)]
        errs.append(np.sqrt(np.mean([(r.value - exact) ** 2 for r in runs])))
        assert all(abs(r.value - exact) <= r.half_width for r in runs[:10])
    slope = np.polyfit(np.log(budgets), np.log(errs), 1)[0]
    assert -0.6 <= slope <= -0.4


def test_sampled_mode_validation():
    h = build_domain_wall(BELL).final
    psi = history_state(BELL, kind="domain_wall")
    with pytest.raises(ValueError):
        energy_estimate(psi, h, shots=3)
    with pytest.raises(ValueError):
        energy_estimate(np.outer(psi.amplitudes, psi.amplitudes), h, shots=1000)
    with pytest.raises(ValueError):
        energy_estimate(psi, h, shots=1000, confidence=1.0)
    a = energy_estimate(psi, h, shots=5000, seed=4)
    b = energy_estimate(psi, h, shots=5000, seed=4)
    assert a == b and a.shots <= 5000


def test_density_matrix_exact_mode():
    h = build_domain_wall(BELL).final
    vals, vecs = _spectrum(h)
    rho = 0.9 * np.outer(vecs[:, 0], vecs[:, 0]) + 0.1 * np.outer(vecs[:, 2], vecs[:, 2])
    assert energy_estimate(rho, h).value == pytest.approx(0.1 * vals[2], abs=1e-12)
    assert ground_overlap(rho, vecs[:, 0]) == pytest.approx(0.9)
    rep = certify(rho, build_domain_wall(BELL), 0.2)
    assert rep.passed == (0.1 * vals[2] < 0.2 * (vals[1] - vals[0]))


def test_report_json():
    d = certify(history_state(BELL, kind="domain_wall"), build_domain_wall(BELL), 0.1, shots=20_000, seed=1).to_dict()
    assert d["confidence"] == 0.95 and d["meta"]["seed"] == 1
    assert d["passed"] == (d["E_exp"] + d["half_width"] < d["eps_ver"] * d["gap"])
