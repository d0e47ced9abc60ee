"""Energy-based certification of ground-state overlap.

If ``H_final >= 0`` has a unique zero-energy ground state and gap ``Delta``,
then ``<psi|H_final|psi> >= (1 - |alpha_0|^2) Delta`` with ``alpha_0`` the
ground-state amplitude. An energy estimate below ``eps_ver * Delta`` hence
certifies ``|alpha_0|^2 > 1 - eps_ver``.

Sampled estimation works on qubit bases (work-only or domain-wall). The
Hamiltonian is expanded in Pauli strings; all ``I/Z`` strings are read from
one computational-basis measurement group, every other string from its own
product basis. The outcome of a product-basis measurement is the product of
the single-qubit eigenvalues, whose distribution is fixed by ``<P>``; shots
are drawn from that distribution directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import QuantumState
from .hamiltonian import InterpolatedHamiltonian, Term, TermHamiltonian
from .spectral import GapScan, lowest_eigenpairs

__all__ = [
    "EnergyEstimate",
    "VerificationReport",
    "pauli_decomposition",
    "pauli_expectation",
    "energy_estimate",
    "final_gap",
    "ground_overlap",
    "certify",
]

_COEFF_TOL = 1e-14


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    half_width: float
    confidence: float
    shots: int | None
    n_groups: int = 0

    @property
    def exact(self) -> bool:
        return self.shots is None


def _term_paulis(term: Term, n_qubits: int) -> dict[tuple[int, int], float]:
    if term.levels is not None:
        raise ValueError("unary clock terms have no qubit Pauli expansion; use a domain-wall basis")
    k = len(term.wires)
    mat = np.asarray(term.matrix, dtype=complex)
    size = 2**k
    x = np.arange(size)
    out = {}
    for xm in range(size):
        cols = x ^ xm
        col_vals = mat[x, cols]  # <x| M |x^xm>
        if not np.any(np.abs(col_vals) > _COEFF_TOL):
            continue
        for zm in range(size):
            n_y = int(np.bitwise_count(xm & zm))
            # P|y> = i^nY (-1)^{|y & zm|} |y ^ xm>, so Tr(P M) = sum_y phase(y) M[y, y^xm]
            signs = 1 - 2 * (np.bitwise_count(x & zm).astype(np.int64) & 1)
            coeff = (1j**n_y) * np.sum(signs * col_vals) / size
            if abs(coeff) > _COEFF_TOL:
                gx = _globalise(xm, term.wires, k, n_qubits)
                gz = _globalise(zm, term.wires, k, n_qubits)
                if abs(coeff.imag) > 1e-10:
                    raise ValueError("term is not Hermitian")
                out[(gx, gz)] = out.get((gx, gz), 0.0) + float(coeff.real)
    return out


def _globalise(mask: int, wires, k: int, n_qubits: int) -> int:
    g = 0
    for j, w in enumerate(wires):
        if (mask >> (k - 1 - j)) & 1:
            g |= 1 << (n_qubits - 1 - w)
    return g


def pauli_decomposition(h: TermHamiltonian) -> dict[tuple[int, int], float]:
    """Real coefficients keyed by ``(x_mask, z_mask)``; wire 0 is the top bit."""
    if h.basis.kind == "unary":
        raise ValueError("unary clock terms have no qubit Pauli expansion; use a domain-wall basis")
    nq = h.basis.n_qubits
    total: dict[tuple[int, int], float] = {}
    for term in h.terms:
        for key, c in _term_paulis(term, nq).items():
            total[key] = total.get(key, 0.0) + c
    return {k: c for k, c in total.items() if abs(c) > _COEFF_TOL}


def pauli_expectation(psi: np.ndarray, xm: int, zm: int) -> float:
    idx = np.arange(psi.size)
    n_y = int(np.bitwise_count(xm & zm))
    signs = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
    val = (1j**n_y) * np.vdot(psi[idx ^ xm], signs * psi)
    return float(val.real)


def _as_vector_or_density(state):
    if isinstance(state, QuantumState):
        return state.amplitudes, False
    arr = np.asarray(state)
    if arr.ndim == 2:
        if arr.shape[0] != arr.shape[1]:
            raise ValueError("density operator must be square")
        return arr, True
    return arr, False


def energy_estimate(
    state,
    h: TermHamiltonian,
    shots: int | None = None,
    seed: int = 0,
    confidence: float = 0.95,
) -> EnergyEstimate:
    """Estimate ``<H>``; ``shots=None`` gives the exact value with zero half-width.

    ``state`` may be a :class:`QuantumState`, an amplitude vector or (exact
    mode only) a density matrix. In sampled mode the total shot budget is
    split over measurement groups in proportion to their coefficient weight
    ``W_g``; Hoeffding's inequality on the combined estimator gives the
    half-width ``sqrt(2 sum_g W_g^2 / n_g * ln(2 / (1 - confidence)))``.
    """
    vec, is_rho = _as_vector_or_density(state)
    mat = h.matrix()
    if vec.shape[0] != mat.shape[0]:
        raise ValueError(f"state dimension {vec.shape[0]} != Hamiltonian dimension {mat.shape[0]}")
    if shots is None:
        if is_rho:
            value = float(np.real(np.sum(mat.multiply(vec.T))))
        else:
            value = float(np.real(np.vdot(vec, mat @ vec)))
        return EnergyEstimate(value, 0.0, 1.0, None)
    if is_rho:
        raise ValueError("density-operator inputs are supported in exact mode only")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    psi = vec / np.linalg.norm(vec)
    paulis = pauli_decomposition(h)
    const = paulis.pop((0, 0), 0.0)
    diag = {zm: c for (xm, zm), c in paulis.items() if xm == 0}
    offdiag = [((xm, zm), c) for (xm, zm), c in paulis.items() if xm != 0]
    weights = ([sum(abs(c) for c in diag.values())] if diag else []) + [abs(c) for _, c in offdiag]
    if not weights:
        return EnergyEstimate(const, 0.0, confidence, shots, 0)
    w_total = sum(weights)
    alloc = [int(math.floor(shots * w / w_total)) for w in weights]
    if min(alloc) < 1:
        raise ValueError(f"{shots} shots leave a measurement group with fewer than one shot")
    value, var_sum = const, 0.0
    g = 0
    if diag:
        idx = np.arange(psi.size)
        f = np.zeros(psi.size)
        for zm, c in diag.items():
            f += c * (1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1))
        probs = np.abs(psi) ** 2
        rng = np.random.Generator(np.random.Philox(key=[seed, g]))
        draws = rng.choice(psi.size, size=alloc[0], p=probs / probs.sum())
        value += float(np.mean(f[draws]))
        var_sum += weights[0] ** 2 / alloc[0]
        g += 1
    for (xm, zm), c in offdiag:
        ev = max(-1.0, min(1.0, pauli_expectation(psi, xm, zm)))
        rng = np.random.Generator(np.random.Philox(key=[seed, g]))
        plus = rng.binomial(alloc[g], (1.0 + ev) / 2.0)
        value += c * (2.0 * plus / alloc[g] - 1.0)
        var_sum += weights[g] ** 2 / alloc[g]
        g += 1
    hw = math.sqrt(2.0 * var_sum * math.log(2.0 / (1.0 - confidence)))
    return EnergyEstimate(value, hw, confidence, int(sum(alloc)), len(weights))


def final_gap(h, dense_cap: int = 4096) -> float:
    """Gap of ``H_final`` (an :class:`InterpolatedHamiltonian`, TermHamiltonian or matrix)."""
    if isinstance(h, InterpolatedHamiltonian):
        h = h.final
    vals, _, _, _ = lowest_eigenpairs(h, 2, dense_cap)
    return float(vals[1] - vals[0])


def ground_overlap(state, ground: np.ndarray) -> float:
    """``|alpha_0|^2`` for a pure state or density matrix."""
    vec, is_rho = _as_vector_or_density(state)
    g = np.asarray(ground)
    g = g / np.linalg.norm(g)
    if is_rho:
        return float(np.real(np.vdot(g, vec @ g)))
    v = vec / np.linalg.norm(vec)
    return float(abs(np.vdot(g, v)) ** 2)


@dataclass
class VerificationReport:
    energy: float
    half_width: float
    confidence: float
    gap: float
    eps_ver: float
    passed: bool
    overlap_bound: float | None
    fidelity_bound: float | None
    shots: int | None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "E_exp": self.energy,
            "half_width": self.half_width,
            "confidence": self.confidence,
            "gap": self.gap,
            "eps_ver": self.eps_ver,
            "passed": self.passed,
            "overlap_bound": self.overlap_bound,
            "fidelity_bound": self.fidelity_bound,
            "shots": self.shots,
            "meta": self.meta,
        }


def certify(
    state,
    h: TermHamiltonian | InterpolatedHamiltonian,
    eps_ver: float,
    gap: float | GapScan | None = None,
    shots: int | None = None,
    seed: int = 0,
    confidence: float = 0.95,
) -> VerificationReport:
    """Pass iff ``E_exp + half_width < eps_ver * Delta``.

    ``gap`` defaults to the gap of ``H_final`` computed here. A :class:`GapScan`
    contributes its value at ``s = 1``.
    """
    if not 0.0 < eps_ver < 1.0:
        raise ValueError("eps_ver must lie in (0, 1)")
    hf = h.final if isinstance(h, InterpolatedHamiltonian) else h
    if gap is None:
        delta = final_gap(hf)
    elif isinstance(gap, GapScan):
        if gap.s[-1] != 1.0:
            raise ValueError("gap scan does not include s = 1")
        delta = float(gap.gap[-1])
    else:
        delta = float(gap)
    if not delta > 0:
        raise ValueError("gap must be positive")
    est = energy_estimate(state, hf, shots, seed, confidence)
    passed = est.value + est.half_width < eps_ver * delta
    bound = 1.0 - eps_ver if passed else None
    return VerificationReport(
        est.value,
        est.half_width,
        est.confidence,
        delta,
        eps_ver,
        bool(passed),
        bound,
        math.sqrt(bound) if bound is not None else None,
        est.shots,
        {"seed": seed, "n_groups": est.n_groups},
    )
