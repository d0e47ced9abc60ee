"""Steane-code protection of the final Pauli measurements.

The [[7,1,3]] code is self-dual: the X and Z checks are both the three rows of
the Hamming parity-check matrix, so a logical X, Y or Z measurement is a
transversal single-qubit measurement followed by classical decoding. The
encoder uses CNOTs only, with three |+> and three |0> ancillas, so an encoded
circuit stays inside the stoquastic gate set.

Block positions: the data qubit sits at position 2, |+> pivots at 0, 1, 3 and
|0> ancillas at 4, 5, 6.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .circuit import Circuit, Gate, QuantumState
from .measurement import MeasurementPlan, sample

__all__ = [
    "CSSCode",
    "steane_code",
    "encoding_circuit",
    "encode_circuit",
    "transversal_decode",
    "decode_batch",
    "DecodeResult",
    "noisy_measurement_experiment",
    "ExperimentReport",
]

DATA_POSITION = 2
PLUS_POSITIONS = (0, 1, 3)
ZERO_POSITIONS = (4, 5, 6)


def _gf2_rank(mat: np.ndarray) -> int:
    m = mat.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        rows = [r for r in range(rank, m.shape[0]) if m[r, col]]
        if not rows:
            continue
        m[[rank, rows[0]]] = m[[rows[0], rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _in_rowspace(v: np.ndarray, rows: np.ndarray) -> bool:
    return _gf2_rank(np.vstack([rows, v])) == _gf2_rank(rows)


@dataclass(frozen=True)
class CSSCode:
    n: int
    k: int
    hx: np.ndarray
    hz: np.ndarray
    logical_x: np.ndarray
    logical_z: np.ndarray
    encoder: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if np.any((self.hx @ self.hz.T) % 2):
            raise ValueError("X and Z checks do not commute")

    @property
    def self_dual(self) -> bool:
        return self.hx.shape == self.hz.shape and bool(np.all(self.hx == self.hz))

    def syndrome(self, bits, basis: str) -> tuple[int, ...]:
        """Syndrome of a transversal readout; Z outcomes are checked by ``hz``, X by ``hx``."""
        h = self.hx if basis == "X" else self.hz
        if basis == "Y" and not self.self_dual:
            raise ValueError("transversal Y readout needs a self-dual code")
        return tuple(int(v) for v in (h @ np.asarray(bits)) % 2)

    def distance(self) -> int:
        """Minimum weight of a nontrivial logical operator, by enumeration."""
        best = self.n
        for bits in itertools.product((0, 1), repeat=self.n):
            v = np.array(bits)
            w = int(v.sum())
            if w == 0 or w >= best:
                continue
            # X-type logical: commutes with Z checks, not an X stabilizer
            if not np.any((self.hz @ v) % 2) and not _in_rowspace(v, self.hx):
                best = w
            elif not np.any((self.hx @ v) % 2) and not _in_rowspace(v, self.hz):
                best = w
        return best

    def codewords(self, logical: int = 0) -> list[tuple[int, ...]]:
        """Computational-basis strings in the support of encoded |logical>."""
        rows = self.hx
        out = set()
        for coeffs in itertools.product((0, 1), repeat=rows.shape[0]):
            v = (np.array(coeffs) @ rows + logical * self.logical_x) % 2
            out.add(tuple(int(b) for b in v))
        return sorted(out)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "n": self.n,
            "k": self.k,
            "hx": self.hx.tolist(),
            "hz": self.hz.tolist(),
            "logical_x": self.logical_x.tolist(),
            "logical_z": self.logical_z.tolist(),
            "self_dual": self.self_dual,
            "encoder": [list(g) for g in self.encoder],
            "block_positions": {"data": DATA_POSITION, "plus": list(PLUS_POSITIONS), "zero": list(ZERO_POSITIONS)},
        }


def steane_code() -> CSSCode:
    h = np.array(
        [
            [0, 0, 0, 1, 1, 1, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [1, 0, 1, 0, 1, 0, 1],
        ],
        dtype=np.int64,
    )
    ones = np.ones(7, dtype=np.int64)
    # copy the data onto the weight-3 logical representative {2, 4, 5}, then
    # let every |+> pivot add its check row
    encoder = ((2, 4), (2, 5), (3, 4), (3, 5), (3, 6), (1, 2), (1, 5), (1, 6), (0, 2), (0, 4), (0, 6))
    return CSSCode(7, 1, h.copy(), h.copy(), ones, ones.copy(), encoder)


def encoding_circuit(code: CSSCode, block: tuple[int, ...], circuit: Circuit | None = None) -> list[Gate]:
    """CNOT list encoding the qubit on ``block[2]`` into the 7 wires of ``block``.

    With ``circuit`` given, the six ancillas must be untouched by its gates and
    carry the right preparations (plus-wires at positions 0, 1, 3, zero-wires
    at 4, 5, 6).
    """
    block = tuple(block)
    if len(block) != code.n or len(set(block)) != code.n:
        raise ValueError(f"need {code.n} distinct block wires")
    if circuit is not None:
        ancillas = [block[i] for i in PLUS_POSITIONS + ZERO_POSITIONS]
        touched = {w for g in circuit.gates for w in g.wires}
        used = [w for w in ancillas if w in touched]
        if used:
            raise ValueError(f"ancilla wires {used} are not fresh")
        if any(block[i] < circuit.n for i in PLUS_POSITIONS):
            raise ValueError("plus ancillas must be plus-wires")
        if any(block[i] >= circuit.n for i in ZERO_POSITIONS):
            raise ValueError("zero ancillas must be zero-wires")
    return [Gate("CNOT", (block[a], block[b])) for a, b in code.encoder]


def encode_circuit(
    c: Circuit, wires=None, code: CSSCode | None = None
) -> tuple[Circuit, list[tuple[int, ...]]]:
    """Append encoders for ``wires`` (default: all) and renumber the register.

    New zero ancillas are inserted after the old zero wires, new plus
    ancillas after the old plus wires. Returns the circuit and, per encoded
    wire, its block in position order.
    """
    code = code or steane_code()
    wires = list(range(c.width)) if wires is None else list(wires)
    if len(set(wires)) != len(wires) or any(not 0 <= w < c.width for w in wires):
        raise ValueError("invalid wire selection")
    k = len(wires)
    nz, npl = 3 * k, 3 * k
    n_new, m_new = c.n + nz, c.m + npl

    def old(w):
        return w if w < c.n else w + nz

    gates = [g.remap({w: old(w) for w in g.wires}) for g in c.gates]
    blocks = []
    for j, w in enumerate(wires):
        zeros = [c.n + 3 * j + i for i in range(3)]
        pluses = [n_new + c.m + 3 * j + i for i in range(3)]
        block = [0] * 7
        block[DATA_POSITION] = old(w)
        for pos, wire in zip(PLUS_POSITIONS, pluses):
            block[pos] = wire
        for pos, wire in zip(ZERO_POSITIONS, zeros):
            block[pos] = wire
        blocks.append(tuple(block))
    base = Circuit(n_new, m_new, tuple(gates))
    for block in blocks:
        gates += encoding_circuit(code, block, base)
    return Circuit(n_new, m_new, tuple(gates)), blocks


@dataclass(frozen=True)
class DecodeResult:
    logical: int
    corrected: int | None  # flipped position, if any
    uncorrectable: bool

    @property
    def correction_applied(self) -> bool:
        return self.corrected is not None


def _syndrome_table(code: CSSCode, basis: str) -> dict[tuple[int, ...], int]:
    table = {}
    for pos in range(code.n):
        e = np.zeros(code.n, dtype=np.int64)
        e[pos] = 1
        table[code.syndrome(e, basis)] = pos
    return table


def transversal_decode(outcomes, basis: str, code: CSSCode | None = None) -> DecodeResult:
    """Logical bit (0 = +1 eigenvalue) from ``n`` transversal outcome bits.

    A nonzero syndrome matching a single-position flip is corrected. Syndromes
    outside the single-flip table are flagged uncorrectable and decoded as is.
    For the Steane code every syndrome matches some single flip, so higher
    weight errors are miscorrected silently.

    Y readout: ``Y_L = i X_L Z_L = -Y^(x7)`` for the all-ones representatives,
    so the logical bit is the outcome parity flipped.
    """
    code = code or steane_code()
    basis = basis.upper()
    if basis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown basis {basis!r}")
    bits = np.asarray(outcomes, dtype=np.int64) % 2
    if bits.shape != (code.n,):
        raise ValueError(f"need {code.n} outcome bits")
    syn = code.syndrome(bits, basis)
    corrected, bad = None, False
    if any(syn):
        pos = _syndrome_table(code, basis).get(syn)
        if pos is None:
            bad = True
        else:
            bits = bits.copy()
            bits[pos] ^= 1
            corrected = pos
    rep = code.logical_x if basis == "X" else code.logical_z
    value = int(bits @ rep % 2)
    if basis == "Y":
        value ^= _y_sign_flip(code)
    return DecodeResult(value, corrected, bad)


def decode_batch(outcomes: np.ndarray, basis: str, code: CSSCode | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`transversal_decode`: ``(logical bits, uncorrectable flags)``."""
    code = code or steane_code()
    basis = basis.upper()
    bits = np.asarray(outcomes, dtype=np.int64) % 2
    h = code.hx if basis == "X" else code.hz
    r = h.shape[0]
    weights = 1 << np.arange(r - 1, -1, -1)
    lookup = np.full(2**r, -1)
    lookup[0] = code.n  # sentinel: nothing to correct
    for syn, pos in _syndrome_table(code, basis).items():
        lookup[int(np.dot(syn, weights))] = pos
    pos = lookup[((bits @ h.T) % 2) @ weights]
    fix = np.zeros((bits.shape[0], code.n + 1), dtype=np.int64)
    fix[np.arange(bits.shape[0]), np.where(pos < 0, code.n, pos)] = 1
    bits = bits ^ fix[:, : code.n]
    rep = code.logical_x if basis == "X" else code.logical_z
    value = (bits @ rep) % 2
    if basis == "Y":
        value ^= _y_sign_flip(code)
    return value, pos < 0


def _y_sign_flip(code: CSSCode) -> int:
    # i X_L Z_L with X_L, Z_L on the same support w: i * (XZ)^w = i (-i)^w Y^w
    w = int(np.sum(code.logical_x * code.logical_z))
    phase = (1j * (-1j) ** w)
    return 0 if np.isclose(phase, 1.0) else 1


@dataclass
class ExperimentReport:
    p: float
    shots: int
    basis: str
    logical_errors: int
    baseline: float
    seed: int
    uncorrectable: int = 0

    @property
    def logical_error_rate(self) -> float:
        return self.logical_errors / self.shots if self.shots else 0.0

    def upper_bound(self, confidence: float = 0.99) -> float:
        """One-sided Clopper-Pearson upper limit on the logical error rate."""
        if self.logical_errors == self.shots:
            return 1.0
        return float(stats.beta.ppf(confidence, self.logical_errors + 1, self.shots - self.logical_errors))

    @property
    def leading_order(self) -> float:
        return math.comb(7, 2) * self.p**2

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "p": self.p,
            "shots": self.shots,
            "basis": self.basis,
            "seed": self.seed,
            "logical_errors": self.logical_errors,
            "logical_error_rate": self.logical_error_rate,
            "upper_99": self.upper_bound(0.99),
            "baseline": self.baseline,
            "leading_order": self.leading_order,
            "uncorrectable": self.uncorrectable,
        }


def noisy_measurement_experiment(
    state: QuantumState,
    block: tuple[int, ...],
    basis: str,
    p: float,
    shots: int,
    seed: int = 0,
    accept=(),
    code: CSSCode | None = None,
) -> ExperimentReport:
    """Transversal readout of one block with i.i.d. outcome flips at rate ``p``.

    A logical error is a shot whose decoded value differs from the decoded
    value of the same shot before the flips. The unencoded baseline is ``p``.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    code = code or steane_code()
    basis = basis.upper()
    nw = state.basis.n_work
    bases = [None] * nw
    for w in block:
        bases[w] = basis
    plan = MeasurementPlan(tuple(bases), tuple(accept), shots, seed)
    recs = [r for r in sample(state, plan) if r.accepted]
    order = sorted(block)
    pick = [order.index(w) for w in block]  # outcome order -> block position order
    clean = np.array([[r.outcome[i] for i in pick] for r in recs], dtype=np.int64).reshape(-1, code.n)
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    noisy = clean ^ (rng.random(clean.shape) < p)
    ref, _ = decode_batch(clean, basis, code)
    got, bad = decode_batch(noisy.astype(np.int64), basis, code)
    return ExperimentReport(p, len(recs), basis, int(np.sum(ref != got)), p, seed, int(np.sum(bad)))
