"""Lowering a reversible circuit into the clock Hamiltonian family H(s).

Two clock backends share one term representation:

* unary: a ``(T+1)``-level clock factor; index = work_index * (T+1) + t.
* domain-wall: ``T`` clock qubits appended after the work wires; clock value
  ``t`` is the string ``1..1 0..0`` with ``t`` leading ones.

A :class:`Term` is a dense local matrix on a few wires. In unary mode a term
may also carry a clock window ``levels``; the local matrix then acts on
``wires x levels`` and is zero outside that window.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .circuit import Basis, CapExceededError, Circuit, Gate

__all__ = [
    "Term",
    "TermHamiltonian",
    "InterpolatedHamiltonian",
    "StoquasticityReport",
    "build_unary",
    "build_domain_wall",
    "assemble_sparse",
    "check_stoquastic",
    "clock_penalty",
    "HAMILTONIAN_CAP",
]

#: Default cap on the Hilbert-space dimension of an assembled Hamiltonian.
HAMILTONIAN_CAP = 2**20

_P0 = np.array([[1.0, 0.0], [0.0, 0.0]])
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]])
_PMINUS = np.array([[0.5, -0.5], [-0.5, 0.5]])


@dataclass(frozen=True)
class Term:
    wires: tuple[int, ...]
    matrix: np.ndarray
    tag: str
    levels: tuple[int, ...] | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        size = 2 ** len(self.wires) * (len(self.levels) if self.levels else 1)
        if mat.shape != (size, size):
            raise ValueError(f"term {self.tag!r}: matrix shape {mat.shape} != ({size}, {size})")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "wires", tuple(self.wires))

    @property
    def support(self) -> int:
        """Number of subsystems touched; a unary clock window counts as one slot."""
        return len(self.wires) + (1 if self.levels is not None else 0)


def _wire_offsets(wires, n_qubits):
    """Basis-index contribution of each local index on ``wires``."""
    k = len(wires)
    local = np.arange(2**k)
    off = np.zeros(2**k, dtype=np.int64)
    for j, w in enumerate(wires):
        bit = (local >> (k - 1 - j)) & 1
        off += bit.astype(np.int64) << (n_qubits - 1 - w)
    return off


def _embed(term: Term, basis: Basis):
    """COO triplets of ``term`` embedded in the full space of ``basis``."""
    nq = basis.n_qubits
    rest = [w for w in range(nq) if w not in term.wires]
    rest_off = _wire_offsets(rest, nq)
    rows_l, cols_l = np.nonzero(term.matrix)
    vals = term.matrix[rows_l, cols_l]
    if term.levels is None:
        loc = _wire_offsets(term.wires, nq)
        if basis.kind == "unary":
            # acts as identity on the clock factor
            L = basis.clock
            base_r = (loc[rows_l][:, None] + rest_off[None, :]) * L
            base_c = (loc[cols_l][:, None] + rest_off[None, :]) * L
            t = np.arange(L)
            rows = (base_r[:, :, None] + t).ravel()
            cols = (base_c[:, :, None] + t).ravel()
            data = np.broadcast_to(vals[:, None, None], base_r.shape + (L,)).ravel()
            return rows, cols, data
        rows = (loc[rows_l][:, None] + rest_off[None, :]).ravel()
        cols = (loc[cols_l][:, None] + rest_off[None, :]).ravel()
        data = np.repeat(vals, rest_off.size)
        return rows, cols, data
    if basis.kind != "unary":
        raise ValueError("clock windows only exist in the unary basis")
    nl = len(term.levels)
    lev = np.asarray(term.levels, dtype=np.int64)
    loc = _wire_offsets(term.wires, nq)
    L = basis.clock
    rw, rc = rows_l // nl, rows_l % nl
    cw, cc = cols_l // nl, cols_l % nl
    rows = ((loc[rw][:, None] + rest_off[None, :]) * L + lev[rc][:, None]).ravel()
    cols = ((loc[cw][:, None] + rest_off[None, :]) * L + lev[cc][:, None]).ravel()
    data = np.repeat(vals, rest_off.size)
    return rows, cols, data


@dataclass
class TermHamiltonian:
    """A sum of local terms over a declared basis, assembled lazily."""

    basis: Basis
    terms: list[Term] = field(default_factory=list)

    def __post_init__(self):
        self._cache = None
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def __add__(self, other: "TermHamiltonian") -> "TermHamiltonian":
        if other.basis != self.basis:
            raise ValueError("cannot add Hamiltonians over different bases")
        return TermHamiltonian(self.basis, list(self.terms) + list(other.terms))

    def matrix(self) -> sp.csr_matrix:
        with self._lock:
            if self._cache is None:
                self._cache = assemble_sparse(self)
            return self._cache

    def max_locality(self) -> int:
        return max((t.support for t in self.terms), default=0)

    def to_dict(self) -> dict:
        terms = []
        for t in self.terms:
            m = np.asarray(t.matrix, dtype=complex)
            entry = {
                "wires": list(t.wires),
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
                "tag": t.tag,
            }
            if t.levels is not None:
                entry["levels"] = list(t.levels)
            terms.append(entry)
        return {
            "schema_version": 1,
            "basis": self.basis.to_dict(),
            "dimension": self.dimension,
            "terms": terms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "TermHamiltonian":
        terms = []
        for e in d["terms"]:
            mat = np.array([[complex(re, im) for re, im in row] for row in e["matrix"]])
            if not np.iscomplexobj(mat) or np.all(mat.imag == 0):
                mat = mat.real
            levels = tuple(e["levels"]) if "levels" in e else None
            terms.append(Term(tuple(e["wires"]), mat, e["tag"], levels))
        return cls(Basis(**d["basis"]), terms)

    def to_coo_text(self) -> str:
        """Coordinate listing ``row col re im``, sorted row-major."""
        coo = self.matrix().tocoo()
        order = np.lexsort((coo.col, coo.row))
        data = coo.data.astype(complex)
        lines = [f"{coo.row[i]} {coo.col[i]} {float(data[i].real)!r} {float(data[i].imag)!r}" for i in order]
        return "\n".join(lines) + ("\n" if lines else "")


def assemble_sparse(h: TermHamiltonian) -> sp.csr_matrix:
    """Row-compressed matrix of ``h``; duplicate entries are summed."""
    dim = h.dimension
    if dim > HAMILTONIAN_CAP:
        raise CapExceededError(f"dimension {dim} exceeds the Hamiltonian cap {HAMILTONIAN_CAP}")
    real = all(not np.iscomplexobj(t.matrix) or not np.any(t.matrix.imag) for t in h.terms)
    dtype = np.float64 if real else np.complex128
    parts = [_embed(t, h.basis) for t in h.terms]
    if parts:
        rows = np.concatenate([p[0] for p in parts])
        cols = np.concatenate([p[1] for p in parts])
        data = np.concatenate([np.asarray(p[2]).real if real else p[2] for p in parts]).astype(dtype)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0, dtype=dtype)
    mat = sp.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


@dataclass(frozen=True)
class InterpolatedHamiltonian:
    """``H(s) = (1 - s) H_initial + s H_final`` over a common basis."""

    initial: TermHamiltonian
    final: TermHamiltonian
    circuit: Circuit | None = None
    accept: tuple[int, ...] = ()

    def __post_init__(self):
        if self.initial.basis != self.final.basis:
            raise ValueError("initial and final Hamiltonians use different bases")

    @property
    def basis(self) -> Basis:
        return self.final.basis

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def __call__(self, s: float) -> sp.csr_matrix:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"schedule parameter {s} outside [0, 1]")
        a, b = self.initial.matrix(), self.final.matrix()
        if s == 0.0:
            return a.copy()
        if s == 1.0:
            return b.copy()
        return ((1.0 - s) * a + s * b).tocsr()


def _check_dim(dim: int, cap: int):
    if dim > cap:
        raise CapExceededError(f"Hilbert-space dimension {dim} exceeds the cap {cap}")


def _input_penalty(c: Circuit, clock_wires: tuple[int, ...], clock_proj, levels):
    """H_in: |1><1| on zero-wires and |-><-| on plus-wires, when the clock reads 0."""
    terms = []
    for i in range(c.width):
        local = _P1 if i < c.n else _PMINUS
        if levels is None:
            mat = np.kron(local, clock_proj)
        else:
            mat = local.copy()
        terms.append(Term((i,) + clock_wires, mat, "H_in", levels))
    return terms


def build_unary(c: Circuit, pad: bool = False, cap: int = HAMILTONIAN_CAP) -> InterpolatedHamiltonian:
    """Interpolating pair over work x ``(T+1)``-level clock (``2T`` levels if padded)."""
    T_orig = c.T
    if pad:
        c = c.padded()
    L = c.T + 1
    basis = Basis("unary", c.width, L)
    _check_dim(basis.dimension, cap)
    h_in = _input_penalty(c, (), None, (0,))
    initial = list(h_in)
    if L > 1:
        initial.append(Term((), np.eye(L - 1), "clock-penalty", tuple(range(1, L))))
    final = list(h_in)
    for t, g in enumerate(c.gates, start=1):
        final.append(_unary_propagation(g, t))
    accept = tuple(range(T_orig, 2 * T_orig)) if pad else (c.T,)
    return InterpolatedHamiltonian(
        TermHamiltonian(basis, initial), TermHamiltonian(basis, final), c, accept
    )


def _unary_propagation(g: Gate, t: int) -> Term:
    # window order (t-1, t): 1/2 [ I x (|t-1><t-1| + |t><t|) - U x |t><t-1| - U^T x |t-1><t| ]
    u = g.matrix()
    eye = np.eye(u.shape[0])
    e_prev = np.array([[1.0, 0.0], [0.0, 0.0]])
    e_next = np.array([[0.0, 0.0], [0.0, 1.0]])
    step_up = np.array([[0.0, 0.0], [1.0, 0.0]])  # |t><t-1|
    mat = 0.5 * (np.kron(eye, e_prev + e_next) - np.kron(u, step_up) - np.kron(u.T, step_up.T))
    return Term(g.wires, mat, "propagation", (t - 1, t))


def _projector(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits))
    v[int(bits, 2)] = 1.0
    return np.outer(v, v)


def _ket_bra(ket: str, bra: str) -> np.ndarray:
    size = 2 ** len(ket)
    out = np.zeros((size, size))
    out[int(ket, 2), int(bra, 2)] = 1.0
    return out


def clock_penalty(n_work: int, T: int) -> list[Term]:
    """H_clock: ``|01><01|`` on every neighbouring clock pair (i, i+1)."""
    p01 = _projector("01")
    return [Term((n_work + i, n_work + i + 1), p01, "H_clock") for i in range(T - 1)]


def _domain_wall_propagation(g: Gate, t: int, T: int, n_work: int) -> Term:
    """Propagation term for step ``t`` with clock qubits (t-1, t, t+1) truncated at the ends."""
    clock = []
    prefix, suffix = "", ""
    if t > 1:
        clock.append(t - 1)
        prefix = "1"
    clock.append(t)
    if t < T:
        clock.append(t + 1)
        suffix = "0"
    before = prefix + "0" + suffix  # |t-1>: qubit t still 0
    after = prefix + "1" + suffix  # |t>: qubit t flipped to 1
    p_before, p_after = _projector(before), _projector(after)
    hop = _ket_bra(after, before)
    u = g.matrix()
    eye = np.eye(u.shape[0])
    mat = 0.5 * (np.kron(eye, p_before + p_after) - np.kron(u, hop) - np.kron(u.T, hop.T))
    wires = g.wires + tuple(n_work + q - 1 for q in clock)
    return Term(wires, mat, "propagation")


def build_domain_wall(c: Circuit, pad: bool = False, cap: int = HAMILTONIAN_CAP) -> InterpolatedHamiltonian:
    """Interpolating pair over work qubits plus ``T`` domain-wall clock qubits.

    Both operators include the illegal-clock penalty ``H_clock`` at unit weight.
    """
    T_orig = c.T
    if pad:
        c = c.padded()
    T = c.T
    nw = c.width
    basis = Basis("domain_wall", nw, T)
    _check_dim(basis.dimension, cap)
    first = nw  # wire of clock qubit 1
    h_in = _input_penalty(c, (first,), _P0, None)
    h_clock = clock_penalty(nw, T)
    initial = list(h_in) + [Term((first,), _P1.copy(), "clock-penalty")] + h_clock
    final = list(h_in)
    for t, g in enumerate(c.gates, start=1):
        final.append(_domain_wall_propagation(g, t, T, nw))
    final += h_clock
    accept = tuple(range(T_orig, 2 * T_orig)) if pad else (T,)
    return InterpolatedHamiltonian(
        TermHamiltonian(basis, initial), TermHamiltonian(basis, final), c, accept
    )


@dataclass
class StoquasticityReport:
    tol: float
    violations: list[tuple[int, int, complex]]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def check_stoquastic(h, tol: float = 1e-12) -> StoquasticityReport:
    """List off-diagonal entries with positive real part or nonzero imaginary part."""
    if isinstance(h, TermHamiltonian):
        h = h.matrix()
    coo = sp.coo_matrix(h)
    if coo.shape[0] != coo.shape[1]:
        raise ValueError("stoquasticity is defined for square matrices")
    off = coo.row != coo.col
    r, c, v = coo.row[off], coo.col[off], coo.data[off]
    bad = (np.real(v) > tol) | (np.abs(np.imag(v)) > tol)
    viol = [(int(i), int(j), complex(x)) for i, j, x in zip(r[bad], c[bad], v[bad])]
    return StoquasticityReport(tol, viol)
