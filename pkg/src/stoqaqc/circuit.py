"""Reversible circuits over |0>- and |+>-initialised wires.

Wire convention: a circuit has ``n`` zero-wires (indices ``0..n-1``) followed by
``m`` plus-wires (indices ``n..n+m-1``). Wire 0 is the most significant bit of
a basis index. Every gate is a classical permutation of basis states, so its
matrix is a 0/1 permutation matrix.

Text format (one statement per line, ``#`` starts a comment)::

    work <n> <m>
    X <q>
    CNOT <control> <target>
    CCX <a> <b> <target>
    ID
    PERM <k> <q1> ... <qk> <image_0> ... <image_{2^k-1}>

For ``PERM`` the listed wires form a local index with ``q1`` as the most
significant bit, and the gate maps local basis state ``i`` to ``image_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Gate",
    "Circuit",
    "Basis",
    "QuantumState",
    "CircuitSyntaxError",
    "CapExceededError",
    "parse_circuit",
    "serialize_circuit",
    "load_circuit",
    "run_circuit",
    "partial_history",
    "apply_gate",
    "apply_gates",
    "initial_state",
    "STATEVECTOR_CAP",
]

#: Default upper bound on ``n + m`` for dense statevector simulation.
STATEVECTOR_CAP = 24
PERM_ARITY_CAP = 8

_KINDS = ("X", "CNOT", "TOFFOLI", "ID", "PERM")
_ARITY = {"X": 1, "CNOT": 2, "TOFFOLI": 3, "ID": 0}


class CircuitSyntaxError(ValueError):
    """Raised for malformed circuit text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CapExceededError(ValueError):
    """Raised when a requested simulation exceeds a configured size cap."""


@dataclass(frozen=True)
class Gate:
    """A permutation gate.

    ``wires`` lists the wires the gate touches. For CNOT the order is
    ``(control, target)``, for TOFFOLI ``(a, b, target)``. ``table`` is only
    set for PERM gates.
    """

    kind: str
    wires: tuple[int, ...] = ()
    table: tuple[int, ...] | None = None
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.kind}: wires must be distinct, got {self.wires}")
        if any(w < 0 for w in self.wires):
            raise ValueError(f"{self.kind}: negative wire index")
        if self.kind == "PERM":
            if self.table is None:
                raise ValueError("PERM gate needs a permutation table")
            table = tuple(int(v) for v in self.table)
            object.__setattr__(self, "table", table)
            k = len(self.wires)
            if not 1 <= k <= PERM_ARITY_CAP:
                raise ValueError(f"PERM arity must be in 1..{PERM_ARITY_CAP}, got {k}")
            if sorted(table) != list(range(2**k)):
                raise ValueError("PERM table is not a bijection on {0..2^k-1}")
        else:
            if self.table is not None:
                raise ValueError(f"{self.kind} takes no table")
            if len(self.wires) != _ARITY[self.kind]:
                raise ValueError(
                    f"{self.kind} expects {_ARITY[self.kind]} wires, got {len(self.wires)}"
                )

    @property
    def arity(self) -> int:
        return len(self.wires)

    def permutation(self) -> np.ndarray:
        """Image of every local basis index (first wire = most significant bit)."""
        k = self.arity
        idx = np.arange(2**k)
        if self.kind == "ID":
            return idx
        if self.kind == "X":
            return idx ^ 1
        if self.kind == "CNOT":
            return np.where(idx & 2, idx ^ 1, idx)
        if self.kind == "TOFFOLI":
            return np.where((idx & 6) == 6, idx ^ 1, idx)
        return np.asarray(self.table, dtype=np.int64)

    def matrix(self) -> np.ndarray:
        """Local 0/1 permutation matrix, ``U[perm[i], i] = 1``."""
        perm = self.permutation()
        u = np.zeros((perm.size, perm.size))
        u[perm, np.arange(perm.size)] = 1.0
        return u

    def remap(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[w] for w in self.wires), self.table)

    def to_text(self) -> str:
        w = " ".join(str(q) for q in self.wires)
        if self.kind == "ID":
            return "ID"
        if self.kind == "TOFFOLI":
            return f"CCX {w}"
        if self.kind == "PERM":
            return f"PERM {self.arity} {w} " + " ".join(str(v) for v in self.table)
        return f"{self.kind} {w}"


@dataclass(frozen=True)
class Circuit:
    n: int
    m: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 0 or self.m < 0:
            raise ValueError("wire counts must be nonnegative")
        if not self.gates:
            raise ValueError("a circuit needs at least one gate (T >= 1)")
        for g in self.gates:
            bad = [w for w in g.wires if w >= self.width]
            if bad:
                raise ValueError(f"{g.to_text()!r}: wire {bad[0]} out of range for {self.width} wires")

    @property
    def width(self) -> int:
        return self.n + self.m

    @property
    def T(self) -> int:
        return len(self.gates)

    def padded(self) -> "Circuit":
        """Append ``T - 1`` identity gates so the clock runs over ``0..2T-1``."""
        return Circuit(self.n, self.m, self.gates + (Gate("ID"),) * (self.T - 1))

    def __str__(self) -> str:
        return serialize_circuit(self)


def _int(tok: str, lineno: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitSyntaxError(f"expected an integer, got {tok!r}", lineno, col) from None


def parse_circuit(text: str) -> Circuit:
    """Parse the circuit text format into a :class:`Circuit`."""
    header = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        # token columns are 1-based offsets into the raw line
        toks, cols, pos = [], [], 0
        for tok in body.split():
            pos = body.index(tok, pos)
            toks.append(tok)
            cols.append(pos + 1)
            pos += len(tok)
        head = toks[0].upper()
        if header is None:
            if head != "WORK" or len(toks) != 3:
                raise CircuitSyntaxError("first statement must be 'work <n> <m>'", lineno, cols[0])
            n, m = _int(toks[1], lineno, cols[1]), _int(toks[2], lineno, cols[2])
            if n < 0 or m < 0:
                raise CircuitSyntaxError("wire counts must be nonnegative", lineno, cols[1])
            header = (n, m)
            continue
        width = header[0] + header[1]
        args = [_int(t, lineno, c) for t, c in zip(toks[1:], cols[1:])]
        expected = {"X": 1, "CNOT": 2, "CX": 2, "CCX": 3, "TOFFOLI": 3, "ID": 0}
        if head in expected:
            if len(args) != expected[head]:
                raise CircuitSyntaxError(
                    f"{head} takes {expected[head]} wire arguments, got {len(args)}", lineno, cols[0]
                )
            kind = {"CX": "CNOT", "CCX": "TOFFOLI"}.get(head, head)
            wires, table, wire_cols = args, None, cols[1:]
        elif head == "PERM":
            if not args:
                raise CircuitSyntaxError("PERM needs an arity", lineno, cols[0])
            k = args[0]
            if not 1 <= k <= PERM_ARITY_CAP:
                raise CircuitSyntaxError(f"PERM arity must be in 1..{PERM_ARITY_CAP}", lineno, cols[1])
            if len(args) != 1 + k + 2**k:
                raise CircuitSyntaxError(
                    f"PERM {k} needs {k} wires and {2**k} images, got {len(args) - 1} values",
                    lineno,
                    cols[0],
                )
            kind = "PERM"
            wires, table, wire_cols = args[1 : 1 + k], args[1 + k :], cols[2 : 2 + k]
            if sorted(table) != list(range(2**k)):
                raise CircuitSyntaxError("PERM table is not a bijection", lineno, cols[2 + k])
        else:
            raise CircuitSyntaxError(f"unknown gate {toks[0]!r}", lineno, cols[0])
        for w, c in zip(wires, wire_cols):
            if not 0 <= w < width:
                raise CircuitSyntaxError(f"wire index {w} out of range (width {width})", lineno, c)
        if len(set(wires)) != len(wires):
            raise CircuitSyntaxError("gate wires must be distinct", lineno, cols[0])
        gates.append(Gate(kind, tuple(wires), None if table is None else tuple(table), line=lineno))
    if header is None:
        raise CircuitSyntaxError("missing 'work <n> <m>' header", 1)
    if not gates:
        raise CircuitSyntaxError("circuit has no gates", len(text.splitlines()) or 1)
    return Circuit(header[0], header[1], tuple(gates))


def serialize_circuit(c: Circuit) -> str:
    return "\n".join([f"work {c.n} {c.m}"] + [g.to_text() for g in c.gates]) + "\n"


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


@dataclass(frozen=True)
class Basis:
    """Layout of a state or operator.

    kind is ``"work"`` (work qubits only), ``"unary"`` (work qubits times a
    ``clock``-level clock, index = work * clock + t) or ``"domain_wall"``
    (work qubits followed by ``clock`` clock qubits; clock qubit ``i`` is wire
    ``n_work + i - 1``).
    """

    kind: str
    n_work: int
    clock: int = 0

    def __post_init__(self):
        if self.kind not in ("work", "unary", "domain_wall"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "work" and self.clock:
            raise ValueError("work basis has no clock")

    @property
    def dimension(self) -> int:
        if self.kind == "unary":
            return 2**self.n_work * self.clock
        return 2 ** (self.n_work + self.clock)

    @property
    def n_qubits(self) -> int:
        """Qubit count of the register (clock qubits included for domain-wall)."""
        return self.n_work + (self.clock if self.kind == "domain_wall" else 0)

    @property
    def n_steps(self) -> int:
        """Largest clock value T."""
        return self.clock - 1 if self.kind == "unary" else self.clock

    def clock_index(self, t: int) -> int:
        """Index of legal clock value ``t`` inside the clock factor."""
        if self.kind == "unary":
            return t
        T = self.clock
        return ((1 << t) - 1) << (T - t)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_work": self.n_work, "clock": self.clock}


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray
    basis: Basis

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size != self.basis.dimension:
            raise ValueError(f"amplitude vector of size {amps.size} does not match basis dimension {self.basis.dimension}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalised (norm {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def clock_slices(self) -> dict[int, np.ndarray]:
        """Work-register amplitudes for every legal clock value ``t`` (unnormalised)."""
        b = self.basis
        if b.kind == "work":
            raise ValueError("state has no clock register")
        grid = self.amplitudes.reshape(2**b.n_work, -1)
        return {t: grid[:, b.clock_index(t)] for t in range(b.n_steps + 1)}

    def to_dict(self) -> dict:
        a = self.amplitudes.astype(complex)
        return {
            "schema_version": 1,
            "basis": self.basis.to_dict(),
            "amplitudes": [[float(z.real), float(z.imag)] for z in a],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumState":
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
        return cls(amps, Basis(**d["basis"]))


def initial_state(n: int, m: int) -> np.ndarray:
    """Amplitudes of |0>^n |+>^m (wire 0 most significant)."""
    zero = np.zeros(2**n)
    zero[0] = 1.0
    plus = np.full(2**m, 2.0 ** (-m / 2))
    return np.kron(zero, plus)


def apply_gate(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    """Apply a permutation gate to a dense state by index remapping."""
    if gate.kind == "ID":
        return state
    k = gate.arity
    perm = gate.permutation()
    tensor = state.reshape((2,) * n_qubits)
    moved = np.moveaxis(tensor, gate.wires, range(k)).reshape(2**k, -1)
    out = np.empty_like(moved)
    out[perm] = moved
    out = np.moveaxis(out.reshape((2,) * n_qubits), range(k), gate.wires)
    return np.ascontiguousarray(out).reshape(-1)


def apply_gates(state: np.ndarray, gates: Iterable[Gate], n_qubits: int) -> np.ndarray:
    for g in gates:
        state = apply_gate(state, g, n_qubits)
    return state


def _check_cap(width: int, cap: int):
    if width > cap:
        raise CapExceededError(f"{width} qubits exceed the statevector cap of {cap}")


def partial_history(c: Circuit, t: int, cap: int = STATEVECTOR_CAP) -> QuantumState:
    """Work part of the step-``t`` history component, ``U_t ... U_1 |0..0 +..+>``."""
    if not 0 <= t <= c.T:
        raise ValueError(f"step index {t} outside 0..{c.T}")
    _check_cap(c.width, cap)
    psi = apply_gates(initial_state(c.n, c.m), c.gates[:t], c.width)
    return QuantumState(psi, Basis("work", c.width))


def run_circuit(c: Circuit, cap: int = STATEVECTOR_CAP) -> QuantumState:
    """Output of the whole circuit on |0>^n |+>^m."""
    return partial_history(c, c.T, cap)

