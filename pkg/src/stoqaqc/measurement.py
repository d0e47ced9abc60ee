"""Clock-conditioned single-qubit Pauli measurements.

Outcome bit 0 is the +1 eigenvalue and bit 1 the -1 eigenvalue. The Y basis
uses eigenvectors ``(|0> +- i|1>)/sqrt(2)``; bit 0 is the ``+i`` branch.
Multi-qubit outcomes are integers whose most significant bit belongs to the
first measured qubit (the lowest wire index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import QuantumState

__all__ = [
    "MeasurementPlan",
    "MeasurementRecord",
    "ConditionalDistribution",
    "AdaptivePolicy",
    "PolicyError",
    "basis_change",
    "exact_distribution",
    "joint_distribution",
    "sample",
    "sample_adaptive",
    "empirical_distribution",
    "accept_fraction",
    "l1_distance",
    "pure_trace_distance",
    "ErrorBudget",
    "error_budget",
    "required_accuracy",
    "sampler_bounds",
]

_S = 1 / math.sqrt(2)
_W = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "Y": np.array([[_S, -1j * _S], [_S, 1j * _S]], dtype=complex),  # H S^dagger
}


def basis_change(basis: str) -> np.ndarray:
    """Unitary taking the +1 eigenvector of ``basis`` to |0>."""
    return _W[basis]


@dataclass(frozen=True)
class MeasurementPlan:
    """Per-work-qubit bases (``"X"``, ``"Y"``, ``"Z"`` or ``None`` to skip).

    ``accept`` lists the accepted clock values; it is ignored for states
    without a clock register.
    """

    bases: tuple[str | None, ...]
    accept: tuple[int, ...] = ()
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(None if b in (None, "-", "skip") else str(b).upper() for b in self.bases))
        object.__setattr__(self, "accept", tuple(int(t) for t in self.accept))
        bad = [b for b in self.bases if b is not None and b not in _W]
        if bad:
            raise ValueError(f"unknown measurement basis {bad[0]!r}")
        if not self.qubits:
            raise ValueError("plan measures no qubit")
        if self.shots < 0:
            raise ValueError("shots must be nonnegative")

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bases) if b is not None)

    @classmethod
    def from_string(cls, spec: str, accept=(), shots=0, seed=0) -> "MeasurementPlan":
        """``"XZ-Y"``: one character per work qubit, ``-`` skips."""
        return cls(tuple(None if ch == "-" else ch for ch in spec), tuple(accept), shots, seed)

    def to_dict(self) -> dict:
        return {
            "bases": ["-" if b is None else b for b in self.bases],
            "accept": list(self.accept),
            "shots": self.shots,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ConditionalDistribution:
    qubits: tuple[int, ...]
    bases: tuple[str, ...]
    probs: np.ndarray
    p_clock: float
    exact: bool = True

    def __getitem__(self, bits) -> float:
        if isinstance(bits, str):
            bits = int(bits, 2)
        return float(self.probs[bits])

    def as_dict(self) -> dict[str, float]:
        k = len(self.qubits)
        return {format(i, f"0{k}b"): float(p) for i, p in enumerate(self.probs)}

    def marginal(self, qubit: int) -> np.ndarray:
        """Two-outcome marginal of one measured qubit."""
        k = len(self.qubits)
        j = self.qubits.index(qubit)
        tensor = self.probs.reshape((2,) * k)
        return tensor.sum(axis=tuple(a for a in range(k) if a != j))


@dataclass(frozen=True)
class MeasurementRecord:
    shot: int
    clock: int | None
    accepted: bool
    outcome: tuple[int, ...]
    bases: tuple[str, ...] = ()
    qubits: tuple[int, ...] = ()

    @property
    def outcome_bits(self) -> str:
        return "".join(str(b) for b in self.outcome)


def _grid(state: QuantumState) -> np.ndarray:
    b = state.basis
    cols = 1 if b.kind == "work" else (b.clock if b.kind == "unary" else 2**b.clock)
    return state.amplitudes.reshape(2**b.n_work, cols)


def _clock_columns(state: QuantumState, accept: Sequence[int]) -> np.ndarray:
    b = state.basis
    if b.kind == "work":
        return np.array([0])
    acc = sorted(set(accept))
    if not acc:
        raise ValueError("accept set is empty")
    if acc[0] < 0 or acc[-1] > b.n_steps:
        raise ValueError(f"accept set {acc} outside clock range 0..{b.n_steps}")
    return np.array([b.clock_index(t) for t in acc])


def _column_values(state: QuantumState) -> np.ndarray:
    """Clock value of every clock column, ``-1`` for illegal domain-wall strings."""
    b = state.basis
    if b.kind == "work":
        return np.array([0])
    if b.kind == "unary":
        return np.arange(b.clock)
    vals = np.full(2**b.clock, -1)
    for t in range(b.n_steps + 1):
        vals[b.clock_index(t)] = t
    return vals


def _rotate(grid: np.ndarray, n_work: int, bases: Sequence[str | None]) -> np.ndarray:
    """Apply basis changes; returns a tensor of shape (2,)*n_work + (cols,)."""
    tensor = grid.reshape((2,) * n_work + (grid.shape[1],)).astype(complex)
    for q, b in enumerate(bases):
        if b is None or b == "Z":
            continue
        tensor = np.moveaxis(np.tensordot(_W[b], tensor, axes=([1], [q])), 0, q)
    return tensor


def _outcome_table(state: QuantumState, bases) -> np.ndarray:
    """Probabilities with shape (2^k, cols): measured outcome x clock column."""
    nw = state.basis.n_work
    if len(bases) != nw:
        raise ValueError(f"plan has {len(bases)} bases for {nw} work qubits")
    probs = np.abs(_rotate(_grid(state), nw, bases)) ** 2
    skipped = tuple(q for q, b in enumerate(bases) if b is None)
    if skipped:
        probs = probs.sum(axis=skipped)
    return probs.reshape(-1, probs.shape[-1])


def exact_distribution(state: QuantumState, plan: MeasurementPlan) -> ConditionalDistribution:
    """``p(x) = Tr[P(x) P_clock rho] / p_clock`` computed from amplitudes."""
    table = _outcome_table(state, plan.bases)
    cols = _clock_columns(state, plan.accept)
    joint = table[:, cols].sum(axis=1)
    p_clock = float(joint.sum())
    if p_clock <= 0.0:
        raise ValueError("accepted clock values carry no probability")
    return ConditionalDistribution(
        plan.qubits, tuple(plan.bases[q] for q in plan.qubits), joint / p_clock, p_clock, True
    )


def joint_distribution(state: QuantumState, plan: MeasurementPlan) -> np.ndarray:
    """Outcome distribution of the POVM ``{P(x) P_clock} + {I - P_clock}``.

    The last entry is the rejection probability ``1 - p_clock``.
    """
    table = _outcome_table(state, plan.bases)
    cols = _clock_columns(state, plan.accept)
    acc = table[:, cols].sum(axis=1)
    return np.concatenate([acc, [max(0.0, 1.0 - acc.sum())]])


def _uniforms(seed: int, shots: int, per_shot: int = 1) -> np.ndarray:
    # Philox is counter based: row i always comes from the same stream position
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random((shots, per_shot))


def sample(state: QuantumState, plan: MeasurementPlan, shots: int | None = None) -> list[MeasurementRecord]:
    """Draw shots of (clock readout, work outcomes) from the full state.

    Shots whose clock value is outside ``plan.accept`` (or illegal) are kept
    with ``accepted=False``, so the accept fraction estimates ``p_clock``.
    """
    shots = plan.shots if shots is None else shots
    if shots == 0:
        return []
    table = _outcome_table(state, plan.bases)
    flat = table.reshape(-1)
    cdf = np.cumsum(flat)
    cdf /= cdf[-1]
    u = _uniforms(plan.seed, shots)[:, 0]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), flat.size - 1)
    cols_n = table.shape[1]
    outcome, col = np.divmod(idx, cols_n)
    values = _column_values(state)
    accepted_cols = set(_clock_columns(state, plan.accept).tolist()) if state.basis.kind != "work" else {0}
    k = len(plan.qubits)
    bases = tuple(plan.bases[q] for q in plan.qubits)
    recs = []
    for i in range(shots):
        v = int(values[col[i]])
        bits = tuple((int(outcome[i]) >> (k - 1 - j)) & 1 for j in range(k))
        recs.append(MeasurementRecord(i, None if v < 0 else v, int(col[i]) in accepted_cols, bits, bases, plan.qubits))
    return recs


def empirical_distribution(records: Sequence[MeasurementRecord], plan: MeasurementPlan) -> ConditionalDistribution:
    k = len(plan.qubits)
    counts = np.zeros(2**k)
    acc = [r for r in records if r.accepted]
    for r in acc:
        counts[int(r.outcome_bits, 2)] += 1
    total = len(acc)
    probs = counts / total if total else counts
    return ConditionalDistribution(
        plan.qubits,
        tuple(plan.bases[q] for q in plan.qubits),
        probs,
        total / len(records) if records else 0.0,
        False,
    )


def accept_fraction(records: Sequence[MeasurementRecord]) -> float:
    return sum(r.accepted for r in records) / len(records) if records else 0.0


class PolicyError(RuntimeError):
    """An adaptive policy broke its contract."""


class AdaptivePolicy:
    """Chooses the next ``(qubit, basis)`` from the outcome history, or ``None`` to halt.

    ``history`` is a tuple of ``(qubit, basis, bit)`` triples in measurement
    order. Subclasses override :meth:`next`; a plain callable can be wrapped
    with ``AdaptivePolicy(fn)``.
    """

    deterministic = True

    def __init__(self, fn: Callable | None = None, deterministic: bool = True):
        self._fn = fn
        self.deterministic = deterministic

    def next(self, history):
        if self._fn is None:
            raise NotImplementedError
        return self._fn(history)

    @classmethod
    def fixed(cls, bases: Sequence[str | None]) -> "AdaptivePolicy":
        """History-independent policy measuring qubits in index order."""
        order = [(q, b) for q, b in enumerate(bases) if b is not None]

        def fn(history):
            return order[len(history)] if len(history) < len(order) else None

        return cls(fn)


def _measure_qubit(psi: np.ndarray, n: int, q: int, basis: str, u: float):
    tensor = psi.reshape((2,) * n)
    if basis != "Z":
        tensor = np.moveaxis(np.tensordot(_W[basis], tensor, axes=([1], [q])), 0, q)
    p0 = float(np.sum(np.abs(np.take(tensor, 0, axis=q)) ** 2))
    bit = 0 if u < p0 else 1
    prob = p0 if bit == 0 else 1.0 - p0
    keep = np.zeros_like(tensor)
    sl = [slice(None)] * n
    sl[q] = bit
    keep[tuple(sl)] = tensor[tuple(sl)]
    if basis != "Z":
        # rotate back so later bases see the physical post-measurement state
        keep = np.moveaxis(np.tensordot(_W[basis].conj().T, keep, axes=([1], [q])), 0, q)
    return bit, keep.reshape(-1) / math.sqrt(prob)


def sample_adaptive(
    state: QuantumState,
    policy,
    shots: int,
    accept: Sequence[int] = (),
    seed: int = 0,
) -> list[MeasurementRecord]:
    """Sequential single-qubit measurements driven by ``policy``.

    The clock register is read first; rejected shots are recorded without
    work outcomes. Accepted shots collapse onto the observed clock slice and
    the policy is queried until it halts.
    """
    if shots == 0:
        return []
    if not isinstance(policy, AdaptivePolicy):
        policy = AdaptivePolicy(policy)
    nw = state.basis.n_work
    grid = _grid(state)
    col_prob = np.sum(np.abs(grid) ** 2, axis=0)
    cdf = np.cumsum(col_prob)
    cdf /= cdf[-1]
    values = _column_values(state)
    acc_cols = set(_clock_columns(state, accept).tolist()) if state.basis.kind != "work" else {0}
    u = _uniforms(seed, shots, nw + 1)
    recs = []
    for i in range(shots):
        col = int(min(np.searchsorted(cdf, u[i, 0], side="right"), cdf.size - 1))
        v = int(values[col])
        if col not in acc_cols:
            recs.append(MeasurementRecord(i, None if v < 0 else v, False, ()))
            continue
        psi = grid[:, col].astype(complex)
        psi = psi / np.linalg.norm(psi)
        history = []
        while True:
            choice = policy.next(tuple(history))
            if choice is None:
                break
            q, b = choice
            b = str(b).upper()
            if b not in _W:
                raise PolicyError(f"policy chose unknown basis {b!r}")
            if not 0 <= q < nw:
                raise PolicyError(f"policy chose qubit {q} outside 0..{nw - 1}")
            if any(h[0] == q for h in history):
                raise PolicyError(f"policy re-measured qubit {q}")
            if len(history) >= nw:
                raise PolicyError("policy did not halt")
            bit, psi = _measure_qubit(psi, nw, q, b, u[i, 1 + len(history)])
            history.append((q, b, bit))
        recs.append(
            MeasurementRecord(
                i, v, True, tuple(h[2] for h in history), tuple(h[1] for h in history), tuple(h[0] for h in history)
            )
        )
    return recs


def l1_distance(p, q) -> float:
    """``sum_x |p(x) - q(x)|``."""
    if isinstance(p, ConditionalDistribution) and isinstance(q, ConditionalDistribution):
        if p.qubits != q.qubits or p.bases != q.bases:
            raise ValueError("distributions live on different outcome spaces")
        p, q = p.probs, q.probs
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"outcome spaces differ: {p.shape} vs {q.shape}")
    return float(np.sum(np.abs(p - q)))


def pure_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``|a><a| - |b><b|``, i.e. ``sqrt(1 - |<a|b>|^2)``."""
    ov = abs(np.vdot(a, b))
    return math.sqrt(max(0.0, 1.0 - ov**2))


@dataclass(frozen=True)
class ErrorBudget:
    eps: float
    p_clock: float
    f: float
    delta_prime: float
    delta_double_prime: float


def error_budget(eps: float, p_clock: float) -> ErrorBudget:
    """Propagate an l2 error ``eps`` of the final state to the conditional l1 error.

    ``f = 1 - eps/2`` bounds the overlap, ``delta' = sqrt(1 - f^2)`` the trace
    distance and ``delta'' = 4 delta' / p_clock`` the conditional l1 error.
    """
    if not 0.0 < eps < 2.0:
        raise ValueError("eps must lie in (0, 2)")
    if not 0.0 < p_clock <= 1.0:
        raise ValueError("p_clock must lie in (0, 1]")
    f = 1.0 - eps / 2.0
    dp = math.sqrt((1.0 - f) * (1.0 + f))
    return ErrorBudget(eps, p_clock, f, dp, 4.0 * dp / p_clock)


def required_accuracy(delta_double_prime: float, p_clock: float) -> float:
    """Largest l2 error compatible with a conditional l1 error ``delta''``."""
    x = delta_double_prime * p_clock / 4.0
    if not 0.0 < x <= 1.0:
        raise ValueError("delta'' * p_clock / 4 must lie in (0, 1]")
    # 2(1 - sqrt(1 - x^2)) written without cancellation
    return 2.0 * x**2 / (1.0 + math.sqrt(1.0 - x**2))


def sampler_bounds(eta: float, delta_prime: float, p_clock: float) -> dict[str, float]:
    """Both written forms of the bound on ``||p_samp - p||_1`` for a sampler with l1 error ``eta``."""
    dpp = 4.0 * delta_prime / p_clock
    out = {"delta_double_prime": dpp}
    out["via_p_clock"] = (2.0 * eta / (p_clock - 2.0 * delta_prime) + dpp) if 2 * delta_prime < p_clock else math.inf
    out["final_form"] = (4.0 * eta / (1.0 - 4.0 * delta_prime) + dpp) if 4 * delta_prime < 1 else math.inf
    return out
