"""Order finding and factoring with non-adaptive iterative phase estimation.

Each stage ``k`` uses ``2R`` control qubits, each controlling ``U_x^(2^k)``
on a register prepared in the basis state |1>. The first ``R`` controls are
read in the X basis, the next ``R`` in the Y basis. Because the eigenstates
``|u_s>`` of ``U_x`` are orthogonal, the joint control statistics equal those
obtained by drawing ``s`` uniformly once and sampling every control
independently with phase ``2^k s / r``; :func:`run_phase_estimation` uses this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, PERM_ARITY_CAP, run_circuit
from .measurement import MeasurementPlan, exact_distribution

__all__ = [
    "OrderFindingInstance",
    "StageOutcomes",
    "PhaseTranscript",
    "FactoringError",
    "multiplicative_order",
    "modexp_gate",
    "controlled_modexp_gate",
    "eigenstate",
    "stage_probabilities",
    "run_stage",
    "extract_bits",
    "bits_to_phase",
    "ideal_bits",
    "recover_order",
    "run_phase_estimation",
    "factor",
    "FactorResult",
    "fig3_circuit",
    "shor_as_circuit",
    "shortcut_distribution",
    "statevector_distribution",
]


class FactoringError(RuntimeError):
    """The retry budget ran out without a nontrivial factor."""


def register_width(N: int) -> int:
    return max(1, (N - 1).bit_length())


def multiplicative_order(x: int, N: int) -> int:
    if math.gcd(x, N) != 1:
        raise ValueError(f"gcd({x}, {N}) != 1")
    r, y = 1, x % N
    while y != 1 % N:
        y = y * x % N
        r += 1
    return r


@dataclass(frozen=True)
class OrderFindingInstance:
    N: int
    x: int
    l: int | None = None
    R: int = 30

    def __post_init__(self):
        if not 1 < self.x < self.N:
            raise ValueError("need 1 < x < N")
        if math.gcd(self.x, self.N) != 1:
            raise ValueError(f"x={self.x} is not coprime to N={self.N}")
        if self.l is None:
            object.__setattr__(self, "l", 2 * register_width(self.N) + 1)
        if self.l < 1 or self.R < 1:
            raise ValueError("need l >= 1 and R >= 1")

    @property
    def l_reg(self) -> int:
        return register_width(self.N)

    @property
    def order(self) -> int:
        """Simulation truth, computed classically."""
        return multiplicative_order(self.x, self.N)


def _mult_table(N: int, a: int, width: int) -> list[int]:
    return [(a * y) % N if y < N else y for y in range(2**width)]


def modexp_gate(N: int, x: int, k: int = 0, wires: Sequence[int] | None = None) -> Gate:
    """PERM gate ``|y> -> |x^(2^k) y mod N>`` for ``y < N``; other states are fixed."""
    if math.gcd(x, N) != 1:
        raise ValueError(f"gcd({x}, {N}) != 1")
    width = register_width(N)
    if width > PERM_ARITY_CAP:
        raise ValueError(f"register width {width} exceeds the PERM arity cap")
    wires = tuple(range(width)) if wires is None else tuple(wires)
    return Gate("PERM", wires, tuple(_mult_table(N, pow(x, 2**k, N), width)))


def controlled_modexp_gate(N: int, x: int, k: int, control: int, register: Sequence[int]) -> Gate:
    """Controlled version on ``(control, *register)``; the control is the most significant bit."""
    width = len(register)
    if width + 1 > PERM_ARITY_CAP:
        raise ValueError("controlled gate exceeds the PERM arity cap")
    base = _mult_table(N, pow(x, 2**k, N), width)
    size = 2**width
    table = list(range(size)) + [size + v for v in base]
    return Gate("PERM", (control,) + tuple(register), tuple(table))


def eigenstate(N: int, x: int, s: int) -> np.ndarray:
    """``|u_s> = r^(-1/2) sum_k exp(-2 pi i s k / r) |x^k mod N>`` on the register."""
    r = multiplicative_order(x, N)
    vec = np.zeros(2 ** register_width(N), dtype=complex)
    y = 1
    for k in range(r):
        vec[y] += np.exp(-2j * np.pi * s * k / r)
        y = y * x % N
    return vec / math.sqrt(r)


def stage_probabilities(phase: float) -> tuple[float, float]:
    """``(P(X=+1), P(Y=+1))`` for a control in ``(|0> + e^{2 pi i phase}|1>)/sqrt(2)``."""
    a = 2 * math.pi * phase
    return (1 + math.cos(a)) / 2, (1 + math.sin(a)) / 2


@dataclass
class StageOutcomes:
    k: int
    x_outcomes: np.ndarray  # bits, 0 <-> +1
    y_outcomes: np.ndarray

    @property
    def mean_x(self) -> float:
        return float(np.mean(1 - 2 * self.x_outcomes))

    @property
    def mean_y(self) -> float:
        return float(np.mean(1 - 2 * self.y_outcomes))

    @property
    def theta(self) -> float:
        """Quadrant-aware angle of ``(<X>, <Y>)`` in ``(-pi, pi]``."""
        th = math.atan2(self.mean_y, self.mean_x)
        return math.pi if th == -math.pi else th

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "x_outcomes": [int(1 - 2 * b) for b in self.x_outcomes],
            "y_outcomes": [int(1 - 2 * b) for b in self.y_outcomes],
            "theta": self.theta,
        }


def run_stage(inst: OrderFindingInstance, k: int, s: int, rng: np.random.Generator) -> StageOutcomes:
    """Sample the ``2R`` control outcomes of stage ``k`` given eigenstate label ``s``."""
    r = inst.order
    phase = (2**k * s / r) % 1.0
    px, py = stage_probabilities(phase)
    xs = (rng.random(inst.R) >= px).astype(np.int8)
    ys = (rng.random(inst.R) >= py).astype(np.int8)
    return StageOutcomes(k, xs, ys)


def _wrapped(a: float) -> float:
    return abs((a + math.pi) % (2 * math.pi) - math.pi)


def extract_bits(stages: Sequence[StageOutcomes], floor: float = 0.05) -> tuple[list[int], list[int]]:
    """Decide ``j_1..j_l`` from the stage angles, last stage first.

    At stage ``k`` with tail ``tau = 0.j_{k+2}...j_l`` the bit ``j_{k+1}`` is the
    candidate ``j`` whose angle ``2 pi (j + tau) / 2`` is nearest to ``theta_k``.
    Returns the bits and the list of stages whose Bloch vector was shorter
    than ``floor`` (angle unreliable).
    """
    by_k = {st.k: st for st in stages}
    l = len(by_k)
    if sorted(by_k) != list(range(l)):
        raise ValueError("stages must cover k = 0..l-1")
    bits = [0] * l
    low = []
    tau = 0.0
    for k in range(l - 1, -1, -1):
        st = by_k[k]
        if st.mean_x**2 + st.mean_y**2 < floor:
            low.append(k)
        th = st.theta
        d = [_wrapped(th - 2 * math.pi * (j + tau) / 2) for j in (0, 1)]
        j = 0 if d[0] <= d[1] else 1
        bits[k] = j
        tau = (j + tau) / 2
    return bits, low


def _exact_stages(s: int, r: int, l: int) -> list[StageOutcomes]:
    # zero-variance stand-ins carrying exact expectation values
    class _Exact(StageOutcomes):
        def __init__(self, k, phase):
            super().__init__(k, np.zeros(0), np.zeros(0))
            self._phase = phase

        @property
        def mean_x(self):
            return math.cos(2 * math.pi * self._phase)

        @property
        def mean_y(self):
            return math.sin(2 * math.pi * self._phase)

    return [_Exact(k, (2**k * s / r) % 1.0) for k in range(l)]


def ideal_bits(s: int, r: int, l: int) -> list[int]:
    """Bits the extraction rule returns from exact expectation values."""
    return extract_bits(_exact_stages(s, r, l))[0]


def bits_to_phase(bits: Sequence[int]) -> Fraction:
    num = 0
    for b in bits:
        num = 2 * num + int(b)
    return Fraction(num, 2 ** len(bits))


def _convergents(frac: Fraction):
    a_prev, a = 1, frac.numerator // frac.denominator  # numerators h_{-1}, h_0
    b_prev, b = 0, 1
    yield Fraction(a, b)
    rem = frac - frac.numerator // frac.denominator
    while rem:
        inv = 1 / rem
        q = inv.numerator // inv.denominator
        rem = inv - q
        a_prev, a = a, q * a + a_prev
        b_prev, b = b, q * b + b_prev
        yield Fraction(a, b)


def recover_order(bits: Sequence[int], N: int, x: int) -> int | None:
    """Smallest convergent denominator ``q <= N`` with ``x^q = 1 mod N``; ``None`` on failure."""
    phase = bits_to_phase(bits)
    if phase == 0:
        return None
    for conv in _convergents(phase):
        q = conv.denominator
        if q > N:
            break
        if pow(x, q, N) == 1:
            return q
    return None


@dataclass
class PhaseTranscript:
    N: int
    x: int
    l: int
    R: int
    stages: list[StageOutcomes]
    bits: list[int]
    low_confidence: list[int]
    r: int | None
    s_true: int = field(default=-1, repr=False)
    r_true: int = field(default=-1, repr=False)

    @property
    def phase(self) -> Fraction:
        return bits_to_phase(self.bits)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "x": self.x,
            "l": self.l,
            "R": self.R,
            "stages": [st.to_dict() for st in self.stages],
            "bits": list(self.bits),
            "phase": [self.phase.numerator, self.phase.denominator],
            "low_confidence": list(self.low_confidence),
            "r": self.r,
            "simulation_truth": {"s": self.s_true, "r": self.r_true},
        }


def run_phase_estimation(inst: OrderFindingInstance, rng: np.random.Generator, s: int | None = None) -> PhaseTranscript:
    """One full non-adaptive run: draw ``s``, sample every stage, post-process."""
    r = inst.order
    if s is None:
        s = int(rng.integers(r))
    stages = [run_stage(inst, k, s, rng) for k in range(inst.l)]
    bits, low = extract_bits(stages)
    order = recover_order(bits, inst.N, inst.x)
    return PhaseTranscript(inst.N, inst.x, inst.l, inst.R, stages, bits, low, order, s, r)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


def _prime_power_base(n: int) -> int | None:
    for e in range(2, n.bit_length() + 1):
        b = round(n ** (1 / e))
        for c in (b - 1, b, b + 1):
            if c > 1 and c**e == n and _is_prime(c):
                return c
    return None


@dataclass
class FactorResult:
    N: int
    factor: int
    attempts: list[dict]
    transcripts: list[PhaseTranscript]
    seed: int

    def to_dict(self) -> dict:
        last = self.transcripts[-1].to_dict() if self.transcripts else None
        out = {
            "schema_version": 1,
            "N": self.N,
            "seed": self.seed,
            "factor": self.factor,
            "attempts": self.attempts,
        }
        if last is not None:
            out.update({k: last[k] for k in ("x", "l", "R", "stages", "bits", "r")})
        else:
            out.update({"x": self.attempts[-1]["x"], "l": None, "R": None, "stages": [], "bits": [], "r": None})
        return out


def factor(N: int, seed: int = 0, R: int = 30, l: int | None = None, retries: int = 25) -> FactorResult:
    """Find a nontrivial factor of an odd composite ``N`` that is not a prime power."""
    if N < 3 or N % 2 == 0:
        raise ValueError("N must be odd and at least 3")
    if _is_prime(N):
        raise ValueError(f"{N} is prime")
    if _prime_power_base(N) is not None:
        raise ValueError(f"{N} is a prime power")
    rng = np.random.default_rng(seed)
    attempts, transcripts = [], []
    for _ in range(retries):
        x = int(rng.integers(2, N))
        g = math.gcd(x, N)
        if g > 1:
            attempts.append({"x": x, "outcome": "gcd", "factor": g})
            return FactorResult(N, g, attempts, transcripts, seed)
        tr = run_phase_estimation(OrderFindingInstance(N, x, l, R), rng)
        transcripts.append(tr)
        r = tr.r
        if r is None:
            attempts.append({"x": x, "outcome": "no-order", "r": None})
            continue
        if r % 2:
            attempts.append({"x": x, "outcome": "odd-order", "r": r})
            continue
        half = pow(x, r // 2, N)
        if half == N - 1:
            attempts.append({"x": x, "outcome": "trivial-root", "r": r})
            continue
        for cand in (math.gcd(half - 1, N), math.gcd(half + 1, N)):
            if 1 < cand < N:
                attempts.append({"x": x, "outcome": "factor", "r": r, "factor": cand})
                return FactorResult(N, cand, attempts, transcripts, seed)
        attempts.append({"x": x, "outcome": "trivial-gcd", "r": r})
    raise FactoringError(f"no factor of {N} after {retries} attempts")


def fig3_circuit(N: int, x: int, stages: Sequence[int]) -> Circuit:
    """Register |1> on zero-wires ``0..l_reg-1`` and one plus-wire control per entry of ``stages``.

    Control ``i`` (wire ``l_reg + i``) drives ``U_x^(2^stages[i])``.
    """
    width = register_width(N)
    register = tuple(range(width))
    gates = [Gate("X", (width - 1,))]
    for i, k in enumerate(stages):
        gates.append(controlled_modexp_gate(N, x, k, width + i, register))
    return Circuit(width, len(stages), tuple(gates))


def shor_as_circuit(inst: OrderFindingInstance, stages: Sequence[int] | None = None, copies: int = 1) -> Circuit:
    """The phase-estimation circuit as a permutation circuit.

    ``stages`` defaults to ``(0,)``; each listed stage gets ``copies`` controls.
    """
    stages = (0,) if stages is None else tuple(stages)
    return fig3_circuit(inst.N, inst.x, [k for k in stages for _ in range(copies)])


def shortcut_distribution(N: int, x: int, stages: Sequence[int], bases: Sequence[str]) -> np.ndarray:
    """Joint control distribution from the uniform-``s`` shortcut.

    Outcome index uses the first control as the most significant bit.
    """
    r = multiplicative_order(x, N)
    m = len(stages)
    total = np.zeros(2**m)
    for s in range(r):
        dist = np.ones(1)
        for k, b in zip(stages, bases):
            px, py = stage_probabilities((2**k * s / r) % 1.0)
            p0 = px if b == "X" else py
            dist = np.kron(dist, [p0, 1 - p0])
        total += dist
    return total / r


def statevector_distribution(N: int, x: int, stages: Sequence[int], bases: Sequence[str]) -> np.ndarray:
    """Joint control distribution from a full statevector run of :func:`fig3_circuit`."""
    c = fig3_circuit(N, x, stages)
    psi = run_circuit(c)
    plan = MeasurementPlan((None,) * c.n + tuple(bases))
    return exact_distribution(psi, plan).probs

