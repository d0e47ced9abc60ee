"""Adiabatic sweeps of H(s(t)) and the runtime bound that goes with them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla
from scipy.interpolate import PchipInterpolator

from .circuit import QuantumState
from .hamiltonian import InterpolatedHamiltonian
from .krylov import expm_multiply_hermitian
from .spectral import GapScan, ground_state, history_amplitudes

__all__ = [
    "Schedule",
    "EvolutionResult",
    "StepUnderflowError",
    "evolve",
    "initial_ground_state",
    "phase_aligned_distance",
    "spectral_norm",
    "required_time_estimate",
    "threshold_time",
]

DENSE_PROPAGATOR_CAP = 16
_GAUSS = math.sqrt(3) / 6


class StepUnderflowError(RuntimeError):
    def __init__(self, message, s):
        super().__init__(message)
        self.s = s


@dataclass
class Schedule:
    """Map from physical time ``t`` in ``[0, t_f]`` to ``s`` in ``[0, 1]``.

    ``shape="linear"`` is ``s = t / t_f``. ``shape="local-adaptive"`` moves
    with velocity proportional to ``gap(s)**2`` taken from a :class:`GapScan`.
    ``shape="smooth"`` is the quintic ``10u^3 - 15u^4 + 6u^5`` with ``u = t/t_f``,
    whose first two derivatives vanish at both ends; this suppresses the
    boundary terms that make the linear-sweep error oscillate with ``t_f``.
    """

    t_f: float
    shape: str = "linear"
    gaps: GapScan | None = None

    def __post_init__(self):
        if self.t_f < 0:
            raise ValueError("total time must be nonnegative")
        if self.shape in ("linear", "smooth"):
            self._inverse = None
        elif self.shape == "local-adaptive":
            if self.gaps is None:
                raise ValueError("local-adaptive schedule needs a gap scan")
            s, gap = np.asarray(self.gaps.s), np.asarray(self.gaps.gap)
            if np.any(~np.isfinite(gap)) or np.any(gap <= 0):
                raise ValueError("gap scan must be strictly positive")
            fine = np.linspace(0.0, 1.0, 4001)
            g = PchipInterpolator(s, gap)(fine)
            dtau = 1.0 / g**2
            tau = np.concatenate([[0.0], np.cumsum(0.5 * (dtau[1:] + dtau[:-1]) * np.diff(fine))])
            self._inverse = PchipInterpolator(tau / tau[-1], fine)
        else:
            raise ValueError(f"unknown schedule shape {self.shape!r}")

    def __call__(self, t: float) -> float:
        if self.t_f == 0:
            return 1.0
        u = min(max(t / self.t_f, 0.0), 1.0)
        if self.shape == "linear":
            return u
        if self.shape == "smooth":
            return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)
        return float(min(max(self._inverse(u), 0.0), 1.0))


@dataclass
class EvolutionResult:
    state: QuantumState
    eps: float
    overlap: float
    steps: int
    rejected: int
    norm_drift: float
    trace: list[tuple[float, float, float, float]] = field(default_factory=list)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "s", "overlap_ground", "norm"])
        w.writerows(self.trace)
        return buf.getvalue()


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi || a - e^{i phi} b ||``, evaluated without cancellation."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def initial_ground_state(ih: InterpolatedHamiltonian) -> np.ndarray:
    """``|0..0 +..+>|0>_c``, the ground state of H_initial."""
    c = ih.circuit
    amps = history_amplitudes(c, ih.basis).reshape(2**c.width, -1)
    out = np.zeros_like(amps)
    col = ih.basis.clock_index(0)
    out[:, col] = amps[:, col] * math.sqrt(c.T + 1)
    return out.reshape(-1)


class _Propagator:
    """Fourth-order Magnus step with Gauss-Legendre nodes."""

    def __init__(self, ih, sched):
        self.a = ih.initial.matrix().astype(complex)
        self.b = ih.final.matrix().astype(complex)
        self.sched = sched
        self.dense = ih.dimension <= DENSE_PROPAGATOR_CAP
        if self.dense:
            self.a = self.a.toarray()
            self.b = self.b.toarray()

    def h(self, t):
        s = self.sched(t)
        return (1.0 - s) * self.a + s * self.b

    def step(self, psi, t, dt):
        h1 = self.h(t + (0.5 - _GAUSS) * dt)
        h2 = self.h(t + (0.5 + _GAUSS) * dt)
        c = 1j * math.sqrt(3) / 12 * dt  # K = (h1 + h2)/2 + i sqrt(3)/12 dt [h1, h2]
        if self.dense:
            k = 0.5 * (h1 + h2) + c * (h1 @ h2 - h2 @ h1)
            k = 0.5 * (k + k.conj().T)
            w, v = la.eigh(k)
            return v @ (np.exp(-1j * dt * w) * (v.conj().T @ psi))

        def matvec(x):
            y1, y2 = h1 @ x, h2 @ x
            return 0.5 * (y1 + y2) + c * (h1 @ y2 - h2 @ y1)

        out, _, _ = expm_multiply_hermitian(matvec, psi, dt, max_dim=30)
        return out


def evolve(
    ih: InterpolatedHamiltonian,
    sched: Schedule,
    tol: float = 1e-9,
    trace_points: int = 0,
    dt0: float | None = None,
) -> EvolutionResult:
    """Integrate ``i d psi/dt = H(s(t)) psi`` from the ground state of H_initial.

    Step sizes adapt by step doubling so that the estimated local error per
    unit time stays below ``tol``. The result is compared against the history
    state of ``ih.circuit``.
    """
    target = history_amplitudes(ih.circuit, ih.basis)
    psi = initial_ground_state(ih).astype(complex)
    prop = _Propagator(ih, sched)
    t_f = sched.t_f
    t, steps, rejected, drift = 0.0, 0, 0, 0.0
    dt = dt0 or min(t_f, 0.5) if t_f > 0 else 0.0
    trace = []
    checkpoints = list(np.linspace(0.0, t_f, trace_points)) if trace_points else []

    def record(t, psi):
        s = sched(t) if t_f > 0 else 1.0
        _, g = ground_state(ih(s))
        trace.append((float(t), float(s), float(abs(np.vdot(g, psi)) ** 2), float(np.linalg.norm(psi))))

    if checkpoints and checkpoints[0] == 0.0:
        record(0.0, psi)
        checkpoints.pop(0)
    while t < t_f:
        dt = min(dt, t_f - t)
        if checkpoints:
            dt = min(dt, checkpoints[0] - t) if checkpoints[0] > t else dt
        full = prop.step(psi, t, dt)
        half = prop.step(prop.step(psi, t, dt / 2), t + dt / 2, dt / 2)
        err = np.linalg.norm(full - half) / 15.0
        if err <= tol * dt or dt < 1e-14 * max(t_f, 1.0):
            if dt < 1e-12 * max(t_f, 1.0) and err > tol * dt:
                raise StepUnderflowError(f"step size underflow at s={sched(t):.6g}", sched(t))
            t += dt
            psi = half
            steps += 1
            drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
            if checkpoints and abs(t - checkpoints[0]) < 1e-12 * max(t_f, 1.0):
                record(t, psi)
                checkpoints.pop(0)
        else:
            rejected += 1
        fac = 0.9 * (tol * dt / err) ** 0.25 if err > 0 else 2.0
        dt = dt * min(2.0, max(0.2, fac))
    overlap = abs(np.vdot(target, psi))
    eps = phase_aligned_distance(target, psi)
    norm = np.linalg.norm(psi)
    return EvolutionResult(
        QuantumState(psi / norm, ih.basis), eps, float(overlap), steps, rejected, float(drift), trace
    )


def spectral_norm(mat) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    if mat.shape[0] <= 256:
        dense = mat.toarray() if hasattr(mat, "toarray") else np.asarray(mat)
        return float(np.max(np.abs(la.eigvalsh(dense))))
    v0 = np.ones(mat.shape[0])
    return float(abs(spla.eigsh(mat, k=1, which="LM", v0=v0, return_eigenvectors=False)[0]))


def required_time_estimate(gap, eps: float, k: int, c_k: float, norm: float | None = None, ih=None) -> float:
    """Adiabatic runtime ``c_k ||H_f - H_i||^(1+1/k) / (eps^(1/k) gap^(2+1/k))``.

    ``gap`` is a :class:`GapScan` (its minimum is used) or a number. The norm
    is computed from ``ih`` when not given directly.
    """
    if c_k <= 0:
        raise ValueError("c_k must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    delta = gap.min_gap if isinstance(gap, GapScan) else float(gap)
    if not delta > 0:
        raise ValueError("minimum gap must be positive")
    if norm is None:
        if ih is None:
            raise ValueError("need either norm or ih")
        norm = spectral_norm(ih.final.matrix() - ih.initial.matrix())
    return c_k * norm ** (1 + 1 / k) / (eps ** (1 / k) * delta ** (2 + 1 / k))


def threshold_time(ih, eps: float, shape: str = "linear", gaps=None, t_max: float = 1e5, tol: float = 1e-9, rel: float = 0.02):
    """Smallest ``t_f`` (to relative precision ``rel``) reaching ``eps``, by bisection.

    Assumes the error falls below ``eps`` for all times past the threshold; the
    upper end is found by doubling from 1.
    """
    def err(tf):
        return evolve(ih, Schedule(tf, shape, gaps), tol).eps

    hi = 1.0
    while err(hi) > eps:
        hi *= 2
        if hi > t_max:
            raise RuntimeError(f"eps={eps} not reached by t_f={t_max}")
    lo = hi / 2 if hi > 1 else 0.0
    while hi - lo > rel * hi:
        mid = 0.5 * (lo + hi)
        if err(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi
