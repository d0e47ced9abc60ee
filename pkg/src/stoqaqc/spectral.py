"""Ground states, history states and gap scans along H(s)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .circuit import Basis, CapExceededError, Circuit, QuantumState, apply_gate, initial_state
from .krylov import lowest_eigs_lanczos
from .hamiltonian import HAMILTONIAN_CAP, InterpolatedHamiltonian, TermHamiltonian

__all__ = [
    "ConvergenceError",
    "lowest_eigenpairs",
    "ground_state",
    "history_state",
    "history_amplitudes",
    "GapScan",
    "gap_scan",
    "DENSE_CAP",
    "DEGENERACY_TOL",
]

DENSE_CAP = 4096
DEGENERACY_TOL = 1e-9
RESIDUAL_TOL = 1e-8
MAX_ITER = 5000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def _as_matrix(h):
    if isinstance(h, TermHamiltonian):
        return h.matrix()
    return h


def _check_hermitian(h, tol=1e-12):
    if sp.issparse(h):
        diff = abs(h - h.conj().T)
        err = diff.max() if diff.nnz else 0.0
    else:
        err = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if err > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {err:.3g})")


def lowest_eigenpairs(h, k: int = 2, dense_cap: int = DENSE_CAP, seed: int = 0):
    """Lowest ``k`` eigenpairs, ascending; dense below ``dense_cap``, Lanczos above.

    Returns ``(values, vectors, residuals, method)``.
    """
    h = _as_matrix(h)
    _check_hermitian(h)
    dim = h.shape[0]
    k = min(k, dim)
    if dim <= dense_cap or k >= dim - 1:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        vals, vecs = la.eigh(dense, subset_by_index=[0, k - 1])
        method = "dense"
    else:
        vals, vecs, _, iters, ok = lowest_eigs_lanczos(h, k, seed=seed, tol=0.1 * RESIDUAL_TOL, max_iter=MAX_ITER)
        if not ok:
            resid = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
            raise ConvergenceError(f"Lanczos did not converge in {iters} restarts", float(resid.max()))
        method = "lanczos"
    resid = np.array([np.linalg.norm(h @ vecs[:, i] - vals[i] * vecs[:, i]) for i in range(k)])
    if np.any(resid > RESIDUAL_TOL):
        raise ConvergenceError(f"eigenpair residual {resid.max():.3g} above {RESIDUAL_TOL}", float(resid.max()))
    return vals, vecs, resid, method


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    phase = v[i] / abs(v[i])
    out = v / phase
    if np.isrealobj(v) or np.allclose(out.imag, 0.0, atol=1e-14):
        out = out.real
    return out


def ground_state(h, dense_cap: int = DENSE_CAP, seed: int = 0) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and eigenvector; the phase makes the largest entry positive."""
    vals, vecs, _, _ = lowest_eigenpairs(h, 1, dense_cap, seed)
    return float(vals[0]), _fix_phase(vecs[:, 0])


def history_amplitudes(c: Circuit, basis: Basis) -> np.ndarray:
    """Uniform superposition of ``|eta_t>`` over all clock values, built step by step."""
    nw = c.width
    if basis.n_work != nw or basis.n_steps != c.T:
        raise ValueError("basis does not match the circuit")
    L = c.T + 1
    work = initial_state(c.n, c.m)
    grid = np.zeros((2**nw, 2**basis.clock if basis.kind == "domain_wall" else L))
    grid[:, basis.clock_index(0)] = work
    for t, g in enumerate(c.gates, start=1):
        work = apply_gate(work, g, nw)
        grid[:, basis.clock_index(t)] = work
    return grid.reshape(-1) / math.sqrt(L)


def history_state(c: Circuit, pad: bool = False, kind: str = "unary", cap: int = HAMILTONIAN_CAP) -> QuantumState:
    """The Feynman-Kitaev history state, constructed directly from the circuit."""
    if pad:
        c = c.padded()
    clock = c.T + 1 if kind == "unary" else c.T
    basis = Basis(kind, c.width, clock)
    if basis.dimension > cap:
        raise CapExceededError(f"dimension {basis.dimension} exceeds cap {cap}")
    return QuantumState(history_amplitudes(c, basis), basis)


@dataclass
class GapScan:
    s: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def gap(self) -> np.ndarray:
        return self.e1 - self.e0

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.gap))

    @property
    def s_min(self) -> float:
        return float(self.s[self.argmin])

    @property
    def min_gap(self) -> float:
        return float(self.gap[self.argmin])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "E0", "E1", "gap"])
        for s, a, b in zip(self.s, self.e0, self.e1):
            w.writerow([repr(float(s)), repr(float(a)), repr(float(b)), repr(float(b - a))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "rows": [
                {"s": float(s), "E0": float(a), "E1": float(b), "gap": float(b - a)}
                for s, a, b in zip(self.s, self.e0, self.e1)
            ],
            "s_min": self.s_min,
            "min_gap": self.min_gap,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _gap_at(h, dense_cap, seed, degeneracy_tol):
    """(E0, first distinct E1, max residual, method, converged)."""
    k = 2
    dim = h.shape[0]
    while True:
        vals, _, resid, method = lowest_eigenpairs(h, k, dense_cap, seed)
        distinct = vals[vals > vals[0] + degeneracy_tol]
        if distinct.size or k >= dim:
            e1 = float(distinct[0]) if distinct.size else float("nan")
            return float(vals[0]), e1, float(resid.max()), method
        k = min(dim, 2 * k)


def gap_scan(
    ih: InterpolatedHamiltonian,
    grid=None,
    refine: int = 3,
    dense_cap: int = DENSE_CAP,
    seed: int = 0,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> GapScan:
    """Scan the spectral gap of ``H(s)``.

    The default grid is 101 uniform points. ``refine`` rounds of golden-section
    search then sharpen the location of the coarse minimum. Eigenvalues within
    ``degeneracy_tol`` of E0 count as degenerate with it.
    """
    grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or grid.min() < 0 or grid.max() > 1:
        raise ValueError("grid must be a nonempty subset of [0, 1]")
    points: dict[float, tuple] = {}
    failures = []

    def evaluate(s):
        s = float(s)
        if s not in points:
            try:
                points[s] = _gap_at(ih(s), dense_cap, seed, degeneracy_tol)
            except ConvergenceError as exc:
                failures.append({"s": s, "residual": exc.residual})
                points[s] = (float("nan"), float("nan"), exc.residual, "failed")
        e0, e1 = points[s][:2]
        return e1 - e0 if np.isfinite(e1 - e0) else np.inf

    for s in grid:
        evaluate(s)
    if refine and grid.size >= 3:
        coarse = np.sort(grid)
        gaps = np.array([evaluate(s) for s in coarse])
        i = int(np.argmin(gaps))
        lo, hi = coarse[max(i - 1, 0)], coarse[min(i + 1, coarse.size - 1)]
        invphi = (math.sqrt(5) - 1) / 2
        # a few golden-section steps per round
        for _ in range(refine):
            for _ in range(4):
                a = hi - invphi * (hi - lo)
                b = lo + invphi * (hi - lo)
                if evaluate(a) < evaluate(b):
                    hi = b
                else:
                    lo = a
    s_all = np.array(sorted(points))
    e0 = np.array([points[s][0] for s in s_all])
    e1 = np.array([points[s][1] for s in s_all])
    meta = {
        "methods": sorted({points[s][3] for s in s_all}),
        "max_residual": float(np.nanmax([points[s][2] for s in s_all])),
        "degeneracy_tol": degeneracy_tol,
        "seed": seed,
        "failures": failures,
        "n_points": int(s_all.size),
    }
    return GapScan(s_all, e0, e1, meta)
