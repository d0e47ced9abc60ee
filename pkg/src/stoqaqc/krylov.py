"""Krylov-subspace kernels: ``exp(-i dt K) v`` and lowest eigenpairs of Hermitian operators."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

__all__ = ["expm_multiply_hermitian", "lowest_eigs_lanczos"]


def expm_multiply_hermitian(matvec, v: np.ndarray, dt: float, max_dim: int = 30, tol: float = 1e-13):
    """Return ``(w, err, m)`` with ``w ~= exp(-i dt K) v``.

    ``matvec`` applies ``K``. The Krylov dimension grows until the standard
    a-posteriori estimate ``|beta_m * dt * (e_m . exp(-i dt T_m) e_1)|`` drops
    below ``tol * |v|`` or ``max_dim`` is reached. The basis is fully
    reorthogonalised, so ``w`` has the norm of ``v`` to rounding.
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy(), 0.0, 0
    dim = v.size
    max_dim = min(max_dim, dim)
    V = np.zeros((max_dim + 1, dim), dtype=complex)
    alpha = np.zeros(max_dim)
    beta = np.zeros(max_dim)
    V[0] = v / beta0
    err = np.inf
    for j in range(max_dim):
        w = matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j] - (beta[j - 1] * V[j - 1] if j else 0.0)
        # full reorthogonalisation
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        evals, evecs = la.eigh_tridiagonal(alpha[:m], beta[: m - 1]) if m > 1 else (alpha[:1], np.ones((1, 1)))
        coeff = evecs @ (np.exp(-1j * dt * evals) * evecs[0].conj())
        err = abs(beta[j] * dt * coeff[-1])
        if beta[j] < 1e-14 or err < tol or m == max_dim:
            out = beta0 * (V[:m].T @ coeff)
            return out, float(err * beta0), m
        V[j + 1] = w / beta[j]
    raise AssertionError("unreachable")


def _orthonormalise(w: np.ndarray, basis: np.ndarray | None, rng, drop: float = 1e-10) -> np.ndarray:
    """Columns of ``w`` made orthonormal to ``basis`` and each other.

    Columns that collapse (Krylov breakdown) are replaced by fresh seeded
    random directions, so the result never depends on hidden solver state.
    """
    out = []
    for j in range(w.shape[1]):
        v = w[:, j].copy()
        for _ in range(3):
            scale = np.linalg.norm(v)
            for _ in range(2):
                if basis is not None and basis.shape[1]:
                    v -= basis @ (basis.conj().T @ v)
                for u in out:
                    v -= u * np.vdot(u, v)
            nv = np.linalg.norm(v)
            if nv > drop * max(scale, 1.0):
                out.append(v / nv)
                break
            v = rng.standard_normal(w.shape[0]).astype(w.dtype)
    return np.column_stack(out) if out else np.zeros((w.shape[0], 0), dtype=w.dtype)


def lowest_eigs_lanczos(h, k: int, seed: int = 0, tol: float = 1e-10, block: int = 2,
                        max_basis: int | None = None, max_iter: int = 5000):
    """Lowest ``k`` eigenpairs of a Hermitian operator by thick-restart block Lanczos.

    The basis is fully reorthogonalised. After each Rayleigh-Ritz step the
    lowest Ritz vectors are kept and the search space is regrown from them.
    Returns ``(values, vectors, residuals, iterations, converged)``; the
    residual test is ``|H u - theta u| <= tol`` for each of the ``k`` pairs.
    """
    dim = h.shape[0]
    dtype = np.result_type(h.dtype, np.float64)
    rng = np.random.default_rng(seed)
    m = max_basis or min(dim, max(4 * k + 4 * block, 48))
    keep = min(m - block, max(k + block, m // 2))
    V = _orthonormalise(rng.standard_normal((dim, block)).astype(dtype), None, rng)
    AV = np.column_stack([h @ V[:, j] for j in range(V.shape[1])])
    vals = vecs = resid = None
    for it in range(1, max_iter + 1):
        while V.shape[1] < m:
            nxt = AV[:, -block:]
            W = _orthonormalise(nxt, V, rng)[:, : m - V.shape[1]]
            if W.shape[1] == 0:
                break
            V = np.column_stack([V, W])
            AV = np.column_stack([AV] + [h @ W[:, j] for j in range(W.shape[1])])
        S = V.conj().T @ AV
        theta, Y = la.eigh(0.5 * (S + S.conj().T))
        U, AU = V @ Y, AV @ Y
        R = AU[:, :k] - U[:, :k] * theta[:k]
        resid = np.linalg.norm(R, axis=0)
        vals, vecs = theta[:k], U[:, :k]
        if np.all(resid <= tol) or V.shape[1] >= dim:
            return vals, vecs, resid, it, bool(np.all(resid <= tol) or V.shape[1] >= dim)
        V, AV = U[:, :keep], AU[:, :keep]
    return vals, vecs, resid, max_iter, False
