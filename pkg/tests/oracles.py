"""Independent dense constructions used as test oracles.

Everything here is written straight from the defining formulas with
``np.kron`` and explicit loops, sharing no code with the package.
"""

from __future__ import annotations

import numpy as np

P0 = np.array([[1.0, 0.0], [0.0, 0.0]])
P1 = np.array([[0.0, 0.0], [0.0, 1.0]])
PMINUS = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def embed(op: np.ndarray, wire: int, n: int) -> np.ndarray:
    out = np.ones((1, 1))
    for q in range(n):
        out = np.kron(out, op if q == wire else np.eye(2))
    return out


def gate_unitary(kind: str, wires, n: int, table=None) -> np.ndarray:
    """Full 2^n permutation matrix by explicit bit manipulation."""
    dim = 2**n
    u = np.zeros((dim, dim))
    for x in range(dim):
        bits = [(x >> (n - 1 - q)) & 1 for q in range(n)]
        if kind == "X":
            bits[wires[0]] ^= 1
        elif kind == "CNOT":
            bits[wires[1]] ^= bits[wires[0]]
        elif kind == "TOFFOLI":
            bits[wires[2]] ^= bits[wires[0]] & bits[wires[1]]
        elif kind == "PERM":
            k = len(wires)
            local = sum(bits[w] << (k - 1 - j) for j, w in enumerate(wires))
            img = table[local]
            for j, w in enumerate(wires):
                bits[w] = (img >> (k - 1 - j)) & 1
        y = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        u[y, x] = 1.0
    return u


def unary_hamiltonians(n: int, m: int, unitaries: list[np.ndarray]):
    """(H_initial, H_final) over work x (T+1)-level clock, index = work*(T+1) + t."""
    w = n + m
    L = len(unitaries) + 1
    dim_w = 2**w
    h_in = np.zeros((dim_w, dim_w))
    for q in range(w):
        h_in += embed(P1 if q < n else PMINUS, q, w)
    e = np.eye(L)
    c0 = np.outer(e[0], e[0])
    h_in_full = np.kron(h_in, c0)
    h_initial = h_in_full + np.kron(np.eye(dim_w), np.eye(L) - c0)
    h_final = h_in_full.copy()
    for t, u in enumerate(unitaries, start=1):
        a, b = e[t], e[t - 1]
        h_final += 0.5 * (
            np.kron(np.eye(dim_w), np.outer(a, a) + np.outer(b, b))
            - np.kron(u, np.outer(a, b))
            - np.kron(u.T, np.outer(b, a))
        )
    return h_initial, h_final


def history_vector(n: int, m: int, unitaries: list[np.ndarray]) -> np.ndarray:
    w = n + m
    L = len(unitaries) + 1
    psi = np.zeros(2**n)
    psi[0] = 1.0
    psi = np.kron(psi, np.full(2**m, 2.0 ** (-m / 2)))
    out = np.zeros(2**w * L)
    for t in range(L):
        if t:
            psi = unitaries[t - 1] @ psi
        out += np.kron(psi, np.eye(L)[t])
    return out / np.sqrt(L)
