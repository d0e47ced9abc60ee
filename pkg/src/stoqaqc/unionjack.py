"""The union-jack lattice and its 6-local domain-wall Hamiltonian.

A ``rows x cols`` array of unit squares has white corner vertices and one red
vertex at the centre of each square. The two diagonals cut every square into
four triangles (top, right, bottom, left), each made of two adjacent corners
(the Toffoli controls) and the centre (the target). Triangles are numbered
row-major over squares and in that fixed order inside a square; triangle
``t`` carries clock qubit ``t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .circuit import CapExceededError, Circuit, Gate
from .hamiltonian import HAMILTONIAN_CAP, InterpolatedHamiltonian, TermHamiltonian, build_domain_wall

__all__ = [
    "Vertex",
    "Triangle",
    "UnionJackLattice",
    "build_union_jack",
    "union_jack_hamiltonian",
    "max_term_locality",
    "INIT_PATTERNS",
]

INIT_PATTERNS = ("zero-control", "all-plus")


@dataclass(frozen=True)
class Vertex:
    id: int
    color: str  # "white" or "red"
    init: str  # "0" or "+"
    wire: int
    position: tuple[float, float]


@dataclass(frozen=True)
class Triangle:
    controls: tuple[int, int]
    target: int
    clock: int


@dataclass(frozen=True)
class UnionJackLattice:
    rows: int
    cols: int
    init_pattern: str
    vertices: tuple[Vertex, ...]
    triangles: tuple[Triangle, ...]

    def __post_init__(self):
        ids = {v.id for v in self.vertices}
        for k, tri in enumerate(self.triangles):
            if tri.clock != k + 1:
                raise ValueError("triangle clock indices must follow the traversal order 1..T")
            if not set(tri.controls) | {tri.target} <= ids:
                raise ValueError(f"triangle {k} references an unknown vertex")

    @property
    def T(self) -> int:
        return len(self.triangles)

    def vertex(self, vid: int) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "rows": self.rows,
            "cols": self.cols,
            "init_pattern": self.init_pattern,
            "vertices": [
                {"id": v.id, "color": v.color, "init": v.init, "wire": v.wire, "position": list(v.position)}
                for v in self.vertices
            ],
            "triangles": [{"controls": list(t.controls), "target": t.target, "clock": t.clock} for t in self.triangles],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _raw_triangles(rows: int, cols: int):
    """Triangles as (corner, corner, centre) in traversal order, with vertex positions."""
    def corner(i, j):
        return i * (cols + 1) + j

    n_corners = (rows + 1) * (cols + 1)
    pos = {corner(i, j): (float(i), float(j)) for i in range(rows + 1) for j in range(cols + 1)}
    tris = []
    for i in range(rows):
        for j in range(cols):
            centre = n_corners + i * cols + j
            pos[centre] = (i + 0.5, j + 0.5)
            tl, tr, br, bl = corner(i, j), corner(i, j + 1), corner(i + 1, j + 1), corner(i + 1, j)
            tris += [(tl, tr, centre), (tr, br, centre), (br, bl, centre), (bl, tl, centre)]
    return tris, pos, n_corners


def build_union_jack(
    rows: int,
    cols: int,
    init_pattern: str = "zero-control",
    n_triangles: int | None = None,
    cap: int = HAMILTONIAN_CAP,
) -> tuple[UnionJackLattice, Circuit]:
    """Lattice and the equivalent per-triangle Toffoli circuit.

    ``n_triangles`` truncates the traversal; only vertices used by the kept
    triangles become wires. Under ``"zero-control"`` the white vertices are zero
    wires and the red ones plus wires; under ``"all-plus"`` every vertex is a
    plus wire. ``cap`` bounds the domain-wall Hilbert-space dimension.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be at least 1")
    if init_pattern not in INIT_PATTERNS:
        raise ValueError(f"init_pattern must be one of {INIT_PATTERNS}")
    tris, pos, n_corners = _raw_triangles(rows, cols)
    if n_triangles is not None:
        if not 1 <= n_triangles <= len(tris):
            raise ValueError(f"n_triangles must lie in 1..{len(tris)}")
        tris = tris[:n_triangles]
    used = sorted({v for tri in tris for v in tri})
    white = [v for v in used if v < n_corners]
    red = [v for v in used if v >= n_corners]
    dim = 2 ** (len(used) + len(tris))
    if dim > cap:
        raise CapExceededError(f"union-jack dimension {dim} exceeds cap {cap}")
    if init_pattern == "zero-control":
        order, n = white + red, len(white)
    else:
        order, n = used, 0
    wire = {v: k for k, v in enumerate(order)}
    vertices = tuple(
        Vertex(
            v,
            "white" if v < n_corners else "red",
            "0" if wire[v] < n else "+",
            wire[v],
            pos[v],
        )
        for v in used
    )
    triangles = tuple(Triangle((a, b), c, k + 1) for k, (a, b, c) in enumerate(tris))
    gates = tuple(
        Gate("TOFFOLI", (wire[a], wire[b], wire[c]), line=k + 1) for k, (a, b, c) in enumerate(tris)
    )
    lattice = UnionJackLattice(rows, cols, init_pattern, vertices, triangles)
    return lattice, Circuit(n, len(used) - n, gates)


def union_jack_hamiltonian(
    rows: int, cols: int, init_pattern: str = "zero-control", n_triangles: int | None = None, pad: bool = False
) -> InterpolatedHamiltonian:
    _, circuit = build_union_jack(rows, cols, init_pattern, n_triangles)
    return build_domain_wall(circuit, pad=pad)


def max_term_locality(h: TermHamiltonian | InterpolatedHamiltonian) -> int:
    """Largest number of subsystems any single term touches."""
    if isinstance(h, InterpolatedHamiltonian):
        return max(h.initial.max_locality(), h.final.max_locality())
    return h.max_locality()
