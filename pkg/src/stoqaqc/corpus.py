"""A fixed regression corpus of small permutation circuits.

Every case has at most 6 wires and at most 8 gates, so both clock backends
stay comfortably inside dense-diagonalisation range.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, parse_circuit
from .shor import fig3_circuit
from .unionjack import build_union_jack

__all__ = ["CorpusCase", "corpus", "corpus_case"]


@dataclass(frozen=True)
class CorpusCase:
    name: str
    circuit: Circuit
    tags: tuple[str, ...] = ()


_TEXT = {
    "x": "work 1 0\nX 0\n",
    "plus-id": "work 0 1\nID\n",
    "bell": "work 1 1\nCNOT 1 0\n",
    "ghz3": "work 2 1\nCNOT 2 0\nCNOT 2 1\n",
    "toffoli-plus": "work 1 2\nCCX 1 2 0\n",
    "x-cnot": "work 2 0\nX 0\nCNOT 0 1\n",
    "swap3": "work 1 1\nCNOT 1 0\nCNOT 0 1\nCNOT 1 0\n",
    "perm-swap": "work 1 1\nPERM 2 0 1 0 2 1 3\n",
    "perm-cycle": "work 2 0\nX 1\nPERM 2 0 1 1 2 0 3\n",
    "idle-bell": "work 1 1\nID\nID\nCNOT 1 0\nID\n",
    "cnot-toffoli": "work 2 2\nCNOT 2 0\nCNOT 3 1\nCCX 0 1 3\n",
    "wide6": "work 3 3\nCNOT 3 0\nCNOT 4 1\nCNOT 5 2\nCCX 0 1 2\n",
    "deep8": "work 2 1\nX 0\nCNOT 0 1\nCNOT 2 1\nCCX 0 2 1\nX 0\nCNOT 2 0\nID\nCNOT 1 2\n",
    "perm3": "work 1 2\nPERM 3 0 1 2 3 6 1 4 0 7 2 5\nCNOT 1 0\n",
}


def corpus() -> list[CorpusCase]:
    """The 20 regression circuits, in a fixed order."""
    cases = [CorpusCase(name, parse_circuit(text), ("perm",) if "PERM" in text else ()) for name, text in _TEXT.items()]
    cases.append(CorpusCase("modexp-3-2", fig3_circuit(3, 2, [0]), ("perm", "shor")))
    cases.append(CorpusCase("modexp-15-7", fig3_circuit(15, 7, [0]), ("perm", "shor")))
    for pattern in ("zero-control", "all-plus"):
        cases.append(
            CorpusCase(f"uj1-{pattern}", build_union_jack(1, 1, pattern, n_triangles=1)[1], ("unionjack",))
        )
        cases.append(CorpusCase(f"uj-1x1-{pattern}", build_union_jack(1, 1, pattern)[1], ("unionjack",)))
    return cases


def corpus_case(name: str) -> CorpusCase:
    for case in corpus():
        if case.name == name:
            return case
    raise KeyError(name)
