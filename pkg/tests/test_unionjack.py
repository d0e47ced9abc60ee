from __future__ import annotations

import json

import numpy as np
import pytest

from stoqaqc.circuit import Basis, CapExceededError, parse_circuit, run_circuit, serialize_circuit
from stoqaqc.hamiltonian import TermHamiltonian, build_unary, check_stoquastic, clock_penalty
from stoqaqc.unionjack import UnionJackLattice, build_union_jack, max_term_locality, union_jack_hamiltonian

from .oracles import gate_unitary

PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
ZERO = np.array([1.0, 0.0])


def _conditional_final(ih):
    """Ground state of H_final conditioned on the all-ones clock, as a work vector."""
    vals, vecs = np.linalg.eigh(ih.final.matrix().toarray())
    g = vecs[:, 0]
    T = ih.basis.clock
    block = g.reshape(2**ih.basis.n_work, 2**T)[:, 2**T - 1]
    return vals, block / np.linalg.norm(block)


def test_single_triangle_circuit():
    lat, c = build_union_jack(1, 1, "zero-control", n_triangles=1)
    assert serialize_circuit(c).split("\n")[0] == "work 2 1"
    assert (c.n, c.m, c.T) == (2, 1, 1) and c.gates[0].kind == "TOFFOLI"
    assert lat.T == 1 and lat.triangles[0].clock == 1


def test_single_triangle_zero_control_final_state():
    _, c = build_union_jack(1, 1, "zero-control", n_triangles=1)
    vals, psi = _conditional_final(union_jack_hamiltonian(1, 1, "zero-control", n_triangles=1))
    assert abs(vals[0]) <= 1e-10
    ref = gate_unitary("TOFFOLI", (0, 1, 2), 3) @ np.kron(np.kron(ZERO, ZERO), PLUS)
    assert abs(abs(np.vdot(ref, psi)) - 1) <= 1e-10
    assert np.allclose(ref, np.kron(np.kron(ZERO, ZERO), PLUS))


def test_single_triangle_all_plus_correlators():
    _, c = build_union_jack(1, 1, "all-plus", n_triangles=1)
    assert (c.n, c.m) == (0, 3)
    _, psi = _conditional_final(union_jack_hamiltonian(1, 1, "all-plus", n_triangles=1))
    psi = psi * np.sign(psi[np.argmax(np.abs(psi))])
    ref = gate_unitary("TOFFOLI", (0, 1, 2), 3) @ np.kron(np.kron(PLUS, PLUS), PLUS)
    assert np.allclose(psi, ref, atol=1e-10)
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    # <Z Z X> on CCX|+++>: target flips on |11>, which leaves |+> invariant, so the
    # correlator is <ZZ> on |++> = 0; single-qubit <X_target> = 1.
    zzx = np.kron(np.kron(z, z), x)
    assert abs(np.vdot(psi, zzx @ psi) - np.vdot(ref, zzx @ ref)) <= 1e-10
    xt = np.kron(np.eye(4), x)
    assert abs(np.vdot(psi, xt @ psi) - 1.0) <= 1e-10


def test_lattice_invariants():
    lat, c = build_union_jack(2, 2, cap=2**40)
    assert lat.T == 16 == c.T
    assert [t.clock for t in lat.triangles] == list(range(1, 17))
    ids = {v.id for v in lat.vertices}
    for t in lat.triangles:
        assert set(t.controls) | {t.target} <= ids
        assert lat.vertex(t.target).color == "red"
        assert all(lat.vertex(v).color == "white" for v in t.controls)
    assert sum(v.color == "white" for v in lat.vertices) == 9
    assert all((v.init == "0") == (v.color == "white") for v in lat.vertices)
    d = json.loads(lat.to_json())
    assert len(d["triangles"]) == 16 and d["schema_version"] == 1
    with pytest.raises(ValueError):
        UnionJackLattice(1, 1, "zero-control", lat.vertices, lat.triangles[1:])


def test_all_plus_marks_every_vertex():
    lat, c = build_union_jack(1, 2, "all-plus")
    assert c.n == 0 and all(v.init == "+" for v in lat.vertices)


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_union_jack(0, 1)
    with pytest.raises(ValueError):
        build_union_jack(1, 1, "checkerboard")
    with pytest.raises(ValueError):
        build_union_jack(1, 1, n_triangles=5)
    with pytest.raises(CapExceededError):
        build_union_jack(3, 3, cap=2**20)


def test_locality():
    ih = union_jack_hamiltonian(1, 1)
    assert max_term_locality(ih) == 6
    assert max_term_locality(build_unary(parse_circuit("work 1 1\nCNOT 1 0\n")).final) == 3
    assert max_term_locality(TermHamiltonian(Basis("domain_wall", 0, 4), clock_penalty(0, 4))) == 2


def test_propagation_terms_touch_one_triangle():
    lat, c = build_union_jack(1, 1)
    ih = union_jack_hamiltonian(1, 1)
    nw = c.width
    wire_of = {v.id: v.wire for v in lat.vertices}
    props = [t for t in ih.final.terms if t.tag == "propagation"]
    assert len(props) == lat.T
    for term, tri in zip(props, lat.triangles):
        work = [w for w in term.wires if w < nw]
        clock = sorted(w - nw + 1 for w in term.wires if w >= nw)
        assert sorted(work) == sorted(wire_of[v] for v in tri.controls + (tri.target,))
        assert len(clock) <= 3 and clock == list(range(clock[0], clock[0] + len(clock)))
        assert tri.clock in clock


@pytest.mark.parametrize("pattern", ["zero-control", "all-plus"])
def test_stoquastic_on_grid(pattern):
    ih = union_jack_hamiltonian(1, 1, pattern)
    for s in np.linspace(0, 1, 21):
        assert check_stoquastic(ih(float(s))).ok


@pytest.mark.parametrize("pattern", ["zero-control", "all-plus"])
def test_conditional_ground_state_reproduces_circuit(pattern):
    _, c = build_union_jack(1, 1, pattern)
    vals, psi = _conditional_final(union_jack_hamiltonian(1, 1, pattern))
    assert abs(vals[0]) <= 1e-10
    ref = run_circuit(c).amplitudes
    assert abs(np.vdot(ref, psi)) ** 2 >= 1 - 1e-10
