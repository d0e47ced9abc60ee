"""Simulation toolkit for stoquastic adiabatic quantum computation with clock Hamiltonians."""

from __future__ import annotations

__version__ = "0.1.0"

from .adiabatic import Schedule, evolve, required_time_estimate
from .circuit import Basis, Circuit, Gate, QuantumState, load_circuit, parse_circuit, run_circuit
from .css import encode_circuit, noisy_measurement_experiment, steane_code, transversal_decode
from .hamiltonian import InterpolatedHamiltonian, TermHamiltonian, build_domain_wall, build_unary, check_stoquastic
from .measurement import MeasurementPlan, error_budget, exact_distribution, sample, sample_adaptive
from .shor import OrderFindingInstance, factor, modexp_gate, shor_as_circuit
from .spectral import gap_scan, ground_state, history_state
from .unionjack import build_union_jack, max_term_locality
from .verification import certify, energy_estimate

__all__ = [
    "Basis",
    "Circuit",
    "Gate",
    "InterpolatedHamiltonian",
    "MeasurementPlan",
    "OrderFindingInstance",
    "QuantumState",
    "Schedule",
    "TermHamiltonian",
    "build_domain_wall",
    "build_unary",
    "build_union_jack",
    "certify",
    "check_stoquastic",
    "encode_circuit",
    "energy_estimate",
    "error_budget",
    "evolve",
    "exact_distribution",
    "factor",
    "gap_scan",
    "ground_state",
    "history_state",
    "load_circuit",
    "max_term_locality",
    "modexp_gate",
    "noisy_measurement_experiment",
    "parse_circuit",
    "required_time_estimate",
    "run_circuit",
    "sample",
    "sample_adaptive",
    "shor_as_circuit",
    "steane_code",
    "transversal_decode",
]
