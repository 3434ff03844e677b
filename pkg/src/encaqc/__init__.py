"""Simulation of encoded adiabatic quantum computation under error suppression.

Stabilizer codes with symplectic Paulis, encoded Hamiltonians, dynamical
decoupling and energy-gap protection in a common toggling-frame picture,
bath correlation functions with closed-form leakage rates, and a
non-Markovian master-equation integrator.
"""
from ._kernels import BACKEND
from .baths import ClassicalExponential, OhmicLorentzDrude
from .codes import StabilizerCode, make_code, preset, single_qubit_errors
from .control import DDProtocol, EGPProtocol, NoControl, WeightFunction
from .dynamics import SimState, Trajectory, error_scrambling_scenario, propagate_pure
from .master import MasterEquation, integrate_master_equation, rate_equation_solve
from .model import HamiltonianTermList, build_encoded_aqc, landau_zener_model
from .pauli import PauliString, parse_pauli

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassicalExponential",
    "DDProtocol",
    "EGPProtocol",
    "HamiltonianTermList",
    "MasterEquation",
    "NoControl",
    "OhmicLorentzDrude",
    "PauliString",
    "SimState",
    "StabilizerCode",
    "Trajectory",
    "WeightFunction",
    "build_encoded_aqc",
    "error_scrambling_scenario",
    "integrate_master_equation",
    "landau_zener_model",
    "make_code",
    "parse_pauli",
    "preset",
    "propagate_pure",
    "rate_equation_solve",
    "single_qubit_errors",
]
