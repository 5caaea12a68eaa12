"""Incompressible Navier-Stokes environment: cylinder, jets, diagnostics."""

from afc.flow.config import JetConfig, SimConfig
from afc.flow.domain import DomainGeometry, WitnessLayout, build_domain, build_witness_layout
from afc.flow.jets import JetAction, jet_velocity
from afc.flow.solver import CylinderFlow, FlowField, PeriodicBox

__all__ = [
    "SimConfig",
    "JetConfig",
    "DomainGeometry",
    "WitnessLayout",
    "build_domain",
    "build_witness_layout",
    "JetAction",
    "jet_velocity",
    "CylinderFlow",
    "PeriodicBox",
    "FlowField",
]
