"""Secure-connectivity-graph lab: simulator and closed-form calculator for
slotted-ALOHA ad hoc networks with Poisson-distributed eavesdroppers."""

from scglab.model import ModelParams, SimConfig, Window, validate

__all__ = ["ModelParams", "SimConfig", "Window", "validate"]
__version__ = "0.1.0"
