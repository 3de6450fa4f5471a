"""Open ASEP with reservoirs: exact event-driven simulation and its Gartner field."""
from .ensemble import AsepReplica, height_process_H, macroscopic_field, simulate_replica
from .state import AsepState

__all__ = ["AsepReplica", "AsepState", "height_process_H", "macroscopic_field", "simulate_replica"]
