"""Deterministic multi-vehicle coral-reseeding simulator and fleet control.

Surface vehicles survey synthetic benthic maps on coverage paths while an
emulated substrate classifier gates larvae release; mission logs feed the
field accounting (area percentages, coverage ratio) and a fleet service
relays telemetry to an operator console.
"""

__version__ = "0.1.0"
