"""Deterministic simulator and attack harness for GAEN-style BLE exposure notification."""

__version__ = "0.1.0"
