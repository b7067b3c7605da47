"""Teleportation with classical bits carried by delta-coupled Unruh-DeWitt
detectors through a relativistic quantum field."""

__version__ = "0.1.0"
