"""Geometry, calibration, contact localisation and grasp simulation for a
finger-shaped optical tactile sensor."""

__version__ = "0.1.0"
