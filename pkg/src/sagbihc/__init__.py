"""SAGBI homotopy continuation for horizontally parameterized polynomial systems."""

__version__ = "0.1.0"
