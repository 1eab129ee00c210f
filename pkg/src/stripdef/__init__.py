"""Strip deformations of positive Schottky groups in SO(2n, 2n-1) and crooked fundamental domains."""

__version__ = "0.1.0"
