"""Real eigenvalues of real elliptic Ginibre matrices."""

__version__ = "0.1.0"
