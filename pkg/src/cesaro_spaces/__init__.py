"""Norms, Cesàro transforms and membership classification for the sequence
spaces l_p, ces(p), d(p) and their graded variants."""

__version__ = "0.1.0"
