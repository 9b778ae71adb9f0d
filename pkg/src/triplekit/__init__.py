"""Jordan triple maps on complex matrix algebras."""

__version__ = "0.1.0"
