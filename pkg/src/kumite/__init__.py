"""kumite: a deterministic, turn-based two-humanoid combat learning
environment with a line-oriented TCP control protocol."""

__version__ = "0.1.0"
