"""Group-cohesion estimation and cohesion-aware crowd navigation in 2-D."""

__version__ = "0.1.0"
