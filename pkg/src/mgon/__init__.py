"""Resource allocation for multi-granular optical networks."""

__version__ = "0.1.0"
