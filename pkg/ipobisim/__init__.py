"""IPO-derived transition systems for λ-calculus and combinatory logic."""

__version__ = "0.1.0"
