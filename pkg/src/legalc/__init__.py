"""legalc: compiler and reference interpreter for a literate legal DSL."""

__version__ = "0.1.0"
