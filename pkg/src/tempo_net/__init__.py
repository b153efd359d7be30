"""Analysis of parametric time Petri nets with inhibitor arcs."""

__version__ = "0.1.0"
