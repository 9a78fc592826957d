"""motivix: exact correspondence calculus for self-products of curves with elliptically split Jacobians."""

__version__ = "0.3.0"
