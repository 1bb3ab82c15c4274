"""Figure rendering for starfd experiment CSVs."""

from .render import Curve, SchemaError, aggregate, read_rows, render

__version__ = "0.1.0"

__all__ = ["Curve", "SchemaError", "aggregate", "read_rows", "render"]
