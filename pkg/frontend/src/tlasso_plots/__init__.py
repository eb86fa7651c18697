"""Read-only plotting frontend for the tlasso experiment CSV schemas."""

__version__ = "0.1.0"

from .render import FigureSpec, SchemaError, EmptyInputError, render
