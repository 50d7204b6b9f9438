"""Query-counted multilinear identity testing over black-box finite rings."""

__version__ = "0.1.0"
