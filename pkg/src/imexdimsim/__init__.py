"""IMEX DIMSIM time integrators with stability and SSP analysis."""

__version__ = "0.1.0"

from .tableau import CATALOG_NAMES, Tableau, catalog, verify_order  # noqa: E402

__all__ = ["CATALOG_NAMES", "Tableau", "catalog", "verify_order", "__version__"]
