"""Real-space Kohn-Sham molecular dynamics with a POD reduced-order solver."""

__version__ = "0.1.0"

from .grid import Grid3, ScalarField, inner_product, integrate
from .species import HYDROGEN, OXYGEN, AtomicConfiguration, Species, water_configuration

__all__ = [
    "Grid3",
    "ScalarField",
    "integrate",
    "inner_product",
    "Species",
    "AtomicConfiguration",
    "water_configuration",
    "OXYGEN",
    "HYDROGEN",
    "__version__",
]
