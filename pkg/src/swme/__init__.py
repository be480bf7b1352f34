"""Shallow water moment models: closures, spectra and a finite-volume solver."""
__version__ = "0.1.0"

from .errors import SwmeError
from .models import ModelVariant, Variant
from .state import ConservedState, PrimitiveState, SourceParams

__all__ = ["SwmeError", "ModelVariant", "Variant", "ConservedState", "PrimitiveState",
           "SourceParams", "__version__"]
