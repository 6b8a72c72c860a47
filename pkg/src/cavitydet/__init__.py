"""Unruh-DeWitt detectors coupled to scalar and spinor fields in a periodic cavity."""
from .errors import (
    CavityDetError,
    CoincidenceLimit,
    ConfigError,
    MalformedWord,
    ModelMismatch,
    ModeOutsideSpace,
    NotApplicable,
    OpenSpinorIndex,
    TooFewCutoffs,
)
from .lattice import CavityField, FieldKind
from .profiles import DetectorSpec, GaussianProfile, GaussianSwitching, PointLike, SuddenSwitching

__version__ = "0.1.0"
