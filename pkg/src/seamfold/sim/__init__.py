"""Deterministic 2D fold-stack garment simulator."""

from .garment import (
    CanonicalCrossing,
    CanonicalGarment,
    SeamPolyline,
    SeamVisibility,
    garment_from_dict,
    garment_to_dict,
    load_garment,
    validate_garment,
)
from .simulator import (
    FoldLine,
    GarmentObservation,
    GarmentState,
    GraspMissError,
    Placement,
    SimulationError,
    Simulator,
    SimulatorConfig,
    SurrogateOutput,
    VisibleCrossing,
    VisibleSeamSegment,
    build_layers,
    flat_state,
    fold_trajectory,
    state_digest,
    state_from_dict,
    state_to_dict,
)

__all__ = [
    "CanonicalCrossing",
    "CanonicalGarment",
    "FoldLine",
    "GarmentObservation",
    "GarmentState",
    "GraspMissError",
    "Placement",
    "SeamPolyline",
    "SeamVisibility",
    "SimulationError",
    "Simulator",
    "SimulatorConfig",
    "SurrogateOutput",
    "VisibleCrossing",
    "VisibleSeamSegment",
    "build_layers",
    "flat_state",
    "fold_trajectory",
    "garment_from_dict",
    "garment_to_dict",
    "load_garment",
    "state_digest",
    "state_from_dict",
    "state_to_dict",
    "validate_garment",
]
