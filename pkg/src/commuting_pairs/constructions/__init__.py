"""
Commuting constructions.

This module contains the pinching constructions, the gap-binning construction
and the event/measurement-chain pipeline, plus a name-based registry of the
constructions that turn a pair (Omega, X) into a commuting pair.
"""

from typing import Any, Dict, List, Optional, Type

from ..core.construction import BaseConstruction
from ..core.models import BinningParams
from ..exceptions import ConfigurationError
from .binning import (
    CommutingApproximant,
    GapBinning,
    GapBinningConstruction,
    block_compress,
    commuting_approximants,
    flatten_state,
    gap_binning,
)
from .events import (
    ChainReport,
    EventPartition,
    MeasurementChain,
    TruncatedEvent,
    assign_index_sets,
    build_measurement_chain,
    check_actuality,
    truncate_tail,
    verify_chain,
)
from .postulate import (
    IntervalQuantization,
    ObservablePinching,
    PinchCertificate,
    PostulateReport,
    StatePinching,
    check_postulate,
    pinch_observable,
    pinch_state,
    quantize_observable,
)

CONSTRUCTIONS: Dict[str, Type[BaseConstruction]] = {
    "observable": ObservablePinching,
    "state": StatePinching,
    "quantize": IntervalQuantization,
    "binning": GapBinningConstruction,
}


def available_constructions() -> List[str]:
    """Names accepted by :func:`get_construction`."""
    return sorted(CONSTRUCTIONS)


def get_construction(
    name: str, eps: Optional[float] = None, params: Optional[BinningParams] = None
) -> BaseConstruction:
    """
    Get a construction instance by name.

    Args:
        name: One of :func:`available_constructions`
        eps: Cover half width, required by ``quantize``
        params: Binning parameters, required by ``binning``

    Returns:
        The construction
    """
    name = name.lower()
    if name not in CONSTRUCTIONS:
        raise ConfigurationError(
            f"unknown construction (choose from {', '.join(available_constructions())})",
            setting="construction",
            value=name,
        )
    if name == "quantize":
        if eps is None or eps <= 0:
            raise ConfigurationError("quantize needs a positive eps", setting="eps", value=eps)
        return IntervalQuantization(eps)
    if name == "binning":
        if params is None:
            raise ConfigurationError("binning needs parameters", setting="params")
        return GapBinningConstruction(params)
    construction: Any = CONSTRUCTIONS[name]()
    return construction


__all__ = [
    "CONSTRUCTIONS",
    "available_constructions",
    "get_construction",
    "CommutingApproximant",
    "GapBinning",
    "GapBinningConstruction",
    "block_compress",
    "commuting_approximants",
    "flatten_state",
    "gap_binning",
    "EventPartition",
    "MeasurementChain",
    "ChainReport",
    "TruncatedEvent",
    "assign_index_sets",
    "build_measurement_chain",
    "check_actuality",
    "truncate_tail",
    "verify_chain",
    "IntervalQuantization",
    "ObservablePinching",
    "PinchCertificate",
    "PostulateReport",
    "StatePinching",
    "check_postulate",
    "pinch_observable",
    "pinch_state",
    "quantize_observable",
]
