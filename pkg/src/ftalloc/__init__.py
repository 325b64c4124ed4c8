"""Error-budget allocation for fault-tolerant quantum programs via iterated best response."""
from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def corpus_dir() -> Path:
    """Directory holding the bundled synthetic circuit profiles."""
    return Path(str(resources.files(__name__) / "corpus"))


from .cost_model import (  # noqa: E402
    CircuitProfile,
    ResourceEstimate,
    SyntheticOracle,
    cost,
    estimate,
    load_profile,
    space_time_volume,
)
from .simplex import Allocation, GameConfig, PlayerId, uniform  # noqa: E402
from .solver import SolveResult, solve  # noqa: E402
from .verifier import certify_nash, grid_minimize, improvement  # noqa: E402

__all__ = [
    "Allocation",
    "CircuitProfile",
    "GameConfig",
    "PlayerId",
    "ResourceEstimate",
    "SolveResult",
    "SyntheticOracle",
    "certify_nash",
    "corpus_dir",
    "cost",
    "estimate",
    "grid_minimize",
    "improvement",
    "load_profile",
    "solve",
    "space_time_volume",
    "uniform",
]
