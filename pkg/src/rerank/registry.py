"""Algorithm labels accepted by the simulator and the CLI"""

from typing import Dict, Optional

from src.exceptions import OutOfScopeError, UnknownAlgorithmError
from src.rerank.xquad import Variant

BASE_LABEL = "base"

ALGORITHMS: Dict[str, Optional[Variant]] = {
    BASE_LABEL: None,
    "binary": Variant.BINARY,
    "smooth": Variant.SMOOTH,
    "time_binary": Variant.TIME_BINARY,
    "time_smooth": Variant.TIME_SMOOTH,
}

RESERVED = {
    "reg": "regularized long-tail factorization baseline (out of scope)",
}


def registry_listing() -> str:
    labels = list(ALGORITHMS) + [f"{label} [{reason}]" for label, reason in RESERVED.items()]
    return ", ".join(labels)


def resolve_algorithm(label: str) -> Optional[Variant]:
    """Variant for a label; None means the unmodified base ranking"""
    if label in ALGORITHMS:
        return ALGORITHMS[label]
    if label in RESERVED:
        raise OutOfScopeError(f"Algorithm '{label}' is out of scope: {RESERVED[label]}")
    raise UnknownAlgorithmError(f"Unknown algorithm '{label}'. Registry: {registry_listing()}")
