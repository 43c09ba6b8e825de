"""Linear secret sharing for many users over distributed storage nodes.

Each user reads a fixed subset of storage nodes and must recover its own
message while learning nothing about the joint collection of everyone
else's.  The package decides whether a rate tuple is achievable, builds a
linear scheme when it is, certifies schemes two independent ways, and
encodes/decodes payloads.
"""

from importlib import resources

from .codec import Payload, ShareSet, place, retrieve
from .galois import Field, FieldMatrix, make_field
from .synthesis import DmussScheme, synthesize
from .topology import (
    AccessStructure,
    Violation,
    check_perfect_capacity,
    check_weak_capacity,
    validate_access_structure,
)
from .verification import certify_ranks, entropy_oracle

__version__ = "0.1.0"


def worked_example_scheme() -> DmussScheme:
    """The four-user, six-node GF(2) scheme shipped with the package."""
    from .formats import scheme_from_json
    import json

    text = resources.files(__package__).joinpath("data/worked_example_gf2.json").read_text()
    return scheme_from_json(json.loads(text))


WORKED_EXAMPLE_SETS = ([1, 2, 4], [2, 3, 6], [1, 4, 5], [3, 5, 6])

__all__ = [
    "AccessStructure", "DmussScheme", "Field", "FieldMatrix", "Payload", "ShareSet", "Violation",
    "WORKED_EXAMPLE_SETS", "certify_ranks", "check_perfect_capacity", "check_weak_capacity",
    "entropy_oracle", "make_field", "place", "retrieve", "synthesize", "validate_access_structure",
    "worked_example_scheme",
]
