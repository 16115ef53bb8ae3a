"""Almost-sure analysis of POMDPs with parity objectives.

Typical use::

    from qpomdp import ingest, solve
    result = solve(ingest.load("model.qpomdp"))
    print(result.verdict)
"""
from .ingest import load, parse, write
from .model import Pomdp, ResourceLimitError, validate
from .objective import ObjectiveSpec, template
from .oracle import PolicyClassSpec, decide
from .policy import FiniteMemoryPolicy, export, import_policy
from .solve import ALMOST_SURE, NOT_FOUND, solve
from .verify import check, simulate

__version__ = "0.1.0"

__all__ = [
    "ALMOST_SURE", "NOT_FOUND", "FiniteMemoryPolicy", "ObjectiveSpec", "PolicyClassSpec", "Pomdp",
    "ResourceLimitError", "check", "decide", "export", "import_policy", "load", "parse",
    "simulate", "solve", "template", "validate", "write",
]
