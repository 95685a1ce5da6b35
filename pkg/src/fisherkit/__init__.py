"""Fisher information, Wald inference, Jeffreys priors, information geometry and MDL."""
from __future__ import annotations

from .fisher import FisherMatrix, fisher_information, fisher_iid
from .models import (CountVector, DomainError, OutcomeSpace, ParametricModel, ProbVector,
                     Reparameterization, UnknownModelError, bent_coin_map, builtin_model,
                     reparameterize)

__version__ = "0.1.0"

__all__ = [
    "CountVector", "DomainError", "FisherMatrix", "OutcomeSpace", "ParametricModel",
    "ProbVector", "Reparameterization", "UnknownModelError", "bent_coin_map", "builtin_model",
    "fisher_iid", "fisher_information", "reparameterize",
]
