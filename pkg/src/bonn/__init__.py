"""Budgeted-observation hierarchical recurrent policies.

A policy that pays a configurable cost each time it looks at the rich
observation of its environment, trained with recurrent policy
gradients on the cost-augmented return.  Latent options fall out of
the budget: the actor runs open-loop (or on the cheap observation)
between acquisitions.
"""

from .backend import BACKEND
from .diffcore import Tape, Tensor, constant
from .version import __version__

__all__ = ["BACKEND", "Tape", "Tensor", "constant", "__version__"]
