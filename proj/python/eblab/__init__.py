"""Empirical Bayes for Poisson and normal-means mixtures.

Thin python surface over the C++ core: discrete priors, Poisson mixture
arithmetic, prior-on-prior samplers, hierarchical Bayes estimators,
classical baselines, and the Monte-Carlo experiment drivers.
"""

from ._eblab import *  # noqa: F401,F403
from ._eblab import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
