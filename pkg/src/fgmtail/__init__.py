"""Second-order tail approximations for randomly weighted sums of FGM pairs.

Modules
-------
distributions  heavy-tailed marginals (Pareto, Weibull, lognormal) and moments
fgm            the FGM pair: joint probabilities, sampling, pairwise expansion
weights        bounded random weight laws and expectations over them
asymptotics    first/second-order joint and sum tail approximations
montecarlo     seeded crude Monte Carlo with a compiled counting kernel
report         experiment configs, table runs, diagnostics, CSV/Markdown
"""
__version__ = "0.1.0"

from .asymptotics import (
    ModelSpec,
    RiskConfig,
    joint_asy1,
    joint_asy2,
    joint_asy2_rv,
    risk_joint_asy2,
    risk_sum_asy2,
    sum_asy1,
    sum_asy2,
    sum_asy2_rv,
)
from .distributions import (
    ConfigurationError,
    DomainError,
    Marginal,
    NumericUnderflowError,
    UnsupportedFamilyError,
    s2_diagnostic,
)
from .fgm import AsymptoticEstimate, FgmPair, kendall_tau
from .montecarlo import (
    McEstimate,
    McSettings,
    estimate_asy_paper_joint,
    estimate_asy_paper_sum,
    simulate_joint_tail,
    simulate_sum_tail,
)
from .weights import Comonotone, DiscountProduct, IidUniform, WeightModel

__all__ = [
    "AsymptoticEstimate", "Comonotone", "ConfigurationError", "DiscountProduct", "DomainError",
    "FgmPair", "IidUniform", "Marginal", "McEstimate", "McSettings", "ModelSpec",
    "NumericUnderflowError", "RiskConfig", "UnsupportedFamilyError", "WeightModel",
    "estimate_asy_paper_joint", "estimate_asy_paper_sum", "joint_asy1", "joint_asy2",
    "joint_asy2_rv", "kendall_tau", "risk_joint_asy2", "risk_sum_asy2", "s2_diagnostic",
    "simulate_joint_tail", "simulate_sum_tail", "sum_asy1", "sum_asy2", "sum_asy2_rv",
]
