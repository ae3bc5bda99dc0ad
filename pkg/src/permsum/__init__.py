"""Exact anticoncentration toolkit for permutation sums sum_i a_i b_pi(i)."""

from .bounds import (BoundKind, BoundSpec, Status, VerdictRecord, conjecture_ratio, evaluate,
                     main_bound, mamb_bound, pawlowski_bound, pawlowski_count_bound,
                     tightness_lower, verify)
from .dist import (ExactDistribution, PointMassReport, exact_distribution_dp,
                   exact_distribution_enum, exact_variance, max_point_mass)
from .energy import (EnergyReport, ValueDistribution, kappa_bruteforce, kappa_convolution,
                     rnr_ratio, z_distribution)
from .errors import CapExceededError, InvalidInputError, NoDiversityError, PermsumError
from .multiset import (Decomposition, Multiset, MultiplicityProfile, decompose,
                       diversity_statistic, multiplicity_profile, staircase)
from .sampler import QEstimate, SampleConfig, estimate_q, sample_distribution

__version__ = "0.1.0"
