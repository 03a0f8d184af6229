"""Rényi-entropy security measures of hashed secrets: limits, exponents,
second-order behaviour, one-shot bounds and exact information spectra."""

from .asymptotics import critical_rate, equiv_limit, exponent, exponent_zero_crossing, key_rate
from .dist import CANON, JointSource, condition, load_joint, load_source_file, random_joint, tensor_power
from .errors import (
    CaseMismatch,
    DomainError,
    EmptyMatrix,
    EquivocationError,
    GrowthCapWarning,
    HypothesisWarning,
    IntervalError,
    MassNotOne,
    NegativeEntry,
    SizeOverflow,
    UncertifiedFamily,
    ZeroAtom,
)
from .hashing import HashFamily, all_functions_family, toeplitz_family, verify_epsilon
from .measures import (
    arimoto_mi,
    cond_renyi_H,
    cond_renyi_H_up,
    gallager_phi,
    renyi_divergence,
    security_measure,
    shannon_cond_entropy,
    sibson_mi,
    tilted_QE,
    two_param_H,
    varentropies,
)
from .oneshot import BoundReport, converse_rhs, direct_rhs, exact_security, verify
from .second_order import BoundPair, GaussianSpec, gamma_bounds, large_L_approx, psi_bounds, second_order_limit
from .spectrum import collision_sum_exact, cramer_exponent, exact_tail

__version__ = "0.1.0"
