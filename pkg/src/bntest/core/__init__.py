"""Bayes-net data model, exact inference, sampling and distance oracles."""
from .dag import DagStructure, ParentalConfiguration, validate_structure
from .distances import (
    PRODUCT_L1_FLOOR,
    bernoulli_kl,
    chi2_identity_proxy,
    hellinger_bound_bn,
    hellinger_sq_exact,
    kl_exact,
    kl_lower_proxy,
    kl_same_structure,
    l1_exact,
    product_l1_lower_bound,
    tv_exact,
)
from .inference import (
    BalancednessReport,
    balancedness,
    config_probabilities,
    exact_joint,
    parent_config_prob,
)
from .net import BayesNet, ProductSpec
from .nondegeneracy import (
    beta_exact,
    ci_surgery,
    conditional_covariances,
    distance_to_ci,
    nondegeneracy_conditions,
    nondegeneracy_interval,
    tree_nondegeneracy,
)
from .sampling import (
    BatchSource,
    CountTable,
    FlippedSource,
    NetSource,
    ProductSource,
    RerandomizedSource,
    SampleBatch,
    SampleSource,
    sample,
    source_for,
)

__all__ = [name for name in dir() if not name.startswith("_")]
