"""Exact sampling laws, finite de Finetti gaps and the bounds that control them."""

__version__ = "0.1.0"

from .arith import (
    DEFAULT_BITS,
    PrecisionFloat,
    binomial,
    falling_factorial,
    log_rational,
    multinomial_coeff,
)
from .bounds import (
    BoundParams,
    BoundResult,
    evaluate_kl_bound,
    evaluate_kl_lower_bound,
    evaluate_tv_bound,
    verify_instance,
)
from .divergences import (
    KL,
    TV_L1,
    coarsen,
    pinsker_slack,
    relative_entropy,
    total_variation,
)
from .exchangeable import (
    ExchangeableModel,
    MixingMeasure,
    definetti_gap,
    empirical_mixing,
    iid_mixture_dist,
    marginal,
    model_from_weights,
    model_iid_mixture,
    model_random_permutation,
)
from .urns import (
    CompositionDist,
    SequenceTypeDist,
    UrnComposition,
    enumerate_compositions,
    hypergeom_composition,
    multinom_composition,
    to_sequence_level,
    urn_from_ntype,
)


__all__ = [
    "BoundParams",
    "BoundResult",
    "CompositionDist",
    "DEFAULT_BITS",
    "ExchangeableModel",
    "KL",
    "MixingMeasure",
    "PrecisionFloat",
    "SequenceTypeDist",
    "TV_L1",
    "UrnComposition",
    "binomial",
    "coarsen",
    "definetti_gap",
    "empirical_mixing",
    "enumerate_compositions",
    "evaluate_kl_bound",
    "evaluate_kl_lower_bound",
    "evaluate_tv_bound",
    "falling_factorial",
    "hypergeom_composition",
    "iid_mixture_dist",
    "log_rational",
    "marginal",
    "model_from_weights",
    "model_iid_mixture",
    "model_random_permutation",
    "multinom_composition",
    "multinomial_coeff",
    "pinsker_slack",
    "relative_entropy",
    "to_sequence_level",
    "total_variation",
    "urn_from_ntype",
    "verify_instance",
]
