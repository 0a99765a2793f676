"""Random codebooks, exact induced distributions and synthesis experiments."""

from .cascade import (
    CascadeSystem,
    InducedDistribution,
    NestedCascadeSystem,
    general_cascade_exact,
    induced_distribution_exact,
    iid_target_block,
    likelihood_encoder_posterior,
    markov_checks,
    secrecy_tv,
    synthesis_tv,
    x_marginal_deviation,
)
from .codebook import (
    NestedCodebook,
    SuperpositionCodebook,
    index_count,
    sample_codebook,
    sample_nested_codebook,
    sample_single_layer,
)
from .eavesdrop import CascadeSamples, IndependenceTest, eavesdropper_independence_test, sample_cascade
from .relay import relay_induced, relay_scheme_experiment
from .report import ExperimentReport
from .softcover import softcover_experiment, superposition_softcover_experiment

__all__ = [
    "CascadeSamples",
    "CascadeSystem",
    "ExperimentReport",
    "IndependenceTest",
    "InducedDistribution",
    "NestedCascadeSystem",
    "NestedCodebook",
    "SuperpositionCodebook",
    "eavesdropper_independence_test",
    "general_cascade_exact",
    "iid_target_block",
    "index_count",
    "induced_distribution_exact",
    "likelihood_encoder_posterior",
    "markov_checks",
    "relay_induced",
    "relay_scheme_experiment",
    "sample_cascade",
    "sample_codebook",
    "sample_nested_codebook",
    "sample_single_layer",
    "secrecy_tv",
    "softcover_experiment",
    "superposition_softcover_experiment",
    "synthesis_tv",
    "x_marginal_deviation",
]
