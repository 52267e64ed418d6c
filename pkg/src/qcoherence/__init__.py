"""Coherence measures, incoherent channels, and sampled checks of the conditions a measure must meet."""

from .channels import (
    KrausChannel,
    Observable,
    apply,
    embed_channel,
    flag_channel_b3,
    is_incoherent_channel,
    is_translation_invariant,
    merge_flag_channel,
    projector_channel,
    random_incoherent_channel,
    selective_outcomes,
    shift_unitary,
    truncate_channel,
)
from .diagopt import DiagConstraint, OptResult, grid_oracle, minimize_trace_distance
from .errors import (
    CoherenceError,
    DimensionMismatch,
    DimensionTooLarge,
    InvalidSpec,
    NonSquare,
    NotConverged,
    NotHermitian,
    NotPSD,
    NotUnitTrace,
)
from .framework import SuiteConfig, VerificationReport, reproduce_counterexample, run_suite
from .measures import (
    MeasureHandle,
    get_measure,
    l1_coherence,
    modified_trace_norm_coherence,
    relative_entropy_coherence,
    skew_information,
    trace_norm_coherence,
    von_neumann_entropy,
)
from .states import (
    BlockSpec,
    DensityState,
    block_mix,
    counterexample_state,
    dephase,
    is_incoherent,
    make_density,
    max_coherent,
    random_density,
)

__version__ = "0.1.0"
