"""Quad-UPA 3D hierarchical beam training: codebooks, link simulation, metrics."""

from .channel import (
    ElementGainModel,
    LosLink,
    MeasurementConfig,
    effective_snr,
    los_channel,
    measure,
)
from .codebook import (
    Codeword,
    CodebookConfig,
    HierarchicalCodebook,
    NarrowCodebook,
    SynthesisError,
    build_benchmark_codebook,
    build_codebook_set,
    build_grid,
    build_hierarchical_codebook,
    build_narrow_stage,
    build_steering_dictionary,
    build_target_matrix,
    buffer_set,
    coverage_set,
    narrow_beam_angles,
    solve_wide_beams,
)
from .geometry import (
    ArrayGeometry,
    Direction,
    boresight,
    coverage_contains,
    coverage_range,
    steering_matrix,
    steering_vector,
    upa_for_direction,
    virtual_azimuth,
    virtual_elevation,
)
from .metrics import (
    PatternRaster,
    SweepResult,
    alignment_rate_sweep,
    beam_pattern,
    coverage_gain_stats,
    random_los_link,
    worst_case_gain_bruteforce,
    worst_case_gain_closed_form,
)
from .training import (
    TrainingOutcome,
    exhaustive_search,
    hierarchical_training,
    phase1,
    phase2,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
