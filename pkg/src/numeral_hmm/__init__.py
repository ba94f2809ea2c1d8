"""Offline handwritten digit recognition with skeleton features and discrete HMMs."""

from .dataset import LabeledSample, SplitSpec, read_idx, read_pgm, split
from .features import (
    ENDMARK,
    JUNCTMARK,
    N_SYMBOLS,
    build_graph,
    chain_code,
    characteristic_points,
    loop_count,
    observation_sequence,
    transition_count,
)
from .hmm import (
    DiscreteHmm,
    ModelBank,
    Topology,
    TrainConfig,
    baum_welch,
    classify,
    init_model,
    log_likelihood,
    train_bank,
    viterbi,
)
from .imageproc import binarize, fill_holes, normalize_size, remove_isolated_pixels, thin
from .pipeline import PipelineConfig, glyph_sequence

__version__ = "0.1.0"
