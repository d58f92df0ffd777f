"""Pattern induction for entity extraction by aligning annotation grids."""

from annotalign.align import Alignment, ScoringConfig, align
from annotalign.annotations import (
    Annotation,
    AnnotationGrid,
    Document,
    ElementKey,
    KeyPolicy,
    build_grid,
    derive_keys,
    make_document,
)
from annotalign.config import PipelineConfig, load_config
from annotalign.engine import FixpointError, run_to_fixpoint
from annotalign.evaluate import evaluate
from annotalign.patterns import ContextPattern, PatternTargetPair, TargetPattern
from annotalign.pipeline import Model, apply, train

__all__ = [
    "Alignment",
    "Annotation",
    "AnnotationGrid",
    "ContextPattern",
    "Document",
    "ElementKey",
    "FixpointError",
    "KeyPolicy",
    "Model",
    "PatternTargetPair",
    "PipelineConfig",
    "ScoringConfig",
    "TargetPattern",
    "align",
    "apply",
    "build_grid",
    "derive_keys",
    "evaluate",
    "load_config",
    "make_document",
    "run_to_fixpoint",
    "train",
]
