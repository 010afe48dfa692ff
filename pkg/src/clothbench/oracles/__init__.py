from .align import apply_align, rigid_align
from .folding import (
    FOLD_PROGRESS_IOU,
    FoldPolicy,
    FoldPreconditionError,
    FoldStep,
    FoldTask,
    NOMINAL_STEPS,
    fold_polygon,
    fold_script,
    max_steps,
)
from .smoothing import DONE_NC, GreedyCornerSmoother, TwoPhaseSmoother

__all__ = [
    "DONE_NC",
    "FOLD_PROGRESS_IOU",
    "FoldPolicy",
    "FoldPreconditionError",
    "FoldStep",
    "FoldTask",
    "GreedyCornerSmoother",
    "NOMINAL_STEPS",
    "TwoPhaseSmoother",
    "apply_align",
    "fold_polygon",
    "fold_script",
    "max_steps",
    "rigid_align",
]
