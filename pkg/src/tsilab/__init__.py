"""tsilab: an exact computational laboratory for regular mixed Tsirelson spaces.

Evaluates the implicit norm exactly on finitely supported rational vectors,
implements the associated family combinatorics and averaging-tree
constructions, and reproduces the closed-form level-j bounds and the
distortion-norm experiments at desk scale.
"""

from .corenorm import NormEvaluator, brute_force_norm
from .thetaseq import ThetaSeq
from .vectors import FinVec

__all__ = ["FinVec", "NormEvaluator", "ThetaSeq", "brute_force_norm"]
__version__ = "0.1.0"
