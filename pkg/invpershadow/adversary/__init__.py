"""
Adversarial pseudomethods at nonhyperbolic and hyperbolic periodic orbits.

- rotation_drift: drift along a modulus-one rotation block
- jordan_drift: drift along the last block of a Jordan chain
- rigid_sequence: push-through sequence at hyperbolic orbits
"""

from .common import TraceRow, chart_trajectory, focus_for, write_adversary_report
from .jordan_drift import (
    JordanDriftSpec,
    Lemma3Report,
    build_lemma3_adversary,
    build_lemma3_model,
    verify_lemma3_divergence,
)
from .rigid_sequence import (
    Lemma4Report,
    Lemma4Sequence,
    build_lemma4_adversary,
    build_lemma4_sequence,
    verify_lemma4_rigidity,
)
from .rotation_drift import (
    Lemma2Model,
    Lemma2Report,
    RotationDriftSpec,
    build_lemma2_adversary,
    build_lemma2_model,
    verify_lemma2_divergence,
)

__all__ = [
    "TraceRow",
    "chart_trajectory",
    "focus_for",
    "write_adversary_report",
    "RotationDriftSpec",
    "Lemma2Model",
    "Lemma2Report",
    "build_lemma2_model",
    "build_lemma2_adversary",
    "verify_lemma2_divergence",
    "JordanDriftSpec",
    "Lemma3Report",
    "build_lemma3_model",
    "build_lemma3_adversary",
    "verify_lemma3_divergence",
    "Lemma4Sequence",
    "Lemma4Report",
    "build_lemma4_sequence",
    "build_lemma4_adversary",
    "verify_lemma4_rigidity",
]
