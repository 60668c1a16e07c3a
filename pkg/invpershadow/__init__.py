"""
Inverse Periodic Shadowing Laboratory
Pseudomethods, gluing, adversarial constructions and Lipschitz shadowing near periodic orbits.
"""

__version__ = "1.0.0"
__author__ = "invpershadow contributors"

# Main exports for package users
from .campaigns import random_trig_method, run_shadow_campaign
from .gluing import GluingSpec, glue_linear, glue_nonlinear
from .orbits import PeriodicOrbit, find_rational_periodic_orbit, local_conjugate
from .pseudomethod import PseudomethodS, PseudomethodT, generate_s, generate_t, shadowing_distance
from .shadowing import (
    PerronShadowingSolver,
    classify_periodic_point,
    compute_splitting,
    find_shadowing_trajectory,
)
from .space import ModelSpace
from .systems import DiscreteSystem, cat_map, iterate, toral_automorphism

__all__ = [
    "ModelSpace",
    "DiscreteSystem",
    "cat_map",
    "toral_automorphism",
    "iterate",
    "PeriodicOrbit",
    "find_rational_periodic_orbit",
    "local_conjugate",
    "PseudomethodS",
    "PseudomethodT",
    "generate_s",
    "generate_t",
    "shadowing_distance",
    "GluingSpec",
    "glue_linear",
    "glue_nonlinear",
    "classify_periodic_point",
    "compute_splitting",
    "PerronShadowingSolver",
    "find_shadowing_trajectory",
    "random_trig_method",
    "run_shadow_campaign",
]
