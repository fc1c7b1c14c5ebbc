"""Numerical laboratory for random-walk boundaries on free products.

The package computes Green's functions of finitely supported random
walks on free products of lattice-by-finite groups, induces first-return
chains on parabolic neighborhoods, analyzes the tilted Perron surface
whose unit level set parametrizes directional boundary points, and
classifies escaping sequences through Floyd and coned-off geometry.
"""
from .balls import BallIndex, ball_elements
from .classify import (Classification, SequenceSpec, ancona_ratio, classify,
                       martin_convergence, representative_invariance,
                       separation_experiment)
from .config import ExperimentConfig, load_config
from .errors import (AssumptionError, BoundedSequenceError, ConfigError,
                     ConvergenceError, InvalidMeasureError, ParseError,
                     RelwalkError, StateCapError)
from .excursions import FreeProductEngine
from .floyd import (FloydFunction, TransitionParams, coned_off_distance,
                    floyd_distance, gromov_product_coned, transition_points,
                    word_geodesic)
from .greens import GreenTable, green_matrix, kesten_alpha, restricted_green, tail_bound
from .groups import (Coset, FactorSpec, FreeProductGroup, GroupElement,
                     coset_distance, coset_lattice_part, project_to_coset)
from .induced import FiberIndex, induce_first_return, moment_growth, verify_same_green
from .lattice import BoxGreen, ChainGreen, LatticeChain, absorption_distribution
from .measures import StepMeasure
from .perron import (AssumptionReport, BoundaryPointU, PerronData,
                     check_assumptions, f_matrix, level_set_point,
                     limit_kernel_ratio, minimize_lambda, perron, tilted_matrix)

__all__ = [
    "AssumptionError", "AssumptionReport", "BallIndex", "BoundaryPointU",
    "BoundedSequenceError", "BoxGreen", "ChainGreen", "Classification",
    "ConfigError", "ConvergenceError", "Coset", "ExperimentConfig",
    "FactorSpec", "FiberIndex", "FloydFunction", "FreeProductEngine",
    "FreeProductGroup", "GreenTable", "GroupElement", "InvalidMeasureError",
    "LatticeChain", "ParseError", "PerronData", "RelwalkError",
    "SequenceSpec", "StateCapError", "StepMeasure", "TransitionParams",
    "absorption_distribution", "ancona_ratio", "ball_elements",
    "check_assumptions", "classify", "coned_off_distance", "coset_distance",
    "coset_lattice_part", "f_matrix", "floyd_distance", "green_matrix",
    "gromov_product_coned", "induce_first_return", "kesten_alpha",
    "level_set_point", "limit_kernel_ratio", "load_config",
    "martin_convergence", "minimize_lambda", "moment_growth", "perron",
    "project_to_coset", "representative_invariance", "restricted_green",
    "separation_experiment", "tail_bound", "tilted_matrix",
    "transition_points", "verify_same_green", "word_geodesic",
]
