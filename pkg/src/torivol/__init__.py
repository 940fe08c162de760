"""Volumes and volume densities of fully augmented links on the torus and in the 3-sphere."""

from .circlepattern import (CirclePattern, PatternError, PatternSpec, SolverConfig, residuals,
                            similarity_normalize, solve_planar_pattern, solve_torus_pattern)
from .cmap import CombinatorialMap, MapError
from .diagram import (AugmentedDiagram, DiagramError, HypothesisFailure, LinkDiagram, augment,
                      euler_characteristic, is_twist_reduced, is_weakly_prime)
from .folner import (FolnerRun, build_patch, close_patch, convergence_experiment,
                     generation_agreement)
from .hypvol import (V_OCT, V_TET, lobachevsky, polyhedron_volume, torihedron_volume,
                     volume_bounds_check, volume_density)
from .torihedra import (BowtieGraph, build_bowtie_graph, check_circle_pattern_condition,
                        validate_bowtie)

__version__ = "0.1.0"

__all__ = [
    "AugmentedDiagram", "BowtieGraph", "CirclePattern", "CombinatorialMap", "DiagramError",
    "FolnerRun", "HypothesisFailure", "LinkDiagram", "MapError", "PatternError", "PatternSpec",
    "SolverConfig", "V_OCT", "V_TET", "augment", "build_bowtie_graph", "build_patch",
    "check_circle_pattern_condition", "close_patch", "convergence_experiment",
    "euler_characteristic", "generation_agreement", "is_twist_reduced", "is_weakly_prime",
    "lobachevsky", "polyhedron_volume", "residuals", "similarity_normalize",
    "solve_planar_pattern", "solve_torus_pattern", "torihedron_volume", "validate_bowtie",
    "volume_bounds_check", "volume_density",
]
