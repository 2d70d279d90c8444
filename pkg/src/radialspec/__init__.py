"""Spectral toolkit for half-line Laplacians with multiplicative jump
conditions, the one-dimensional reduction of radial metric trees.

Two independent routes to the Weyl m-function (a block boundary-trace
system and projective transfer propagation) cross-check each other;
spectral densities, reflectionless defects, right limits, sparseness
diagnostics and whole-tree reports build on top.
"""

from ._kernels import BACKEND
from .krein import (KreinSystem, TraceVector, TruncationError, assemble_krein,
                    asymptotic_ratio, boundary_trace, free_green,
                    m_plus_krein, resolvent_kernel, trace_block, weight_block)
from .measures import (Atom, AtomicMeasure, DiscreteBranchSequence,
                       MeasureClassBounds, MembershipReport, TailRule,
                       b_from_beta, beta_from_b, is_eventually_periodic,
                       measure_from_json, measure_to_json, right_limit,
                       sparsify, validate_measure, weak_distance)
from .transfer import (EnergyPoint, free_propagator, jump_matrix,
                       simon_stolz_integral, solution_eval, spectral_norm,
                       transfer)
from .treeops import (ComponentSpec, TreeSpec, decompose,
                      discrete_truncation_spectrum, tree_spectral_report)
from .weyl import (MSample, SpectralSet, WeylDisk, boundary_value, m_minus,
                   period_monodromy, reflectionless_defect, riccati_m_plus,
                   spectral_density, weyl_disk)

__version__ = "0.1.0"

__all__ = [
    "Atom", "AtomicMeasure", "BACKEND", "ComponentSpec",
    "DiscreteBranchSequence", "EnergyPoint", "KreinSystem",
    "MSample", "MeasureClassBounds", "MembershipReport", "SpectralSet",
    "TailRule", "TraceVector", "TreeSpec", "TruncationError", "WeylDisk",
    "assemble_krein", "asymptotic_ratio", "b_from_beta", "beta_from_b",
    "boundary_trace", "boundary_value", "decompose",
    "discrete_truncation_spectrum", "free_green", "free_propagator",
    "is_eventually_periodic", "jump_matrix", "m_minus", "m_plus_krein",
    "measure_from_json", "measure_to_json", "period_monodromy",
    "reflectionless_defect", "resolvent_kernel", "riccati_m_plus",
    "right_limit", "simon_stolz_integral", "solution_eval", "sparsify",
    "spectral_density", "spectral_norm", "trace_block", "transfer",
    "tree_spectral_report", "validate_measure", "weak_distance",
    "weight_block", "weyl_disk",
]
