"""Behavioral distances on stochastic Markov models.

The bisimilarity distance is computed as the least fixed point of a
Kantorovich lifting; trace distances are bounded from below statistically
and computed exactly on models whose live states share a residence law.
"""
from ._accel import BACKEND, available_backends
from .bisim import StatePartition, bisimilarity, is_bisimulation
from .dta import Constraint, DeterminismError, Dta, Edge, dta_accepts
from .encode import TraceCylinder, encode_cylinder_dta, encode_cylinder_mtl
from .estimator import Estimate, delta_lower_bound, estimate_sat, hoeffding_radius
from .fixpoint import (FixpointError, FixpointReport, PseudometricMatrix, apply_F, apply_G,
                       apply_Gamma, gamma_fixpoint, product_couplings, theta, theta_exact_lp,
                       witness_couplings)
from .hardness import (UndirectedGraph, build_MG, build_Mi, build_MV, inapprox_bound,
                       max_clique_bruteforce, max_clique_via_distance, recover_max_clique)
from .model import (Cylinder, Dirac, Exponential, Interval, ResidenceDist, SmmModel, TimedPath,
                    Uniform, Violation, cylinder_prob, sample_path, sample_paths, validate)
from .mtl import Verdict, mtl_eval, parse as parse_mtl
from .oracle import WordDistribution, exact_delta, word_distribution
from .residence import TvMethod, TvResult, tv, tv_numeric
from .transport import TransportPlan, kantorovich, solve_transport

__version__ = "0.1.0"
