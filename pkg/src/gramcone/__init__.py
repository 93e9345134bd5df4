"""Gramian-cone formulation of LTI gain and robustness analysis."""
from .cone import (GramianMatrix, RankOneComponent, StateBalance, in_cone, is_controllable,
                   membership_residual, random_cone_element, rank_one_decompose, reconstruct)
from .errors import DomainError, Inconclusive, SolverFailure
from .extended import (DisturbanceSpec, build_spec, ext_hinf_primal, grouped, per_channel,
                       principal_component, square_hinf_dual_check, unit_energy)
from .hinf import hinf_dual, hinf_primal, kyp_alternatives, kyp_nonstrict, kyp_strict
from .maps import AffineMap
from .oracles import Signal, freq_grid_hinf, gramian_exact, gramian_of, simulate, transfer_function
from .robust import (UncertaintySpec, certificate_search, extract_destabilizing_pair,
                     make_uncertainty, stability_lmi)
from .sdp import ConicProgram, SolverParams, check_feasibility, solve
from .synthesis import synth
from .system import StateSpace, block_diag_systems, random_system

__version__ = "0.1.0"
