"""Capacity computations and coding simulations for relay networks with state."""

from .capacity import (CapacityReport, CapError, CutEvaluator, RankEstimate, RateResult, achievable_rate,
                       cut_conditional_entropy, cutset_bound, expected_rank, linear_capacity, min_cut_entropy)
from .cuts import Cut, CutError, TransferMatrixView, enumerate_cuts, make_cut, transfer_matrix
from .field import FFMatrix, Field, FieldError, batch_rank, field_create, field_from_order, mat_rank, mat_vec_mul
from .info import JointTable, Pmf, conditional_entropy, entropy, joint_typical, typical
from .netfile import NetworkFileError, load_network, parse_network, render_network
from .network import (GENERAL, LINEAR, ChannelTable, Network, NetworkError, NotLayered, StateModel,
                      compute_layers, erasure_to_linear, input_neighbors, linear_network, validate)
from .simulate import Schedule, SimConfig, SimReport, generate_codebooks, run_blocks
from .unfold import UnfoldedCut, UnfoldedNetwork, unfold, verify_normalized_rate, verify_sandwich

__all__ = [
    "CapacityReport", "CapError", "CutEvaluator", "RankEstimate", "RateResult", "achievable_rate",
    "cut_conditional_entropy", "cutset_bound", "expected_rank", "linear_capacity", "min_cut_entropy",
    "Cut", "CutError", "TransferMatrixView", "enumerate_cuts", "make_cut", "transfer_matrix",
    "FFMatrix", "Field", "FieldError", "batch_rank", "field_create", "field_from_order", "mat_rank",
    "mat_vec_mul", "JointTable", "Pmf", "conditional_entropy", "entropy", "joint_typical", "typical",
    "NetworkFileError", "load_network", "parse_network", "render_network",
    "GENERAL", "LINEAR", "ChannelTable", "Network", "NetworkError", "NotLayered", "StateModel",
    "compute_layers", "erasure_to_linear", "input_neighbors", "linear_network", "validate",
    "Schedule", "SimConfig", "SimReport", "generate_codebooks", "run_blocks",
    "UnfoldedCut", "UnfoldedNetwork", "unfold", "verify_normalized_rate", "verify_sandwich",
]
