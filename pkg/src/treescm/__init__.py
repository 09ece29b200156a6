"""Generic identification of the edge parameters of tree-shaped linear SCMs."""

from .covariance import ParamAssignment, SigmaPoints, sigma_matrix, sigma_trek_oracle
from .cyclefind import (CycleClass, EquationGraph, Weight2x2, cycle_edges, edge_weight,
                        find_identifying_cycle, layered_product, walk_weight)
from .fastp import (Fastp, eval_fastp, fastp_rational, fastp_satisfies, parse_fastp, propagate,
                    roots_from_cycle, serialize_fastp)
from .identify import IdentReport, Status, report_to_json, run_identification
from .model import M1, M2, MissingEdge, ModelError, RootMissingEdge, TreeScm, missing_edges, parse_model
from .pit import BudgetExhausted, PitSession
from .rank import edge_rank, rank_table

__all__ = [
    "BudgetExhausted", "CycleClass", "EquationGraph", "Fastp", "IdentReport", "M1", "M2",
    "MissingEdge", "ModelError", "ParamAssignment", "PitSession", "RootMissingEdge", "SigmaPoints",
    "Status", "TreeScm", "Weight2x2", "cycle_edges", "edge_rank", "edge_weight", "eval_fastp",
    "fastp_rational", "fastp_satisfies", "find_identifying_cycle", "layered_product",
    "missing_edges", "parse_fastp", "parse_model", "propagate", "rank_table", "report_to_json",
    "roots_from_cycle", "run_identification", "serialize_fastp", "sigma_matrix",
    "sigma_trek_oracle", "walk_weight",
]
