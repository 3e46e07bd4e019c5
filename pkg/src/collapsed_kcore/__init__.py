"""Exact solvers, bounds, valid inequalities and model emitters for the
Collapsed k-Core Problem."""

from .bounds import BoundInfo, greedy_upper_bound, lower_bound_m
from .cascade import (
    CascadeTrace, Instance, collapse, collapsed_size, followers, followers_set,
    followers_table, preprocess,
)
from .graph import (
    CoreDecomposition, Graph, ParseError, core_decomposition, induced_subgraph, kcore,
    min_degree, parse_edge_list, read_edge_list,
)
from .solver import SolverConfig, SolverResult, branch_and_bound, brute_force, cutting_plane, solve

__version__ = "0.1.0"
