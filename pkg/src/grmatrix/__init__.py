"""Google matrix, PageRank and reduced Google matrix analysis of directed networks."""

from .gmatrix import (ConvergenceError, PageRankVector, StochasticOperator, pagerank,
                      rank_nodes)
from .graph import (DirectedGraph, GraphInputError, NodeSubset, load_edge_list, load_labels,
                    resolve_subset)
from .reduced import ReducedMatrixSet, ReductionConfig, dense_oracle_reduce, reduce

__version__ = "0.1.0"
