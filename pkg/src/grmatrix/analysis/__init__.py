"""Analysis products derived from PageRank vectors and reduced matrices."""

from .averaging import average_reduced, pagerank_of_reduced
from .friends import (FriendEdge, FriendshipGraph, friendship_graph, leader_closure_graph,
                      top_friends)
from .ranking import EditionRankTable, local_subset_ranking, theta_score
from .sensitivity import (SensitivityResult, diagonal_sensitivity_matrix, sensitivity,
                          two_way_sensitivity)
