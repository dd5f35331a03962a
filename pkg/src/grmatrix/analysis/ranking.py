from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from ..gmatrix import PageRankVector, rank_order
from ..graph import NodeSubset


@dataclass(frozen=True)
class EditionRankTable:
    """1-based ranks of named items within one edition's candidate list."""

    edition_tag: str
    entries: Mapping[str, int]

    def __post_init__(self):
        ranks = list(self.entries.values())
        if any(int(r) != r or r < 1 for r in ranks):
            raise ValueError(f"{self.edition_tag}: ranks must be positive integers")
        if len(set(ranks)) != len(ranks):
            raise ValueError(f"{self.edition_tag}: duplicate rank")

    @classmethod
    def from_ordered(cls, edition_tag: str, names: Iterable[str]) -> "EditionRankTable":
        """Table from names listed best first."""
        return cls(edition_tag, {name: k for k, name in enumerate(names, 1)})

    def ordered(self) -> list[str]:
        return sorted(self.entries, key=self.entries.__getitem__)


def local_subset_ranking(pr: PageRankVector, subset: NodeSubset,
                         edition_tag: str = "") -> EditionRankTable:
    """Rank subset members by their global PageRank probability."""
    p = pr.probabilities[list(subset.indices)]
    # ties go to the lower internal id, not the lower subset position
    ids = np.asarray(subset.indices)
    order = np.lexsort((ids, -p))
    return EditionRankTable(edition_tag, {subset.names[i]: k for k, i in enumerate(order, 1)})


class ThetaScore(NamedTuple):
    name: str
    theta: int
    ranks: dict


def theta_score(tables: list[EditionRankTable], cutoff: int = 100) -> list[ThetaScore]:
    """Multi-edition score: sum over editions of ``cutoff + 1 - rank``.

    Editions where an item ranks beyond ``cutoff`` (or is absent) add nothing.
    Sorted by decreasing score, then name.
    """
    if not tables:
        raise ValueError("need at least one rank table")
    scores: dict[str, int] = {}
    ranks: dict[str, dict] = {}
    for table in tables:
        for name, rank in table.entries.items():
            ranks.setdefault(name, {})[table.edition_tag] = int(rank)
            scores[name] = scores.get(name, 0) + (cutoff + 1 - int(rank) if rank <= cutoff else 0)
    return [ThetaScore(name, scores[name], ranks[name])
            for name in sorted(scores, key=lambda n: (-scores[n], n))]


def ranked_names(probabilities, names) -> list[str]:
    return [names[i] for i in rank_order(probabilities)]
