"""Recommendation models behind one contract: fit on train, score candidates,
emit a top-m ranked list that never contains the user's known items."""

from .bpr import BprConfig, BprModel, bpr_fit, bpr_score
from .geo import haversine
from .lore import LoreModel, lore_fit, lore_score
from .ranking import ScoredList, read_recs_tsv, top_m, write_recs_tsv
from .usg import UsgModel, usg_fit, usg_score

__all__ = [
    "BprConfig",
    "BprModel",
    "LoreModel",
    "ScoredList",
    "UsgModel",
    "bpr_fit",
    "bpr_score",
    "haversine",
    "lore_fit",
    "lore_score",
    "read_recs_tsv",
    "top_m",
    "usg_fit",
    "usg_score",
    "write_recs_tsv",
]
