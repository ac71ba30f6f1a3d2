"""Item popularity index, H/M/T item classes, and user popularity groups.

Popularity is computed on the training split only: the popularity of an item
is the fraction of training users who visited it. Items are cut into head /
mid / tail (top 20% / middle 60% / bottom 20% by count), users into
HighPop / MedPop / LowPop by the mean popularity of their profile items.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError
from .ingest import InteractionLog

ITEM_CLASSES = ("H", "M", "T")
USER_GROUPS = ("LowPop", "MedPop", "HighPop")

CLASS_CODE = {c: k for k, c in enumerate(ITEM_CLASSES)}


class PopularityDistribution(NamedTuple):
    """3-bin distribution over item classes (head, mid, tail)."""

    p_h: float
    p_m: float
    p_t: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


@dataclass
class PopularityIndex:
    item_pop: dict[str, float]
    item_class: dict[str, str]
    user_profile_pop: dict[str, float]
    user_group: dict[str, str]
    # popularity at the class boundaries, for the JSON export
    head_threshold: float
    tail_threshold: float

    def class_code(self, item_id: str) -> int:
        return CLASS_CODE[self.item_class[item_id]]

    def group_members(self, group: str) -> list[str]:
        if group == "All":
            return sorted(self.user_group)
        return sorted(u for u, g in self.user_group.items() if g == group)


def build_popularity_index(train: InteractionLog) -> PopularityIndex:
    """Index of item popularity and user groups from the training split."""
    if len(train) == 0:
        raise DataError("cannot build a popularity index from an empty train split")
    n_users = train.n_users
    visitors: dict[str, set[str]] = {}
    for row in train.interactions:
        visitors.setdefault(row.item_id, set()).add(row.user_id)
    item_pop = {i: len(v) / n_users for i, v in visitors.items()}

    # Descending popularity, ties broken by the id key for a total order.
    items_desc = sorted(item_pop, key=lambda i: (item_pop[i], i), reverse=True)
    n_items = len(items_desc)
    cut = int(np.floor(0.2 * n_items))
    item_class = {}
    for rank, item in enumerate(items_desc):
        if rank < cut:
            item_class[item] = "H"
        elif rank >= n_items - cut:
            item_class[item] = "T"
        else:
            item_class[item] = "M"
    head_threshold = item_pop[items_desc[cut - 1]] if cut else 1.0
    tail_threshold = item_pop[items_desc[n_items - cut]] if cut else 0.0

    user_profile_pop = {
        u: float(np.mean([item_pop[r.item_id] for r in rows]))
        for u, rows in train.by_user().items()
    }
    users_asc = sorted(user_profile_pop, key=lambda u: (user_profile_pop[u], u))
    ucut = int(np.floor(0.2 * len(users_asc)))
    user_group = {}
    for rank, user in enumerate(users_asc):
        if rank < ucut:
            user_group[user] = "LowPop"
        elif rank >= len(users_asc) - ucut:
            user_group[user] = "HighPop"
        else:
            user_group[user] = "MedPop"

    return PopularityIndex(
        item_pop=item_pop,
        item_class=item_class,
        user_profile_pop=user_profile_pop,
        user_group=user_group,
        head_threshold=head_threshold,
        tail_threshold=tail_threshold,
    )


def profile_distribution(
    user_id: str, train: InteractionLog, index: PopularityIndex
) -> PopularityDistribution:
    """Share of the user's training items falling in each of H/M/T."""
    rows = [r for r in train.interactions if r.user_id == user_id]
    if not rows:
        raise DataError(f"user {user_id!r} has no training interactions")
    counts = np.zeros(3)
    for r in rows:
        counts[CLASS_CODE[index.item_class[r.item_id]]] += 1
    p = counts / counts.sum()
    return PopularityDistribution(*p)


def all_profile_distributions(
    train: InteractionLog, index: PopularityIndex
) -> dict[str, PopularityDistribution]:
    """profile_distribution for every training user in one pass."""
    counts: dict[str, np.ndarray] = {}
    for r in train.interactions:
        counts.setdefault(r.user_id, np.zeros(3))[CLASS_CODE[index.item_class[r.item_id]]] += 1
    return {u: PopularityDistribution(*(c / c.sum())) for u, c in counts.items()}


def write_popularity_json(index: PopularityIndex, path: str | Path) -> None:
    payload = {
        "head_threshold": index.head_threshold,
        "tail_threshold": index.tail_threshold,
        "items": {
            i: {"pop": index.item_pop[i], "class": index.item_class[i]}
            for i in sorted(index.item_pop)
        },
        "users": {
            u: {"profile_pop": index.user_profile_pop[u], "group": index.user_group[u]}
            for u in sorted(index.user_profile_pop)
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def read_popularity_json(path: str | Path) -> PopularityIndex:
    payload = json.loads(Path(path).read_text())
    return PopularityIndex(
        item_pop={i: v["pop"] for i, v in payload["items"].items()},
        item_class={i: v["class"] for i, v in payload["items"].items()},
        user_profile_pop={u: v["profile_pop"] for u, v in payload["users"].items()},
        user_group={u: v["group"] for u, v in payload["users"].items()},
        head_threshold=payload["head_threshold"],
        tail_threshold=payload["tail_threshold"],
    )
