"""Check-in ingestion: parsing, deduplication, sampling, and temporal split.

All downstream stages consume the canonical log produced here. The canonical
on-disk form is a headerless TSV with columns
``user_id  item_id  epoch_seconds  lat  lon``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Iterable, NamedTuple

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

FORMATS = ("snap_tsv", "foursquare_csv", "yelp_json", "canonical_tsv")

SPLIT_FRACTIONS = (0.65, 0.15, 0.20)
MIN_INTERACTIONS_PER_USER = 3


class Interaction(NamedTuple):
    user_id: str
    item_id: str
    timestamp: int
    lat: float
    lon: float


@dataclass
class InteractionLog:
    """Canonical check-in log, sorted by (user_id, timestamp).

    ``dropped_rows`` counts source rows discarded during parsing (bad
    timestamp or out-of-range coordinates); it is carried along so the
    ingest stats can report it.
    """

    interactions: list[Interaction]
    item_coords: dict[str, tuple[float, float]] = field(default_factory=dict)
    dropped_rows: int = 0

    def __post_init__(self):
        self.interactions = sorted(
            self.interactions, key=lambda r: (r.user_id, r.timestamp)
        )
        present = {r.item_id for r in self.interactions}
        missing = present - self.item_coords.keys()
        if missing:
            raise DataError(f"{len(missing)} item(s) lack coordinates")
        self.item_coords = {i: self.item_coords[i] for i in sorted(present)}

    @property
    def n_users(self) -> int:
        return len({r.user_id for r in self.interactions})

    @property
    def n_items(self) -> int:
        return len({r.item_id for r in self.interactions})

    def __len__(self) -> int:
        return len(self.interactions)

    def by_user(self) -> dict[str, list[Interaction]]:
        """Per-user interaction lists, users in sorted order, rows in time order."""
        out: dict[str, list[Interaction]] = {}
        for row in self.interactions:
            out.setdefault(row.user_id, []).append(row)
        return out

    def user_ids(self) -> list[str]:
        return sorted({r.user_id for r in self.interactions})

    def item_ids(self) -> list[str]:
        return sorted({r.item_id for r in self.interactions})


@dataclass
class SplitDataset:
    train: InteractionLog
    validation: InteractionLog
    test: InteractionLog
    split_fractions: tuple[float, float, float] = SPLIT_FRACTIONS
    dropped_users: int = 0


def _parse_timestamp(raw: str) -> int:
    """Normalize a timestamp string to integer epoch seconds (UTC).

    Accepts integer/float epoch values, ISO-8601 (with or without ``Z``),
    and the legacy check-in export style ``Tue Apr 03 18:00:09 +0000 2012``.
    """
    raw = raw.strip()
    try:
        return int(float(raw))
    except ValueError:
        pass
    iso = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        try:
            dt = datetime.strptime(raw, "%a %b %d %H:%M:%S %z %Y")
        except ValueError:
            raise ValueError(f"unparseable timestamp: {raw!r}")
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = int(dt.timestamp())
    if ts < 0:
        raise ValueError(f"negative epoch timestamp: {raw!r}")
    return ts


def _coords_ok(lat: float, lon: float) -> bool:
    return (
        np.isfinite(lat)
        and np.isfinite(lon)
        and -90.0 <= lat <= 90.0
        and -180.0 <= lon <= 180.0
    )


def _iter_snap_tsv(text: io.TextIOBase) -> Iterable[tuple[str, str, str, str, str]]:
    # user <TAB> ISO-timestamp <TAB> lat <TAB> lon <TAB> location_id
    for line in text:
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 5:
            yield None
            continue
        user, ts, lat, lon, item = parts
        yield user, item, ts, lat, lon


def _iter_canonical_tsv(text: io.TextIOBase) -> Iterable[tuple[str, str, str, str, str]]:
    # user_id <TAB> item_id <TAB> epoch_seconds <TAB> lat <TAB> lon
    for line in text:
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 5:
            yield None
            continue
        yield tuple(parts)


def _iter_foursquare_csv(text: io.TextIOBase) -> Iterable[tuple[str, str, str, str, str]]:
    """Header-mapped CSV: userId, venueId, latitude, longitude, utcTimestamp."""
    reader = csv.DictReader(text)
    for row in reader:
        try:
            yield (
                row["userId"],
                row["venueId"],
                row["utcTimestamp"],
                row["latitude"],
                row["longitude"],
            )
        except (KeyError, TypeError):
            yield None


def _iter_yelp_json(text: io.TextIOBase) -> Iterable[tuple[str, str, str, str, str]]:
    """JSON lines with user_id, business_id, date, latitude, longitude.

    The Yelp dump keeps coordinates in business.json; this adapter expects
    review/check-in records already joined with their business coordinates.
    """
    for line in text:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            yield (
                str(obj["user_id"]),
                str(obj["business_id"]),
                str(obj["date"]),
                str(obj["latitude"]),
                str(obj["longitude"]),
            )
        except (json.JSONDecodeError, KeyError):
            yield None


_READERS = {
    "snap_tsv": _iter_snap_tsv,
    "canonical_tsv": _iter_canonical_tsv,
    "foursquare_csv": _iter_foursquare_csv,
    "yelp_json": _iter_yelp_json,
}


def parse_checkins(source: BinaryIO | str | Path, format_id: str) -> InteractionLog:
    """Parse a raw check-in source into the canonical log.

    Rows with unparseable timestamps or out-of-range coordinates are dropped
    and counted in ``log.dropped_rows``. Repeat (user, item) visits are kept;
    deduplication is a separate stage.
    """
    if format_id not in FORMATS:
        raise DataError(f"unknown format_id {format_id!r}; expected one of {FORMATS}")
    if isinstance(source, (str, Path)):
        stream: BinaryIO = open(source, "rb")
        close = True
    else:
        stream, close = source, False
    try:
        text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
        rows: list[Interaction] = []
        coords: dict[str, tuple[float, float]] = {}
        dropped = 0
        for rec in _READERS[format_id](text):
            if rec is None:
                dropped += 1
                continue
            user, item, ts_raw, lat_raw, lon_raw = rec
            try:
                ts = _parse_timestamp(ts_raw)
                lat, lon = float(lat_raw), float(lon_raw)
            except ValueError:
                dropped += 1
                continue
            if not _coords_ok(lat, lon):
                dropped += 1
                continue
            rows.append(Interaction(user, item, ts, lat, lon))
            coords.setdefault(item, (lat, lon))
    finally:
        if close:
            stream.close()
    if not rows:
        raise DataError("no valid check-ins after filtering")
    if dropped:
        logger.warning("parse_checkins: dropped %d malformed row(s)", dropped)
    return InteractionLog(rows, coords, dropped_rows=dropped)


def deduplicate(log: InteractionLog) -> InteractionLog:
    """Collapse to one interaction per (user, item), keeping the earliest visit."""
    seen: set[tuple[str, str]] = set()
    kept: list[Interaction] = []
    for row in log.interactions:  # already (user, time)-sorted: first seen = earliest
        key = (row.user_id, row.item_id)
        if key not in seen:
            seen.add(key)
            kept.append(row)
    return InteractionLog(kept, dict(log.item_coords), dropped_rows=log.dropped_rows)


def sample_users(
    log: InteractionLog, n_users: int, min_interactions: int = 10, seed: int = 0
) -> InteractionLog:
    """Seeded uniform sample of ``n_users`` users with enough interactions.

    Selection is a seeded permutation of the (sorted) qualifying user list;
    the same seed always picks the same users on every platform.
    """
    counts: dict[str, int] = {}
    for row in log.interactions:
        counts[row.user_id] = counts.get(row.user_id, 0) + 1
    qualifying = sorted(u for u, c in counts.items() if c >= min_interactions)
    if len(qualifying) < n_users:
        raise DataError(
            f"need {n_users} users with >= {min_interactions} interactions, "
            f"only {len(qualifying)} qualify (short by {n_users - len(qualifying)})"
        )
    rng = np.random.default_rng(seed)
    chosen = set(np.array(qualifying, dtype=object)[rng.permutation(len(qualifying))][:n_users])
    kept = [r for r in log.interactions if r.user_id in chosen]
    return InteractionLog(kept, dict(log.item_coords), dropped_rows=log.dropped_rows)


def compute_sparsity(log: InteractionLog) -> float:
    """1 - unique (user, item) pairs / (n_users * n_items); raw, unrounded."""
    n_users, n_items = log.n_users, log.n_items
    if n_users == 0 or n_items == 0:
        raise DataError("cannot compute sparsity of an empty log")
    unique_pairs = len({(r.user_id, r.item_id) for r in log.interactions})
    return 1.0 - unique_pairs / (n_users * n_items)


def temporal_split(log: InteractionLog) -> SplitDataset:
    """Per-user chronological split into train/validation/test.

    A user with n interactions (time-sorted, stable) is cut at
    floor(0.65 n) and floor(0.80 n). Users with fewer than 3 interactions
    are dropped and counted.
    """
    train: list[Interaction] = []
    valid: list[Interaction] = []
    test: list[Interaction] = []
    dropped = 0
    for user, rows in log.by_user().items():
        n = len(rows)
        if n < MIN_INTERACTIONS_PER_USER:
            dropped += 1
            continue
        c1 = int(np.floor(SPLIT_FRACTIONS[0] * n))
        c2 = int(np.floor((SPLIT_FRACTIONS[0] + SPLIT_FRACTIONS[1]) * n))
        train.extend(rows[:c1])
        valid.extend(rows[c1:c2])
        test.extend(rows[c2:])
    if dropped:
        logger.warning("temporal_split: dropped %d user(s) with < %d interactions",
                       dropped, MIN_INTERACTIONS_PER_USER)
    if not train:
        raise DataError("temporal split produced an empty training set")
    coords = log.item_coords
    return SplitDataset(
        train=InteractionLog(train, {i: coords[i] for i in {r.item_id for r in train}}),
        validation=InteractionLog(valid, {i: coords[i] for i in {r.item_id for r in valid}}),
        test=InteractionLog(test, {i: coords[i] for i in {r.item_id for r in test}}),
        dropped_users=dropped,
    )


def write_canonical_tsv(log: InteractionLog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for r in log.interactions:
            fh.write(f"{r.user_id}\t{r.item_id}\t{r.timestamp}\t{r.lat!r}\t{r.lon!r}\n")


def read_canonical_tsv(path: str | Path) -> InteractionLog:
    return parse_checkins(path, "canonical_tsv")


def log_stats(log: InteractionLog) -> dict:
    """Descriptive statistics emitted as stats.json by the ingest stage."""
    return {
        "n_users": log.n_users,
        "n_items": log.n_items,
        "unique_checkins": len({(r.user_id, r.item_id) for r in log.interactions}),
        "sparsity": round(compute_sparsity(log), 6),
        "dropped_rows": log.dropped_rows,
    }
