"""Domain types and data plumbing: place catalog, visitors, visit events,
the binary transaction matrix, synthetic dataset generation, and splits.

File formats (all UTF-8, comma-separated, '\\n' line endings):

* places:       ``id,city,name,lat,lon,A,C,E,H,N,R,SP,SH,B,L`` with flags
                written as ``1`` or left empty
* transactions: ``visitor_id,<place_id>,...`` with ``0``/``1`` cells
* visitors:     ``id,age,gender,prefs,cur_lat,cur_lon`` where prefs is a
                ``;``-joined list of category symbols
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateId,
    EmptyFile,
    FoldsTooLarge,
    InvalidCounts,
    MalformedRow,
    TourmineError,
    UnknownPlaceId,
    UnknownVisitorId,
)
from .seeding import make_rng
from .validation import as_fraction, ceil_fraction

CATEGORY_SYMBOLS = ("A", "C", "E", "H", "N", "R", "SP", "SH", "B", "L")
CATEGORY_NAMES = (
    "Adventure",
    "Culture",
    "Environmental",
    "Health",
    "Nature",
    "Religious",
    "Sport",
    "Shopping",
    "Business",
    "Leisure",
)
N_CATEGORIES = len(CATEGORY_SYMBOLS)
PLACES_HEADER = ["id", "city", "name", "lat", "lon", *CATEGORY_SYMBOLS]

GENDERS = ("female", "male", "unspecified")


@dataclass(frozen=True)
class Place:
    """One tourist place: coordinates plus ten boolean category flags."""

    id: int
    city: str
    name: str
    lat: float
    lon: float
    categories: tuple[bool, ...]

    def __post_init__(self):
        if self.id <= 0:
            raise MalformedRow(f"place id must be positive, got {self.id}")
        if not (-90.0 <= self.lat <= 90.0) or not (-180.0 <= self.lon <= 180.0):
            raise MalformedRow(f"place {self.id}: coordinates ({self.lat}, {self.lon}) out of range")
        if len(self.categories) != N_CATEGORIES:
            raise MalformedRow(f"place {self.id}: expected {N_CATEGORIES} category flags")
        if not any(self.categories):
            raise MalformedRow(f"place {self.id}: at least one category flag must be set")

    @property
    def category_symbols(self) -> tuple[str, ...]:
        return tuple(s for s, on in zip(CATEGORY_SYMBOLS, self.categories) if on)


class PlaceCatalog:
    """Ordered collection of places with a dense id <-> ordinal index."""

    def __init__(self, places: list[Place]):
        if not places:
            raise EmptyFile("catalog must contain at least one place")
        self.places = list(places)
        self.item_index: dict[int, int] = {}
        for ordinal, place in enumerate(self.places):
            if place.id in self.item_index:
                raise DuplicateId(f"duplicate place id {place.id}")
            self.item_index[place.id] = ordinal

    def __len__(self) -> int:
        return len(self.places)

    @property
    def n(self) -> int:
        return len(self.places)

    def ordinal_for(self, place_id: int) -> int:
        try:
            return self.item_index[place_id]
        except KeyError:
            raise UnknownPlaceId(f"unknown place id {place_id}") from None

    def id_for(self, ordinal: int) -> int:
        return self.places[ordinal].id

    def place(self, ordinal: int) -> Place:
        return self.places[ordinal]

    def category_counts(self) -> np.ndarray:
        """How many places carry each category flag (length 10)."""
        counts = np.zeros(N_CATEGORIES, dtype=int)
        for place in self.places:
            counts += np.asarray(place.categories, dtype=int)
        return counts

    def coordinate_bounds(self) -> tuple[float, float, float, float]:
        lats = [p.lat for p in self.places]
        lons = [p.lon for p in self.places]
        return min(lats), max(lats), min(lons), max(lons)


@dataclass(frozen=True)
class Visitor:
    id: int
    age: int
    gender: str
    preferences: tuple[str, ...]
    current_location: tuple[float, float]

    def __post_init__(self):
        if self.id <= 0:
            raise MalformedRow(f"visitor id must be positive, got {self.id}")
        if self.age < 0:
            raise MalformedRow(f"visitor {self.id}: negative age")
        if self.gender not in GENDERS:
            raise MalformedRow(f"visitor {self.id}: unknown gender {self.gender!r}")
        if not self.preferences:
            raise MalformedRow(f"visitor {self.id}: preferences must be non-empty")
        for sym in self.preferences:
            if sym not in CATEGORY_SYMBOLS:
                raise MalformedRow(f"visitor {self.id}: unknown category symbol {sym!r}")


@dataclass(frozen=True)
class VisitEvent:
    visitor_id: int
    place_id: int
    visited: bool = True


class TransactionMatrix:
    """Binary visitor x place matrix, one bitset row per visitor.

    Row bit j is set iff the visitor visited the place with item ordinal j.
    Instances are treated as immutable after construction; the column caches
    make repeated mining over the same matrix cheap and are safe to share
    between concurrent readers.
    """

    def __init__(self, n_items: int, rows: list[int], visitor_ids: list[int]):
        if n_items <= 0 or not rows:
            raise TourmineError("transaction matrix must have at least one row and one item")
        if len(rows) != len(visitor_ids):
            raise TourmineError("rows and visitor_ids must have the same length")
        self.n_items = n_items
        self.rows = list(rows)
        self.visitor_ids = list(visitor_ids)
        self._col_counts: np.ndarray | None = None
        self._col_masks: dict[int, int] = {}

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return self.n_items

    def to_array(self) -> np.ndarray:
        """Dense boolean (m, n) view of the matrix."""
        arr = np.zeros((self.m, self.n_items), dtype=bool)
        for r, row in enumerate(self.rows):
            while row:
                low = row & -row
                arr[r, low.bit_length() - 1] = True
                row ^= low
        return arr

    def positives(self) -> list[tuple[int, int]]:
        """All (row_index, item_ordinal) cells set to 1, row-major order."""
        cells = []
        for r, row in enumerate(self.rows):
            while row:
                low = row & -row
                cells.append((r, low.bit_length() - 1))
                row ^= low
        return cells

    def row_items(self, r: int) -> list[int]:
        """Item ordinals visited in row r, ascending."""
        row = self.rows[r]
        items = []
        while row:
            low = row & -row
            items.append(low.bit_length() - 1)
            row ^= low
        return items

    def column_counts(self) -> np.ndarray:
        """Per-item positive counts (cached)."""
        if self._col_counts is None:
            counts = np.zeros(self.n_items, dtype=np.int64)
            for row in self.rows:
                while row:
                    low = row & -row
                    counts[low.bit_length() - 1] += 1
                    row ^= low
            self._col_counts = counts
        return self._col_counts

    def column_mask(self, item: int) -> int:
        """Bitmask over transactions containing `item` (bit r = row r, cached)."""
        mask = self._col_masks.get(item)
        if mask is None:
            bit = 1 << item
            mask = 0
            for r, row in enumerate(self.rows):
                if row & bit:
                    mask |= 1 << r
            self._col_masks[item] = mask
        return mask

    def warm_caches(self):
        """Precompute column counts and all column masks (benchmark fairness)."""
        self.column_counts()
        for j in range(self.n_items):
            self.column_mask(j)

    def without_cells(self, cells) -> "TransactionMatrix":
        """Copy of the matrix with the given (row, item) cells cleared."""
        rows = list(self.rows)
        for r, j in cells:
            rows[r] &= ~(1 << j)
        return TransactionMatrix(self.n_items, rows, self.visitor_ids)

    def __eq__(self, other):
        return (
            isinstance(other, TransactionMatrix)
            and self.n_items == other.n_items
            and self.rows == other.rows
            and self.visitor_ids == other.visitor_ids
        )


@dataclass(frozen=True)
class SplitSpec:
    """Train/test and cross-validation parameters (defaults: 70% train, 5 folds)."""

    train_fraction: float = 0.70
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        frac = as_fraction(self.train_fraction)
        if not (0 < frac < 1):
            raise TourmineError(f"train_fraction must be in (0,1), got {self.train_fraction}")
        if self.folds < 2:
            raise TourmineError(f"folds must be >= 2, got {self.folds}")


# ---------------------------------------------------------------------------
# place catalog I/O


def _parse_flag(raw: str, line_no: int) -> bool:
    raw = raw.strip()
    if raw == "1":
        return True
    if raw == "":
        return False
    raise MalformedRow(f"line {line_no}: category flag must be '1' or empty, got {raw!r}")


def load_places(path) -> PlaceCatalog:
    """Read a place catalog file; item ordinals follow file order."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        if header != PLACES_HEADER:
            raise MalformedRow(f"{path}: unexpected header {header!r}")
        places = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PLACES_HEADER):
                raise MalformedRow(f"line {line_no}: expected {len(PLACES_HEADER)} fields, got {len(row)}")
            try:
                pid = int(row[0])
                lat = float(row[3])
                lon = float(row[4])
            except ValueError as exc:
                raise MalformedRow(f"line {line_no}: {exc}") from None
            flags = tuple(_parse_flag(cell, line_no) for cell in row[5:])
            places.append(Place(pid, row[1], row[2], lat, lon, flags))
    if not places:
        raise EmptyFile(f"{path}: no data rows")
    return PlaceCatalog(places)


def save_places(catalog: PlaceCatalog, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLACES_HEADER)
        for p in catalog.places:
            flags = ["1" if on else "" for on in p.categories]
            writer.writerow([p.id, p.city, p.name, f"{p.lat:.6f}", f"{p.lon:.6f}", *flags])


# Approximate province-capital anchors used to synthesize a desk-scale catalog.
_CITY_ANCHORS = [
    ("Baghdad", 33.31, 44.37),
    ("Erbil", 36.19, 44.01),
    ("Basra", 30.51, 47.81),
    ("Mosul", 36.34, 43.13),
    ("Najaf", 32.00, 44.33),
    ("Karbala", 32.62, 44.02),
    ("Sulaymaniyah", 35.56, 45.43),
    ("Duhok", 36.87, 42.99),
    ("Kirkuk", 35.47, 44.39),
    ("Samarra", 34.20, 43.87),
    ("Fallujah", 33.35, 43.78),
    ("Ramadi", 33.42, 43.30),
    ("Amarah", 31.84, 47.14),
    ("Nasiriyah", 31.04, 46.26),
    ("Diwaniyah", 31.99, 44.92),
    ("Kut", 32.51, 45.82),
    ("Hillah", 32.48, 44.43),
    ("Baqubah", 33.75, 44.64),
]

# Relative weight of each category among synthetic places; heritage-heavy mix.
_CATEGORY_MIX = np.array([0.06, 0.18, 0.07, 0.05, 0.14, 0.20, 0.05, 0.09, 0.06, 0.10])


def synth_places(n_places: int = 232, seed: int = 0) -> PlaceCatalog:
    """Deterministic synthetic place catalog (for demos and tests).

    Places are scattered around province-capital anchors with 1-3 category
    flags drawn from a fixed mix.
    """
    rng = make_rng(seed, "places")
    places = []
    probs = _CATEGORY_MIX / _CATEGORY_MIX.sum()
    for i in range(n_places):
        city, base_lat, base_lon = _CITY_ANCHORS[int(rng.integers(len(_CITY_ANCHORS)))]
        lat = base_lat + float(rng.uniform(-0.15, 0.15))
        lon = base_lon + float(rng.uniform(-0.15, 0.15))
        n_flags = int(rng.integers(1, 4))
        chosen = rng.choice(N_CATEGORIES, size=n_flags, replace=False, p=probs)
        flags = tuple(k in set(int(c) for c in chosen) for k in range(N_CATEGORIES))
        places.append(Place(i + 1, city, f"{city} attraction {i + 1}", round(lat, 6), round(lon, 6), flags))
    return PlaceCatalog(places)


# ---------------------------------------------------------------------------
# synthetic visitor / event generation

_PREFERRED_BRANCH_PROB = 0.8
_COMPANION_PROB = 0.5


def _fame_weights(catalog: PlaceCatalog, rng) -> np.ndarray:
    """Long-tail popularity: a few flagship places absorb most visits.

    Fame correlates with how common a place's categories are (famous sites
    sit in well-visited segments), with seeded noise so different seeds make
    different places famous. The rank profile has a flagship tier, a mid
    tier, and a thin tail.
    """
    n = catalog.n
    score = np.array(
        [sum(_CATEGORY_MIX[c] for c in range(N_CATEGORIES) if p.categories[c]) for p in catalog.places]
    )
    score = score * (1.0 + 0.3 * rng.random(n))
    order = np.argsort(-score, kind="stable")
    weights = np.empty(n)
    for rank, j in enumerate(order):
        if rank < 9:
            weights[j] = 72.0 * 0.99**rank
        elif rank < 53:
            weights[j] = 13.0 * 0.96 ** (rank - 9)
        else:
            weights[j] = 0.1 * 0.99 ** (rank - 53)
    return weights


def _companion_map(catalog: PlaceCatalog, fame: np.ndarray) -> dict[int, int]:
    """Pair up same-category places by fame so co-visits have structure."""
    companions: dict[int, int] = {}
    for cat in range(N_CATEGORIES):
        members = [j for j, p in enumerate(catalog.places) if p.categories[cat]]
        members.sort(key=lambda j: (-fame[j], j))
        for a, b in zip(members[0::2], members[1::2]):
            if a not in companions and b not in companions:
                companions[a] = b
                companions[b] = a
    return companions


def generate_dataset(
    catalog: PlaceCatalog, visitors: int, events: int, seed: int
) -> tuple[list[Visitor], list[VisitEvent]]:
    """Generate `visitors` visitor profiles and exactly `events` positive visits.

    Behaviour model: ages uniform 16-75, genders 50/50, 1-3 preferred
    categories drawn by catalog category frequency; 80% of visits target
    preferred-category places (popularity-weighted, with occasional companion
    co-visits inside the same category), 20% are uniform over the catalog.
    Identical inputs and seed give byte-identical output.
    """
    if visitors < 1:
        raise InvalidCounts(f"visitors must be >= 1, got {visitors}")
    if events < visitors:
        raise InvalidCounts(f"events ({events}) must be >= visitors ({visitors})")
    n = catalog.n
    if events > visitors * n:
        raise InvalidCounts(f"cannot place {events} distinct visits in a {visitors}x{n} matrix")

    rng = make_rng(seed, "dataset")
    fame = _fame_weights(catalog, rng)
    companions = _companion_map(catalog, fame)

    cat_counts = catalog.category_counts().astype(float)
    cat_probs = cat_counts / cat_counts.sum()
    places_by_cat = [
        [j for j, p in enumerate(catalog.places) if p.categories[c]] for c in range(N_CATEGORIES)
    ]
    lat_min, lat_max, lon_min, lon_max = catalog.coordinate_bounds()

    # Visit quota per visitor: one guaranteed, extras spread by a heavy-tailed
    # appetite so a minority of power visitors hold longer histories.
    quotas = np.ones(visitors, dtype=np.int64)
    extra = events - visitors
    if extra:
        appetite = rng.gamma(0.55, 1.0, visitors) + 0.02
        quotas += rng.multinomial(extra, appetite / appetite.sum())
    # Respect the n-places-per-visitor cap (only reachable for tiny catalogs).
    overflow = int(np.sum(np.maximum(quotas - n, 0)))
    quotas = np.minimum(quotas, n)
    while overflow > 0:
        room = np.flatnonzero(quotas < n)
        take = min(overflow, room.size)
        quotas[room[:take]] += 1
        overflow -= take

    visitor_records: list[Visitor] = []
    event_records: list[VisitEvent] = []
    nonzero_cats = np.flatnonzero(cat_probs > 0)

    for i in range(visitors):
        vid = i + 1
        age = int(rng.integers(16, 76))
        gender = "female" if rng.random() < 0.5 else "male"
        n_prefs = min(int(rng.integers(1, 4)), nonzero_cats.size)
        pref_cats = sorted(
            int(c)
            for c in rng.choice(
                N_CATEGORIES, size=n_prefs, replace=False, p=cat_probs
            )
        )
        prefs = tuple(CATEGORY_SYMBOLS[c] for c in pref_cats)
        loc = (
            round(float(rng.uniform(lat_min, lat_max)), 6),
            round(float(rng.uniform(lon_min, lon_max)), 6),
        )
        visitor_records.append(Visitor(vid, age, gender, prefs, loc))

        pool = sorted({j for c in pref_cats for j in places_by_cat[c]})
        pool_weights = fame[pool] / fame[pool].sum()

        visited: set[int] = set()
        pending_companion: int | None = None
        while len(visited) < quotas[i]:
            choice = None
            if rng.random() < _PREFERRED_BRANCH_PROB:
                if pending_companion is not None and pending_companion not in visited:
                    choice = pending_companion
                    pending_companion = None
                else:
                    for _ in range(8):
                        cand = pool[int(rng.choice(len(pool), p=pool_weights))]
                        if cand not in visited:
                            choice = cand
                            break
                    if choice is not None:
                        mate = companions.get(choice)
                        if mate is not None and mate not in visited and rng.random() < _COMPANION_PROB:
                            pending_companion = mate
            else:
                for _ in range(8):
                    cand = int(rng.integers(n))
                    if cand not in visited:
                        choice = cand
                        break
            if choice is None:
                # Fallback after repeated collisions: cheapest unvisited pick.
                remaining = [j for j in range(n) if j not in visited]
                choice = remaining[int(rng.integers(len(remaining)))]
            visited.add(choice)
            event_records.append(VisitEvent(vid, catalog.id_for(choice), True))

    return visitor_records, event_records


def build_matrix(catalog: PlaceCatalog, visitors: list[Visitor], events: list[VisitEvent]) -> TransactionMatrix:
    """Assemble the binary matrix; cell = 1 iff a visited event exists."""
    row_index = {}
    for r, v in enumerate(visitors):
        if v.id in row_index:
            raise DuplicateId(f"duplicate visitor id {v.id}")
        row_index[v.id] = r
    rows = [0] * len(visitors)
    for ev in events:
        if ev.visitor_id not in row_index:
            raise UnknownVisitorId(f"event references unknown visitor {ev.visitor_id}")
        ordinal = catalog.ordinal_for(ev.place_id)
        if ev.visited:
            rows[row_index[ev.visitor_id]] |= 1 << ordinal
    return TransactionMatrix(catalog.n, rows, [v.id for v in visitors])


# ---------------------------------------------------------------------------
# splitting


def split_train_test(matrix: TransactionMatrix, spec: SplitSpec):
    """Per-visitor holdout: ceil(train_fraction x positives) cells stay in
    train, the rest become test cells. Visitors with a single positive keep it.

    Returns (train_matrix, held_out_cells) with cells as (row, item) pairs.
    """
    rng = make_rng(spec.seed, "split")
    frac = as_fraction(spec.train_fraction)
    held_out: list[tuple[int, int]] = []
    for r in range(matrix.m):
        items = matrix.row_items(r)
        if len(items) < 2:
            continue
        keep = ceil_fraction(frac, len(items))
        if keep >= len(items):
            continue
        order = rng.permutation(len(items))
        for idx in order[keep:]:
            held_out.append((r, items[int(idx)]))
    held_out.sort()
    return matrix.without_cells(held_out), held_out


def kfold(matrix: TransactionMatrix, spec: SplitSpec):
    """Partition all positive cells into `spec.folds` disjoint test folds.

    Returns a list of (train_matrix, test_cells) pairs; every positive cell
    appears in exactly one test fold.
    """
    cells = matrix.positives()
    if spec.folds > len(cells):
        raise FoldsTooLarge(f"{spec.folds} folds but only {len(cells)} positive cells")
    rng = make_rng(spec.seed, "kfold")
    order = rng.permutation(len(cells))
    base, rem = divmod(len(cells), spec.folds)
    folds = []
    start = 0
    for f in range(spec.folds):
        size = base + (1 if f < rem else 0)
        test = sorted(cells[int(i)] for i in order[start : start + size])
        folds.append((matrix.without_cells(test), test))
        start += size
    return folds


# ---------------------------------------------------------------------------
# visitor / transaction file I/O


def save_visitors(visitors: list[Visitor], path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "age", "gender", "prefs", "cur_lat", "cur_lon"])
        for v in visitors:
            writer.writerow(
                [v.id, v.age, v.gender, ";".join(v.preferences),
                 f"{v.current_location[0]:.6f}", f"{v.current_location[1]:.6f}"]
            )


def load_visitors(path) -> list[Visitor]:
    visitors = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        if header != ["id", "age", "gender", "prefs", "cur_lat", "cur_lon"]:
            raise MalformedRow(f"{path}: unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                visitors.append(
                    Visitor(
                        int(row[0]),
                        int(row[1]),
                        row[2],
                        tuple(row[3].split(";")),
                        (float(row[4]), float(row[5])),
                    )
                )
            except (IndexError, ValueError) as exc:
                raise MalformedRow(f"line {line_no}: {exc}") from None
    if not visitors:
        raise EmptyFile(f"{path}: no data rows")
    return visitors


def save_transactions(matrix: TransactionMatrix, catalog: PlaceCatalog, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(transactions_text(matrix, catalog))


def transactions_text(matrix: TransactionMatrix, catalog: PlaceCatalog) -> str:
    buf = io.StringIO()
    header = ["visitor_id"] + [str(catalog.id_for(j)) for j in range(catalog.n)]
    buf.write(",".join(header) + "\n")
    for r, vid in enumerate(matrix.visitor_ids):
        row = matrix.rows[r]
        cells = ["1" if row >> j & 1 else "0" for j in range(matrix.n_items)]
        buf.write(str(vid) + "," + ",".join(cells) + "\n")
    return buf.getvalue()


def load_transactions(path, catalog: PlaceCatalog) -> TransactionMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        if not header or header[0] != "visitor_id":
            raise MalformedRow(f"{path}: unexpected header {header!r}")
        ordinals = [catalog.ordinal_for(int(h)) for h in header[1:]]
        rows, visitor_ids = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
            bits = 0
            for ordinal, cell in zip(ordinals, row[1:]):
                if cell == "1":
                    bits |= 1 << ordinal
                elif cell != "0":
                    raise MalformedRow(f"line {line_no}: cell must be 0 or 1, got {cell!r}")
            visitor_ids.append(int(row[0]))
            rows.append(bits)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return TransactionMatrix(catalog.n, rows, visitor_ids)
