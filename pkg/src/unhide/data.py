"""Ratings and demographics parsing, label binarization and seeded splits."""

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DataFormatError

ML100K_SCALE = (1.0, 5.0)

MALE_SYMBOLS = frozenset({"M", "m", "Male", "male", "MALE"})
FEMALE_SYMBOLS = frozenset({"F", "f", "Female", "female", "FEMALE"})


def _id_key(s):
    return (0, int(s), "") if s.lstrip("-").isdigit() else (1, 0, s)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RatingsDataset:
    """Sparse ratings with dense 0-based user/item indices.

    ``users``, ``items`` and ``values`` are parallel read-only arrays, one
    entry per observed rating. ``user_ids[u]`` is the external id of user
    ``u``; ``user_index`` is the inverse table (same for items).
    """

    users: np.ndarray
    items: np.ndarray
    values: np.ndarray
    user_ids: tuple
    item_ids: tuple
    rating_scale: tuple
    user_index: dict = field(repr=False, compare=False)
    item_index: dict = field(repr=False, compare=False)

    @property
    def n_users(self):
        return len(self.user_ids)

    @property
    def n_items(self):
        return len(self.item_ids)

    def __len__(self):
        return len(self.values)

    def as_array(self, idx=None):
        """(n, 3) float array of ``(user, item, rating)`` rows, optionally subset."""
        out = np.column_stack([self.users, self.items, self.values]).astype(float)
        return out if idx is None else out[np.asarray(idx)]

    def item_counts(self):
        return np.bincount(self.items, minlength=self.n_items)

    def to_records(self):
        """External ``(user_id, item_id, value)`` triples in storage order."""
        return [
            (self.user_ids[u], self.item_ids[i], float(v))
            for u, i, v in zip(self.users, self.items, self.values)
        ]

    @classmethod
    def from_records(cls, records, rating_scale=None):
        """Build from ``(user_id, item_id, value[, lineno])`` tuples."""
        records = list(records)
        seen = set()
        for rec in records:
            key = (rec[0], rec[1])
            if key in seen:
                lineno = rec[3] if len(rec) > 3 else None
                raise DataFormatError(f"duplicate rating for pair {key}", lineno)
            seen.add(key)
        values = np.array([float(r[2]) for r in records], dtype=float)
        if rating_scale is None:
            rating_scale = (
                (float(values.min()), float(values.max())) if len(values) else (math.nan, math.nan)
            )
        lo, hi = rating_scale
        for rec, v in zip(records, values):
            if not lo <= v <= hi:
                lineno = rec[3] if len(rec) > 3 else None
                raise DataFormatError(f"rating {v:g} outside scale [{lo:g}, {hi:g}]", lineno)

        user_ids = tuple(sorted({r[0] for r in records}, key=_id_key))
        item_ids = tuple(sorted({r[1] for r in records}, key=_id_key))
        user_index = {uid: k for k, uid in enumerate(user_ids)}
        item_index = {iid: k for k, iid in enumerate(item_ids)}
        users = np.array([user_index[r[0]] for r in records], dtype=np.int64)
        items = np.array([item_index[r[1]] for r in records], dtype=np.int64)
        return cls(
            users=_frozen(users),
            items=_frozen(items),
            values=_frozen(values),
            user_ids=user_ids,
            item_ids=item_ids,
            rating_scale=(float(lo), float(hi)),
            user_index=user_index,
            item_index=item_index,
        )


def _read_text(stream):
    if isinstance(stream, (str, Path)):
        with open(stream, encoding="latin-1") as fh:
            return fh.read()
    text = stream.read()
    return text.decode("latin-1") if isinstance(text, bytes) else text


def parse_ratings(stream, format="ml100k", rating_scale=None):
    """Parse a ratings file into a :class:`RatingsDataset`.

    ``format="ml100k"`` reads ``user<TAB>item<TAB>rating[<TAB>timestamp]``
    lines and defaults to the 1-5 scale. ``format="csv"`` expects a header
    naming ``user``, ``item`` and ``rating`` columns; without an explicit
    ``rating_scale`` the observed min/max is used.
    """
    text = _read_text(stream)
    records = []
    if format == "ml100k":
        if rating_scale is None:
            rating_scale = ML100K_SCALE
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise DataFormatError(f"expected >= 3 tab-separated fields, got {len(parts)}", lineno)
            records.append((parts[0].strip(), parts[1].strip(), _parse_value(parts[2], lineno), lineno))
    elif format == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is not None:
            cols = _header_columns(header, ("user", "item", "rating"), 1)
            for lineno, row in enumerate(reader, start=2):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < len(header):
                    raise DataFormatError(f"expected {len(header)} fields, got {len(row)}", lineno)
                u, i, r = (row[c].strip() for c in cols)
                records.append((u, i, _parse_value(r, lineno), lineno))
    else:
        raise ValueError(f"unknown ratings format {format!r}")
    return RatingsDataset.from_records(records, rating_scale)


def _parse_value(s, lineno):
    try:
        v = float(s)
    except ValueError:
        raise DataFormatError(f"rating {s.strip()!r} is not a number", lineno) from None
    if not math.isfinite(v):
        raise DataFormatError(f"rating {s.strip()!r} is not finite", lineno)
    return v


def _header_columns(header, names, lineno):
    header = [h.strip().lower() for h in header]
    try:
        return [header.index(n) for n in names]
    except ValueError:
        raise DataFormatError(f"header must name columns {', '.join(names)}; got {header}", lineno) from None


def parse_items(stream, dataset=None):
    """Map external item id to title from an ML-100K ``u.item`` file."""
    titles = {}
    for line in _read_text(stream).splitlines():
        parts = line.split("|")
        if len(parts) >= 2:
            titles[parts[0].strip()] = parts[1]
    if dataset is not None:
        titles = {k: v for k, v in titles.items() if k in dataset.item_index}
    return titles


@dataclass(frozen=True)
class DemographicTable:
    """Binary demographic labels aligned with a ratings dataset's user indices.

    Arrays have one entry per user index; ``-1`` marks an absent label or age.
    Label 1 is always the majority group.
    """

    gender: np.ndarray
    age: np.ndarray
    raw_age: np.ndarray
    age_cut: int = 40

    def labels(self, feature):
        """Return ``(user_indices, labels)`` for users that have ``feature``."""
        arr = {"gender": self.gender, "age": self.age}[feature]
        idx = np.flatnonzero(arr >= 0)
        return idx, arr[idx].astype(np.int64)

    def majority_share(self, feature):
        _, y = self.labels(feature)
        return float(y.mean()) if len(y) else math.nan


def parse_demographics(
    stream,
    dataset,
    format="ml100k",
    gender_majority="M",
    age_cut=40,
    age_majority="young",
    strict=True,
):
    """Parse per-user gender/age into a :class:`DemographicTable`.

    ``gender_majority`` names the symbol class mapped to 1 (``"M"`` or
    ``"F"``), or ``"auto"`` to pick the most frequent one. Ages below
    ``age_cut`` are "young"; ``age_majority`` picks which side gets label 1
    (``"young"``, ``"senior"`` or ``"auto"``). Empty fields leave the label
    absent. With ``strict`` a user unknown to ``dataset`` is an error,
    otherwise it is skipped.
    """
    text = _read_text(stream)
    rows = []
    if format == "ml100k":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("|")
            if len(parts) < 3:
                raise DataFormatError("expected id|age|gender|...", lineno)
            rows.append((parts[0].strip(), parts[1].strip(), parts[2].strip(), lineno))
    elif format == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is not None:
            cols = _header_columns(header, ("user", "age", "gender"), 1)
            for lineno, row in enumerate(reader, start=2):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < len(header):
                    raise DataFormatError(f"expected {len(header)} fields, got {len(row)}", lineno)
                rows.append(tuple(row[c].strip() for c in cols) + (lineno,))
    else:
        raise ValueError(f"unknown demographics format {format!r}")

    n = dataset.n_users
    sex = np.full(n, -1, dtype=np.int8)  # 1 male, 0 female
    raw_age = np.full(n, -1, dtype=np.int64)
    for uid, age_s, gender_s, lineno in rows:
        if uid not in dataset.user_index:
            if strict:
                raise DataFormatError(f"user {uid!r} has no ratings", lineno)
            continue
        u = dataset.user_index[uid]
        if gender_s:
            if gender_s in MALE_SYMBOLS:
                sex[u] = 1
            elif gender_s in FEMALE_SYMBOLS:
                sex[u] = 0
            else:
                raise DataFormatError(f"unknown gender symbol {gender_s!r}", lineno)
        if age_s:
            try:
                raw_age[u] = int(age_s)
            except ValueError:
                raise DataFormatError(f"age {age_s!r} is not an integer", lineno) from None

    if gender_majority == "auto":
        counts = Counter(sex[sex >= 0].tolist())
        male_is_majority = counts[1] >= counts[0]
    elif gender_majority in MALE_SYMBOLS:
        male_is_majority = True
    elif gender_majority in FEMALE_SYMBOLS:
        male_is_majority = False
    else:
        raise ValueError(f"gender_majority must be 'M', 'F' or 'auto', got {gender_majority!r}")
    gender = sex.copy()
    if not male_is_majority:
        gender[sex >= 0] = 1 - sex[sex >= 0]

    known = raw_age >= 0
    young = (raw_age < age_cut).astype(np.int8)
    if age_majority == "auto":
        young_is_majority = young[known].sum() * 2 >= known.sum()
    elif age_majority in ("young", "senior"):
        young_is_majority = age_majority == "young"
    else:
        raise ValueError(f"age_majority must be 'young', 'senior' or 'auto', got {age_majority!r}")
    age = np.full(n, -1, dtype=np.int8)
    age[known] = young[known] if young_is_majority else 1 - young[known]

    return DemographicTable(
        gender=_frozen(gender), age=_frozen(age), raw_age=_frozen(raw_age), age_cut=age_cut
    )


@dataclass(frozen=True)
class SplitAssignment:
    mode: str
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int

    def sizes(self):
        return len(self.train), len(self.validation), len(self.test)


def split_sizes(n, ratios):
    """Largest-remainder allocation of ``n`` elements; ties go to the earlier part."""
    quotas = [n * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda k: (-(quotas[k] - sizes[k]), k))
    for k in order[: n - sum(sizes)]:
        sizes[k] += 1
    return sizes


def split(n, ratios=(0.7, 0.1, 0.2), mode="by-user", seed=0):
    """Seeded train/validation/test partition of ``range(n)``.

    ``mode`` is ``"by-rating"`` (``n`` counts ratings) or ``"by-user"``
    (``n`` counts users); the partition rule is the same either way.
    """
    if mode not in ("by-rating", "by-user"):
        raise ValueError(f"unknown split mode {mode!r}")
    if n <= 0:
        raise ValueError("cannot split an empty index range")
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    n_train, n_val, _ = split_sizes(n, ratios)
    perm = np.random.default_rng(seed).permutation(n)
    return SplitAssignment(
        mode=mode,
        train=_frozen(np.sort(perm[:n_train])),
        validation=_frozen(np.sort(perm[n_train : n_train + n_val])),
        test=_frozen(np.sort(perm[n_train + n_val :])),
        seed=seed,
    )


def load_ml100k(directory):
    """Load ``u.data``, ``u.user`` and (if present) ``u.item`` from a directory.

    Returns ``(dataset, demographics, titles)``.
    """
    directory = Path(directory)
    dataset = parse_ratings(directory / "u.data")
    demo = parse_demographics(directory / "u.user", dataset)
    item_file = directory / "u.item"
    titles = parse_items(item_file, dataset) if item_file.exists() else {}
    return dataset, demo, titles
