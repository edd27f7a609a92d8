"""Examinee-by-descriptor response tables.

CSV layout::

    examinee,D16,D19,D20,meta:proficiency,meta:shift
    S1,0,NA,1/2,231.5,morning

The first column holds unique examinee ids, ``meta:`` columns carry
metadata for map coloring, and every other column is a descriptor. A
descriptor cell is ``0``, ``1``, ``0.5`` (or ``1/2``), or ``NA``.
"""
import csv
import dataclasses
import enum
import io
import math

import numpy as np

from .core import ResponseMatrix
from .exceptions import DataError, DomainError, ParseError

__all__ = [
    "ResponseTable",
    "ProficiencyBand",
    "parse_table",
    "read_table",
    "serialize_table",
    "aggregate_items",
    "band_of",
    "to_response_matrix",
]

META_PREFIX = "meta:"
NA = "NA"
_RATE_TOKENS = {"0": 0.0, "1": 1.0, "0.5": 0.5, "1/2": 0.5}


@dataclasses.dataclass(frozen=True, eq=False)
class ResponseTable:
    """Parsed response table.

    ``cells`` is an (n, d) float array with NaN for NA; ``metadata`` maps a
    column name (without the ``meta:`` prefix) to its raw string values.
    """
    examinee_ids: tuple
    descriptor_names: tuple
    cells: np.ndarray
    metadata: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        ids = tuple(self.examinee_ids)
        if len(set(ids)) != len(ids):
            raise DataError("examinee ids must be unique")
        cells = np.array(self.cells, dtype=float)
        cells.flags.writeable = False
        if cells.shape != (len(ids), len(self.descriptor_names)):
            raise DataError("cell grid does not match ids and descriptors")
        meta = {k: tuple(v) for k, v in self.metadata.items()}
        for name, col in meta.items():
            if len(col) != len(ids):
                raise DataError(f"metadata column {name!r} has wrong length")
        object.__setattr__(self, "examinee_ids", ids)
        object.__setattr__(self, "descriptor_names",
                           tuple(self.descriptor_names))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "metadata", meta)

    def numeric_metadata(self, name):
        """Metadata column as floats; blanks and NA become NaN."""
        out = []
        for i, raw in enumerate(self.metadata[name]):
            if raw.strip() in ("", NA):
                out.append(math.nan)
                continue
            try:
                out.append(float(raw))
            except ValueError:
                raise DataError(
                    f"metadata {name!r} of examinee {self.examinee_ids[i]!r} "
                    f"is not numeric: {raw!r}") from None
        return np.array(out)


class ProficiencyBand(enum.Enum):
    VERY_CRITICAL = "very critical"
    CRITICAL = "critical"
    INTERMEDIATE = "intermediate"
    ADEQUATE = "adequate"

    @property
    def label(self):
        return self.value


def band_of(score):
    """Performance standard of a 0-500 proficiency score.

    Upper bounds are closed: up to 250 very critical, up to 300 critical,
    up to 350 intermediate, adequate above.
    """
    score = float(score)
    if not 0.0 <= score <= 500.0:
        raise DomainError(f"proficiency {score} outside [0, 500]")
    if score <= 250.0:
        return ProficiencyBand.VERY_CRITICAL
    if score <= 300.0:
        return ProficiencyBand.CRITICAL
    if score <= 350.0:
        return ProficiencyBand.INTERMEDIATE
    return ProficiencyBand.ADEQUATE


def _parse_cell(token, strict):
    token = token.strip()
    if token == NA:
        return math.nan
    if token in _RATE_TOKENS:
        return _RATE_TOKENS[token]
    if strict:
        raise ValueError(token)
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(token)
    return value


def parse_table(text, strict=True):
    """Parse CSV text into a :class:`ResponseTable`.

    With ``strict=False`` descriptor cells may hold any finite real number
    (used for Gaussian fits); the NA token is accepted either way.
    """
    rows = list(csv.reader(io.StringIO(text)))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError("missing header row", row=1)
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "examinee":
        raise ParseError("first header field must be 'examinee'", row=1,
                         column=1)
    desc_cols, meta_cols = [], []
    for pos, name in enumerate(header[1:], start=1):
        if not name:
            raise ParseError("empty column name", row=1, column=pos + 1)
        (meta_cols if name.startswith(META_PREFIX) else desc_cols).append(pos)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column name", row=1)
    if not desc_cols:
        raise ParseError("no descriptor columns", row=1)
    body = rows[1:]
    if not body:
        raise ParseError("table has no data rows", row=2)

    ids, grid = [], []
    meta = {header[p][len(META_PREFIX):]: [] for p in meta_cols}
    seen = {}
    for r, fields in enumerate(body, start=2):
        if len(fields) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, found {len(fields)}", row=r)
        ex = fields[0].strip()
        if not ex:
            raise ParseError("empty examinee id", row=r, column=1)
        if ex in seen:
            raise ParseError(
                f"duplicate examinee id {ex!r} (first at row {seen[ex]})",
                row=r, column=1)
        seen[ex] = r
        ids.append(ex)
        vals = []
        for p in desc_cols:
            try:
                vals.append(_parse_cell(fields[p], strict))
            except ValueError:
                raise ParseError(f"unknown cell token {fields[p]!r}", row=r,
                                 column=p + 1) from None
        grid.append(vals)
        for p in meta_cols:
            meta[header[p][len(META_PREFIX):]].append(fields[p].strip())
    return ResponseTable(ids, [header[p] for p in desc_cols], np.array(grid),
                         meta)


def read_table(path, strict=True):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh.read(), strict=strict)


def _format_cell(v):
    if math.isnan(v):
        return NA
    if v == 0.0:
        return "0"
    if v == 1.0:
        return "1"
    if v == 0.5:
        return "0.5"
    return repr(float(v))


def serialize_table(table):
    """CSV text for ``table``; rates are written as 0, 0.5, 1 and NA."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    meta_names = list(table.metadata)
    w.writerow(["examinee", *table.descriptor_names,
                *(META_PREFIX + m for m in meta_names)])
    for i, ex in enumerate(table.examinee_ids):
        w.writerow([ex, *(_format_cell(v) for v in table.cells[i]),
                    *(table.metadata[m][i] for m in meta_names)])
    return buf.getvalue()


def aggregate_items(raw, mapping):
    """Collapse per-item 0/1 responses into descriptor success rates.

    Parameters
    ----------
    raw : dict
        ``{examinee_id: {item_id: 0 or 1}}``; items an examinee did not
        take are simply absent (or None).
    mapping : dict
        ``{item_id: descriptor_name}``. Descriptor columns follow the
        order of first appearance in ``mapping``.

    Returns
    -------
    ResponseTable
        Each cell is the fraction of the examinee's items on that
        descriptor answered correctly, NA where none was assigned.
    """
    descriptors = list(dict.fromkeys(mapping.values()))
    col = {name: j for j, name in enumerate(descriptors)}
    ids = list(raw)
    cells = np.full((len(ids), len(descriptors)), math.nan)
    for i, ex in enumerate(ids):
        correct = [0] * len(descriptors)
        taken = [0] * len(descriptors)
        for item, resp in raw[ex].items():
            if resp is None:
                continue
            if item not in mapping:
                raise DataError(f"item {item!r} has no descriptor")
            if resp not in (0, 1):
                raise DataError(
                    f"response of {ex!r} to {item!r} is not 0/1: {resp!r}")
            j = col[mapping[item]]
            taken[j] += 1
            correct[j] += int(resp)
        for j, t in enumerate(taken):
            if t > 2:
                raise DataError(
                    f"examinee {ex!r} has {t} items on descriptor "
                    f"{descriptors[j]!r}; at most 2 are allowed")
            if t:
                cells[i, j] = correct[j] / t
    return ResponseTable(ids, descriptors, cells)


def to_response_matrix(table):
    """Values and NA mask of ``table`` in header column order."""
    cells = table.cells
    observed = ~np.isnan(cells)
    empty = np.flatnonzero(~observed.any(axis=1))
    if empty.size:
        raise DataError(
            f"examinee {table.examinee_ids[empty[0]]!r} has only NA cells")
    empty = np.flatnonzero(~observed.any(axis=0))
    if empty.size:
        raise DataError(
            f"descriptor {table.descriptor_names[empty[0]]!r} has only NA "
            "cells")
    return ResponseMatrix(cells, observed, table.descriptor_names)
