"""Monthly series container, ingestion and the deterministic transforms.

Values live on a uniform monthly grid anchored at ``start = (year, month)``.
Transforms never pad: differencing shortens the series and shifts ``start``
forward, integration lengthens it again.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    InitialMismatch,
    InsufficientLength,
    MissingMonth,
    NonPositiveValue,
)

YearMonth = tuple[int, int]


def add_months(ym: YearMonth, k: int) -> YearMonth:
    """Shift a (year, month) pair by ``k`` months (``k`` may be negative)."""
    idx = ym[0] * 12 + (ym[1] - 1) + k
    return idx // 12, idx % 12 + 1


def months_between(a: YearMonth, b: YearMonth) -> int:
    """Number of months from ``a`` to ``b`` (negative if ``b`` precedes ``a``)."""
    return (b[0] * 12 + b[1]) - (a[0] * 12 + a[1])


def parse_month(text: str) -> YearMonth:
    """Parse ``YYYY-MM`` (a trailing ``-DD`` is ignored)."""
    parts = text.strip().split("-")
    if len(parts) < 2:
        raise ValueError(f"not a YYYY-MM month: {text!r}")
    year, month = int(parts[0]), int(parts[1])
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range in {text!r}")
    return year, month


def format_month(ym: YearMonth) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    value: float


@dataclass(frozen=True, eq=False)
class Series:
    """A monthly series with its transform provenance.

    Parameters
    ----------
    start : (int, int)
        Year and month of the first observation.
    values : array_like
        Observations; copied into a read-only float array.
    transform_log : int
        How many times the natural log has been applied.
    diff_spec : (int, int, int)
        ``(d, D, s)``: non-seasonal and seasonal difference counts and the
        seasonal period.
    name : str
        Optional label used when serializing.
    """

    start: YearMonth
    values: np.ndarray
    transform_log: int = 0
    diff_spec: tuple[int, int, int] = (0, 0, 1)
    name: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if vals.size == 0:
            raise EmptyInput("series has no values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("series values must be finite")
        d, D, s = (int(x) for x in self.diff_spec)
        if min(d, D) < 0 or s < 1:
            raise ValueError(f"invalid diff_spec {self.diff_spec}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "start", (int(self.start[0]), int(self.start[1])))
        object.__setattr__(self, "diff_spec", (d, D, s))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.start == other.start
            and self.transform_log == other.transform_log
            and self.diff_spec == other.diff_spec
            and np.array_equal(self.values, other.values)
        )

    @property
    def end(self) -> YearMonth:
        return add_months(self.start, len(self) - 1)

    def months(self) -> list[YearMonth]:
        return [add_months(self.start, i) for i in range(len(self))]

    def index_of(self, ym: YearMonth) -> int:
        """Position of month ``ym``; raises ``KeyError`` when outside the range."""
        i = months_between(self.start, ym)
        if not 0 <= i < len(self):
            raise KeyError(format_month(ym))
        return i

    def window(self, first: YearMonth, last: YearMonth) -> "Series":
        """Sub-series for the inclusive month range ``[first, last]``."""
        i, j = self.index_of(first), self.index_of(last)
        return self.with_values(self.values[i : j + 1], start=first)

    def with_values(self, values, start: YearMonth | None = None, **changes) -> "Series":
        kw = dict(
            start=self.start if start is None else start,
            values=values,
            transform_log=self.transform_log,
            diff_spec=self.diff_spec,
            name=self.name,
        )
        kw.update(changes)
        return Series(**kw)


def monthly_average(records: Iterable[DailyRecord | tuple], name: str = "") -> Series:
    """Average daily records into one value per calendar month.

    Boundary months are averaged over whatever records they contain. A month
    strictly between the first and last record with no data is an error.
    """
    buckets: dict[YearMonth, list[float]] = defaultdict(list)
    for rec in records:
        date, value = (rec.date, rec.value) if isinstance(rec, DailyRecord) else rec
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value on {date}")
        buckets[(date.year, date.month)].append(value)
    if not buckets:
        raise EmptyInput("no records to average")
    first, last = min(buckets), max(buckets)
    out = []
    for k in range(months_between(first, last) + 1):
        ym = add_months(first, k)
        vals = buckets.get(ym)
        if not vals:
            raise MissingMonth(*ym)
        # fsum is exactly rounded, so the mean does not depend on record order
        out.append(math.fsum(vals) / len(vals))
    return Series(start=first, values=out, name=name)


def log_transform(s: Series) -> Series:
    bad = np.flatnonzero(s.values <= 0)
    if bad.size:
        raise NonPositiveValue(int(bad[0]))
    return s.with_values(np.log(s.values), transform_log=s.transform_log + 1)


def _stages(d: int, D: int, period: int) -> list[int]:
    return [1] * d + [period] * D


def _diff_array(x: np.ndarray, lags: Sequence[int]) -> np.ndarray:
    for lag in lags:
        x = x[lag:] - x[:-lag]
    return x


def difference(s: Series, d: int = 1, D: int = 0, period: int = 1) -> Series:
    """Apply ``(1 - L)^d (1 - L^period)^D``.

    Differences accumulate in ``diff_spec``; the seasonal period must agree
    with any seasonal differencing already recorded.
    """
    if d < 0 or D < 0:
        raise ValueError("difference orders must be non-negative")
    if D > 0 and period < 2:
        raise ValueError("seasonal differencing needs period >= 2")
    lost = d + D * period
    if len(s) <= lost:
        raise InsufficientLength(f"length {len(s)} cannot absorb {lost} lags")
    od, oD, os_ = s.diff_spec
    if D > 0 and oD > 0 and os_ != period:
        raise ValueError(f"seasonal period {period} conflicts with recorded {os_}")
    spec = (od + d, oD + D, period if D > 0 else os_)
    return s.with_values(
        _diff_array(s.values, _stages(d, D, period)),
        start=add_months(s.start, lost),
        diff_spec=spec,
    )


def integrate_array(deltas: np.ndarray, initial: np.ndarray, d: int, D: int, period: int) -> np.ndarray:
    """Invert differencing on raw arrays. ``deltas`` may be 2-D (paths x time)."""
    lags = _stages(d, D, period)
    initial = np.asarray(initial, dtype=float)
    if initial.shape[-1] != sum(lags):
        raise InitialMismatch(f"expected {sum(lags)} initial values, got {initial.shape[-1]}")
    # initial segment of every intermediate stage, in application order
    segs = [initial]
    for lag in lags:
        segs.append(_diff_array(segs[-1], [lag]) if segs[-1].shape[-1] > lag else segs[-1][..., :0])
    y = np.asarray(deltas, dtype=float)
    for k in range(len(lags) - 1, -1, -1):
        lag = lags[k]
        init = segs[k][..., :lag]
        if y.ndim == 2 and init.ndim == 1:
            init = np.broadcast_to(init, (y.shape[0], lag))
        out = np.concatenate([init, y], axis=-1)
        for j in range(lag):
            out[..., j::lag] = np.cumsum(out[..., j::lag], axis=-1)
        y = out
    return y


def integrate(deltas: Series, initial: Sequence[float]) -> Series:
    """Inverse of :func:`difference` given the first ``d + D*s`` levels."""
    d, D, s = deltas.diff_spec
    initial = np.asarray(initial, dtype=float).reshape(-1)
    if initial.size != d + D * s:
        raise InitialMismatch(f"expected {d + D * s} initial values, got {initial.size}")
    levels = integrate_array(deltas.values, initial, d, D, s)
    return deltas.with_values(
        levels, start=add_months(deltas.start, -(d + D * s)), diff_spec=(0, 0, 1)
    )


# -- CSV ingestion -----------------------------------------------------------

def read_csv(path: str | Path, name: str = "") -> Series:
    """Read a ``date,value`` CSV.

    Daily files (``YYYY-MM-DD``) are averaged per month; monthly files
    (``YYYY-MM``) are taken as-is and must form a complete grid.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["date", "value"]:
            raise ValueError(f"{path}: header row 'date,value' required")
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput(f"{path}: no data rows")
    name = name or path.stem
    if len(rows[0][0].strip()) > 7:
        records = []
        for r in rows:
            rec = DailyRecord(dt.date.fromisoformat(r[0].strip()), float(r[1]))
            if records and rec.date <= records[-1].date:
                raise ValueError(f"{path}: dates not strictly increasing at {rec.date}")
            records.append(rec)
        return monthly_average(records, name=name)
    months = [parse_month(r[0]) for r in rows]
    for k, ym in enumerate(months[1:], 1):
        step = months_between(months[k - 1], ym)
        if step <= 0:
            raise ValueError(f"{path}: months not strictly increasing at {format_month(ym)}")
        if step > 1:
            raise MissingMonth(*add_months(months[k - 1], 1))
    return Series(start=months[0], values=[float(r[1]) for r in rows], name=name)


def write_csv(s: Series, path: str | Path) -> None:
    """Write a monthly ``date,value`` CSV with full-precision values."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "value"])
        for ym, v in zip(s.months(), s.values):
            w.writerow([format_month(ym), repr(float(v))])
