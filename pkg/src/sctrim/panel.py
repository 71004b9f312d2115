"""Panel-data model: outcome matrices, treatment assignment, and CSV ingestion.

Units are rows and time periods are columns throughout.  Estimator-facing
matrices (time x donors) are produced at the :func:`split_pre_post` boundary.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import DataError

__all__ = [
    "PanelMatrix",
    "TreatmentSpec",
    "DonorSelection",
    "load_panel",
    "split_pre_post",
    "donor_indices",
    "normalize_to_base",
    "aggregate_blocks",
]


@dataclass(frozen=True)
class PanelMatrix:
    """Units x time outcome matrix with unit and time labels.

    Invariants enforced at construction: every cell finite, at least two
    units and three periods, unique unit labels.  The value matrix is
    copied and frozen, so instances are safe to share between threads.
    """

    values: np.ndarray
    unit_labels: tuple
    time_labels: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError("panel values must be a 2-D matrix")
        n_units, n_periods = values.shape
        if n_units < 2:
            raise DataError(f"panel needs at least 2 units, got {n_units}")
        if n_periods < 3:
            raise DataError(f"panel needs at least 3 time periods, got {n_periods}")
        if len(self.unit_labels) != n_units:
            raise DataError("unit_labels length does not match number of rows")
        if len(self.time_labels) != n_periods:
            raise DataError("time_labels length does not match number of columns")
        if len(set(self.unit_labels)) != n_units:
            raise DataError("unit labels must be unique")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(
                f"non-finite outcome for unit {self.unit_labels[bad[0]]!r} "
                f"at period {self.time_labels[bad[1]]!r}"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "unit_labels", tuple(self.unit_labels))
        object.__setattr__(self, "time_labels", tuple(self.time_labels))

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def n_periods(self) -> int:
        return self.values.shape[1]

    def unit_index(self, label) -> int:
        """Row index of a unit label."""
        try:
            return self.unit_labels.index(label)
        except ValueError:
            raise DataError(f"unknown unit label {label!r}") from None


@dataclass(frozen=True)
class TreatmentSpec:
    """Treated-unit row index and the count of pre-intervention periods."""

    treated_index: int
    t0: int

    def __post_init__(self):
        if self.treated_index < 0:
            raise DataError("treated_index must be non-negative")
        if self.t0 < 1:
            raise DataError("t0 must be at least 1")

    def validate(self, panel: PanelMatrix) -> None:
        """Check the spec against a concrete panel (at least one post period)."""
        if self.treated_index >= panel.n_units:
            raise DataError(
                f"treated_index {self.treated_index} out of range for "
                f"{panel.n_units} units"
            )
        if self.t0 > panel.n_periods - 1:
            raise DataError(
                f"t0={self.t0} leaves no post-intervention period "
                f"(panel has {panel.n_periods} periods)"
            )


@dataclass(frozen=True)
class DonorSelection:
    """Ordered donor row indices plus provenance of the selection algorithm.

    ``diagnostics`` maps diagnostic names to floats (silhouette score,
    chosen k, R-squared / mBIC paths, fallback flags).
    """

    indices: tuple
    method_tag: str
    diagnostics: dict = field(default_factory=dict)

    _TAGS = ("full", "fpca_cluster", "forward_selection")

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise DataError("donor selection must contain at least one donor")
        if len(set(indices)) != len(indices):
            raise DataError("donor selection contains duplicate indices")
        if self.method_tag not in self._TAGS:
            raise DataError(f"unknown selection method tag {self.method_tag!r}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def build(cls, indices, method_tag, treated_index, diagnostics=None):
        """Construct a selection, rejecting any that contains the treated unit."""
        indices = tuple(int(i) for i in indices)
        if treated_index in indices:
            raise DataError("donor selection must not contain the treated unit")
        return cls(indices, method_tag, dict(diagnostics or {}))


def _parse_value(text, line_no):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"non-numeric value {text!r} on line {line_no}") from None


def _coerce_time_labels(labels):
    # Time labels are ordinal; keep them as ints when every label parses.
    try:
        return [int(x) for x in labels]
    except (TypeError, ValueError):
        return [str(x) for x in labels]


def load_panel(path, format: str = "wide") -> PanelMatrix:
    """Load a panel from CSV.

    Wide format: first column is the unit label, remaining columns are one
    per period (header row carries the time labels).  Long format: columns
    ``unit,time,value``, pivoted with time sorted ascending.

    Raises :class:`DataError` on missing cells, duplicate (unit, time)
    pairs, or non-numeric values.
    """
    try:
        if format == "wide":
            return _load_wide(path)
        if format == "long":
            return _load_long(path)
    except FileNotFoundError:
        raise DataError(f"panel file not found: {path}") from None
    raise DataError(f"unknown panel format {format!r}")


def _load_wide(path) -> PanelMatrix:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if frame.shape[1] < 2:
        raise DataError("wide CSV needs a unit column plus at least one period")
    unit_labels = [str(u) for u in frame.iloc[:, 0]]
    time_labels = _coerce_time_labels(frame.columns[1:])
    values = np.empty((len(unit_labels), len(time_labels)))
    for i, (_, row) in enumerate(frame.iterrows()):
        for j, col in enumerate(frame.columns[1:]):
            cell = row[col].strip()
            if cell == "":
                raise DataError(
                    f"missing value for unit {unit_labels[i]!r} "
                    f"at period {time_labels[j]!r}"
                )
            values[i, j] = _parse_value(cell, line_no=i + 2)
    return PanelMatrix(values, tuple(unit_labels), tuple(time_labels))


def _load_long(path) -> PanelMatrix:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    expected = ["unit", "time", "value"]
    cols = [c.strip().lower() for c in frame.columns]
    if cols[:3] != expected:
        raise DataError(f"long CSV must have columns {expected}, got {list(frame.columns)}")

    units: list = []
    seen_pairs = set()
    records: dict = {}
    for pos, (_, row) in enumerate(frame.iterrows()):
        unit = str(row.iloc[0])
        time = str(row.iloc[1]).strip()
        cell = str(row.iloc[2]).strip()
        if cell == "":
            raise DataError(f"missing value for unit {unit!r} at period {time!r}")
        if (unit, time) in seen_pairs:
            raise DataError(f"duplicate (unit, time) pair ({unit!r}, {time!r})")
        seen_pairs.add((unit, time))
        if unit not in records:
            units.append(unit)
            records[unit] = {}
        records[unit][time] = _parse_value(cell, line_no=pos + 2)

    raw_times = sorted({t for per_unit in records.values() for t in per_unit})
    time_labels = _coerce_time_labels(raw_times)
    if time_labels and isinstance(time_labels[0], int):
        order = np.argsort(time_labels)
        raw_times = [raw_times[i] for i in order]
        time_labels = [time_labels[i] for i in order]

    values = np.empty((len(units), len(raw_times)))
    for i, unit in enumerate(units):
        per_unit = records[unit]
        gaps = [t for t in raw_times if t not in per_unit]
        if gaps:
            raise DataError(
                f"unit {unit!r} is missing periods {gaps} present for other units"
            )
        for j, t in enumerate(raw_times):
            values[i, j] = per_unit[t]
    return PanelMatrix(values, tuple(units), tuple(time_labels))


def split_pre_post(panel: PanelMatrix, spec: TreatmentSpec):
    """Partition the panel around the intervention.

    Returns ``(treated_pre, donor_pre, treated_post, donor_post)`` where the
    donor matrices are time x donors (pre: t0 x J, post: (T - t0) x J) and
    donor column order preserves the panel's unit order minus the treated row.
    """
    spec.validate(panel)
    treated = panel.values[spec.treated_index]
    donors = np.delete(panel.values, spec.treated_index, axis=0)
    t0 = spec.t0
    return (
        treated[:t0].copy(),
        donors[:, :t0].T.copy(),
        treated[t0:].copy(),
        donors[:, t0:].T.copy(),
    )


def donor_indices(panel: PanelMatrix, spec: TreatmentSpec) -> list:
    """Panel row indices of the donor pool, in donor-column order."""
    return [i for i in range(panel.n_units) if i != spec.treated_index]


def normalize_to_base(panel: PanelMatrix, base: str = "none") -> PanelMatrix:
    """Rescale each unit so its first-period value equals 100 (or pass through)."""
    if base == "none":
        return panel
    if base != "first_period_100":
        raise DataError(f"unknown normalization {base!r}")
    first = panel.values[:, 0]
    zero = np.flatnonzero(first == 0.0)
    if zero.size:
        raise DataError(
            f"cannot normalize unit {panel.unit_labels[zero[0]]!r}: "
            "first-period value is zero"
        )
    values = 100.0 * panel.values / first[:, None]
    return PanelMatrix(values, panel.unit_labels, panel.time_labels)


def aggregate_blocks(panel: PanelMatrix, block: int) -> PanelMatrix:
    """Average consecutive fixed-size time blocks (e.g. days into weeks).

    A trailing partial block is averaged over the periods it contains.  The
    new time labels are the first label of each block.
    """
    if block < 1:
        raise DataError("block size must be at least 1")
    if block == 1:
        return panel
    n = panel.n_periods
    starts = list(range(0, n, block))
    values = np.column_stack(
        [panel.values[:, s : s + block].mean(axis=1) for s in starts]
    )
    labels = tuple(panel.time_labels[s] for s in starts)
    return PanelMatrix(values, panel.unit_labels, labels)
