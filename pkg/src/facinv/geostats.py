"""Spatial-statistics quality assessment for generated facies models.

Two axis-aligned statistics per facies, compared between an ensemble of
realizations and patches of a reference training image:

* indicator variogram  gamma(h) = half the mean squared indicator
  difference over all cell pairs at lag h along one axis;
* connectivity function  tau(h) = probability that two same-facies cells
  at lag h belong to the same connected component of that facies.

Lags where tau has no qualifying pair are reported as NaN gaps rather
than zeros so they do not bias ensemble envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import axis_index, extract_patch, facies_proportions

KIND_VARIOGRAM = "variogram"
KIND_CONNECTIVITY = "connectivity"
CURVE_KINDS = (KIND_VARIOGRAM, KIND_CONNECTIVITY)

FACE_CONNECTIVITY = 6
FULL_CONNECTIVITY = 26


@dataclass(frozen=True)
class StatCurve:
    """One statistic for one facies along one axis, sampled at integer lags."""

    kind: str
    facies: int
    axis: str
    lags: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"kind must be one of {CURVE_KINDS}")
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if lags.ndim != 1 or lags.shape != values.shape:
            raise ValueError("lags and values must be 1-D and the same length")
        if lags.size == 0 or lags[0] != 0 or np.any(np.diff(lags) <= 0):
            raise ValueError("lags must increase strictly from 0")
        finite = values[np.isfinite(values)]
        hi = 0.5 if self.kind == KIND_VARIOGRAM else 1.0
        if finite.size and (finite.min() < -1e-12 or finite.max() > hi + 1e-12):
            raise ValueError(f"{self.kind} values must lie in [0, {hi}]")
        lags = lags.copy()
        lags.flags.writeable = False
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "axis", ("x", "y", "z")[axis_index(self.axis)])

    def key(self):
        return (self.kind, self.facies, self.axis)

    @property
    def points(self):
        """(lag, value) pairs; NaN marks an undefined lag."""
        return list(zip(self.lags.tolist(), self.values.tolist()))


def _pair_slices(n, axis, h):
    head = [slice(None)] * 3
    tail = [slice(None)] * 3
    head[axis] = slice(0, n - h)
    tail[axis] = slice(h, n)
    return tuple(head), tuple(tail)


def _check_lag(grid, axis, max_lag):
    ax = axis_index(axis)
    extent = grid.dims.shape[ax]
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if max_lag >= extent:
        raise ValueError(f"max_lag {max_lag} must stay below the grid extent {extent}")
    return ax, extent


def indicator_variogram(grid, facies, axis, max_lag):
    """gamma(h) over all axis-aligned pairs at lags 0..max_lag."""
    ax, extent = _check_lag(grid, axis, max_lag)
    ind = (grid.values == facies).astype(np.float64)
    values = np.zeros(max_lag + 1)
    for h in range(1, max_lag + 1):
        head, tail = _pair_slices(extent, ax, h)
        diff = ind[head] - ind[tail]
        values[h] = 0.5 * np.mean(diff * diff)
    return StatCurve(KIND_VARIOGRAM, int(facies), axis, np.arange(max_lag + 1), values)


def label_components(grid, facies, connectivity=FACE_CONNECTIVITY):
    """Positive component labels on cells of `facies`, 0 elsewhere.

    connectivity 6 joins face-adjacent cells, 26 joins any cube neighbors.
    """
    if connectivity not in (FACE_CONNECTIVITY, FULL_CONNECTIVITY):
        raise ValueError("connectivity must be 6 or 26")
    structure = ndimage.generate_binary_structure(3, 1 if connectivity == 6 else 3)
    labels, _ = ndimage.label(grid.values == facies, structure=structure)
    return labels


def connectivity_function(grid, facies, axis, max_lag, connectivity=FACE_CONNECTIVITY):
    """tau(h) for lags 0..max_lag; NaN where no same-facies pair exists."""
    ax, extent = _check_lag(grid, axis, max_lag)
    labels = label_components(grid, facies, connectivity)
    values = np.full(max_lag + 1, np.nan)
    n_cells = int((labels > 0).sum())
    if n_cells > 0:
        values[0] = 1.0
    for h in range(1, max_lag + 1):
        head, tail = _pair_slices(extent, ax, h)
        a = labels[head]
        b = labels[tail]
        both = (a > 0) & (b > 0)
        denom = int(both.sum())
        if denom:
            values[h] = int(((a == b) & both).sum()) / denom
    return StatCurve(KIND_CONNECTIVITY, int(facies), axis, np.arange(max_lag + 1), values)


@dataclass(frozen=True)
class Envelope:
    """Per-lag mean/min/max over an ensemble of identical-key curves."""

    kind: str
    facies: int
    axis: str
    lags: np.ndarray
    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray

    def key(self):
        return (self.kind, self.facies, self.axis)


def ensemble_envelope(curves):
    """Collapse same-key curves to per-lag mean/min/max, skipping NaN gaps."""
    curves = list(curves)
    if not curves:
        raise ValueError("cannot build an envelope from an empty curve list")
    first = curves[0]
    for c in curves[1:]:
        if c.key() != first.key() or not np.array_equal(c.lags, first.lags):
            raise ValueError("envelope inputs must share kind, facies, axis and lags")
    stack = np.vstack([c.values for c in curves])
    with np.errstate(invalid="ignore"):
        any_defined = np.isfinite(stack).any(axis=0)
        mean = np.where(any_defined, np.nanmean(stack, axis=0), np.nan)
        lo = np.where(any_defined, np.nanmin(stack, axis=0), np.nan)
        hi = np.where(any_defined, np.nanmax(stack, axis=0), np.nan)
    return Envelope(first.kind, first.facies, first.axis, first.lags.copy(), mean, lo, hi)


# ---------------------------------------------------------------------------
# QA report

@dataclass(frozen=True)
class QaConfig:
    """Protocol for comparing realizations against training-image patches."""

    patch_size: tuple = (100, 100, 50)
    patch_count: int = 100
    max_lag: tuple | None = None  # per axis; default: half the common extent
    variogram_threshold: float = 0.01
    connectivity_threshold: float = 0.1
    proportion_threshold: float | None = None
    connectivity_neighbors: int = FACE_CONNECTIVITY
    seed: int = 0


@dataclass(frozen=True)
class CurveComparison:
    kind: str
    facies: int
    axis: str
    max_mean_deviation: float
    band_containment: float
    realization_mean: Envelope
    reference: Envelope


@dataclass(frozen=True)
class QaReport:
    comparisons: tuple
    proportion_delta: dict  # facies -> |mean realization prop - TI prop|
    variogram_threshold: float
    connectivity_threshold: float
    proportion_threshold: float | None
    passed: bool

    def to_text(self):
        lines = [f"pass = {'true' if self.passed else 'false'}"]
        lines.append(f"variogram_threshold = {self.variogram_threshold:.6g}")
        lines.append(f"connectivity_threshold = {self.connectivity_threshold:.6g}")
        if self.proportion_threshold is not None:
            lines.append(f"proportion_threshold = {self.proportion_threshold:.6g}")
        for code in sorted(self.proportion_delta):
            lines.append(
                f"proportion_delta_facies_{code} = {self.proportion_delta[code]:.6g}"
            )
        for cmp in self.comparisons:
            stem = f"{cmp.kind}_facies_{cmp.facies}_axis_{cmp.axis}"
            lines.append(f"{stem}_max_mean_deviation = {cmp.max_mean_deviation:.6g}")
            lines.append(f"{stem}_band_containment = {cmp.band_containment:.6g}")
        return "\n".join(lines) + "\n"


def sample_patch_origins(ti_dims, patch_size, count, rng):
    """Uniformly random in-bounds patch origins (deterministic per rng)."""
    spans = [n - p for n, p in zip(ti_dims.shape, patch_size)]
    if min(spans) < 0:
        raise ValueError(f"patch {patch_size} does not fit in grid {ti_dims.shape}")
    return [tuple(rng.integers(0, s + 1) for s in spans) for _ in range(count)]


def _curve_set(grid, facies_codes, max_lag, neighbors):
    curves = {}
    for code in facies_codes:
        for ax_i, ax in enumerate(("x", "y", "z")):
            curves[(KIND_VARIOGRAM, code, ax)] = indicator_variogram(
                grid, code, ax, max_lag[ax_i]
            )
            curves[(KIND_CONNECTIVITY, code, ax)] = connectivity_function(
                grid, code, ax, max_lag[ax_i], neighbors
            )
    return curves


def _deviation(mean_a, mean_b):
    both = np.isfinite(mean_a) & np.isfinite(mean_b)
    if not both.any():
        return float("nan")
    return float(np.abs(mean_a[both] - mean_b[both]).max())


def _containment(curves, reference):
    inside = 0
    for c in curves:
        ok = np.isfinite(c.values) & np.isfinite(reference.min)
        if np.all(
            (c.values[ok] >= reference.min[ok] - 1e-12)
            & (c.values[ok] <= reference.max[ok] + 1e-12)
        ):
            inside += 1
    return inside / len(curves)


def qa_report(realizations, ti, config=QaConfig()):
    """Score an ensemble of realizations against training-image patches.

    Reference curves come from `config.patch_count` seeded random patches
    of the training image; the report carries, per (kind, facies, axis),
    the max abs deviation between ensemble means and the fraction of
    realization curves inside the reference min/max band, plus facies
    proportion deltas.  Pass requires every deviation at or below its
    kind's threshold.
    """
    realizations = list(realizations)
    if not realizations:
        raise ValueError("no realizations supplied")
    codes = realizations[0].facies_codes

    if config.max_lag is None:
        common = [
            min(min(r.dims.shape[a] for r in realizations), config.patch_size[a])
            for a in range(3)
        ]
        max_lag = tuple(max(1, c // 2) for c in common)
    else:
        max_lag = tuple(int(v) for v in config.max_lag)

    rng = np.random.default_rng(config.seed)
    origins = sample_patch_origins(ti.dims, config.patch_size, config.patch_count, rng)
    patches = [extract_patch(ti, o, config.patch_size) for o in origins]

    real_curves = [
        _curve_set(r, codes, max_lag, config.connectivity_neighbors)
        for r in realizations
    ]
    ref_curves = [
        _curve_set(p, codes, max_lag, config.connectivity_neighbors) for p in patches
    ]

    comparisons = []
    passed = True
    for code in codes:
        for ax in ("x", "y", "z"):
            for kind, threshold in (
                (KIND_VARIOGRAM, config.variogram_threshold),
                (KIND_CONNECTIVITY, config.connectivity_threshold),
            ):
                key = (kind, code, ax)
                real_env = ensemble_envelope([c[key] for c in real_curves])
                ref_env = ensemble_envelope([c[key] for c in ref_curves])
                dev = _deviation(real_env.mean, ref_env.mean)
                contain = _containment([c[key] for c in real_curves], ref_env)
                comparisons.append(
                    CurveComparison(kind, code, ax, dev, contain, real_env, ref_env)
                )
                if not dev <= threshold:  # NaN deviation also fails
                    passed = False

    ti_props = facies_proportions(ti)
    real_props = [facies_proportions(r) for r in realizations]
    prop_delta = {
        code: abs(float(np.mean([p[code] for p in real_props])) - ti_props[code])
        for code in codes
    }
    if config.proportion_threshold is not None:
        if any(d > config.proportion_threshold for d in prop_delta.values()):
            passed = False

    return QaReport(
        tuple(comparisons),
        prop_delta,
        config.variogram_threshold,
        config.connectivity_threshold,
        config.proportion_threshold,
        passed,
    )
