"""Dense 3-D grid types and file IO.

All grids are regular, dense, and stored x-fastest: the flat cell index of
cell (i, j, k) is ``i + nx * (j + ny * k)``.  In memory, values live in a
numpy array of shape (nx, ny, nz) indexed ``values[i, j, k]``; flattening
with ``order="F"`` therefore reproduces the file ordering.

Supported file formats (all headerless except GSLIB; dims always travel
out of band, e.g. on the command line):

* ``raw_u8``      one byte per cell, facies codes.
* ``raw_f32``     IEEE-754 little-endian float32, one per cell.
* ``gslib_ascii`` title line, a line containing ``1``, a variable-name
  line, then one value per line.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

MUD = 0
CHANNEL = 1

GSLIB_ASCII = "gslib_ascii"
RAW_F32 = "raw_f32"
RAW_U8 = "raw_u8"
GRID_FORMATS = (GSLIB_ASCII, RAW_F32, RAW_U8)

AXES = ("x", "y", "z")


def axis_index(axis):
    """Map an axis name ('x'|'y'|'z') or index to the array axis 0|1|2."""
    if axis in (0, 1, 2):
        return int(axis)
    try:
        return AXES.index(axis)
    except ValueError:
        raise ValueError(f"unknown axis {axis!r}, expected one of {AXES}") from None


@dataclass(frozen=True)
class GridDims:
    """Cell counts and cell sizes (meters) of a regular grid."""

    nx: int
    ny: int
    nz: int
    cell_size_x: float = 1.0
    cell_size_y: float = 1.0
    cell_size_z: float = 1.0

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError(f"cell counts must be >= 1, got {self.shape}")
        if min(self.cell_size_x, self.cell_size_y, self.cell_size_z) <= 0:
            raise ValueError("cell sizes must be > 0")

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def n_cells(self):
        return self.nx * self.ny * self.nz


def _freeze(values):
    values = values.copy()
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class FaciesGrid:
    """Dense categorical grid; every cell holds one of `facies_codes`."""

    dims: GridDims
    values: np.ndarray
    facies_codes: tuple = (MUD, CHANNEL)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.uint8)
        if values.shape != self.dims.shape:
            raise ValueError(
                f"values shape {values.shape} does not match dims {self.dims.shape}"
            )
        codes = np.asarray(self.facies_codes, dtype=np.uint8)
        if not np.isin(values, codes).all():
            bad = sorted(set(np.unique(values)) - set(codes.tolist()))
            raise ValueError(f"unknown facies code(s) {bad}, expected {self.facies_codes}")
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "facies_codes", tuple(int(c) for c in self.facies_codes))

    @classmethod
    def from_flat(cls, dims, flat, facies_codes=(MUD, CHANNEL)):
        """Build from a flat x-fastest sequence of codes."""
        flat = np.asarray(flat, dtype=np.uint8)
        if flat.size != dims.n_cells:
            raise ValueError(f"expected {dims.n_cells} cells, got {flat.size}")
        return cls(dims, flat.reshape(dims.shape, order="F"), facies_codes)


@dataclass(frozen=True)
class RealGrid:
    """Dense real-valued grid; all cells finite."""

    dims: GridDims
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.dims.shape:
            raise ValueError(
                f"values shape {values.shape} does not match dims {self.dims.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("real grid contains non-finite values")
        object.__setattr__(self, "values", _freeze(values))

    @classmethod
    def from_flat(cls, dims, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != dims.n_cells:
            raise ValueError(f"expected {dims.n_cells} cells, got {flat.size}")
        return cls(dims, flat.reshape(dims.shape, order="F"))


@dataclass(frozen=True)
class Well:
    """One vertical well: a column position and sparse facies observations."""

    name: str
    i: int
    j: int
    observations: tuple = ()  # (k, facies_code) pairs

    def __post_init__(self):
        obs = tuple((int(k), int(f)) for k, f in self.observations)
        ks = [k for k, _ in obs]
        if len(ks) != len(set(ks)):
            raise ValueError(f"well {self.name!r} has duplicate depth observations")
        object.__setattr__(self, "observations", obs)


@dataclass(frozen=True)
class WellSet:
    """A collection of wells with facies observations."""

    wells: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "wells", tuple(self.wells))

    @property
    def n_observations(self):
        return sum(len(w.observations) for w in self.wells)

    def observation_arrays(self):
        """All observations as parallel index arrays (i, j, k, facies)."""
        ii, jj, kk, ff = [], [], [], []
        for w in self.wells:
            for k, f in w.observations:
                ii.append(w.i)
                jj.append(w.j)
                kk.append(k)
                ff.append(f)
        return (
            np.asarray(ii, dtype=np.intp),
            np.asarray(jj, dtype=np.intp),
            np.asarray(kk, dtype=np.intp),
            np.asarray(ff, dtype=np.uint8),
        )

    def validate_against(self, dims):
        i, j, k, _ = self.observation_arrays()
        if i.size == 0:
            return
        if (
            i.min() < 0 or i.max() >= dims.nx
            or j.min() < 0 or j.max() >= dims.ny
            or k.min() < 0 or k.max() >= dims.nz
        ):
            raise ValueError(f"well observation outside grid {dims.shape}")


def load_wells(path):
    """Read a wells text file: one `name i j k facies` record per line."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"wells file not found: {path}")
    records = {}
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 'name i j k facies'")
            name, i, j, k, f = parts
            key = (name, int(i), int(j))
            if key not in records:
                records[key] = []
                order.append(key)
            records[key].append((int(k), int(f)))
    wells = [Well(name, i, j, tuple(obs)) for (name, i, j), obs in
             ((key, records[key]) for key in order)]
    return WellSet(tuple(wells))


def save_wells(wells, path):
    lines = []
    for w in wells.wells:
        for k, f in w.observations:
            lines.append(f"{w.name} {w.i} {w.j} {k} {f}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


# ---------------------------------------------------------------------------
# File IO

def _gslib_lines(flat, categorical):
    if categorical:
        return [str(int(v)) for v in flat]
    return [format(float(v), ".17g") for v in flat]


def save_grid(grid, path, fmt):
    """Write a grid to `path`. Byte-deterministic for a given grid and format."""
    if fmt not in GRID_FORMATS:
        raise ValueError(f"unknown grid format {fmt!r}, expected one of {GRID_FORMATS}")
    categorical = isinstance(grid, FaciesGrid)
    flat = grid.values.ravel(order="F")
    if fmt == RAW_U8:
        if not categorical:
            raise ValueError("raw_u8 stores facies codes; cannot save a real grid")
        payload = flat.astype(np.uint8).tobytes()
        with open(path, "wb") as fh:
            fh.write(payload)
    elif fmt == RAW_F32:
        payload = flat.astype("<f4").tobytes()
        with open(path, "wb") as fh:
            fh.write(payload)
    else:
        name = "facies" if categorical else "value"
        lines = ["facinv grid", "1", name]
        lines.extend(_gslib_lines(flat, categorical))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def load_grid(path, fmt, dims, kind=None, facies_codes=(MUD, CHANNEL)):
    """Read a grid from `path`.

    `kind` selects the grid type for formats that could carry either:
    'facies' or 'real'.  Defaults: raw_u8 -> facies, raw_f32 -> real,
    gslib_ascii -> real unless kind='facies' is given.
    """
    if fmt not in GRID_FORMATS:
        raise ValueError(f"unknown grid format {fmt!r}, expected one of {GRID_FORMATS}")
    if not os.path.exists(path):
        raise FileNotFoundError(f"grid file not found: {path}")
    if kind is None:
        kind = "facies" if fmt == RAW_U8 else "real"
    if kind not in ("facies", "real"):
        raise ValueError(f"kind must be 'facies' or 'real', got {kind!r}")

    n = dims.n_cells
    if fmt == RAW_U8:
        data = np.fromfile(path, dtype=np.uint8)
        if data.size != n:
            raise ValueError(
                f"{path}: payload has {data.size} cells, dims {dims.shape} require {n}"
            )
    elif fmt == RAW_F32:
        raw = np.fromfile(path, dtype="<f4")
        if raw.size != n:
            raise ValueError(
                f"{path}: payload has {raw.size} cells, dims {dims.shape} require {n}"
            )
        data = raw.astype(np.float64)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
        lines = [ln for ln in lines if ln]
        if len(lines) < 3:
            raise ValueError(f"{path}: truncated GSLIB header")
        body = lines[3:]
        if len(body) != n:
            raise ValueError(
                f"{path}: payload has {len(body)} cells, dims {dims.shape} require {n}"
            )
        data = np.array([float(v) for v in body], dtype=np.float64)

    if kind == "facies":
        if fmt != RAW_U8:
            rounded = np.rint(data)
            if not np.array_equal(rounded, data):
                raise ValueError(f"{path}: non-integer value in categorical load")
            data = rounded
        return FaciesGrid.from_flat(dims, data.astype(np.uint8), facies_codes)
    if fmt == RAW_U8:
        data = data.astype(np.float64)
    return RealGrid.from_flat(dims, data)


# ---------------------------------------------------------------------------
# Queries

def facies_proportions(grid):
    """Fraction of cells per declared facies code; fractions sum to 1."""
    total = grid.dims.n_cells
    if total == 0:
        raise ValueError("empty grid")
    counts = np.bincount(grid.values.ravel(), minlength=max(grid.facies_codes) + 1)
    return {code: float(counts[code]) / total for code in grid.facies_codes}


def extract_patch(grid, origin, size):
    """Copy the sub-grid of extent `size` anchored at cell `origin`.

    Cell (a, b, c) of the patch equals source cell (i+a, j+b, k+c).
    """
    i, j, k = (int(v) for v in origin)
    px, py, pz = (int(v) for v in size)
    nx, ny, nz = grid.dims.shape
    if min(i, j, k) < 0 or min(px, py, pz) < 1:
        raise ValueError(f"invalid patch request origin={origin} size={size}")
    if i + px > nx or j + py > ny or k + pz > nz:
        raise ValueError(
            f"patch origin={origin} size={size} exceeds grid extent {grid.dims.shape}"
        )
    sub = grid.values[i:i + px, j:j + py, k:k + pz]
    dims = GridDims(px, py, pz, grid.dims.cell_size_x, grid.dims.cell_size_y,
                    grid.dims.cell_size_z)
    if isinstance(grid, FaciesGrid):
        return FaciesGrid(dims, sub, grid.facies_codes)
    return type(grid)(dims, sub)
