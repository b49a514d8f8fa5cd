"""Post-stack seismic forward modeling.

Facies grid -> elastic properties -> normal-incidence reflectivity ->
per-trace convolution with a Ricker wavelet.  The vertical grid axis (z)
is the trace axis; depth-to-time uses a constant sample interval per cell
(default 1 ms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .grid import CHANNEL, MUD, RealGrid

DEFAULT_DT = 1.0e-3  # seconds per vertical cell

# Per-facies elastic ranges: velocity m/s, density g/cm^3.
CHANNEL_VELOCITY = (4800.0, 5000.0)
CHANNEL_DENSITY = (2.6, 2.8)
MUD_VELOCITY = (4000.0, 4300.0)
MUD_DENSITY = (1.9, 2.4)

MODE_MIDPOINT = "midpoint"
MODE_UNIFORM = "uniform_sample"
ASSIGNMENT_MODES = (MODE_MIDPOINT, MODE_UNIFORM)


@dataclass(frozen=True)
class FaciesProperties:
    """Elastic ranges for one facies."""

    velocity: tuple  # (min, max) m/s
    density: tuple   # (min, max) g/cm^3

    def __post_init__(self):
        for name, (lo, hi) in (("velocity", self.velocity), ("density", self.density)):
            if not 0 < lo <= hi:
                raise ValueError(f"{name} range must satisfy 0 < min <= max, got {(lo, hi)}")
        object.__setattr__(self, "velocity", (float(self.velocity[0]), float(self.velocity[1])))
        object.__setattr__(self, "density", (float(self.density[0]), float(self.density[1])))


@dataclass(frozen=True)
class FaciesPropertyTable:
    """Per-facies elastic ranges plus the value-assignment mode."""

    entries: dict  # facies code -> FaciesProperties
    mode: str = MODE_MIDPOINT

    def __post_init__(self):
        if self.mode not in ASSIGNMENT_MODES:
            raise ValueError(f"mode must be one of {ASSIGNMENT_MODES}, got {self.mode!r}")
        object.__setattr__(self, "entries", dict(self.entries))


def default_property_table(mode=MODE_MIDPOINT):
    """Channel/mud elastic ranges used throughout: channel 4800-5000 m/s,
    2.6-2.8 g/cm3; mud 4000-4300 m/s, 1.9-2.4 g/cm3."""
    return FaciesPropertyTable(
        {
            CHANNEL: FaciesProperties(CHANNEL_VELOCITY, CHANNEL_DENSITY),
            MUD: FaciesProperties(MUD_VELOCITY, MUD_DENSITY),
        },
        mode,
    )


@dataclass(frozen=True)
class ElasticModel:
    """Velocity and density grids; impedance is their cell-wise product."""

    velocity: RealGrid
    density: RealGrid

    def __post_init__(self):
        if self.velocity.dims.shape != self.density.dims.shape:
            raise ValueError("velocity and density grids must share dims")
        if self.velocity.values.min() <= 0 or self.density.values.min() <= 0:
            raise ValueError("velocity and density must be strictly positive")

    @property
    def impedance(self):
        return RealGrid(self.velocity.dims, self.velocity.values * self.density.values)


class SeismicCube(RealGrid):
    """Real-valued amplitude cube; the vertical axis is the trace axis."""


def facies_to_elastic(grid, table, seed=None):
    """Assign elastic properties per cell from the facies property table.

    Midpoint mode is deterministic; uniform_sample draws each cell's
    velocity and density uniformly within its facies range using `seed`.
    """
    missing = [c for c in np.unique(grid.values) if int(c) not in table.entries]
    if missing:
        raise ValueError(f"no property table entry for facies {sorted(int(c) for c in missing)}")

    vel = np.empty(grid.dims.shape)
    den = np.empty(grid.dims.shape)
    if table.mode == MODE_MIDPOINT:
        for code, props in table.entries.items():
            mask = grid.values == code
            vel[mask] = 0.5 * (props.velocity[0] + props.velocity[1])
            den[mask] = 0.5 * (props.density[0] + props.density[1])
    else:
        rng = np.random.default_rng(seed)
        vel_draw = rng.random(grid.dims.shape)
        den_draw = rng.random(grid.dims.shape)
        for code, props in table.entries.items():
            mask = grid.values == code
            v0, v1 = props.velocity
            d0, d1 = props.density
            vel[mask] = v0 + (v1 - v0) * vel_draw[mask]
            den[mask] = d0 + (d1 - d0) * den_draw[mask]
    dims = grid.dims
    return ElasticModel(RealGrid(dims, vel), RealGrid(dims, den))


@dataclass(frozen=True)
class Wavelet:
    """Odd-length pulse sampled at t = n * dt, centered at t = 0."""

    frequency: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size % 2 != 1:
            raise ValueError("wavelet must be a 1-D odd-length sequence")
        center = samples.size // 2
        if samples[center] < samples.max():
            raise ValueError("wavelet peak must sit at the center sample")
        if np.abs(samples - samples[::-1]).max() > 1e-12:
            raise ValueError("wavelet must be symmetric within 1e-12")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def half_length(self):
        return self.samples.size // 2

    @property
    def times(self):
        h = self.half_length
        return np.arange(-h, h + 1) * self.dt


def ricker(frequency, dt=DEFAULT_DT, half_length=None):
    """Ricker wavelet w(t) = (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2).

    Sampled at t = n * dt for n in [-half_length, half_length]; the default
    half_length, ceil(3 / (f * dt)), captures the pulse to well below 1e-3
    of peak amplitude.
    """
    if frequency <= 0 or dt <= 0:
        raise ValueError("frequency and dt must be positive")
    if half_length is None:
        half_length = math.ceil(3.0 / (frequency * dt))
    half_length = int(half_length)
    if half_length < 1:
        raise ValueError("half_length must be >= 1")
    t = np.arange(-half_length, half_length + 1) * dt
    a = (np.pi * frequency * t) ** 2
    samples = (1.0 - 2.0 * a) * np.exp(-a)
    return Wavelet(float(frequency), float(dt), samples)


def save_wavelet_csv(wavelet, path):
    """Two-column CSV (t, w), one row per sample."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,w\n")
        for t, w in zip(wavelet.times, wavelet.samples):
            fh.write(f"{t:.9g},{format(w, '.17g')}\n")


def reflectivity(elastic):
    """Normal-incidence reflectivity along each vertical trace.

    r_k = (Z_{k+1} - Z_k) / (Z_{k+1} + Z_k) for k < nz - 1; the bottom
    sample is 0.
    """
    z = elastic.impedance.values
    r = np.zeros_like(z)
    r[:, :, :-1] = (z[:, :, 1:] - z[:, :, :-1]) / (z[:, :, 1:] + z[:, :, :-1])
    return RealGrid(elastic.velocity.dims, r)


def synthesize(refl, wavelet):
    """Convolve every trace with the wavelet ('same' alignment, zero-padded).

    Output dims equal input dims, so observed and synthetic cubes are
    directly comparable.
    """
    nz = refl.dims.nz
    if wavelet.samples.size > 2 * nz + 1:
        raise ValueError(
            f"wavelet length {wavelet.samples.size} exceeds limit {2 * nz + 1} "
            f"for nz={nz}"
        )
    amps = convolve1d(refl.values, wavelet.samples, axis=2, mode="constant", cval=0.0)
    return SeismicCube(refl.dims, amps)


def forward_model(facies, table, wavelet, seed=None):
    """facies -> elastic -> reflectivity -> synthetic cube, in one call."""
    elastic = facies_to_elastic(facies, table, seed)
    return synthesize(reflectivity(elastic), wavelet)
