"""Generator network runtime: latent vectors in, 3-D facies models out.

A generator is an ordered chain of transposed 3-D convolutions with
per-layer activations; evaluation is plain CPU arithmetic (float64
accumulation over float32 weights) and is bit-deterministic.

Weight interchange uses the FACGEN binary format (all integers
little-endian):

    magic          6 bytes  b"FACGEN"
    version        u16      1
    input shape    4 x u32  lx, ly, lz, channels
    layer count    u16
    per layer:
        in_channels   u32
        out_channels  u32
        kernel        3 x u32   (kd, kh, kw)
        stride        3 x u32
        padding       3 x u32
        activation    u8        0 none, 1 leaky_relu, 2 tanh
        alpha         f32       (meaningful only for leaky_relu)
        weights       f32 * in*out*kd*kh*kw, (in, out, kd, kh, kw) nested,
                      kw fastest
        bias          f32 * out

Kernel axes (kd, kh, kw) correspond to grid axes (x, y, z) in order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid import CHANNEL, MUD, FaciesGrid, GridDims, RealGrid

FACGEN_MAGIC = b"FACGEN"
FACGEN_VERSION = 1

ACT_NONE = "none"
ACT_LEAKY_RELU = "leaky_relu"
ACT_TANH = "tanh"
ACTIVATIONS = (ACT_NONE, ACT_LEAKY_RELU, ACT_TANH)
_ACT_TAGS = {ACT_NONE: 0, ACT_LEAKY_RELU: 1, ACT_TANH: 2}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}

DEFAULT_LEAKY_ALPHA = 0.2
DEFAULT_LATENT_SHAPE = (3, 3, 3, 1)


class FacgenFormatError(ValueError):
    """Raised when a FACGEN weight file violates the format contract."""


def leaky_relu(x, alpha=DEFAULT_LEAKY_ALPHA):
    """x for x >= 0, alpha * x otherwise. Accepts scalars or arrays."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if np.isscalar(x):
        return float(x) if x >= 0 else alpha * float(x)
    x = np.asarray(x)
    return np.where(x >= 0, x, alpha * x)


def transposed_output_size(in_size, stride, padding, kernel):
    """Spatial output extent of a transposed convolution along one axis."""
    return (in_size - 1) * stride - 2 * padding + kernel


@dataclass(frozen=True)
class LatentVector:
    """Generator input: values in [-1, 1], shape (lx, ly, lz, channels)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 4:
            raise ValueError(f"latent must be 4-D (lx, ly, lz, channels), got {values.shape}")
        if not np.isfinite(values).all() or np.abs(values).max(initial=0.0) > 1.0:
            raise ValueError("latent entries must lie in [-1, 1]")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def random_latent(shape, rng):
    """Draw a latent uniformly from [-1, 1)^shape."""
    return LatentVector(rng.uniform(-1.0, 1.0, size=tuple(shape)))


@dataclass(frozen=True)
class TransposedConvLayer:
    in_channels: int
    out_channels: int
    kernel: tuple
    stride: tuple
    padding: tuple
    weights: np.ndarray  # (in, out, kd, kh, kw) float32
    bias: np.ndarray     # (out,) float32
    activation: str = ACT_NONE
    alpha: float = DEFAULT_LEAKY_ALPHA

    def __post_init__(self):
        kernel = tuple(int(k) for k in self.kernel)
        stride = tuple(int(s) for s in self.stride)
        padding = tuple(int(p) for p in self.padding)
        if len(kernel) != 3 or len(stride) != 3 or len(padding) != 3:
            raise ValueError("kernel, stride and padding must have three entries")
        if min(kernel) < 1 or min(stride) < 1 or min(padding) < 0:
            raise ValueError("kernel/stride must be positive, padding non-negative")
        expected = (self.in_channels, self.out_channels) + kernel
        weights = np.asarray(self.weights, dtype=np.float32)
        if weights.shape != expected:
            raise ValueError(f"weight shape {weights.shape} != expected {expected}")
        bias = np.asarray(self.bias, dtype=np.float32)
        if bias.shape != (self.out_channels,):
            raise ValueError(f"bias length {bias.shape} != out_channels {self.out_channels}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        # Alpha is stored as f32 and only meaningful for leaky_relu; pin it to
        # f32 resolution (and to the default elsewhere) so save/load is the identity.
        if self.activation == ACT_LEAKY_RELU:
            if not 0.0 < self.alpha < 1.0:
                raise ValueError(f"leaky_relu alpha must lie in (0, 1), got {self.alpha}")
            alpha = float(np.float32(self.alpha))
        else:
            alpha = float(np.float32(DEFAULT_LEAKY_ALPHA))
        object.__setattr__(self, "alpha", alpha)
        weights = weights.copy()
        weights.flags.writeable = False
        bias = bias.copy()
        bias.flags.writeable = False
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "stride", stride)
        object.__setattr__(self, "padding", padding)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    def output_shape(self, in_shape):
        out = tuple(
            transposed_output_size(n, s, p, k)
            for n, s, p, k in zip(in_shape, self.stride, self.padding, self.kernel)
        )
        if min(out) < 1:
            raise ValueError(
                f"non-positive output size {out} for input {tuple(in_shape)}"
            )
        return out


@dataclass(frozen=True)
class GeneratorNetwork:
    input_shape: tuple  # (lx, ly, lz, channels)
    layers: tuple
    output_threshold: float = 0.0

    def __post_init__(self):
        input_shape = tuple(int(v) for v in self.input_shape)
        if len(input_shape) != 4 or min(input_shape) < 1:
            raise ValueError(f"input shape must be 4 positive ints, got {input_shape}")
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        channels = input_shape[3]
        for idx, layer in enumerate(layers):
            if layer.in_channels != channels:
                raise ValueError(
                    f"layer {idx}: in_channels {layer.in_channels} != "
                    f"predecessor out_channels {channels}"
                )
            channels = layer.out_channels
        if channels != 1:
            raise ValueError(f"final layer must have out_channels 1, got {channels}")
        object.__setattr__(self, "input_shape", input_shape)
        object.__setattr__(self, "layers", layers)

    def output_shape(self):
        """Spatial shape (nx, ny, nz) implied by the layer chain."""
        shape = self.input_shape[:3]
        for layer in self.layers:
            shape = layer.output_shape(shape)
        return shape


def conv_transpose3d(x, layer):
    """Apply one transposed convolution layer to a channel stack.

    `x` has shape (in_channels, d0, d1, d2); the result has shape
    (out_channels, o0, o1, o2) with o = (d - 1) * stride - 2 * padding
    + kernel per axis.  Each output cell is the scatter-add of
    input * weight contributions, plus bias, then the layer activation.
    """
    x = np.asarray(x, dtype=np.float64)
    cin, d0, d1, d2 = x.shape
    if cin != layer.in_channels:
        raise ValueError(f"input has {cin} channels, layer expects {layer.in_channels}")
    k0, k1, k2 = layer.kernel
    s0, s1, s2 = layer.stride
    p0, p1, p2 = layer.padding
    f0 = (d0 - 1) * s0 + k0
    f1 = (d1 - 1) * s1 + k1
    f2 = (d2 - 1) * s2 + k2
    out_shape = layer.output_shape((d0, d1, d2))

    w = layer.weights.astype(np.float64)
    full = np.zeros((layer.out_channels, f0, f1, f2))
    e0 = (d0 - 1) * s0 + 1
    e1 = (d1 - 1) * s1 + 1
    e2 = (d2 - 1) * s2 + 1
    for a in range(k0):
        for b in range(k1):
            for c in range(k2):
                contrib = np.tensordot(w[:, :, a, b, c], x, axes=(0, 0))
                full[:, a:a + e0:s0, b:b + e1:s1, c:c + e2:s2] += contrib

    out = full[:, p0:f0 - p0, p1:f1 - p1, p2:f2 - p2]
    out = out + layer.bias.astype(np.float64)[:, None, None, None]
    assert out.shape[1:] == out_shape
    if layer.activation == ACT_LEAKY_RELU:
        out = np.where(out >= 0, out, layer.alpha * out)
    elif layer.activation == ACT_TANH:
        out = np.tanh(out)
    return out


def generate(network, latent):
    """Evaluate the network on a latent vector; returns the continuous grid.

    Deterministic: identical latents give bit-identical outputs.
    """
    if tuple(latent.shape) != network.input_shape:
        raise ValueError(
            f"latent shape {tuple(latent.shape)} != network input {network.input_shape}"
        )
    # (lx, ly, lz, channels) -> (channels, x, y, z)
    x = np.ascontiguousarray(np.moveaxis(latent.values, 3, 0))
    for layer in network.layers:
        x = conv_transpose3d(x, layer)
    values = x[0]
    return RealGrid(GridDims(*values.shape), values)


def binarize(grid, threshold=0.0):
    """Continuous grid -> facies grid: cell > threshold is channel, else mud."""
    values = np.where(grid.values > threshold, CHANNEL, MUD).astype(np.uint8)
    return FaciesGrid(grid.dims, values, (MUD, CHANNEL))


# ---------------------------------------------------------------------------
# FACGEN serialization

def save_generator(network, path):
    """Write a network in FACGEN format; load(save(n)) is bit-exact."""
    blob = bytearray()
    blob += FACGEN_MAGIC
    blob += struct.pack("<H", FACGEN_VERSION)
    blob += struct.pack("<4I", *network.input_shape)
    blob += struct.pack("<H", len(network.layers))
    for layer in network.layers:
        blob += struct.pack("<2I", layer.in_channels, layer.out_channels)
        blob += struct.pack("<3I", *layer.kernel)
        blob += struct.pack("<3I", *layer.stride)
        blob += struct.pack("<3I", *layer.padding)
        blob += struct.pack("<B", _ACT_TAGS[layer.activation])
        blob += struct.pack("<f", layer.alpha)
        blob += layer.weights.astype("<f4").tobytes()
        blob += layer.bias.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.path = path
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FacgenFormatError(f"{self.path}: truncated payload")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_generator(path):
    """Read a FACGEN weight file into a validated GeneratorNetwork."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data, path)
    if r.take(6) != FACGEN_MAGIC:
        raise FacgenFormatError(f"{path}: bad magic, not a FACGEN file")
    (version,) = r.unpack("<H")
    if version != FACGEN_VERSION:
        raise FacgenFormatError(f"{path}: unsupported version {version}")
    input_shape = r.unpack("<4I")
    (n_layers,) = r.unpack("<H")
    layers = []
    for idx in range(n_layers):
        cin, cout = r.unpack("<2I")
        kernel = r.unpack("<3I")
        stride = r.unpack("<3I")
        padding = r.unpack("<3I")
        (tag,) = r.unpack("<B")
        (alpha,) = r.unpack("<f")
        if tag not in _TAG_ACTS:
            raise FacgenFormatError(f"{path}: layer {idx}: unknown activation tag {tag}")
        n_w = cin * cout * kernel[0] * kernel[1] * kernel[2]
        weights = np.frombuffer(r.take(4 * n_w), dtype="<f4").reshape(
            (cin, cout) + kernel
        )
        bias = np.frombuffer(r.take(4 * cout), dtype="<f4")
        activation = _TAG_ACTS[tag]
        try:
            layers.append(
                TransposedConvLayer(
                    cin, cout, kernel, stride, padding, weights, bias,
                    activation, float(alpha),
                )
            )
        except ValueError as exc:
            raise FacgenFormatError(f"{path}: layer {idx}: {exc}") from exc
    if r.pos != len(data):
        raise FacgenFormatError(f"{path}: {len(data) - r.pos} trailing bytes")
    try:
        return GeneratorNetwork(input_shape, tuple(layers))
    except ValueError as exc:
        raise FacgenFormatError(f"{path}: {exc}") from exc
