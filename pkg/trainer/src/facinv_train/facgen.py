"""FACGEN weight-file writer/reader, trainer side.

This mirrors the inversion engine's wire format so the two packages need
only the file to interoperate (all integers little-endian):

    magic "FACGEN" | version u16 = 1 | input shape 4 x u32 (lx, ly, lz, C)
    | layer count u16 | per layer: in u32, out u32, kernel 3 x u32,
    stride 3 x u32, padding 3 x u32, activation u8 (0 none, 1 leaky_relu,
    2 tanh), alpha f32, weights f32 (in, out, kd, kh, kw) kw-fastest,
    bias f32[out]

The encoding is canonical: alpha is written as 0.2 for non-leaky layers,
so re-serializing a loaded file is byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"FACGEN"
VERSION = 1

ACT_TAGS = {"none": 0, "leaky_relu": 1, "tanh": 2}
TAG_ACTS = {v: k for k, v in ACT_TAGS.items()}
CANONICAL_ALPHA = np.float32(0.2)


@dataclass
class LayerSpec:
    in_channels: int
    out_channels: int
    kernel: tuple
    stride: tuple
    padding: tuple
    weights: np.ndarray  # float32 (in, out, kd, kh, kw)
    bias: np.ndarray     # float32 (out,)
    activation: str = "none"
    alpha: float = 0.2

    def canonical_alpha(self):
        if self.activation == "leaky_relu":
            return np.float32(self.alpha)
        return CANONICAL_ALPHA


def write_facgen(path, input_shape, layers):
    """Serialize a layer chain; byte-deterministic."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<H", VERSION)
    blob += struct.pack("<4I", *input_shape)
    blob += struct.pack("<H", len(layers))
    for layer in layers:
        expected = (layer.in_channels, layer.out_channels) + tuple(layer.kernel)
        weights = np.ascontiguousarray(layer.weights, dtype="<f4")
        if weights.shape != expected:
            raise ValueError(f"weights shape {weights.shape} != {expected}")
        bias = np.ascontiguousarray(layer.bias, dtype="<f4")
        if bias.shape != (layer.out_channels,):
            raise ValueError("bias length mismatch")
        if layer.activation not in ACT_TAGS:
            raise ValueError(f"unknown activation {layer.activation!r}")
        blob += struct.pack("<2I", layer.in_channels, layer.out_channels)
        blob += struct.pack("<3I", *layer.kernel)
        blob += struct.pack("<3I", *layer.stride)
        blob += struct.pack("<3I", *layer.padding)
        blob += struct.pack("<B", ACT_TAGS[layer.activation])
        blob += struct.pack("<f", layer.canonical_alpha())
        blob += weights.tobytes()
        blob += bias.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def read_facgen(path):
    """Parse a FACGEN file into (input_shape, [LayerSpec...])."""
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise ValueError(f"{path}: truncated payload")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    def unpack(fmt):
        return struct.unpack(fmt, take(struct.calcsize(fmt)))

    if take(6) != MAGIC:
        raise ValueError(f"{path}: bad magic")
    (version,) = unpack("<H")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    input_shape = unpack("<4I")
    (count,) = unpack("<H")
    layers = []
    for _ in range(count):
        cin, cout = unpack("<2I")
        kernel = unpack("<3I")
        stride = unpack("<3I")
        padding = unpack("<3I")
        (tag,) = unpack("<B")
        (alpha,) = unpack("<f")
        n_w = cin * cout * kernel[0] * kernel[1] * kernel[2]
        weights = np.frombuffer(take(4 * n_w), dtype="<f4").reshape((cin, cout) + kernel)
        bias = np.frombuffer(take(4 * cout), dtype="<f4").copy()
        layers.append(LayerSpec(cin, cout, kernel, stride, padding,
                                weights.copy(), bias, TAG_ACTS[tag], float(alpha)))
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes")
    return input_shape, layers
