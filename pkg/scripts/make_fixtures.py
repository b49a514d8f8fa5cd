#!/usr/bin/env python3
"""Build the committed fixtures under data/.

Everything here is deterministic (fixed seeds), so re-running the script
reproduces the files byte for byte:

* fixture_gen_32x32x16.facgen  4-layer toy generator, latent (2, 2, 1, 4),
  output 32 x 32 x 16
* fixture_latent.npy           one latent draw for the golden comparison
* fixture_golden.npy           generator output for that latent, computed
  by the plain triple-loop scatter-add below (independent of the library's
  vectorized evaluation path)
* training_image.u8            synthetic 120 x 150 x 180 channel/mud model
  with channel fraction 0.510; channels run along y with a flat-top,
  convex-base cross-section
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from facinv.generator import (  # noqa: E402
    GeneratorNetwork,
    TransposedConvLayer,
    save_generator,
)
from facinv.grid import FaciesGrid, GridDims, save_grid  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")

FIXTURE_LATENT_SHAPE = (2, 2, 1, 4)
FIXTURE_CHANNELS = (4, 8, 8, 4, 1)
FIXTURE_WEIGHT_SEED = 20240601
FIXTURE_LATENT_SEED = 7


def build_fixture_network():
    rng = np.random.default_rng(FIXTURE_WEIGHT_SEED)
    layers = []
    n = len(FIXTURE_CHANNELS) - 1
    for idx, (cin, cout) in enumerate(zip(FIXTURE_CHANNELS[:-1], FIXTURE_CHANNELS[1:])):
        fan_in = cin * 4 * 4 * 4
        scale = 3.2 / np.sqrt(fan_in)
        weights = rng.normal(0.0, scale, size=(cin, cout, 4, 4, 4)).astype(np.float32)
        bias = np.zeros(cout, dtype=np.float32)
        activation = "tanh" if idx == n - 1 else "leaky_relu"
        layers.append(
            TransposedConvLayer(cin, cout, (4, 4, 4), (2, 2, 2), (1, 1, 1),
                                weights, bias, activation, 0.2)
        )
    return GeneratorNetwork(FIXTURE_LATENT_SHAPE, tuple(layers))


def scatter_add_reference(latent_values, network):
    """Straightforward transposed-convolution evaluation: loop over every
    input cell and kernel tap, accumulate into the padded output."""
    x = np.moveaxis(latent_values.astype(np.float64), 3, 0)
    for layer in network.layers:
        cin, d0, d1, d2 = x.shape
        k0, k1, k2 = layer.kernel
        s0, s1, s2 = layer.stride
        p0, p1, p2 = layer.padding
        o0 = (d0 - 1) * s0 - 2 * p0 + k0
        o1 = (d1 - 1) * s1 - 2 * p1 + k1
        o2 = (d2 - 1) * s2 - 2 * p2 + k2
        w = layer.weights.astype(np.float64)
        out = np.zeros((layer.out_channels, o0, o1, o2))
        for ci in range(cin):
            for i in range(d0):
                for j in range(d1):
                    for k in range(d2):
                        v = x[ci, i, j, k]
                        for a in range(k0):
                            oi = i * s0 + a - p0
                            if not 0 <= oi < o0:
                                continue
                            for b in range(k1):
                                oj = j * s1 + b - p1
                                if not 0 <= oj < o1:
                                    continue
                                for c in range(k2):
                                    ok = k * s2 + c - p2
                                    if not 0 <= ok < o2:
                                        continue
                                    out[:, oi, oj, ok] += v * w[ci, :, a, b, c]
        out += layer.bias.astype(np.float64)[:, None, None, None]
        if layer.activation == "leaky_relu":
            out = np.where(out >= 0, out, layer.alpha * out)
        elif layer.activation == "tanh":
            out = np.tanh(out)
        x = out
    return x[0]


def build_training_image(target=0.510, tol=0.0005, seed=31415):
    """Synthetic channel/mud model: sinuous ribbons along y, flat top and
    convex base in the (x, z) section, stacked unevenly in z."""
    nx, ny, nz = 120, 150, 180
    rng = np.random.default_rng(seed)
    xs = np.arange(nx)[:, None, None]
    ys = np.arange(ny)[None, :, None]
    zs = np.arange(nz)[None, None, :]
    channel = np.zeros((nx, ny, nz), dtype=bool)

    def add_channel(width, thickness):
        cx = rng.uniform(-5, nx + 5)
        cz = rng.uniform(-2, nz - thickness * 0.5)
        amp = rng.uniform(0, 8)
        wavelength = rng.uniform(60, 220)
        phase = rng.uniform(0, 2 * np.pi)
        cx_y = cx + amp * np.sin(2 * np.pi * ys / wavelength + phase)
        dx = (xs - cx_y) / width
        inside = np.abs(dx) <= 1.0
        depth = thickness * np.sqrt(np.clip(1.0 - dx * dx, 0.0, None))
        channel_mask = inside & (zs >= cz) & (zs <= cz + depth)
        channel[channel_mask] = True

    total = channel.size
    while channel.sum() / total < target - 0.02:
        add_channel(rng.uniform(8, 16), rng.uniform(5, 11))
    while channel.sum() / total < target - tol:
        add_channel(rng.uniform(2.5, 4.0), rng.uniform(2.0, 3.5))
    prop = channel.sum() / total
    if abs(prop - target) > 5 * tol:
        raise RuntimeError(f"training image proportion {prop:.4f} missed {target}")
    return FaciesGrid(GridDims(nx, ny, nz, 50.0, 50.0, 1.0),
                      channel.astype(np.uint8)), prop


def main():
    os.makedirs(DATA_DIR, exist_ok=True)

    network = build_fixture_network()
    save_generator(network, os.path.join(DATA_DIR, "fixture_gen_32x32x16.facgen"))
    print("fixture network:", network.input_shape, "->", network.output_shape())

    rng = np.random.default_rng(FIXTURE_LATENT_SEED)
    latent = rng.uniform(-1.0, 1.0, size=FIXTURE_LATENT_SHAPE)
    np.save(os.path.join(DATA_DIR, "fixture_latent.npy"), latent)

    golden = scatter_add_reference(latent, network)
    np.save(os.path.join(DATA_DIR, "fixture_golden.npy"), golden)
    frac = (golden > 0).mean()
    print(f"golden output: shape {golden.shape}, channel fraction {frac:.3f}, "
          f"range [{golden.min():.3f}, {golden.max():.3f}]")

    ti, prop = build_training_image()
    save_grid(ti, os.path.join(DATA_DIR, "training_image.u8"), "raw_u8")
    print(f"training image: {ti.dims.shape}, channel proportion {prop:.4f}")


if __name__ == "__main__":
    main()
