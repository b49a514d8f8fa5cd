"""Generator and critic builders, plus FACGEN export.

The generator is restricted to what the FACGEN format (and hence the
inversion engine) can express: a chain of 3-D transposed convolutions
with leaky-ReLU hidden activations and a tanh output.  Tensors are laid
out (N, C, X, Y, Z); kernel axes follow grid axes (x, y, z).

Per-axis schedule: axes that grow use kernel 4 / stride 2 / padding 1
(doubling per layer), axes already at target size use kernel 1 /
stride 1 / padding 0.  So a patch extent must be latent_extent * 2^n
(n = layer count) or equal to the latent extent.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .facgen import LayerSpec, write_facgen

LEAKY_ALPHA = 0.2


class UnsupportedLayerError(ValueError):
    """A module in the generator graph has no FACGEN encoding."""


def _axis_plan(latent_extent, target_extent, n_layers):
    """Return per-layer (kernel, stride, padding) for one axis."""
    if latent_extent == target_extent:
        return [(1, 1, 0)] * n_layers
    extent = latent_extent
    for _ in range(n_layers):
        extent *= 2
    if extent != target_extent:
        raise ValueError(
            f"axis extent {target_extent} is not latent {latent_extent} * "
            f"2^{n_layers}; adjust patch size, latent shape or layer count"
        )
    return [(4, 2, 1)] * n_layers


def build_generator(latent_shape, patch_size, channels):
    """Sequential ConvTranspose3d stack from latent (lx, ly, lz, C) to a
    single-channel (px, py, pz) volume in [-1, 1].

    `channels` lists the hidden widths; a final 1-channel tanh layer is
    appended automatically.
    """
    lx, ly, lz, c0 = latent_shape
    widths = list(channels) + [1]
    n = len(widths)
    plans = [
        _axis_plan(l, p, n)
        for l, p in zip((lx, ly, lz), tuple(patch_size))
    ]
    layers = []
    cin = c0
    for i, cout in enumerate(widths):
        kernel = tuple(plans[a][i][0] for a in range(3))
        stride = tuple(plans[a][i][1] for a in range(3))
        padding = tuple(plans[a][i][2] for a in range(3))
        layers.append(nn.ConvTranspose3d(cin, cout, kernel, stride, padding))
        layers.append(nn.Tanh() if i == n - 1 else nn.LeakyReLU(LEAKY_ALPHA))
        cin = cout
    return nn.Sequential(*layers)


def build_critic(patch_size, channels):
    """Mirrored strided-convolution critic with 3-cell kernels (1 on flat
    axes), leaky ReLU, and a final linear score."""
    px, py, pz = (int(v) for v in patch_size)
    layers = []
    cin = 1
    extent = [px, py, pz]
    for cout in channels:
        kernel = tuple(3 if e >= 3 else 1 for e in extent)
        stride = tuple(2 if e >= 4 else 1 for e in extent)
        padding = tuple(1 if k == 3 else 0 for k in kernel)
        layers.append(nn.Conv3d(cin, cout, kernel, stride, padding))
        layers.append(nn.LeakyReLU(LEAKY_ALPHA))
        extent = [
            (e + 2 * p - k) // s + 1
            for e, k, s, p in zip(extent, kernel, stride, padding)
        ]
        cin = cout
    layers.append(nn.Flatten())
    layers.append(nn.Linear(cin * extent[0] * extent[1] * extent[2], 1))
    return nn.Sequential(*layers)


def latent_batch(batch_size, latent_shape, generator):
    """Uniform [-1, 1) latent batch as (N, C, lx, ly, lz)."""
    lx, ly, lz, c = latent_shape
    u = torch.rand((batch_size, c, lx, ly, lz), generator=generator)
    return u * 2.0 - 1.0


def generator_forward(model, latent_values):
    """Evaluate one latent given as a (lx, ly, lz, C) array; returns the
    (px, py, pz) volume as float32."""
    x = torch.from_numpy(
        np.ascontiguousarray(np.moveaxis(latent_values, 3, 0), dtype=np.float32)
    ).unsqueeze(0)
    with torch.no_grad():
        out = model(x)
    return out[0, 0].numpy()


def export_weights(model, latent_shape, path):
    """Write a generator as FACGEN; rejects graphs the format cannot carry."""
    specs = []
    pending = None  # ConvTranspose3d waiting for its activation module
    for module in model:
        if isinstance(module, nn.ConvTranspose3d):
            if pending is not None:
                specs.append(_layer_spec(pending, "none"))
            _check_supported(module)
            pending = module
        elif isinstance(module, (nn.LeakyReLU, nn.Tanh)):
            if pending is None:
                raise UnsupportedLayerError(
                    f"activation {type(module).__name__} without a preceding "
                    "ConvTranspose3d"
                )
            if isinstance(module, nn.Tanh):
                specs.append(_layer_spec(pending, "tanh"))
            else:
                specs.append(_layer_spec(pending, "leaky_relu", module.negative_slope))
            pending = None
        else:
            raise UnsupportedLayerError(
                f"layer {type(module).__name__} has no FACGEN encoding"
            )
    if pending is not None:
        specs.append(_layer_spec(pending, "none"))
    write_facgen(path, tuple(int(v) for v in latent_shape), specs)


def _check_supported(module):
    if module.groups != 1:
        raise UnsupportedLayerError("grouped ConvTranspose3d is not expressible")
    if tuple(module.dilation) != (1, 1, 1):
        raise UnsupportedLayerError("dilated ConvTranspose3d is not expressible")
    if tuple(module.output_padding) != (0, 0, 0):
        raise UnsupportedLayerError("output_padding is not expressible")


def _layer_spec(module, activation, alpha=LEAKY_ALPHA):
    weights = module.weight.detach().cpu().numpy().astype(np.float32)
    if module.bias is not None:
        bias = module.bias.detach().cpu().numpy().astype(np.float32)
    else:
        bias = np.zeros(module.out_channels, dtype=np.float32)
    return LayerSpec(
        module.in_channels,
        module.out_channels,
        tuple(module.kernel_size),
        tuple(module.stride),
        tuple(module.padding),
        weights,
        bias,
        activation,
        float(alpha),
    )


def load_into_generator(model, path):
    """Restore exported weights into a structurally matching generator."""
    from .facgen import read_facgen

    _, specs = read_facgen(path)
    convs = [m for m in model if isinstance(m, nn.ConvTranspose3d)]
    if len(convs) != len(specs):
        raise ValueError(f"{path}: layer count mismatch")
    with torch.no_grad():
        for conv, spec in zip(convs, specs):
            conv.weight.copy_(torch.from_numpy(spec.weights.copy()))
            conv.bias.copy_(torch.from_numpy(spec.bias.copy()))
    return model
