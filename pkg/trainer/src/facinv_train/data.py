"""Training-image loading and patch sampling."""

from __future__ import annotations

import os

import numpy as np
import torch


def load_training_image(path, dims, fmt="raw_u8"):
    """Read a categorical grid (x-fastest flat order) as a (nx, ny, nz)
    uint8 array."""
    nx, ny, nz = (int(v) for v in dims)
    if not os.path.exists(path):
        raise FileNotFoundError(f"training image not found: {path}")
    if fmt == "raw_u8":
        flat = np.fromfile(path, dtype=np.uint8)
    elif fmt == "gslib_ascii":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        flat = np.array([int(float(v)) for v in lines[3:]], dtype=np.uint8)
    else:
        raise ValueError(f"unsupported training-image format {fmt!r}")
    if flat.size != nx * ny * nz:
        raise ValueError(
            f"{path}: payload has {flat.size} cells, dims imply {nx * ny * nz}"
        )
    return flat.reshape((nx, ny, nz), order="F")


def sample_batch(ti, patch_size, batch_size, rng):
    """Draw `batch_size` patches at independent uniform origins.

    Returns a float32 tensor (B, 1, px, py, pz) with mud mapped to -1 and
    channel to +1, matching the generator's tanh output range.
    """
    px, py, pz = (int(v) for v in patch_size)
    nx, ny, nz = ti.shape
    if px > nx or py > ny or pz > nz:
        raise ValueError(f"patch {patch_size} larger than training image {ti.shape}")
    batch = np.empty((batch_size, 1, px, py, pz), dtype=np.float32)
    for n in range(batch_size):
        i = int(rng.integers(0, nx - px + 1))
        j = int(rng.integers(0, ny - py + 1))
        k = int(rng.integers(0, nz - pz + 1))
        patch = ti[i:i + px, j:j + py, k:k + pz]
        batch[n, 0] = patch.astype(np.float32) * 2.0 - 1.0
    return torch.from_numpy(batch)
