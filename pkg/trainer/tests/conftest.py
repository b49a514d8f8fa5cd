import shutil
import subprocess

import numpy as np
import pytest


def make_toy_ti(nx=64, ny=64, seed=9):
    """Gently sinuous channel bands along x, stacked in y; ~0.49 channel."""
    rng = np.random.default_rng(seed)
    xs = np.arange(nx)[:, None]
    ys = np.arange(ny)[None, :]
    img = np.zeros((nx, ny), dtype=bool)
    y0 = -2.0
    while y0 < ny + 4:
        thickness = rng.uniform(5.0, 7.0)
        amp = rng.uniform(0.3, 1.2)
        lam = rng.uniform(30, 60)
        phase = rng.uniform(0, 2 * np.pi)
        center = y0 + amp * np.sin(2 * np.pi * xs / lam + phase)
        img |= np.abs(ys - center) <= thickness / 2
        y0 += thickness + rng.uniform(5.0, 7.0)
    return img.astype(np.uint8)[:, :, None]


@pytest.fixture(scope="session")
def toy_ti():
    return make_toy_ti()


@pytest.fixture(scope="session")
def toy_ti_file(toy_ti, tmp_path_factory):
    path = tmp_path_factory.mktemp("ti") / "toy_ti.u8"
    toy_ti.ravel(order="F").tofile(path)
    return str(path)


@pytest.fixture(scope="session")
def facinv_cli():
    path = shutil.which("facinv")
    if path is None:
        pytest.skip("facinv CLI not on PATH; install the primary package first")
    return path


def run_facinv(args):
    return subprocess.run(["facinv", *args], capture_output=True, text=True)
