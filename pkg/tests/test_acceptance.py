"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them).

Everything runs from the committed fixture files under data/; no trained
network or external data is required.
"""

import math
import time
import warnings

import numpy as np
from scipy.stats import truncnorm

import facinv as fi
from facinv import inversion as inv
from facinv.cli import main as cli_main

from conftest import random_facies
from oracles import connectivity_brute, conv_transpose_brute, variogram_brute


def _report(name, ok, detail=""):
    print(f"\n[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# Spatial statistics against brute-force oracles

def test_variogram_oracle_equivalence():
    rng = np.random.default_rng(100)
    grids = [random_facies(rng) for _ in range(20)]
    lib_time = 0.0
    worst = 0.0
    for grid in grids:
        for axis, name in enumerate(("x", "y", "z")):
            max_lag = grid.dims.shape[axis] - 1
            t0 = time.perf_counter()
            curve = fi.indicator_variogram(grid, 1, name, max_lag)
            lib_time += time.perf_counter() - t0
            ref = variogram_brute(grid.values, 1, axis, max_lag)
            worst = max(worst, float(np.abs(curve.values - ref).max()))
    ok = worst <= 1e-12 and lib_time < 1.0
    _report(
        "variogram oracle equivalence",
        ok,
        f"max abs diff {worst:.2e} (tol 1e-12), compute time {lib_time * 1e3:.1f} ms "
        f"(limit 1 s) over 20 grids",
    )


def test_connectivity_oracle_equivalence():
    rng = np.random.default_rng(101)
    grids = [random_facies(rng, p_channel=rng.uniform(0.3, 0.7)) for _ in range(20)]
    lib_time = 0.0
    worst = 0.0
    for grid in grids:
        for axis, name in enumerate(("x", "y", "z")):
            max_lag = grid.dims.shape[axis] - 1
            t0 = time.perf_counter()
            curve = fi.connectivity_function(grid, 1, name, max_lag)
            lib_time += time.perf_counter() - t0
            ref = connectivity_brute(grid.values, 1, axis, max_lag)
            for got, want in zip(curve.values, ref):
                if want is None:
                    assert np.isnan(got)
                else:
                    worst = max(worst, abs(got - float(want)))
    ok = worst <= 1e-12 and lib_time < 5.0
    _report(
        "connectivity oracle equivalence",
        ok,
        f"max abs diff {worst:.2e} (tol 1e-12), compute time {lib_time * 1e3:.1f} ms "
        f"(limit 5 s) over 20 grids",
    )


def test_complement_symmetry():
    rng = np.random.default_rng(102)
    exact = True
    for _ in range(50):
        grid = random_facies(rng, p_channel=rng.uniform(0.1, 0.9))
        for axis, name in enumerate(("x", "y", "z")):
            max_lag = grid.dims.shape[axis] - 1
            g_ch = fi.indicator_variogram(grid, 1, name, max_lag).values
            g_mud = fi.indicator_variogram(grid, 0, name, max_lag).values
            exact = exact and np.array_equal(g_ch, g_mud)
    _report(
        "variogram complement symmetry",
        exact,
        "channel and mud curves identical on 50 random binary grids (exact)",
    )


# ---------------------------------------------------------------------------
# Wavelet

def test_ricker_checks():
    f, dt = 40.0, 1e-4
    w = fi.ricker(f, dt)
    peak_ok = w.samples[w.half_length] == 1.0
    sym_ok = float(np.abs(w.samples - w.samples[::-1]).max()) <= 1e-12

    t0 = 1.0 / (math.sqrt(2.0) * math.pi * f)  # ~5.627e-3 s
    t = w.times
    right = t >= 0
    signs = np.sign(w.samples[right])
    flips = np.nonzero(np.diff(signs) != 0)[0]
    lo, hi = t[right][flips[0]], t[right][flips[0] + 1]
    bracket_ok = lo <= t0 <= hi and (hi - lo) <= dt * (1 + 1e-12)

    ok = peak_ok and sym_ok and bracket_ok
    _report(
        "ricker wavelet checks",
        ok,
        f"w(0)=1 {peak_ok}, even symmetry {sym_ok}, sign change in "
        f"[{lo * 1e3:.2f}, {hi * 1e3:.2f}] ms brackets {t0 * 1e3:.4f} ms",
    )


# ---------------------------------------------------------------------------
# Transposed convolution

def test_transposed_convolution_shape_chain():
    rng = np.random.default_rng(103)
    layers = []
    sizes = [3]
    for i, pad in enumerate((1, 1, 1, 1, 0)):
        w = rng.normal(0, 0.05, size=(1, 1, 5, 5, 5)).astype(np.float32)
        b = np.zeros(1, dtype=np.float32)
        act = "tanh" if i == 4 else "leaky_relu"
        layers.append(
            fi.TransposedConvLayer(1, 1, (5, 5, 5), (2, 2, 2), (pad,) * 3, w, b, act)
        )
        sizes.append(fi.generator.transposed_output_size(sizes[-1], 2, pad, 5))
    net = fi.GeneratorNetwork((3, 3, 3, 1), tuple(layers))
    chain_ok = sizes == [3, 7, 15, 31, 63, 129] and net.output_shape() == (129, 129, 129)

    out = fi.generate(net, fi.random_latent((3, 3, 3, 1), rng))
    eval_ok = out.values.shape == (129, 129, 129)

    worst = 0.0
    checks = 0
    while checks < 8:
        cin = int(rng.integers(1, 3))
        cout = int(rng.integers(1, 3))
        kernel = tuple(int(rng.integers(1, 5)) for _ in range(3))
        stride = tuple(int(rng.integers(1, 3)) for _ in range(3))
        padding = tuple(int(rng.integers(0, k)) for k in kernel)
        shape = tuple(int(rng.integers(2, 5)) for _ in range(3))
        if min(
            fi.generator.transposed_output_size(n, s, p, k)
            for n, s, p, k in zip(shape, stride, padding, kernel)
        ) < 1:
            continue
        checks += 1
        weights = rng.normal(size=(cin, cout) + kernel).astype(np.float32)
        bias = rng.normal(size=cout).astype(np.float32)
        layer = fi.TransposedConvLayer(cin, cout, kernel, stride, padding,
                                       weights, bias, "none")
        x = rng.normal(size=(cin,) + shape)
        got = fi.conv_transpose3d(x, layer)
        ref = conv_transpose_brute(x, layer.weights, layer.bias, stride, padding)
        worst = max(worst, float(np.abs(got - ref).max()))
    oracle_ok = worst <= 1e-10

    ok = chain_ok and eval_ok and oracle_ok
    _report(
        "transposed-convolution shape chain",
        ok,
        f"3^3 -> {'->'.join(str(s) for s in sizes[1:])}, evaluated shape "
        f"{out.values.shape}, scatter-add max diff {worst:.2e} (tol 1e-10)",
    )


# ---------------------------------------------------------------------------
# MCMC against the closed-form truncated-normal posterior

def test_analytic_mcmc_posterior():
    d0, sigma = 0.3, 0.2
    a, b = (-1.0 - d0) / sigma, (1.0 - d0) / sigma
    oracle_mean = float(truncnorm.mean(a, b, loc=d0, scale=sigma))

    observed = fi.SeismicCube(fi.GridDims(1, 1, 1), np.full((1, 1, 1), d0))
    layer = fi.TransposedConvLayer(
        1, 1, (1, 1, 1), (1, 1, 1), (0, 0, 0),
        np.ones((1, 1, 1, 1, 1), dtype=np.float32), np.zeros(1, dtype=np.float32),
        "none",
    )
    problem = inv.InversionProblem(
        network=fi.GeneratorNetwork((1, 1, 1, 1), (layer,)),
        likelihood=inv.LikelihoodSpec(observed, sigma),
        forward_mode=inv.FORWARD_IDENTITY,
        proposal_fraction=1.0,
        iterations=62_500,
        burn_in=0.2,  # 12,500 burn-in, 50,001 retained samples
        thin=1,
        seed=2024,
    )
    t0 = time.perf_counter()
    result = inv.run_chain(problem, 0)
    elapsed = time.perf_counter() - t0

    thetas = np.array([s.latent.values.ravel()[0] for s in result.samples])
    assert thetas.size >= 50_000
    sample_mean = float(thetas.mean())

    n_batches = 50
    usable = thetas[: (thetas.size // n_batches) * n_batches]
    batch_means = usable.reshape(n_batches, -1).mean(axis=1)
    se = float(batch_means.std(ddof=1) / math.sqrt(n_batches))

    err = abs(sample_mean - oracle_mean)
    ok = err <= 3 * se and elapsed < 60.0
    _report(
        "analytic MCMC posterior",
        ok,
        f"sample mean {sample_mean:.6f} vs truncated-normal mean {oracle_mean:.6f}, "
        f"|err| {err:.2e} <= 3 SE = {3 * se:.2e}, {thetas.size} samples in "
        f"{elapsed:.1f} s (limit 60 s)",
    )


# ---------------------------------------------------------------------------
# End-to-end synthetic recovery (desk-scale stand-in for the field study)

def _end_to_end_problem(fixture_network):
    rng = np.random.default_rng(424242)
    truth_latent = fi.random_latent(fixture_network.input_shape, rng)
    truth = fi.binarize(fi.generate(fixture_network, truth_latent))
    wavelet = fi.ricker(40.0, 1e-3, 10)
    clean = fi.forward_model(truth, fi.default_property_table(), wavelet)
    noise = rng.normal(0.0, 0.01, size=clean.values.shape)
    observed = fi.SeismicCube(clean.dims, clean.values + noise)

    wells = []
    for n, (i, j) in enumerate([(4, 4), (16, 8), (27, 27), (8, 24), (20, 16)]):
        obs = tuple((k, int(truth.values[i, j, k])) for k in range(truth.dims.nz))
        wells.append(fi.Well(f"W{n}", i, j, obs))
    wells = fi.WellSet(tuple(wells))

    problem = inv.InversionProblem(
        network=fixture_network,
        likelihood=inv.LikelihoodSpec(observed, 0.01, wells, 10.0),
        wavelet=wavelet,
        proposal_fraction=0.05,
        iterations=5000,
        chains=4,
        seed=99,
    )
    return problem, truth, wells


def test_end_to_end_synthetic_recovery(fixture_network):
    problem, truth, wells = _end_to_end_problem(fixture_network)
    t0 = time.perf_counter()
    stats, results = inv.run_inversion(problem)
    elapsed = time.perf_counter() - t0

    map_rms = stats.map_sample.misfit_rms
    accuracy = inv.conditioning_accuracy(stats.map_sample.facies, wells)
    match = float((stats.map_sample.facies.values == truth.values).mean())

    ok = map_rms <= 0.02 and accuracy >= 0.95 and elapsed < 600.0
    _report(
        "end-to-end synthetic recovery",
        ok,
        f"MAP misfit RMS {map_rms:.4f} (limit 0.02), conditioning accuracy "
        f"{accuracy:.3f} (limit 0.95), truth match {match:.3f}, 4x5000 iterations "
        f"in {elapsed:.0f} s (limit 600 s)",
    )


# ---------------------------------------------------------------------------
# Reproducibility of the CLI inversion

def test_invert_reproducibility(tmp_path, fixture_network, fixture_weights_path):
    import json
    import os

    rng = np.random.default_rng(55)
    truth = fi.binarize(
        fi.generate(fixture_network, fi.random_latent(fixture_network.input_shape, rng))
    )
    wavelet = fi.ricker(40.0, 1e-3, 10)
    observed = fi.forward_model(truth, fi.default_property_table(), wavelet)
    fi.save_grid(observed, tmp_path / "observed.f32", "raw_f32")
    wells = fi.WellSet((fi.Well("W0", 5, 5, ((2, int(truth.values[5, 5, 2])),)),))
    fi.save_wells(wells, tmp_path / "wells.txt")
    cfg = {
        "weights": os.path.abspath(fixture_weights_path),
        "observed": "observed.f32",
        "observed_dims": [32, 32, 16],
        "wells": "wells.txt",
        "sigma_d": 0.01,
        "well_weight": 10.0,
        "wavelet_frequency": 40.0,
        "wavelet_dt": 1e-3,
        "wavelet_half_length": 10,
        "iterations": 150,
        "chains": 2,
        "seed": 31,
        "burn_in": 0.5,
        "thin": 10,
        "proposal_fraction": 0.05,
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))

    outputs = []
    for run in ("run1", "run2"):
        out = tmp_path / run
        rc = cli_main(["invert", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        names = sorted(os.listdir(out))
        outputs.append({n: (out / n).read_bytes() for n in names})

    same_names = sorted(outputs[0]) == sorted(outputs[1])
    identical = same_names and all(
        outputs[0][n] == outputs[1][n] for n in outputs[0]
    )
    grids = [n for n in outputs[0] if n.endswith((".f32", ".u8"))]
    traces = [n for n in outputs[0] if n.endswith(".csv")]
    _report(
        "inversion reproducibility",
        identical,
        f"two identical-config runs byte-identical across {len(grids)} grids and "
        f"{len(traces)} trace CSVs",
    )


# ---------------------------------------------------------------------------
# Generator throughput (informational)

def test_generator_throughput_informational(fixture_network):
    latent = fi.random_latent(fixture_network.input_shape, np.random.default_rng(1))
    fi.generate(fixture_network, latent)  # warm up
    n = 50
    t0 = time.perf_counter()
    for _ in range(n):
        fi.generate(fixture_network, latent)
    rate = n / (time.perf_counter() - t0)
    fast_enough = rate >= 50.0
    if not fast_enough:
        warnings.warn(
            f"fixture generator at {rate:.0f} realizations/s, below the 50/s target"
        )
    # informational: log the measurement, never fail the build on it
    print(
        f"\n[ACCEPTANCE] generator throughput: "
        f"{'PASS' if fast_enough else 'WARN'}  {rate:.0f} realizations/s "
        f"(target 50/s, informational)"
    )
    assert rate > 0
