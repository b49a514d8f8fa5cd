"""Command-line front end.

Subcommands: generate, assess, forward, invert, stats.  Every run is
deterministic under a fixed seed and configuration.  Output files are
written to temporaries and renamed on success, so a failed run leaves no
partial outputs behind.

Exit codes: 0 success, 1 domain error (bad data, failed QA with
--strict), 2 usage error.
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys

import numpy as np

from . import forward as fwd
from . import geostats as gs
from . import inversion as inv
from .generator import LatentVector, binarize, generate, load_generator, random_latent
from .grid import (
    GRID_FORMATS,
    GSLIB_ASCII,
    RAW_F32,
    RAW_U8,
    GridDims,
    facies_proportions,
    load_grid,
    load_wells,
    save_grid,
)

_EXT = {RAW_U8: ".u8", RAW_F32: ".f32", GSLIB_ASCII: ".gslib"}


class _Staged:
    """Write-to-temp / rename-on-success output set."""

    def __init__(self):
        self._pending = []  # (tmp, final)

    def stage(self, final):
        final = str(final)
        parent = os.path.dirname(final)
        if parent:
            os.makedirs(parent, exist_ok=True)
        tmp = final + ".part"
        self._pending.append((tmp, final))
        return tmp

    def commit(self):
        for tmp, final in self._pending:
            os.replace(tmp, final)
        self._pending.clear()

    def abort(self):
        for tmp, _ in self._pending:
            if os.path.exists(tmp):
                os.remove(tmp)
        self._pending.clear()


# ---------------------------------------------------------------------------
# Plot-data emission

def write_curve_csv(curve, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lag,value\n")
        for lag, val in zip(curve.lags, curve.values):
            fh.write(f"{int(lag)},{format(val, '.17g')}\n")


def write_envelope_csv(envelope, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lag,mean,min,max\n")
        for lag, m, lo, hi in zip(envelope.lags, envelope.mean, envelope.min, envelope.max):
            fh.write(
                f"{int(lag)},{format(m, '.17g')},{format(lo, '.17g')},{format(hi, '.17g')}\n"
            )


def write_trace_csv(result, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,log_posterior,acceptance_rate,misfit_sd\n")
        for it, lp, ar, mf in zip(
            result.iterations, result.log_posterior, result.acceptance_rate,
            result.misfit_sd,
        ):
            fh.write(
                f"{int(it)},{format(lp, '.17g')},{format(ar, '.17g')},"
                f"{format(mf, '.17g')}\n"
            )


def emit_plot_data(items, writer, out_dir, names, staged):
    """Write one CSV per item with a deterministic name order."""
    items = list(items)
    if not items:
        raise ValueError("nothing to emit: empty input list")
    if len(names) != len(items):
        raise ValueError("one output name per item required")
    for item, name in zip(items, names):
        writer(item, staged.stage(os.path.join(out_dir, name)))


# ---------------------------------------------------------------------------
# Shared argument helpers

def _parse_triple(text, what):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"{what} must be three comma-separated integers, got {text!r}")
    return tuple(int(p) for p in parts)


def _dims_of(text):
    return GridDims(*_parse_triple(text, "dims"))


def _load_latent_file(path, expected_shape):
    if not os.path.exists(path):
        raise FileNotFoundError(f"latent file not found: {path}")
    if path.endswith(".npy"):
        values = np.load(path)
    else:
        values = np.fromfile(path, dtype="<f4").astype(np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.size != int(np.prod(expected_shape)):
        raise ValueError(
            f"latent file holds {values.size} entries, network expects "
            f"{tuple(expected_shape)}"
        )
    return LatentVector(values.reshape(expected_shape))


def _draw_latents(network, count, seed):
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        yield random_latent(network.input_shape, rng)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_generate(args):
    staged = _Staged()
    try:
        network = load_generator(args.weights)
        threshold = network.output_threshold if args.threshold is None else args.threshold
        if args.latent_file is not None:
            latents = [_load_latent_file(args.latent_file, network.input_shape)]
        else:
            latents = list(_draw_latents(network, args.count, args.seed))
        fmt = args.format or (RAW_F32 if args.continuous else RAW_U8)
        for i, latent in enumerate(latents):
            real = generate(network, latent)
            out = real if args.continuous else binarize(real, threshold)
            name = f"{args.prefix}_{i:04d}{_EXT[fmt]}"
            save_grid(out, staged.stage(os.path.join(args.out, name)), fmt)
        staged.commit()
    except Exception:
        staged.abort()
        raise
    shape = "x".join(str(v) for v in network.output_shape())
    print(f"wrote {len(latents)} {shape} grid(s) to {args.out}")
    return 0


def _collect_realizations(args):
    if args.weights is not None:
        network = load_generator(args.weights)
        threshold = network.output_threshold
        return [
            binarize(generate(network, latent), threshold)
            for latent in _draw_latents(network, args.count, args.seed)
        ]
    if not args.realizations:
        raise ValueError("supply either --weights or --realizations")
    if args.dims is None:
        raise ValueError("--realizations needs --dims")
    paths = sorted(p for pattern in args.realizations for p in glob.glob(pattern))
    if not paths:
        raise ValueError(f"no realization files match {args.realizations}")
    dims = _dims_of(args.dims)
    return [load_grid(p, args.format, dims, kind="facies") for p in paths]


def _cmd_assess(args):
    ti = load_grid(args.ti, args.ti_format, _dims_of(args.ti_dims), kind="facies")
    realizations = _collect_realizations(args)
    config = gs.QaConfig(
        patch_size=_parse_triple(args.patch_size, "patch size"),
        patch_count=args.patch_count,
        max_lag=None if args.max_lag is None else _parse_triple(args.max_lag, "max lag"),
        variogram_threshold=args.variogram_threshold,
        connectivity_threshold=args.connectivity_threshold,
        proportion_threshold=args.proportion_threshold,
        connectivity_neighbors=args.neighbors,
        seed=args.qa_seed,
    )
    report = gs.qa_report(realizations, ti, config)

    staged = _Staged()
    try:
        with open(staged.stage(os.path.join(args.out, "report.txt")), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_text())
        curves = []
        names = []
        for cmp in report.comparisons:
            stem = f"{cmp.kind}_facies{cmp.facies}_{cmp.axis}"
            curves.extend([cmp.realization_mean, cmp.reference])
            names.extend([f"{stem}_realizations.csv", f"{stem}_reference.csv"])
        emit_plot_data(curves, write_envelope_csv, args.out, names, staged)
        staged.commit()
    except Exception:
        staged.abort()
        raise

    worst = max(
        (c.max_mean_deviation for c in report.comparisons
         if math.isfinite(c.max_mean_deviation)),
        default=float("nan"),
    )
    print(f"qa {'pass' if report.passed else 'fail'}: "
          f"max mean deviation {worst:.6g} over {len(report.comparisons)} curves")
    if args.strict and not report.passed:
        return 1
    return 0


def _cmd_forward(args):
    facies = load_grid(args.facies, args.format, _dims_of(args.dims), kind="facies")
    table = fwd.default_property_table(args.mode)
    wavelet = fwd.ricker(args.frequency, args.dt, args.half_length)
    cube = fwd.forward_model(facies, table, wavelet, args.seed)
    staged = _Staged()
    try:
        save_grid(cube, staged.stage(args.out), args.out_format)
        if args.wavelet_csv is not None:
            fwd.save_wavelet_csv(wavelet, staged.stage(args.wavelet_csv))
        staged.commit()
    except Exception:
        staged.abort()
        raise
    print(f"wrote synthetic cube {args.out}")
    return 0


def load_problem_config(path):
    """Read an inversion config; relative paths resolve against the file."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed JSON: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    for key in ("weights", "observed", "wells"):
        if cfg.get(key):
            cfg[key] = os.path.join(base, cfg[key]) if not os.path.isabs(cfg[key]) else cfg[key]
    return cfg


def problem_from_config(cfg):
    network = load_generator(cfg["weights"])
    dims = GridDims(*cfg["observed_dims"])
    observed = load_grid(cfg["observed"], cfg.get("observed_format", RAW_F32), dims)
    observed = fwd.SeismicCube(observed.dims, observed.values)
    wells = load_wells(cfg["wells"]) if cfg.get("wells") else None
    likelihood = inv.LikelihoodSpec(
        observed,
        float(cfg.get("sigma_d", 0.01)),
        wells,
        float(cfg.get("well_weight", 10.0)),
    )
    mode = cfg.get("forward_mode", inv.FORWARD_SEISMIC)
    wavelet = None
    if mode == inv.FORWARD_SEISMIC:
        wavelet = fwd.ricker(
            float(cfg.get("wavelet_frequency", 40.0)),
            float(cfg.get("wavelet_dt", fwd.DEFAULT_DT)),
            cfg.get("wavelet_half_length"),
        )
    properties = None
    if "properties" in cfg:
        properties = fwd.FaciesPropertyTable(
            {
                int(code): fwd.FaciesProperties(tuple(entry["velocity"]), tuple(entry["density"]))
                for code, entry in cfg["properties"].items()
            },
            cfg.get("assignment_mode", fwd.MODE_MIDPOINT),
        )
    elif cfg.get("assignment_mode"):
        properties = fwd.default_property_table(cfg["assignment_mode"])
    return inv.InversionProblem(
        network=network,
        likelihood=likelihood,
        wavelet=wavelet,
        properties=properties,
        crop_origin=cfg.get("crop_origin"),
        proposal_fraction=float(cfg.get("proposal_fraction", 0.1)),
        iterations=int(cfg.get("iterations", 1000)),
        chains=int(cfg.get("chains", 1)),
        burn_in=float(cfg.get("burn_in", 0.5)),
        thin=int(cfg.get("thin", 10)),
        seed=int(cfg.get("seed", 0)),
        threshold=float(cfg.get("threshold", 0.0)),
        forward_mode=mode,
        elastic_seed=int(cfg.get("elastic_seed", 0)),
    )


def _cmd_invert(args):
    cfg = load_problem_config(args.config)
    for key in ("iterations", "chains", "seed"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    problem = problem_from_config(cfg)
    threads = args.threads if args.threads is not None else cfg.get("threads")

    stats, results = inv.run_inversion(problem, threads)

    staged = _Staged()
    try:
        out = args.out
        save_grid(stats.probability, staged.stage(os.path.join(out, "posterior_probability.f32")), RAW_F32)
        save_grid(stats.variance, staged.stage(os.path.join(out, "posterior_variance.f32")), RAW_F32)
        save_grid(stats.sd, staged.stage(os.path.join(out, "posterior_sd.f32")), RAW_F32)
        save_grid(stats.map_sample.facies, staged.stage(os.path.join(out, "map_facies.u8")), RAW_U8)
        for result in results:
            write_trace_csv(
                result,
                staged.stage(os.path.join(out, f"chain_{result.chain_index:02d}_trace.csv")),
            )
        lines = [
            f"chains = {problem.chains}",
            f"iterations_per_chain = {problem.iterations}",
            f"map_log_posterior = {stats.map_sample.log_posterior:.17g}",
            f"map_misfit_rms = {stats.map_sample.misfit_rms:.17g}",
        ]
        if problem.likelihood.wells is not None:
            acc = inv.conditioning_accuracy(stats.map_sample.facies, problem.likelihood.wells)
            lines.append(f"map_conditioning_accuracy = {acc:.17g}")
        for idx in sorted(stats.misfit_summary):
            lo, mean, hi = stats.misfit_summary[idx]
            lines.append(
                f"chain_{idx:02d}_misfit_rms_min_mean_max = {lo:.17g} {mean:.17g} {hi:.17g}"
            )
        for result in results:
            lines.append(
                f"chain_{result.chain_index:02d}_acceptance_rate = "
                f"{result.final_acceptance_rate:.17g}"
            )
        with open(staged.stage(os.path.join(out, "summary.txt")), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        staged.commit()
    except Exception:
        staged.abort()
        raise
    print(
        f"inversion done: map misfit rms {stats.map_sample.misfit_rms:.6g}, "
        f"outputs in {args.out}"
    )
    return 0


def _cmd_stats(args):
    dims = _dims_of(args.dims)
    grid = load_grid(args.grid, args.format, dims, kind="facies")
    if args.max_lag is None:
        max_lag = tuple(max(1, n // 2) for n in dims.shape)
    else:
        max_lag = _parse_triple(args.max_lag, "max lag")
    props = facies_proportions(grid)
    staged = _Staged()
    try:
        with open(staged.stage(os.path.join(args.out, "proportions.txt")), "w",
                  encoding="utf-8", newline="\n") as fh:
            for code in sorted(props):
                fh.write(f"facies_{code} = {props[code]:.17g}\n")
        curves = []
        names = []
        for code in grid.facies_codes:
            for ax_i, ax in enumerate(("x", "y", "z")):
                curves.append(gs.indicator_variogram(grid, code, ax, max_lag[ax_i]))
                names.append(f"variogram_facies{code}_{ax}.csv")
                curves.append(
                    gs.connectivity_function(grid, code, ax, max_lag[ax_i], args.neighbors)
                )
                names.append(f"connectivity_facies{code}_{ax}.csv")
        emit_plot_data(curves, write_curve_csv, args.out, names, staged)
        staged.commit()
    except Exception:
        staged.abort()
        raise
    print(f"wrote proportions and {len(curves)} curves to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="facinv",
        description="Facies inversion engine: generate, assess, forward-model, invert.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample facies models from a generator")
    p.add_argument("--weights", required=True, help="FACGEN weight file")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prefix", default="realization")
    p.add_argument("--format", choices=(RAW_U8, RAW_F32, GSLIB_ASCII), default=None)
    p.add_argument("--continuous", action="store_true",
                   help="write the continuous generator output instead of facies")
    p.add_argument("--latent-file", default=None,
                   help="evaluate one latent from a .npy or raw-f32 file")
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("assess", help="QA generator output against a training image")
    p.add_argument("--ti", required=True)
    p.add_argument("--ti-dims", required=True)
    p.add_argument("--ti-format", choices=GRID_FORMATS, default=RAW_U8)
    p.add_argument("--weights", default=None)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--realizations", nargs="*", default=None,
                   help="facies grid files (globs) instead of --weights")
    p.add_argument("--dims", default=None, help="dims of --realizations files")
    p.add_argument("--format", choices=GRID_FORMATS, default=RAW_U8)
    p.add_argument("--out", required=True)
    p.add_argument("--patch-size", default="100,100,50")
    p.add_argument("--patch-count", type=int, default=100)
    p.add_argument("--max-lag", default=None)
    p.add_argument("--variogram-threshold", type=float, default=0.01)
    p.add_argument("--connectivity-threshold", type=float, default=0.1)
    p.add_argument("--proportion-threshold", type=float, default=None)
    p.add_argument("--neighbors", type=int, choices=(6, 26), default=6)
    p.add_argument("--qa-seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 1 when QA fails")
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("forward", help="synthesize the seismic response of a facies grid")
    p.add_argument("--facies", required=True)
    p.add_argument("--dims", required=True)
    p.add_argument("--format", choices=GRID_FORMATS, default=RAW_U8)
    p.add_argument("--out", required=True)
    p.add_argument("--out-format", choices=(RAW_F32, GSLIB_ASCII), default=RAW_F32)
    p.add_argument("--frequency", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=fwd.DEFAULT_DT)
    p.add_argument("--half-length", type=int, default=None)
    p.add_argument("--mode", choices=fwd.ASSIGNMENT_MODES, default=fwd.MODE_MIDPOINT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wavelet-csv", default=None)
    p.set_defaults(func=_cmd_forward)

    p = sub.add_parser("invert", help="run the Bayesian latent-space inversion")
    p.add_argument("--config", required=True, help="JSON problem definition")
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("stats", help="proportions and spatial statistics of a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--dims", required=True)
    p.add_argument("--format", choices=GRID_FORMATS, default=RAW_U8)
    p.add_argument("--out", required=True)
    p.add_argument("--max-lag", default=None)
    p.add_argument("--neighbors", type=int, choices=(6, 26), default=6)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"facinv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
