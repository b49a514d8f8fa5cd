"""Checkpoint selection through the inversion engine's `facinv assess`.

Each checkpoint's generator is sampled N times and scored against the
training image; the selected epoch minimizes the worst variogram
deviation across facies and axes.
"""

from __future__ import annotations

import os
import re
import subprocess
import tempfile

_VARIOGRAM_LINE = re.compile(
    r"^variogram_facies_\d+_axis_[xyz]_max_mean_deviation = (\S+)$"
)


def assess_checkpoint(generator_path, ti_path, ti_dims, samples=100,
                      patch_size=None, patch_count=20, max_lag=None, seed=0,
                      facinv="facinv"):
    """Run `facinv assess` on one FACGEN file; returns the worst variogram
    deviation parsed from the report."""
    with tempfile.TemporaryDirectory() as out:
        cmd = [
            facinv, "assess",
            "--ti", str(ti_path),
            "--ti-dims", ",".join(str(v) for v in ti_dims),
            "--weights", str(generator_path),
            "--count", str(samples),
            "--seed", str(seed),
            "--patch-count", str(patch_count),
            "--out", out,
        ]
        if patch_size is not None:
            cmd += ["--patch-size", ",".join(str(v) for v in patch_size)]
        if max_lag is not None:
            cmd += ["--max-lag", ",".join(str(v) for v in max_lag)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(
                f"facinv assess failed ({proc.returncode}): {proc.stderr.strip()}"
            )
        with open(os.path.join(out, "report.txt"), "r", encoding="utf-8") as fh:
            deviations = [
                float(m.group(1))
                for m in (_VARIOGRAM_LINE.match(line.strip()) for line in fh)
                if m
            ]
    if not deviations:
        raise RuntimeError("assess report carried no variogram deviations")
    return max(deviations)


def select_epoch(checkpoints, ti_path, ti_dims, **assess_kwargs):
    """Score every checkpoint; returns (best checkpoint, {epoch: deviation})."""
    checkpoints = list(checkpoints)
    if not checkpoints:
        raise ValueError("no checkpoints to select from")
    table = {}
    for ckpt in checkpoints:
        table[ckpt.epoch] = assess_checkpoint(
            ckpt.generator_path, ti_path, ti_dims, **assess_kwargs
        )
    best = min(checkpoints, key=lambda c: table[c.epoch])
    return best, table
