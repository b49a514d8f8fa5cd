#!/usr/bin/env python3
"""Certify a generator against a training image with spatial statistics.

Compares indicator variograms and connectivity functions of generated
models against envelopes built from random patches of the training
image, per facies and per axis.  A generator passes when its ensemble
mean curves stay within the configured deviation thresholds.

The bundled fixture generator is untrained, so this demo shows a FAIL
against the synthetic training image; a pass appears once the curves
line up (see the trainer package for producing such a generator).
"""

import os

import numpy as np

from facinv import (
    GridDims,
    QaConfig,
    binarize,
    generate,
    load_generator,
    load_grid,
    qa_report,
    random_latent,
)
from facinv.cli import write_envelope_csv

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")
OUT = os.path.join(HERE, "output", "qa")

os.makedirs(OUT, exist_ok=True)

ti = load_grid(os.path.join(DATA, "training_image.u8"), "raw_u8",
               GridDims(120, 150, 180, 50.0, 50.0, 1.0))
network = load_generator(os.path.join(DATA, "fixture_gen_32x32x16.facgen"))

print("training image:", ti.dims.shape)
realizations = [
    binarize(generate(network, random_latent(network.input_shape,
                                             np.random.default_rng(seed))))
    for seed in range(10)
]
print(f"scoring {len(realizations)} realizations of {realizations[0].dims.shape}")

# Desk-scale protocol: fewer, smaller patches than the full default
# (100 patches of 100x100x50) so the demo runs in seconds.
config = QaConfig(
    patch_size=(32, 32, 16),
    patch_count=20,
    max_lag=(10, 10, 6),
    variogram_threshold=0.01,
    connectivity_threshold=0.1,
    seed=0,
)
report = qa_report(realizations, ti, config)

print(f"\nQA pass: {report.passed}")
print(f"{'statistic':<14} {'facies':>6} {'axis':>4} {'max dev':>9} {'in band':>8}")
for cmp in report.comparisons:
    print(f"{cmp.kind:<14} {cmp.facies:>6} {cmp.axis:>4} "
          f"{cmp.max_mean_deviation:>9.4f} {cmp.band_containment:>8.2f}")
for code, delta in sorted(report.proportion_delta.items()):
    print(f"proportion delta facies {code}: {delta:.4f}")

with open(os.path.join(OUT, "report.txt"), "w") as fh:
    fh.write(report.to_text())
for cmp in report.comparisons:
    stem = f"{cmp.kind}_facies{cmp.facies}_{cmp.axis}"
    write_envelope_csv(cmp.realization_mean, os.path.join(OUT, f"{stem}_model.csv"))
    write_envelope_csv(cmp.reference, os.path.join(OUT, f"{stem}_reference.csv"))
print(f"\nreport and envelope CSVs in {OUT}")
