"""facinv-train: train a generator on a training image, export FACGEN
checkpoints, optionally pick the best epoch via `facinv assess`."""

from __future__ import annotations

import argparse
import sys

from .select import select_epoch
from .training import TrainConfig, TrainingDiverged, train


def build_parser():
    parser = argparse.ArgumentParser(
        prog="facinv-train",
        description="Wasserstein-GAN trainer for FACGEN facies generators.",
    )
    parser.add_argument("--config", required=True, help="JSON training config")
    parser.add_argument("--select", action="store_true",
                        help="score all checkpoints with `facinv assess` and "
                             "report the best epoch")
    parser.add_argument("--select-samples", type=int, default=100)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        config = TrainConfig.from_json(args.config)
        final, checkpoints = train(config)
        print(f"trained {config.epochs} epochs; final checkpoint "
              f"{final.generator_path}")
        if args.select:
            best, table = select_epoch(
                checkpoints, config.ti, config.ti_dims,
                samples=args.select_samples,
                patch_size=config.patch_size,
                max_lag=None,
            )
            for epoch in sorted(table):
                print(f"epoch {epoch:3d}: variogram deviation {table[epoch]:.4f}")
            print(f"selected epoch {best.epoch}: {best.generator_path}")
        return 0
    except TrainingDiverged as exc:
        last = exc.last_checkpoint
        where = last.generator_path if last else "none"
        print(f"facinv-train: diverged: {exc} (last good checkpoint: {where})",
              file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"facinv-train: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
