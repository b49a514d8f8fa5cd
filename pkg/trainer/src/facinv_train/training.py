"""Wasserstein-GAN training loop with FACGEN checkpoints.

One "epoch" is a fixed number of generator steps on randomly sampled
training-image patches (there is no finite dataset pass to define one
otherwise).  Every checkpoint's generator is exported to FACGEN, so any
epoch can be evaluated or used by the inversion engine directly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import load_training_image, sample_batch
from .losses import clip_weights, critic_loss, generator_loss, gradient_penalty
from .model import build_critic, build_generator, export_weights, latent_batch

WGAN_GP = "wgan_gp"
WGAN_CLIP = "wgan_clip"


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite; carries the last good checkpoint."""

    def __init__(self, message, last_checkpoint):
        super().__init__(message)
        self.last_checkpoint = last_checkpoint


@dataclass
class TrainConfig:
    ti: str
    ti_dims: tuple
    out_dir: str
    ti_format: str = "raw_u8"
    patch_size: tuple = (24, 24, 24)
    batch_size: int = 25
    epochs: int = 50
    steps_per_epoch: int = 20
    critic_steps: int = 5
    lr_generator: float = 1e-4
    lr_critic: float = 1e-4
    loss: str = WGAN_GP
    gp_coefficient: float = 10.0
    clip_bound: float = 0.01
    latent_shape: tuple = (3, 3, 3, 1)
    generator_channels: tuple = (16, 8)
    critic_channels: tuple = (8, 16)
    seed: int = 0
    checkpoint_interval: int = 1

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1 or self.steps_per_epoch < 1:
            raise ValueError("batch_size, epochs and steps_per_epoch must be >= 1")
        if self.critic_steps < 1 or self.checkpoint_interval < 1:
            raise ValueError("critic_steps and checkpoint_interval must be >= 1")
        if self.loss not in (WGAN_GP, WGAN_CLIP):
            raise ValueError(f"loss must be {WGAN_GP!r} or {WGAN_CLIP!r}")
        self.ti_dims = tuple(int(v) for v in self.ti_dims)
        self.patch_size = tuple(int(v) for v in self.patch_size)
        self.latent_shape = tuple(int(v) for v in self.latent_shape)
        self.generator_channels = tuple(int(v) for v in self.generator_channels)
        self.critic_channels = tuple(int(v) for v in self.critic_channels)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        if not os.path.isabs(raw["ti"]):
            raw["ti"] = os.path.join(base, raw["ti"])
        if not os.path.isabs(raw["out_dir"]):
            raw["out_dir"] = os.path.join(base, raw["out_dir"])
        return cls(**raw)


@dataclass
class Checkpoint:
    epoch: int
    generator_path: str
    critic_path: str
    critic_losses: list = field(default_factory=list)   # per finished epoch
    generator_losses: list = field(default_factory=list)


def _atomic_write(path, writer):
    tmp = path + ".part"
    writer(tmp)
    os.replace(tmp, path)


def _save_losses_csv(out_dir, critic_losses, generator_losses):
    path = os.path.join(out_dir, "losses.csv")

    def write(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,critic_loss,generator_loss\n")
            for e, (c, g) in enumerate(zip(critic_losses, generator_losses), start=1):
                fh.write(f"{e},{c:.9g},{g:.9g}\n")

    _atomic_write(path, write)


def train(config):
    """Run the adversarial loop; returns (final checkpoint, all checkpoints).

    Checkpoints land in config.out_dir as gen_epoch_NNN.facgen plus
    critic_epoch_NNN.pt, with a running losses.csv.  A non-finite loss
    aborts with TrainingDiverged carrying the last good checkpoint.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    ti = load_training_image(config.ti, config.ti_dims, config.ti_format)

    torch.manual_seed(config.seed)
    generator = build_generator(config.latent_shape, config.patch_size,
                                config.generator_channels)
    critic = build_critic(config.patch_size, config.critic_channels)

    if config.loss == WGAN_GP:
        opt_g = torch.optim.Adam(generator.parameters(), lr=config.lr_generator,
                                 betas=(0.5, 0.9))
        opt_c = torch.optim.Adam(critic.parameters(), lr=config.lr_critic,
                                 betas=(0.5, 0.9))
    else:
        opt_g = torch.optim.RMSprop(generator.parameters(), lr=config.lr_generator)
        opt_c = torch.optim.RMSprop(critic.parameters(), lr=config.lr_critic)

    torch_rng = torch.Generator().manual_seed(config.seed)
    patch_rng = np.random.default_rng(config.seed + 1)

    critic_curve = []
    generator_curve = []
    checkpoints = []
    last_good = None

    def save_checkpoint(epoch):
        gen_path = os.path.join(config.out_dir, f"gen_epoch_{epoch:03d}.facgen")
        critic_path = os.path.join(config.out_dir, f"critic_epoch_{epoch:03d}.pt")
        _atomic_write(gen_path, lambda tmp: export_weights(
            generator, config.latent_shape, tmp))
        _atomic_write(critic_path, lambda tmp: torch.save(critic.state_dict(), tmp))
        _save_losses_csv(config.out_dir, critic_curve, generator_curve)
        ckpt = Checkpoint(epoch, gen_path, critic_path,
                          list(critic_curve), list(generator_curve))
        checkpoints.append(ckpt)
        return ckpt

    for epoch in range(1, config.epochs + 1):
        c_losses = []
        g_losses = []
        for _ in range(config.steps_per_epoch):
            for _ in range(config.critic_steps):
                real = sample_batch(ti, config.patch_size, config.batch_size,
                                    patch_rng)
                with torch.no_grad():
                    fake = generator(latent_batch(config.batch_size,
                                                  config.latent_shape, torch_rng))
                loss_c = critic_loss(critic(real), critic(fake))
                if config.loss == WGAN_GP:
                    loss_c = loss_c + config.gp_coefficient * gradient_penalty(
                        critic, real, fake, torch_rng)
                opt_c.zero_grad()
                loss_c.backward()
                opt_c.step()
                if config.loss == WGAN_CLIP:
                    clip_weights(critic, config.clip_bound)
                c_losses.append(float(loss_c.detach()))

            fake = generator(latent_batch(config.batch_size, config.latent_shape,
                                          torch_rng))
            loss_g = generator_loss(critic(fake))
            opt_g.zero_grad()
            loss_g.backward()
            opt_g.step()
            g_losses.append(float(loss_g.detach()))

            if not (math.isfinite(c_losses[-1]) and math.isfinite(g_losses[-1])):
                _save_losses_csv(config.out_dir, critic_curve, generator_curve)
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} "
                    f"(critic {c_losses[-1]}, generator {g_losses[-1]})",
                    last_good,
                )

        critic_curve.append(float(np.mean(c_losses)))
        generator_curve.append(float(np.mean(g_losses)))

        if epoch % config.checkpoint_interval == 0 or epoch == config.epochs:
            last_good = save_checkpoint(epoch)

    return last_good, checkpoints
