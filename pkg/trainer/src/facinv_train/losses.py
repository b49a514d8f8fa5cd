"""Wasserstein objectives: critic/generator losses, gradient penalty,
weight clipping."""

from __future__ import annotations

import torch


def critic_loss(real_scores, fake_scores):
    """mean(fake) - mean(real); the critic drives this down."""
    if real_scores.numel() == 0 or fake_scores.numel() == 0:
        raise ValueError("empty score batch")
    return fake_scores.mean() - real_scores.mean()


def generator_loss(fake_scores):
    """-mean(fake); the generator drives the critic's fake scores up."""
    if fake_scores.numel() == 0:
        raise ValueError("empty score batch")
    return -fake_scores.mean()


def gradient_penalty(critic, real, fake, generator=None):
    """mean((||grad critic(interpolates)||_2 - 1)^2).

    Interpolates are per-sample convex combinations of real and fake
    batches; the caller multiplies by the penalty coefficient.
    """
    eps = torch.rand((real.shape[0], 1, 1, 1, 1), generator=generator)
    interp = (eps * real + (1.0 - eps) * fake).requires_grad_(True)
    scores = critic(interp)
    grads = torch.autograd.grad(
        scores.sum(), interp, create_graph=True, retain_graph=True
    )[0]
    norms = grads.reshape(grads.shape[0], -1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def clip_weights(critic, bound):
    """WGAN weight clipping: clamp every critic parameter to [-bound, bound]."""
    with torch.no_grad():
        for p in critic.parameters():
            p.clamp_(-bound, bound)
