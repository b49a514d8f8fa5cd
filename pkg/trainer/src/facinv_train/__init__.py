"""facinv-train: Wasserstein-GAN training for FACGEN facies generators."""

from .data import load_training_image, sample_batch
from .facgen import LayerSpec, read_facgen, write_facgen
from .losses import clip_weights, critic_loss, generator_loss, gradient_penalty
from .model import (
    UnsupportedLayerError,
    build_critic,
    build_generator,
    export_weights,
    generator_forward,
    latent_batch,
    load_into_generator,
)
from .select import assess_checkpoint, select_epoch
from .training import Checkpoint, TrainConfig, TrainingDiverged, train

__version__ = "0.1.0"
