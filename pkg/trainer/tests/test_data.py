import numpy as np
import pytest
import torch

from facinv_train.data import load_training_image, sample_batch


def test_batch_shape_and_values(toy_ti):
    rng = np.random.default_rng(0)
    batch = sample_batch(toy_ti, (48, 48, 1), 25, rng)
    assert tuple(batch.shape) == (25, 1, 48, 48, 1)
    assert batch.dtype == torch.float32
    assert set(batch.unique().tolist()) <= {-1.0, 1.0}


def test_batch_seeded_determinism(toy_ti):
    a = sample_batch(toy_ti, (32, 32, 1), 8, np.random.default_rng(5))
    b = sample_batch(toy_ti, (32, 32, 1), 8, np.random.default_rng(5))
    assert torch.equal(a, b)
    c = sample_batch(toy_ti, (32, 32, 1), 8, np.random.default_rng(6))
    assert not torch.equal(a, c)


def test_patches_are_real_sub_volumes(toy_ti):
    rng = np.random.default_rng(1)
    batch = sample_batch(toy_ti, (16, 16, 1), 50, rng)
    signed_ti = toy_ti.astype(np.float32) * 2 - 1
    # every sampled patch occurs somewhere in the TI (scan x-offsets)
    for n in range(0, 50, 10):
        patch = batch[n, 0].numpy()
        found = any(
            np.array_equal(signed_ti[i:i + 16, j:j + 16], patch)
            for i in range(64 - 16 + 1)
            for j in range(64 - 16 + 1)
        )
        assert found


def test_patch_larger_than_ti_rejected(toy_ti):
    with pytest.raises(ValueError, match="larger"):
        sample_batch(toy_ti, (65, 64, 1), 4, np.random.default_rng(0))


def test_load_training_image_round_trip(toy_ti, toy_ti_file):
    back = load_training_image(toy_ti_file, (64, 64, 1))
    assert np.array_equal(back, toy_ti)


def test_load_training_image_length_mismatch(tmp_path):
    path = tmp_path / "short.u8"
    path.write_bytes(b"\x00" * 10)
    with pytest.raises(ValueError, match="cells"):
        load_training_image(path, (4, 4, 4))
