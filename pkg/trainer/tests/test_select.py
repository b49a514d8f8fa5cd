import pytest

from facinv_train import TrainConfig, select_epoch, train
from facinv_train.select import assess_checkpoint


@pytest.fixture(scope="module")
def two_checkpoints(toy_ti_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("ckpts")
    config = TrainConfig(
        ti=toy_ti_file,
        ti_dims=(64, 64, 1),
        out_dir=str(out),
        patch_size=(16, 16, 1),
        batch_size=6,
        epochs=2,
        steps_per_epoch=3,
        critic_steps=2,
        latent_shape=(2, 2, 1, 4),
        generator_channels=(8, 6),
        critic_channels=(4, 8),
        seed=3,
        checkpoint_interval=1,
    )
    _, checkpoints = train(config)
    return checkpoints


def test_assess_checkpoint_returns_deviation(two_checkpoints, toy_ti_file, facinv_cli):
    dev = assess_checkpoint(
        two_checkpoints[0].generator_path, toy_ti_file, (64, 64, 1),
        samples=6, patch_size=(16, 16, 1), patch_count=6, max_lag=(5, 5, 0),
    )
    assert 0.0 <= dev <= 0.5


def test_select_epoch_minimizes_variogram_deviation(two_checkpoints, toy_ti_file,
                                                    facinv_cli):
    best, table = select_epoch(
        two_checkpoints, toy_ti_file, (64, 64, 1),
        samples=6, patch_size=(16, 16, 1), patch_count=6, max_lag=(5, 5, 0),
    )
    assert set(table) == {1, 2}
    assert table[best.epoch] == min(table.values())


def test_select_epoch_empty_list():
    with pytest.raises(ValueError, match="no checkpoints"):
        select_epoch([], "ti.u8", (64, 64, 1))
