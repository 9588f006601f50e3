"""Training loop: determinism, artifacts, parity gate, ablations."""

import json

import pytest
import torch

from gbpc_trainer.parity import ParityError
from gbpc_trainer.train import TrainConfig, load_checkpoint, train


def config_for(toy_corpus, fixtures32, out_dir, **kw):
    base = dict(manifest=str(toy_corpus), fixtures=str(fixtures32),
                out_dir=str(out_dir), epochs=3)
    base.update(kw)
    return TrainConfig(**base)


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="epochs"):
            TrainConfig("m", "f", "o", epochs=0)
        with pytest.raises(ValueError, match="learning rate"):
            TrainConfig("m", "f", "o", lr=0.0)
        with pytest.raises(ValueError, match="batch size"):
            TrainConfig("m", "f", "o", batch_size=0)


class TestTrain:
    def test_artifacts(self, toy_corpus, fixtures32, tmp_path):
        result = train(config_for(toy_corpus, fixtures32, tmp_path))
        assert result.checkpoint_path.exists()
        assert result.curve_path.exists()
        lines = result.curve_path.read_text().splitlines()
        assert lines[0] == "epoch,mean_loss"
        assert len(lines) == 4
        assert len(result.epoch_losses) == 3
        assert result.parity_report.ok

    def test_checkpoint_roundtrip(self, trained):
        model, payload = load_checkpoint(trained.checkpoint_path)
        assert payload["param_count"] == 7281
        assert payload["optimizer"] == "adam"
        assert payload["config"]["epochs"] == 100
        out = model(torch.rand(1, 2, 16, 16))
        assert out.shape == (1, 1, 16, 16)

    def test_seeded_rerun_is_identical(self, toy_corpus, fixtures32,
                                       tmp_path):
        first = train(config_for(toy_corpus, fixtures32, tmp_path / "one"))
        second = train(config_for(toy_corpus, fixtures32, tmp_path / "two"))
        assert first.epoch_losses == second.epoch_losses
        third = train(config_for(toy_corpus, fixtures32, tmp_path / "three",
                                 seed=1))
        assert third.epoch_losses != first.epoch_losses

    def test_loss_decreases_over_100_epochs(self, trained):
        assert len(trained.epoch_losses) == 100
        assert trained.epoch_losses[-1] < trained.epoch_losses[0]

    def test_parity_gate_blocks_training(self, toy_corpus, fixtures32,
                                         tmp_path):
        payload = json.loads(fixtures32.read_text())
        payload["cases"][0]["expected"]["l_total"] += 1.0
        bad = tmp_path / "drifted.json"
        bad.write_text(json.dumps(payload))
        with pytest.raises(ParityError, match="l_total"):
            train(config_for(toy_corpus, bad, tmp_path / "run"))
        assert not (tmp_path / "run" / "checkpoint.pt").exists()

    def test_on_batch_hook(self, toy_corpus, fixtures32, tmp_path):
        seen = []
        train(config_for(toy_corpus, fixtures32, tmp_path, epochs=2,
                         batch_size=4),
              on_batch=lambda e, i, parts: seen.append((e, i, parts)))
        # 10 patches at batch size 4 make 3 batches per epoch.
        assert [(e, i) for e, i, _ in seen] == [
            (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
        for _, _, parts in seen:
            assert torch.isfinite(parts.total)

    def test_override_pos_zeroes_boundary_sobel(self, toy_corpus,
                                                fixtures32, tmp_path):
        seen = []
        train(config_for(toy_corpus, fixtures32, tmp_path,
                         override=(1.0, 0.0)),
              on_batch=lambda e, i, parts: seen.append(
                  (parts.l_bnd_sobel.detach().item(),
                   parts.l_pos.detach().item())))
        assert seen
        assert all(bnd == 0.0 for bnd, _ in seen)
        assert any(pos > 0.0 for _, pos in seen)

    def test_override_bnd_zeroes_pos(self, toy_corpus, fixtures32, tmp_path):
        seen = []
        train(config_for(toy_corpus, fixtures32, tmp_path,
                         override=(0.0, 1.0)),
              on_batch=lambda e, i, parts: seen.append(
                  parts.l_pos.detach().item()))
        assert seen
        assert all(value == 0.0 for value in seen)

    def test_toggle_drops_term(self, toy_corpus, fixtures32, tmp_path):
        seen = []
        train(config_for(toy_corpus, fixtures32, tmp_path, use_bnd=False,
                         use_laplacian=False),
              on_batch=lambda e, i, parts: seen.append(
                  (parts.l_bnd_sobel.detach().item(),
                   parts.l_bnd_lap.detach().item())))
        assert seen
        assert all(pair == (0.0, 0.0) for pair in seen)

    def test_n_shot_trains_on_subset(self, toy_corpus, fixtures32, tmp_path):
        result = train(config_for(toy_corpus, fixtures32, tmp_path,
                                  n_shot=2, batch_size=2))
        assert len(result.epoch_losses) == 3
