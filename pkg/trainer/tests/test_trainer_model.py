"""Network architecture and budget."""

import pytest
import torch

from gbpc_trainer.model import PARAM_BUDGET, FewShotFusionNet, param_count


class TestFewShotFusionNet:
    def test_parameter_count(self):
        model = FewShotFusionNet()
        # 2*16*9+16 + 3*(16*16*9+16) + 16*1+1 = 7281
        assert param_count(model) == 7281
        assert param_count(model) <= PARAM_BUDGET

    def test_forward_shape(self):
        model = FewShotFusionNet()
        out = model(torch.rand(3, 2, 24, 40))
        assert out.shape == (3, 1, 24, 40)

    def test_output_clamped(self):
        model = FewShotFusionNet()
        with torch.no_grad():
            out = model(torch.rand(2, 2, 16, 16) * 50.0)
        assert float(out.min()) >= 0.0
        assert float(out.max()) <= 1.0

    def test_fully_convolutional_down_to_3x3(self):
        model = FewShotFusionNet()
        assert model(torch.rand(1, 2, 3, 3)).shape == (1, 1, 3, 3)
        assert model(torch.rand(1, 2, 33, 57)).shape == (1, 1, 33, 57)

    def test_rejects_wrong_stack(self):
        model = FewShotFusionNet()
        with pytest.raises(ValueError, match="source stack"):
            model(torch.rand(2, 16, 16))
        with pytest.raises(ValueError, match="source stack"):
            model(torch.rand(1, 3, 16, 16))

    def test_seeded_init_is_deterministic(self):
        torch.manual_seed(17)
        first = FewShotFusionNet()
        torch.manual_seed(17)
        second = FewShotFusionNet()
        for p, q in zip(first.parameters(), second.parameters()):
            assert torch.equal(p, q)

    def test_projection_bias_starts_midrange(self):
        model = FewShotFusionNet()
        assert model.project.bias.detach().item() == 0.5
