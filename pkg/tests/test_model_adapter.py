"""Serialized-model inference adapters (optional torch extra)."""

import numpy as np
import pytest

torch = pytest.importorskip("torch")

from satmosaic.config import EngineConfig
from satmosaic.errors import ModelError
from satmosaic.generator import (GeneratorRequest, GuidanceImage, StyleLatent,
                                 TorchScriptGenerator, load_torchscript)
from satmosaic.scalespace import Layer, TileAddress
from satmosaic.seamblend import BlendInputs, ModelMaskProvider
from satmosaic.vectormap import LabelTile

CFG = EngineConfig()


class TinyGenerator(torch.nn.Module):
    def forward(self, features, latent):
        base = features[:, :14].sum(dim=1, keepdim=True)
        bias = latent.mean() * 0.001
        return torch.sigmoid(base + bias).repeat(1, 3, 1, 1) * 0.5


class WrongShapeGenerator(torch.nn.Module):
    def forward(self, features, latent):
        return torch.zeros((1, 3, 16, 16))


class TinyMask(torch.nn.Module):
    def forward(self, features):
        # intentionally exceeds [0, 1] to exercise clamping
        return features[:, :1] * 0.0 + 1.5


def save_scripted(module, path):
    torch.jit.script(module).save(str(path))
    return str(path)


def request():
    labels = LabelTile(np.zeros((256, 256), dtype=np.uint8))
    return GeneratorRequest(labels, GuidanceImage.absent(), StyleLatent(3),
                            TileAddress(1, 0, 0, Layer.T))


class TestLoad:
    def test_missing_model_path(self, tmp_path):
        with pytest.raises(ModelError, match="not found"):
            load_torchscript(tmp_path / "missing.pt")

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "bad.pt"
        path.write_bytes(b"not a model")
        with pytest.raises(ModelError):
            load_torchscript(path)


class TestTorchScriptGenerator:
    def test_deterministic(self, tmp_path):
        path = save_scripted(TinyGenerator(), tmp_path / "gen.pt")
        gen = TorchScriptGenerator(path, CFG)
        a = gen.generate(request())
        b = gen.generate(request())
        assert np.array_equal(a, b)
        assert a.shape == (256, 256, 3)
        assert a.min() >= 0.0 and a.max() <= 1.0

    def test_wrong_output_shape(self, tmp_path):
        path = save_scripted(WrongShapeGenerator(), tmp_path / "bad.pt")
        gen = TorchScriptGenerator(path, CFG)
        with pytest.raises(ModelError, match="shape"):
            gen.generate(request())


class TestModelMaskProvider:
    def test_clamps_and_counts(self, tmp_path):
        path = save_scripted(TinyMask(), tmp_path / "mask.pt")
        provider = ModelMaskProvider(path, CFG)
        labels = LabelTile(np.zeros((256, 256), dtype=np.uint8))
        inputs = BlendInputs(labels, np.zeros((256, 256, 3)), np.ones((256, 256, 3)))
        mask = provider(inputs, CFG)
        assert mask.max() <= 1.0 and mask.min() >= 0.0
        assert provider.clamp_warnings == 1
        again = provider(inputs, CFG)
        assert np.array_equal(mask, again)
        assert provider.clamp_warnings == 2
