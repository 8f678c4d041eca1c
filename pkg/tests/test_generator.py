import numpy as np
import pytest

from satmosaic.config import EngineConfig
from satmosaic.generator import (BackendPool, GeneratorRequest, GuidanceImage,
                                 MockGenerator, StyleLatent, bilinear_upsample,
                                 blur_guidance)
from satmosaic.scalespace import Layer, TileAddress
from satmosaic.vectormap import LabelTile

CFG = EngineConfig()


def labels(value=0, n=256):
    return LabelTile(np.full((n, n), value, dtype=np.uint8))


def request(addr=TileAddress(1, 0, 0, Layer.T), seed=7, guidance=None, lab=None):
    if guidance is None:
        guidance = GuidanceImage.absent() if addr.z == 1 else \
            GuidanceImage(np.full((256, 256, 3), 0.5), present=True)
    return GeneratorRequest(lab or labels(), guidance, StyleLatent(seed), addr)


class TestRequestContract:
    def test_guidance_forbidden_at_z1(self):
        with pytest.raises(ValueError):
            GeneratorRequest(labels(), GuidanceImage(np.zeros((256, 256, 3)), True),
                             StyleLatent(1), TileAddress(1, 0, 0, Layer.T))

    def test_guidance_required_above_z1(self):
        with pytest.raises(ValueError):
            GeneratorRequest(labels(), GuidanceImage.absent(),
                             StyleLatent(1), TileAddress(2, 0, 0, Layer.T))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            GeneratorRequest(labels(n=128), GuidanceImage.absent(),
                             StyleLatent(1), TileAddress(1, 0, 0, Layer.T))

    def test_guidance_range_checked(self):
        with pytest.raises(ValueError):
            GuidanceImage(np.full((256, 256, 3), 1.5), present=True)


class TestMockGenerator:
    def test_deterministic(self):
        gen = MockGenerator(CFG)
        a = gen.generate(request())
        b = gen.generate(request())
        assert np.array_equal(a, b)

    def test_latent_seed_changes_output(self):
        gen = MockGenerator(CFG)
        assert not np.array_equal(gen.generate(request(seed=1)),
                                  gen.generate(request(seed=2)))

    def test_eval_id_changes_output(self):
        gen = MockGenerator(CFG)
        a = gen.generate(request(TileAddress(1, 0, 0, Layer.T)))
        b = gen.generate(request(TileAddress(1, 1, 0, Layer.T)))
        c = gen.generate(request(TileAddress(1, 0, 0, Layer.S)))
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_range_and_continuity(self):
        gen = MockGenerator(CFG)
        tile = gen.generate(request())
        assert tile.min() >= 0.0 and tile.max() <= 1.0
        dx = np.abs(np.diff(tile, axis=1)).max()
        dy = np.abs(np.diff(tile, axis=0)).max()
        assert max(dx, dy) < 0.2

    def test_uniform_guidance_full_weight(self):
        cfg = CFG.with_overrides(w_guidance=1.0)
        gen = MockGenerator(cfg)
        lab = labels(5)
        lab.cls[:100] = 10  # two classes present
        tile = gen.generate(request(TileAddress(2, 0, 0, Layer.T), lab=lab))
        for cid in (5, 10):
            region = tile[lab.cls == cid]
            assert abs(region.mean() - 0.5) < 0.02

    def test_border_discontinuity_stat(self):
        """Adjacent evaluations are discontinuous at the shared border: the
        mean jump across it must dominate interior column-to-column jumps."""
        gen = MockGenerator(CFG)
        left = gen.generate(request(TileAddress(1, 0, 0, Layer.T)))
        right = gen.generate(request(TileAddress(1, 1, 0, Layer.T)))
        border = np.abs(right[:, 0] - left[:, -1]).mean()
        interior = np.abs(np.diff(left, axis=1)).mean()
        assert border > 3.0 * interior

    def test_guidance_pull_monotone(self):
        lab = labels(3)
        guidance = GuidanceImage(np.full((256, 256, 3), 0.8), present=True)
        dists = []
        for w in (0.2, 0.4, 0.6, 0.8, 1.0):
            gen = MockGenerator(CFG.with_overrides(w_guidance=w))
            tile = gen.generate(GeneratorRequest(lab, guidance, StyleLatent(3),
                                                 TileAddress(2, 0, 0, Layer.T)))
            dists.append(np.abs(tile - guidance.rgb).mean())
        assert all(a > b for a, b in zip(dists, dists[1:]))

    def test_vignette_darkens_borders(self):
        gen = MockGenerator(CFG)
        tile = gen.generate(request())
        gray = tile.mean(axis=2)
        assert gray[0].mean() < gray[128].mean() - CFG.vignette_depth / 2


class TestBilinearUpsample:
    def test_constant_preserved(self):
        up = bilinear_upsample(np.full((64, 64), 0.3), 4)
        assert up.shape == (256, 256)
        np.testing.assert_allclose(up, 0.3)

    def test_mean_preserved_interior(self):
        rng = np.random.default_rng(2)
        img = rng.random((64, 64))
        up = bilinear_upsample(img, 4)
        assert abs(up.mean() - img.mean()) < 0.01 * img.mean()


class TestBlurGuidance:
    def test_constant_crop(self):
        out = blur_guidance(np.full((64, 64, 3), 0.42), CFG)
        assert out.present
        np.testing.assert_allclose(out.rgb, 0.42, atol=1e-12)

    def test_impulse_mass_preserved(self):
        crop = np.zeros((64, 64, 3))
        crop[32, 32] = 1.0
        out = blur_guidance(crop, CFG)
        up = bilinear_upsample(crop, 4)
        assert abs(out.rgb.sum() - up.sum()) <= 0.01 * up.sum()
        assert out.rgb.max() < up.max()  # peak attenuated

    def test_mean_preserved_for_interior_content(self):
        rng = np.random.default_rng(4)
        crop = np.zeros((64, 64, 3))
        crop[8:56, 8:56] = rng.random((48, 48, 3))
        out = blur_guidance(crop, CFG)
        up = bilinear_upsample(crop, 4)
        assert abs(out.rgb.mean() - up.mean()) <= 0.01 * up.mean()

    def test_against_direct_convolution_oracle(self):
        """Separable blur equals an explicit dense 1-D convolution with the
        same kernel and clamped edges, applied to the upsampled crop."""
        sigma = 8.0
        radius = 24
        x = np.arange(-radius, radius + 1, dtype=np.float64)
        kernel = np.exp(-0.5 * (x / sigma) ** 2)
        kernel /= kernel.sum()

        rng = np.random.default_rng(6)
        crop = rng.random((64, 64, 3))
        up = bilinear_upsample(crop, 4)

        padded = np.pad(up, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
        expect = np.empty_like(up)
        tmp = np.empty_like(padded)
        for c in range(3):
            for col in range(padded.shape[1]):
                tmp[:, col, c] = np.convolve(padded[:, col, c], kernel, mode="same")
            for row in range(radius, padded.shape[0] - radius):
                full = np.convolve(tmp[row, :, c], kernel, mode="same")
                expect[row - radius, :, c] = full[radius:-radius]

        got = blur_guidance(crop, CFG)
        np.testing.assert_allclose(got.rgb, np.clip(expect, 0, 1), atol=1e-9)

    def test_wrong_crop_size_rejected(self):
        with pytest.raises(ValueError):
            blur_guidance(np.zeros((32, 32, 3)), CFG)


class TestStyleLatent:
    def test_vector_derived_from_seed(self):
        a = StyleLatent(99).resolve_vector()
        b = StyleLatent(99).resolve_vector()
        c = StyleLatent(100).resolve_vector()
        assert np.array_equal(a, b)
        assert a.shape == (256,)
        assert not np.array_equal(a, c)

    def test_explicit_vector_passthrough(self):
        lat = StyleLatent(1, vector=(0.5, -0.5))
        assert np.array_equal(lat.resolve_vector(), [0.5, -0.5])


class TestBackendPool:
    def test_round_trip(self):
        pool = BackendPool([MockGenerator(CFG)])
        tile = pool.generate(request())
        assert tile.shape == (256, 256, 3)

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError):
            BackendPool([])

    def test_concurrent_use(self):
        from concurrent.futures import ThreadPoolExecutor

        pool = BackendPool([MockGenerator(CFG), MockGenerator(CFG)])
        reqs = [request(TileAddress(1, i, 0, Layer.T)) for i in range(8)]
        with ThreadPoolExecutor(max_workers=4) as tp:
            tiles = list(tp.map(pool.generate, reqs))
        solo = [MockGenerator(CFG).generate(r) for r in reqs]
        for a, b in zip(tiles, solo):
            assert np.array_equal(a, b)
