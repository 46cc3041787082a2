from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from swap_nas.domain.entities.network import InputBatch
from swap_nas.domain.enums.batch_kind import BatchKind
from swap_nas.domain.exceptions.base_exception import AppBadRequestException
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.infrastructure.persistence.batches import (
    HEADER_SIZE,
    VIEW_SCALE,
    center_crop,
    gaussian_noise_batch,
    load_batch,
    make_batch,
    read_batch,
    subset,
    view_amplitudes,
    write_batch,
)


class TestGenerators:
    def test_noise_is_seeded_philox(self):
        batch = gaussian_noise_batch(4, (3, 8, 8), seed=42)
        expected = np.random.Generator(np.random.Philox(key=42)).standard_normal((4, 3, 8, 8), dtype=np.float32)
        np.testing.assert_array_equal(batch.data, expected)

    def test_different_seeds_differ(self):
        a = gaussian_noise_batch(4, (3, 8, 8), seed=1)
        b = gaussian_noise_batch(4, (3, 8, 8), seed=2)
        assert not np.array_equal(a.data, b.data)

    def test_smaller_batches_are_prefixes(self):
        big = gaussian_noise_batch(16, (3, 8, 8), seed=7)
        np.testing.assert_array_equal(subset(big, 4).data, big.data[:4])

    def test_image_samples_share_one_smooth_scene(self):
        images = make_batch(BatchKind.IMAGE, 8, (3, 16, 16), seed=0).data
        noise = make_batch(BatchKind.GAUSSIAN_NOISE, 8, (3, 16, 16), seed=0).data
        assert np.corrcoef(images[0].ravel(), images[7].ravel())[0, 1] > 0.9
        assert abs(np.corrcoef(noise[0].ravel(), noise[7].ravel())[0, 1]) < 0.3

        neighbours = np.corrcoef(images[:, :, :, :-1].ravel(), images[:, :, :, 1:].ravel())[0, 1]
        assert neighbours > 0.5

    def test_image_variation_shrinks_then_cycles(self):
        amplitudes = view_amplitudes(10)
        assert amplitudes[0] == pytest.approx(VIEW_SCALE)
        np.testing.assert_allclose(amplitudes[1:8] / amplitudes[:7], 0.5)
        assert amplitudes[8] == amplitudes[0]

    def test_smaller_image_batches_are_prefixes(self):
        big = make_batch(BatchKind.IMAGE, 16, (3, 16, 16), seed=7)
        small = make_batch(BatchKind.IMAGE, 4, (3, 16, 16), seed=7)
        np.testing.assert_allclose(small.data, big.data[:4], rtol=0, atol=1e-6)

    def test_tokens_stay_below_vocab(self):
        batch = make_batch("tokens", 8, (6,), seed=0, vocab=20)
        assert batch.data.dtype == np.uint32
        assert batch.data.shape == (8, 6)
        assert int(batch.data.max()) < 20

    def test_zero_size(self):
        with pytest.raises(AppBadRequestException, match="batch size"):
            gaussian_noise_batch(0, (3, 8, 8), seed=0)

    def test_oversized_subset(self):
        with pytest.raises(AppBadRequestException):
            subset(gaussian_noise_batch(2, (3, 8, 8), seed=0), 3)

    def test_image_needs_three_dims(self):
        with pytest.raises(AppBadRequestException, match="CxHxW"):
            make_batch(BatchKind.IMAGE, 2, (8, 8), seed=0)

    def test_batches_are_immutable_and_shape_checked(self):
        batch = gaussian_noise_batch(2, (3, 4, 4), seed=0)
        with pytest.raises(ValidationError):
            batch.seed = 1
        with pytest.raises(ValidationError, match="at least one sample"):
            InputBatch(kind=BatchKind.GAUSSIAN_NOISE, data=np.zeros((0, 3), dtype=np.float32))


class TestCrop:
    def test_center(self):
        batch = make_batch(BatchKind.GAUSSIAN_NOISE, 2, (3, 8, 8), seed=0)
        cropped = center_crop(batch, 4, 4)
        assert cropped.dims == (3, 4, 4)
        np.testing.assert_array_equal(cropped.data, batch.data[:, :, 2:6, 2:6])

    def test_larger_than_source(self):
        batch = make_batch(BatchKind.GAUSSIAN_NOISE, 2, (3, 8, 8), seed=0)
        with pytest.raises(AppBadRequestException, match="larger than source"):
            center_crop(batch, 16, 16)

    def test_tokens_cannot_be_cropped(self, token_batch):
        with pytest.raises(AppBadRequestException):
            center_crop(token_batch, 2, 2)


class TestFiles:
    def test_image_file(self, tmp_path, noise_batch):
        path = write_batch(str(tmp_path / "noise.bin"), noise_batch)
        raw = Path(path).read_bytes()
        assert raw[:4] == b"SWPI"
        assert len(raw) == HEADER_SIZE + 8 * 3 * 8 * 8 * 4

        loaded = read_batch(path)
        assert loaded.kind is BatchKind.IMAGE
        assert loaded.source_path == path
        np.testing.assert_array_equal(loaded.data, noise_batch.data)

    def test_token_file(self, tmp_path, token_batch):
        path = write_batch(str(tmp_path / "tokens.bin"), token_batch)
        raw = Path(path).read_bytes()
        assert raw[:4] == b"SWPT"
        assert len(raw) == HEADER_SIZE + 8 * 4 * 4
        np.testing.assert_array_equal(read_batch(path).data, token_batch.data)

    def test_missing(self, tmp_path):
        with pytest.raises(AppBadRequestException, match="not found"):
            read_batch(str(tmp_path / "absent.bin"))

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.bin"
        path.write_bytes(b"SWPI\x01")
        with pytest.raises(AppBadRequestException, match="truncated header"):
            read_batch(str(path))

    def test_unknown_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"XXXX" + bytes(12))
        with pytest.raises(AppBadRequestException, match="unknown magic"):
            read_batch(str(path))

    def test_payload_size_mismatch(self, tmp_path, noise_batch):
        path = write_batch(str(tmp_path / "noise.bin"), noise_batch)
        with open(path, "ab") as file:
            file.write(b"\x00")
        with pytest.raises(AppBadRequestException, match="payload bytes"):
            read_batch(path)

    def test_load_from_spec(self, tmp_path, noise_batch):
        path = write_batch(str(tmp_path / "noise.bin"), noise_batch)
        loaded = load_batch(BatchSpec(size=3, dims=(3, 8, 8), path=path))
        np.testing.assert_array_equal(loaded.data, noise_batch.data[:3])

    def test_load_generated(self):
        spec = BatchSpec(size=4, dims=(3, 8, 8), seed=9)
        np.testing.assert_array_equal(load_batch(spec).data, gaussian_noise_batch(4, (3, 8, 8), seed=9).data)
