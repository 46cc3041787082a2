# src/infrastructure/persistence/batches.py
"""
Input batches: seeded generators plus the binary file formats.

Image file:  b"SWPI" + uint32 S + uint16 C, H, W + uint16 0 (16-byte little-endian header), then float32 S*C*H*W
Token file:  b"SWPT" + uint32 S, T + 4 zero bytes (16-byte header), then uint32 S*T

Gaussian noise is numpy.random.Generator(numpy.random.Philox(key=seed))
.standard_normal((S, *dims), dtype=float32).
Synthetic images are one smooth scene shared by the batch plus a smooth
per-sample field whose amplitude halves from sample to sample, cycling every 8.
"""
from __future__ import annotations

import os
import struct
from typing import Sequence

import numpy as np
from scipy import ndimage

from swap_nas.domain.entities.network import InputBatch
from swap_nas.domain.enums.batch_kind import BatchKind
from swap_nas.domain.exceptions.base_exception import AppBadRequestException
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.domain.utilities.seeding import make_rng

IMAGE_MAGIC = b"SWPI"
TOKEN_MAGIC = b"SWPT"
HEADER_SIZE = 16

# synthetic images: one shared scene per batch plus per-sample variation
IMAGE_BLUR = 1.5  # pixels
VIEW_SCALE = 0.3
VIEW_DECAY = 0.5
VIEW_LEVELS = 8


def _check_size(size: int) -> None:
    if size < 1:
        raise AppBadRequestException(f"batch size must be >= 1, got {size}")


def gaussian_noise_batch(size: int, dims: Sequence[int], seed: int) -> InputBatch:
    _check_size(size)
    data = make_rng(seed).standard_normal((size, *dims), dtype=np.float32)
    return InputBatch(kind=BatchKind.GAUSSIAN_NOISE, data=data, seed=seed)


def _smooth_fields(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Blurred white noise, rescaled to zero mean and unit std per sample and channel."""
    noise = rng.standard_normal(shape)
    fields = ndimage.gaussian_filter(noise, sigma=(0, 0, IMAGE_BLUR, IMAGE_BLUR), mode="wrap")
    fields -= fields.mean(axis=(2, 3), keepdims=True)
    std = fields.std(axis=(2, 3), keepdims=True)
    return fields / np.where(std > 0, std, 1.0)


def view_amplitudes(size: int) -> np.ndarray:
    return VIEW_SCALE * VIEW_DECAY ** (np.arange(size) % VIEW_LEVELS)


def synthetic_image_batch(size: int, dims: Sequence[int], seed: int) -> InputBatch:
    """
    Views of one smooth random scene. Sample s is the scene plus its own smooth
    field scaled by view_amplitudes(S)[s], so a batch runs from clearly distinct
    images down to near-duplicates.
    Each sample depends only on (seed, s): a smaller batch is a prefix of a larger one.
    """
    _check_size(size)
    c, h, w = dims
    rng = make_rng(seed)
    scene = _smooth_fields(rng, (1, c, h, w))
    views = _smooth_fields(rng, (size, c, h, w))
    pixels = scene + view_amplitudes(size)[:, None, None, None] * views
    return InputBatch(kind=BatchKind.IMAGE, data=pixels.astype(np.float32), seed=seed)


def random_token_batch(size: int, seq_len: int, vocab: int, seed: int) -> InputBatch:
    _check_size(size)
    data = make_rng(seed).integers(0, vocab, size=(size, seq_len), dtype=np.uint32)
    return InputBatch(kind=BatchKind.TOKENS, data=data, seed=seed)


def make_batch(kind: BatchKind | str, size: int, dims: Sequence[int], seed: int, *, vocab: int = 1000) -> InputBatch:
    kind = BatchKind(kind)
    if kind is BatchKind.GAUSSIAN_NOISE:
        return gaussian_noise_batch(size, dims, seed)
    if kind is BatchKind.IMAGE:
        if len(dims) != 3:
            raise AppBadRequestException(f"image batches need CxHxW dims, got {tuple(dims)}")
        return synthetic_image_batch(size, dims, seed)
    if len(dims) != 1:
        raise AppBadRequestException(f"token batches need (T,) dims, got {tuple(dims)}")
    return random_token_batch(size, dims[0], vocab, seed)


def subset(batch: InputBatch, size: int) -> InputBatch:
    """The first `size` samples, so smaller batches are nested in larger ones."""
    _check_size(size)
    if size > batch.size:
        raise AppBadRequestException(f"cannot take {size} samples from a batch of {batch.size}")
    return InputBatch(kind=batch.kind, data=batch.data[:size], seed=batch.seed, source_path=batch.source_path)


def center_crop(batch: InputBatch, height: int, width: int) -> InputBatch:
    if batch.kind is BatchKind.TOKENS or batch.data.ndim != 4:
        raise AppBadRequestException("only image-like batches can be cropped")
    _, _, h, w = batch.data.shape
    if height > h or width > w or height < 1 or width < 1:
        raise AppBadRequestException(f"crop {height}x{width} larger than source image {h}x{w}")
    top, left = (h - height) // 2, (w - width) // 2
    data = np.ascontiguousarray(batch.data[:, :, top:top + height, left:left + width])
    return InputBatch(kind=batch.kind, data=data, seed=batch.seed, source_path=batch.source_path)


def write_batch(path: str, batch: InputBatch) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if batch.kind is BatchKind.TOKENS:
        s, t = batch.data.shape
        header = TOKEN_MAGIC + struct.pack("<III", s, t, 0)
        payload = batch.data.astype("<u4").tobytes()
    else:
        if batch.data.ndim != 4:
            raise AppBadRequestException("image files hold SxCxHxW batches")
        s, c, h, w = batch.data.shape
        header = IMAGE_MAGIC + struct.pack("<IHHHH", s, c, h, w, 0)
        payload = batch.data.astype("<f4").tobytes()
    with open(path, "wb") as file:
        file.write(header)
        file.write(payload)
    return path


def read_batch(path: str) -> InputBatch:
    if not os.path.isfile(path):
        raise AppBadRequestException(f"batch file not found: {path}")
    with open(path, "rb") as file:
        raw = file.read()
    if len(raw) < HEADER_SIZE:
        raise AppBadRequestException(f"{path}: truncated header")

    magic, body = raw[:4], raw[HEADER_SIZE:]
    if magic == IMAGE_MAGIC:
        s, c, h, w, _ = struct.unpack("<IHHHH", raw[4:HEADER_SIZE])
        shape, dtype, kind = (s, c, h, w), "<f4", BatchKind.IMAGE
    elif magic == TOKEN_MAGIC:
        s, t, _ = struct.unpack("<III", raw[4:HEADER_SIZE])
        shape, dtype, kind = (s, t), "<u4", BatchKind.TOKENS
    else:
        raise AppBadRequestException(f"{path}: unknown magic {magic!r}")

    expected = int(np.prod(shape)) * 4
    if len(body) != expected:
        raise AppBadRequestException(f"{path}: expected {expected} payload bytes, found {len(body)}")
    data = np.frombuffer(body, dtype=dtype).reshape(shape)
    data = data.astype(np.float32) if kind is BatchKind.IMAGE else data.astype(np.uint32)
    return InputBatch(kind=kind, data=data, source_path=path)


def load_batch(spec: BatchSpec, *, vocab: int = 1000) -> InputBatch:
    """Generate the batch a spec describes, or read it and keep the first `spec.size` samples."""
    if spec.path:
        return subset(read_batch(spec.path), spec.size)
    return make_batch(spec.kind, spec.size, spec.dims, spec.seed, vocab=vocab)
