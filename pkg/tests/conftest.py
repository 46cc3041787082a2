import numpy as np
import pytest

from swap_nas.domain.entities.genome import CellGenome, ConvChainGenome, ConvLayer, Edge, TransformerGenome
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.utilities.config import settings
from swap_nas.infrastructure.persistence.batches import gaussian_noise_batch, random_token_batch

TINY_IMAGE = (3, 8, 8)


@pytest.fixture(autouse=True)
def restore_settings(tmp_path):
    """Commands write engine options into the settings singleton; undo that after every test."""
    saved = settings.model_dump()
    settings.OUTPUT_DIR = str(tmp_path / "runs")
    yield
    for name, value in saved.items():
        setattr(settings, name, value)


@pytest.fixture
def tiny_settings():
    """Small genome defaults so random networks stay in the low thousands of sites."""
    settings.STEM_CHANNELS = 2
    settings.STACK_DEPTH = 1
    settings.NB201_NODES = 3
    settings.DARTS_NODES = 2
    settings.TFORM_SEQ_LEN = 4
    settings.TFORM_D_MODEL = [8, 16]
    settings.TFORM_D_FF = [8, 16, 32]
    settings.TFORM_HEADS = [1, 2]
    settings.TFORM_LAYERS = [1, 2]
    settings.IMAGE_DIMS = list(TINY_IMAGE)
    return settings


def nb201_cell(ops=("conv3x3",) * 6, stem=2, depth=1) -> CellGenome:
    pairs = [(src, dst) for dst in range(1, 4) for src in range(dst)]
    return CellGenome(
        space_id=SpaceId.NB201,
        edges=tuple(Edge(src=s, dst=d, op=op) for (s, d), op in zip(pairs, ops)),
        nodes=3,
        stem_channels=stem,
        stack_depth=depth,
    )


@pytest.fixture
def conv_cell() -> CellGenome:
    return nb201_cell()


@pytest.fixture
def mixed_cell() -> CellGenome:
    return nb201_cell(ops=("conv3x3", "skip", "conv1x1", "avgpool3x3", "conv3x3", "none"))


@pytest.fixture
def darts_cell() -> CellGenome:
    return CellGenome(
        space_id=SpaceId.DARTS_LITE,
        edges=(
            Edge(src=0, dst=2, op="sepconv3x3"),
            Edge(src=1, dst=2, op="skip"),
            Edge(src=1, dst=3, op="dilconv3x3"),
            Edge(src=2, dst=3, op="maxpool3x3"),
        ),
        nodes=2,
        stem_channels=2,
        stack_depth=1,
    )


@pytest.fixture
def small_transformer() -> TransformerGenome:
    return TransformerGenome(layers=2, heads=2, d_model=16, d_ff=32, seq_len=4, vocab=50)


@pytest.fixture
def one_conv_chain() -> ConvChainGenome:
    return ConvChainGenome(layers=(ConvLayer(channels=4, kernel=3, stride=1),))


@pytest.fixture
def noise_batch():
    return gaussian_noise_batch(8, TINY_IMAGE, seed=11)


@pytest.fixture
def token_batch():
    return random_token_batch(8, 4, 50, seed=11)


@pytest.fixture
def no_norm():
    settings.NORM_MODE = NormMode.NONE.value
    return NormMode.NONE


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
