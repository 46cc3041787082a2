import numpy as np
import pytest
import torch.nn as nn

from swap_nas.domain.entities.genome import ConvChainGenome, ConvLayer, TransformerGenome
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import AppRuntimeException
from swap_nas.domain.netgraph.operators import random_genome
from swap_nas.domain.scoring.patterns import standard_pattern_score, swap_score
from swap_nas.infrastructure.engine.counting import count_flops, count_macs, count_parameters, count_sites_formula
from swap_nas.infrastructure.engine.instance import forward_capture, instantiate
from swap_nas.infrastructure.persistence.batches import gaussian_noise_batch, random_token_batch
from tests.conftest import TINY_IMAGE


def _reference_cell_counts(norm: bool) -> tuple[int, int]:
    """Per-layer hand sum for the all-conv3x3 cell net: stem 2, one cell per stage, 3x8x8 in, 10 classes."""
    macs = params = 0

    def conv(c_in: int, c_out: int, k: int, side: int) -> None:
        nonlocal macs, params
        macs += c_in * k * k * c_out * side * side
        params += c_in * k * k * c_out

    def bn(c: int) -> None:
        nonlocal params
        params += 2 * c if norm else 0

    conv(3, 2, 3, 8)
    bn(2)
    for stage, (c, side) in enumerate(((2, 8), (4, 4), (8, 2))):
        if stage:
            conv(c // 2, c, 3, side)
            bn(c)
            conv(c, c, 3, side)
            bn(c)
            conv(c // 2, c, 1, side)  # shortcut
        for _ in range(6):
            conv(c, c, 3, side)
            bn(c)
    bn(8)
    macs += 8 * 10
    params += 8 * 10 + 10
    return macs, params


class TestCounting:
    def test_linear(self):
        layer = nn.Linear(10, 5)
        assert count_parameters(layer) == 55
        assert count_macs(layer, (10,)) == 50

    def test_conv(self):
        conv = nn.Conv2d(3, 4, 3)
        assert count_parameters(conv) == 112
        assert count_macs(conv, (3, 8, 8)) == 3888

    def test_nb201_reference_network(self, conv_cell):
        macs, params = _reference_cell_counts(norm=True)
        n = instantiate(conv_cell, 0, TINY_IMAGE, norm=NormMode.BATCH, num_classes=10)
        assert n.flop_count == macs
        assert n.param_count == params
        assert n.params_m == pytest.approx(params / 1e6)

    def test_normalisation_off_drops_affine_parameters(self, conv_cell):
        macs, params = _reference_cell_counts(norm=False)
        n = instantiate(conv_cell, 0, TINY_IMAGE, norm=NormMode.NONE, num_classes=10)
        assert n.flop_count == macs
        # every BatchNorm weight and bias is gone
        assert n.param_count == params

    def test_flops_at_other_dims(self, one_conv_chain):
        n = instantiate(one_conv_chain, 0, TINY_IMAGE)
        assert n.flop_count == 3888 + 40
        assert count_flops(n, (3, 10, 10)) == 3 * 9 * 4 * 64 + 40


class TestSiteFormula:
    def test_chain(self, one_conv_chain):
        n = instantiate(one_conv_chain, 0, TINY_IMAGE)
        assert count_sites_formula(n) == 144

    def test_chain_matches_instrumented_count(self, noise_batch):
        g = ConvChainGenome(layers=(ConvLayer(channels=4, kernel=3, stride=1), ConvLayer(channels=8, kernel=3, stride=2)))
        n = instantiate(g, 0, TINY_IMAGE)
        # 4*6*6 + 8*2*2
        assert count_sites_formula(n) == 176
        assert forward_capture(n, noise_batch).site_count == 176

    def test_transformer(self):
        g = TransformerGenome(layers=2, heads=2, d_model=16, d_ff=64, seq_len=16, vocab=50)
        n = instantiate(g, 0)
        assert count_sites_formula(n) == 2048
        assert forward_capture(n, random_token_batch(3, 16, 50, seed=0)).site_count == 2048

    def test_empty_chain_has_no_sites(self):
        assert count_sites_formula(instantiate(ConvChainGenome(), 0, TINY_IMAGE)) == 0

    def test_padded_cells_are_rejected(self, conv_cell):
        n = instantiate(conv_cell, 0, TINY_IMAGE)
        with pytest.raises(AppRuntimeException, match="inapplicable to padded convolutions"):
            count_sites_formula(n)


class TestInstantiate:
    def test_degenerate_kernel(self):
        g = ConvChainGenome(layers=(ConvLayer(channels=4, kernel=5, stride=1),))
        with pytest.raises(AppRuntimeException, match="degenerate shape"):
            instantiate(g, 0, (3, 4, 4))

    def test_transformer_dims_must_match_seq_len(self, small_transformer):
        with pytest.raises(AppRuntimeException, match="shape mismatch"):
            instantiate(small_transformer, 0, (8,))

    def test_cell_needs_image_dims(self, conv_cell):
        with pytest.raises(AppRuntimeException, match="shape mismatch"):
            instantiate(conv_cell, 0, (16,))

    def test_unsupported_precision(self, conv_cell):
        with pytest.raises(AppRuntimeException, match="unsupported precision"):
            instantiate(conv_cell, 0, TINY_IMAGE, precision="float16")


class TestForwardCapture:
    def test_shape_and_values(self, conv_cell, noise_batch):
        record = forward_capture(instantiate(conv_cell, 0, TINY_IMAGE), noise_batch)
        assert record.matrix.shape == (record.site_count, 8)
        assert set(np.unique(record.matrix)) <= {0, 1}
        assert sum(count for _, count in record.per_layer_sites) == record.site_count

    def test_gelu_sites_can_be_negative(self, small_transformer, token_batch):
        record = forward_capture(instantiate(small_transformer, 0), token_batch)
        assert set(np.unique(record.matrix)) <= {-1, 0, 1}
        assert (record.matrix == -1).any()

    def test_same_seed_same_matrix(self, mixed_cell, noise_batch):
        a = forward_capture(instantiate(mixed_cell, 5, TINY_IMAGE), noise_batch)
        b = forward_capture(instantiate(mixed_cell, 5, TINY_IMAGE), noise_batch)
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_init_seed_changes_weights(self, conv_cell, noise_batch):
        a = forward_capture(instantiate(conv_cell, 1, TINY_IMAGE), noise_batch)
        b = forward_capture(instantiate(conv_cell, 2, TINY_IMAGE), noise_batch)
        assert a.site_count == b.site_count
        assert not np.array_equal(a.matrix, b.matrix)

    def test_darts_cell_runs(self, darts_cell, noise_batch):
        record = forward_capture(instantiate(darts_cell, 0, TINY_IMAGE), noise_batch)
        assert record.site_count > 0

    def test_noise_input_bypasses_embedding(self, small_transformer):
        batch = gaussian_noise_batch(4, (4, 16), seed=3)
        record = forward_capture(instantiate(small_transformer, 0), batch)
        assert record.sample_count == 4

    def test_batch_dims_must_match(self, one_conv_chain):
        n = instantiate(one_conv_chain, 0, TINY_IMAGE)
        with pytest.raises(AppRuntimeException, match="shape mismatch"):
            forward_capture(n, gaussian_noise_batch(2, (3, 16, 16), seed=0))

    def test_token_ids_beyond_vocab(self, small_transformer):
        n = instantiate(small_transformer, 0)
        with pytest.raises(AppRuntimeException, match="exceeds vocab"):
            forward_capture(n, random_token_batch(2, 4, 500, seed=0))


@pytest.mark.usefixtures("tiny_settings")
class TestRandomNetworks:
    def test_formula_matches_instrumented_count_on_chains(self):
        batch = gaussian_noise_batch(2, (3, 32, 32), seed=0)
        checked = 0
        for seed in range(200):
            g = random_genome(SpaceId.CONV_CHAIN, seed)
            try:
                n = instantiate(g, seed, (3, 32, 32))
            except AppRuntimeException:
                continue
            assert count_sites_formula(n) == forward_capture(n, batch).site_count
            checked += 1
            if checked == 20:
                break
        assert checked == 20

    def test_formula_matches_instrumented_count_on_transformers(self):
        for seed in range(20):
            g = random_genome(SpaceId.TRANSFORMER, seed)
            n = instantiate(g, seed)
            batch = random_token_batch(2, g.seq_len, g.vocab, seed=seed)
            assert count_sites_formula(n) == forward_capture(n, batch).site_count

    @pytest.mark.parametrize("space", ["NB201", "DLITE", "CHAIN", "TFORM"])
    def test_pattern_bounds(self, space, noise_batch, token_batch):
        if space == "CHAIN":
            noise_batch = gaussian_noise_batch(8, (3, 16, 16), seed=11)
        checked = 0
        for seed in range(200):
            g = random_genome(space, seed, vocab=50)
            batch = token_batch if space == "TFORM" else noise_batch
            try:
                n = instantiate(g, seed, (g.seq_len,) if space == "TFORM" else batch.dims)
                record = forward_capture(n, batch)
            except AppRuntimeException:
                continue
            checked += 1
            if record.site_count == 0:
                continue
            alphabet = 3 if space == "TFORM" else 2
            assert standard_pattern_score(record).distinct_count <= batch.size
            assert swap_score(record).distinct_count <= min(record.site_count, alphabet**batch.size)
            if space != "TFORM":
                assert not (record.matrix == -1).any()
            if checked == 50:
                break
        assert checked == 50
