import pytest

from swap_nas.domain.entities.genome import ConvChainGenome
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import AppBadRequestException, GenomeParseException
from swap_nas.domain.netgraph.codec import decode, encode
from swap_nas.domain.netgraph.operators import random_genome

NB201_EXAMPLE = "space=NB201;C=16,N=5;|conv3x3~0|+|skip~0|conv1x1~1|+|none~0|avgpool3x3~1|conv3x3~2|"


class TestEncode:
    def test_nb201_layout(self, mixed_cell):
        assert encode(mixed_cell) == (
            "space=NB201;C=2,N=1;|conv3x3~0|+|skip~0|conv1x1~1|+|avgpool3x3~0|conv3x3~1|none~2|"
        )

    def test_darts_groups_start_after_inputs(self, darts_cell):
        assert encode(darts_cell) == "space=DLITE;C=2,N=1;|sepconv3x3~0|skip~1|+|dilconv3x3~1|maxpool3x3~2|"

    def test_transformer(self, small_transformer):
        assert encode(small_transformer) == "space=TFORM;L=2,H=2,DM=16,DF=32,T=4,V=50"

    def test_chain(self, one_conv_chain):
        assert encode(one_conv_chain) == "space=CHAIN;|4:3:1|"
        assert encode(ConvChainGenome()) == "space=CHAIN;|"


class TestDecode:
    def test_documented_example(self):
        g = decode(NB201_EXAMPLE)
        assert g.space_id is SpaceId.NB201
        assert (g.stem_channels, g.stack_depth, g.nodes) == (16, 5, 3)
        assert [(e.src, e.dst, e.op) for e in g.incoming(3)] == [(0, 3, "none"), (1, 3, "avgpool3x3"), (2, 3, "conv3x3")]
        assert encode(g) == NB201_EXAMPLE

    @pytest.mark.parametrize("space", list(SpaceId))
    def test_round_trip(self, space):
        for seed in range(25):
            g = random_genome(space, seed)
            assert decode(encode(g)) == g

    def test_empty_chain_round_trip(self):
        assert decode("space=CHAIN;|") == ConvChainGenome()

    def test_empty_string(self):
        with pytest.raises(GenomeParseException) as info:
            decode("")
        assert info.value.position == 0
        assert "parse error at offset 0" in info.value.detail

    def test_unknown_space_points_at_token(self):
        with pytest.raises(GenomeParseException) as info:
            decode("space=NB101;C=1,N=1;|skip~0|")
        assert info.value.position == len("space=")

    @pytest.mark.parametrize(
        "text, position",
        [
            ("space=NB201;C=2,N=1;|conv3x3~0", len("space=NB201;C=2,N=1;|conv3x3~0")),
            ("space=NB201;C=02,N=1;|skip~0|", len("space=NB201;C=0")),
            ("space=TFORM;L=2,H=2,DM=16,DF=32,T=4", len("space=TFORM;L=2,H=2,DM=16,DF=32,T=4")),
            ("space=CHAIN;|4:3|", len("space=CHAIN;|4:3")),
            ("space=NB201;C=2,N=1;|Conv~0|", len("space=NB201;C=2,N=1;|")),
        ],
    )
    def test_syntax_errors_report_offset(self, text, position):
        with pytest.raises(GenomeParseException) as info:
            decode(text)
        assert info.value.position == position

    def test_trailing_characters(self):
        with pytest.raises(GenomeParseException, match="trailing characters"):
            decode("space=TFORM;L=2,H=2,DM=16,DF=32,T=4,V=50;")

    @pytest.mark.parametrize(
        "text",
        [
            "space=NB201;C=2,N=1;|bogus~0|",
            "space=NB201;C=2,N=1;|skip~1|",
            "space=DLITE;C=2,N=1;|skip~0|",
            "space=TFORM;L=2,H=3,DM=16,DF=32,T=4,V=50",
            "space=NB201;C=0,N=1;|skip~0|",
        ],
    )
    def test_semantic_errors_are_parse_errors(self, text):
        with pytest.raises(GenomeParseException, match="invalid genome"):
            decode(text)

    def test_parse_errors_are_bad_requests(self):
        with pytest.raises(AppBadRequestException):
            decode("nonsense")
