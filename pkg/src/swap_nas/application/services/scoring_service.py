# src/application/services/scoring_service.py
from __future__ import annotations

import logging
from typing import Iterable

from swap_nas.domain.entities.genome import Genome, TransformerGenome
from swap_nas.domain.entities.network import InputBatch, NetworkInstance
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.netgraph.codec import encode
from swap_nas.domain.schemas.score_schema import RegularisationParams, ScoreReport
from swap_nas.domain.scoring.patterns import RowHasher, row_hash64, standard_pattern_score, swap_score
from swap_nas.domain.scoring.regularisation import regularised_swap, regulariser
from swap_nas.domain.utilities.config import settings
from swap_nas.infrastructure.engine.instance import forward_capture, instantiate

logger = logging.getLogger(__name__)


def score_all(
    n: NetworkInstance,
    b: InputBatch,
    p: RegularisationParams,
    *,
    hasher: RowHasher = row_hash64,
) -> ScoreReport:
    """Every metric from a single forward capture."""
    record = forward_capture(n, b)
    swap = swap_score(record, hasher=hasher)
    standard = standard_pattern_score(record, hasher=hasher)
    f_theta = regulariser(n.params_m, p)

    report = ScoreReport(
        genome=encode(n.genome),
        seed=n.init_seed,
        S=b.size,
        V=record.site_count,
        swap=swap.distinct_count,
        reg_swap=regularised_swap(swap.distinct_count, n.params_m, p),
        standard=standard.distinct_count,
        params_m=n.params_m,
        flops=n.flop_count,
        f_theta=f_theta,
        reg_params=n.params_m * f_theta,
        reg_flops=n.flop_count * f_theta,
        batch=b.describe(),
    )
    logger.debug(f"Scored {report.genome}: swap={report.swap} V={report.sites} standard={report.standard}")
    return report


def token_vocab(genomes: Iterable[Genome]) -> int:
    """Vocabulary size every transformer in `genomes` accepts, for a shared token batch."""
    vocabs = [g.vocab for g in genomes if isinstance(g, TransformerGenome)]
    return min(vocabs) if vocabs else settings.TFORM_VOCAB


def network_dims(g: Genome, b: InputBatch) -> tuple[int, ...]:
    """Input dims to build `g` for batch `b`."""
    if isinstance(g, TransformerGenome):
        return (g.seq_len,)
    return b.dims


def score_genome(
    g: Genome,
    b: InputBatch,
    p: RegularisationParams,
    *,
    init_seed: int = 0,
    norm: NormMode | str | None = None,
    precision: str | None = None,
    hasher: RowHasher = row_hash64,
) -> ScoreReport:
    n = instantiate(g, init_seed, network_dims(g, b), norm=norm, precision=precision)
    return score_all(n, b, p, hasher=hasher)
