# src/application/services/harness_service.py
"""
Evaluation drivers: metric/ground-truth correlation, batch-size and
input-dimension ablations, and the brute-force oracle check.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from swap_nas.application.services.scoring_service import network_dims, score_all, score_genome, token_vocab
from swap_nas.application.workers.scoring_pool import run_jobs
from swap_nas.domain.entities.genome import Genome
from swap_nas.domain.entities.network import ActivationRecord, InputBatch
from swap_nas.domain.enums.batch_kind import BatchKind
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import AppBadRequestException, AppBaseException
from swap_nas.domain.netgraph.codec import decode, encode
from swap_nas.domain.netgraph.operators import parse_space, random_genome
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.domain.schemas.harness_schema import (
    METRICS,
    AblationRow,
    AblationSummary,
    CorrelationReport,
    GroundTruthTable,
    OracleReport,
)
from swap_nas.domain.schemas.score_schema import RegularisationParams, ScoreReport
from swap_nas.domain.scoring.patterns import (
    naive_standard_score,
    naive_swap_score,
    standard_pattern_score,
    swap_score,
)
from swap_nas.domain.utilities.config import settings
from swap_nas.domain.utilities.seeding import derive_seed
from swap_nas.domain.utilities.statistics import mean_and_stderr, spearman
from swap_nas.infrastructure.engine.instance import forward_capture, instantiate
from swap_nas.infrastructure.persistence.batches import center_crop, load_batch, make_batch, subset

logger = logging.getLogger(__name__)

ORACLE_V_LIMIT = 5000
ORACLE_SIZES = (4, 8, 16)
ORACLE_IMAGE_DIMS = (3, 8, 8)
ORACLE_SEQ_LEN = 4
ORACLE_STEM = 2

# (record) -> (swap, standard)
PatternScorer = Callable[[ActivationRecord], tuple[int, int]]


def metric_value(report: ScoreReport, metric: str) -> float:
    if metric == "params":
        return report.params_m
    return float(getattr(report, metric))


def _sample_genomes(space: SpaceId, count: int, seed: int) -> list[Genome]:
    return [random_genome(space, derive_seed(seed, "sample", i)) for i in range(count)]


# ---------- correlation ----------
def _score_rows(
    genomes: Sequence[tuple[str, Genome]],
    batch: InputBatch,
    reg: RegularisationParams,
    init_seed: int,
    threads: Optional[int],
) -> dict[str, ScoreReport]:
    jobs = [
        (lambda g=g: score_genome(g, batch, reg, init_seed=init_seed))
        for _, g in genomes
    ]
    scored = {}
    for (arch_id, _), result in zip(genomes, run_jobs(jobs, threads)):
        if result.ok:
            scored[arch_id] = result.value
        else:
            logger.warning(f"Architecture {arch_id} skipped: {result.error.detail}")
    return scored


def _correlate(
    table: GroundTruthTable,
    batch_for_seed: Callable[[int, int], InputBatch],
    seeds: Sequence[int],
    reg: RegularisationParams,
    threads: Optional[int],
    setting: str,
) -> list[CorrelationReport]:
    if not seeds:
        raise AppBadRequestException("at least one seed is required")

    genomes: list[tuple[str, Genome]] = []
    accuracy: dict[str, float] = {}
    skipped = 0
    for row in sorted(table.rows, key=lambda r: r.arch_id):
        try:
            genomes.append((row.arch_id, decode(row.encoding)))
            accuracy[row.arch_id] = row.accuracy
        except AppBadRequestException as exc:
            skipped += 1
            logger.warning(f"Row {row.arch_id} skipped: {exc.detail}")
    vocab = token_vocab(g for _, g in genomes)

    per_metric: dict[str, list[Optional[float]]] = {m: [] for m in METRICS}
    errors: dict[str, str] = {}
    n_used = 0
    for seed in seeds:
        scored = _score_rows(genomes, batch_for_seed(seed, vocab), reg, seed, threads)
        ids = sorted(scored)
        n_used = max(n_used, len(ids))
        ys = [accuracy[i] for i in ids]
        for metric in METRICS:
            try:
                rho = spearman([metric_value(scored[i], metric) for i in ids], ys)
            except AppBadRequestException as exc:
                rho = None
                errors.setdefault(metric, exc.detail)
            per_metric[metric].append(rho)

    reports = []
    for metric in METRICS:
        values = [v for v in per_metric[metric] if v is not None]
        mean, std_err = mean_and_stderr(values) if values else (None, None)
        report = CorrelationReport(
            metric=metric,
            rho=max(-1.0, min(1.0, mean)) if mean is not None else None,
            n=n_used,
            seeds=list(seeds),
            per_seed=per_metric[metric],
            std_err=std_err,
            skipped=skipped + len(genomes) - n_used,
            setting=setting,
            error=errors.get(metric),
        )
        logger.info(f"[{setting}] {metric}: rho={report.rho} over {len(values)}/{len(seeds)} seeds (n={n_used})")
        reports.append(report)
    return reports


def _table_vocab(table: GroundTruthTable) -> int:
    genomes = []
    for row in table.rows:
        try:
            genomes.append(decode(row.encoding))
        except AppBadRequestException:
            continue
    return token_vocab(genomes)


def _seeded(spec: BatchSpec, seed: int) -> BatchSpec:
    return spec if spec.path else spec.model_copy(update={"seed": seed})


def correlate_metrics(
    table: GroundTruthTable,
    spec: BatchSpec,
    seeds: Sequence[int],
    *,
    reg: RegularisationParams = RegularisationParams(),
    threads: Optional[int] = None,
) -> list[CorrelationReport]:
    """
    Spearman rho of every metric against accuracy, once per seed (batch and
    weight-init seed), then mean and standard error over seeds.
    """
    return _correlate(
        table,
        lambda seed, vocab: load_batch(_seeded(spec, seed), vocab=vocab),
        seeds,
        reg,
        threads,
        spec.describe(),
    )


def correlation_rows(reports: Sequence[CorrelationReport]) -> list[AblationRow]:
    rows = []
    for report in reports:
        for seed, rho in zip(report.seeds, report.per_seed):
            if rho is not None:
                rows.append(AblationRow(metric=report.metric, setting=report.setting, seed=seed, value=rho))
    return rows


# ---------- ablations ----------
def _summarise(rows: list[AblationRow]) -> list[AblationSummary]:
    keys: list[tuple[str, str]] = []
    for row in rows:
        if (row.setting, row.metric) not in keys:
            keys.append((row.setting, row.metric))
    summary = []
    for setting, metric in keys:
        values = [r.value for r in rows if r.setting == setting and r.metric == metric]
        mean, std_err = mean_and_stderr(values)
        summary.append(AblationSummary(setting=setting, metric=metric, mean=mean, std_err=std_err, n=len(values)))
    return summary


def _from_correlations(reports: list[CorrelationReport]) -> tuple[list[AblationSummary], list[AblationRow]]:
    summary = [
        AblationSummary(
            setting=r.setting,
            metric=f"rho_{r.metric}",
            mean=r.rho,
            std_err=r.std_err,
            n=r.n,
            error=r.error,
        )
        for r in reports
    ]
    rows = [row.model_copy(update={"metric": f"rho_{row.metric}"}) for row in correlation_rows(reports)]
    return summary, rows


def _distribution_rows(
    genomes: Sequence[Genome],
    batch: InputBatch,
    setting: str,
    seed: int,
    reg: RegularisationParams,
    threads: Optional[int],
) -> list[AblationRow]:
    jobs = [(lambda g=g: score_genome(g, batch, reg, init_seed=seed)) for g in genomes]
    rows = []
    for result in run_jobs(jobs, threads):
        if not result.ok:
            logger.warning(f"[{setting}] net {result.index} skipped: {result.error.detail}")
            continue
        report = result.value
        for metric, value in (("swap", report.swap), ("standard", report.standard), ("V", report.sites)):
            rows.append(AblationRow(metric=metric, setting=setting, seed=seed, value=float(value)))
    return rows


def ablate_batch_size(
    space: SpaceId | str,
    sizes: Sequence[int],
    seeds: Sequence[int],
    *,
    spec: BatchSpec = BatchSpec(),
    table: Optional[GroundTruthTable] = None,
    n_nets: int = 10,
    reg: RegularisationParams = RegularisationParams(),
    threads: Optional[int] = None,
) -> tuple[list[AblationSummary], list[AblationRow]]:
    """
    One master batch of max(sizes) samples per seed; each size uses its nested
    prefix. With ground truth the rows are correlations, otherwise metric
    distributions over `n_nets` sampled networks.
    """
    if not sizes or min(sizes) < 1:
        raise AppBadRequestException("batch sizes must be >= 1")
    if not seeds:
        raise AppBadRequestException("at least one seed is required")
    space = parse_space(space)
    largest = max(sizes)
    vocab = _table_vocab(table) if table is not None else settings.TFORM_VOCAB
    master = {
        seed: load_batch(_seeded(spec, seed).model_copy(update={"size": largest}), vocab=vocab)
        for seed in seeds
    }

    summary: list[AblationSummary] = []
    rows: list[AblationRow] = []
    for size in sizes:
        setting = f"S={size}"
        if table is not None:
            reports = _correlate(table, lambda seed, _vocab: subset(master[seed], size), seeds, reg, threads, setting)
            part_summary, part_rows = _from_correlations(reports)
            summary += part_summary
            rows += part_rows
            continue
        part: list[AblationRow] = []
        for seed in seeds:
            part += _distribution_rows(_sample_genomes(space, n_nets, seed), subset(master[seed], size), setting, seed, reg, threads)
        summary += _summarise(part)
        rows += part
    return summary, rows


def _parse_dim(dim: str | int | Sequence[int], channels: int) -> tuple[int, int, int]:
    if isinstance(dim, int):
        return channels, dim, dim
    if isinstance(dim, str):
        parts = [int(p) for p in dim.lower().split("x") if p]
    else:
        parts = [int(p) for p in dim]
    if len(parts) == 1:
        return channels, parts[0], parts[0]
    if len(parts) == 2:
        return channels, parts[0], parts[1]
    if len(parts) == 3:
        return parts[0], parts[1], parts[2]
    raise AppBadRequestException(f"invalid input dimension: {dim}")


def ablate_input_dims(
    space: SpaceId | str,
    dims: Sequence[str | int | Sequence[int]],
    kind: BatchKind | str,
    seeds: Sequence[int],
    *,
    size: int = 8,
    source_dims: Optional[Sequence[int]] = None,
    table: Optional[GroundTruthTable] = None,
    n_nets: int = 10,
    reg: RegularisationParams = RegularisationParams(),
    threads: Optional[int] = None,
) -> tuple[list[AblationSummary], list[AblationRow]]:
    """
    Image kind: centre crops of one source batch per seed. Gaussian kind: a fresh
    noise batch of each shape. V is reported for every net and dimension.
    """
    kind = BatchKind(kind)
    if kind is BatchKind.TOKENS:
        raise AppBadRequestException("input-dimension ablation needs image or gaussian_noise batches")
    if not seeds:
        raise AppBadRequestException("at least one seed is required")
    space = parse_space(space)
    if space is SpaceId.TRANSFORMER:
        raise AppBadRequestException("input-dimension ablation applies to convolutional spaces")

    source_dims = tuple(source_dims or settings.IMAGE_DIMS)
    shapes = [_parse_dim(d, source_dims[0]) for d in dims]
    for c, h, w in shapes:
        if kind is BatchKind.IMAGE and (c != source_dims[0] or h > source_dims[1] or w > source_dims[2]):
            raise AppBadRequestException(
                f"crop {c}x{h}x{w} larger than source image {'x'.join(map(str, source_dims))}"
            )

    def _batch(seed: int, shape: tuple[int, int, int]) -> InputBatch:
        if kind is BatchKind.IMAGE:
            return center_crop(make_batch(kind, size, source_dims, seed), shape[1], shape[2])
        return make_batch(kind, size, shape, seed)

    summary: list[AblationSummary] = []
    rows: list[AblationRow] = []
    for shape in shapes:
        setting = "x".join(map(str, shape))
        if table is not None:
            reports = _correlate(table, lambda seed, _vocab: _batch(seed, shape), seeds, reg, threads, setting)
            part_summary, part_rows = _from_correlations(reports)
            summary += part_summary
            rows += part_rows
            continue
        part: list[AblationRow] = []
        for seed in seeds:
            part += _distribution_rows(_sample_genomes(space, n_nets, seed), _batch(seed, shape), setting, seed, reg, threads)
        summary += _summarise(part)
        rows += part
    return summary, rows


# ---------- oracle ----------
def fast_pattern_scores(record: ActivationRecord) -> tuple[int, int]:
    return swap_score(record).distinct_count, standard_pattern_score(record).distinct_count


def _oracle_genome(space: SpaceId, seed: int) -> Genome:
    return random_genome(space, seed, stem_channels=ORACLE_STEM, stack_depth=1, seq_len=ORACLE_SEQ_LEN)


def _oracle_batch(g: Genome, size: int, seed: int) -> InputBatch:
    if g.space_id is SpaceId.TRANSFORMER:
        return make_batch(BatchKind.TOKENS, size, (g.seq_len,), seed, vocab=g.vocab)
    return make_batch(BatchKind.GAUSSIAN_NOISE, size, ORACLE_IMAGE_DIMS, seed)


def oracle_check(
    space: SpaceId | str,
    n_nets: int,
    v_cap: int,
    *,
    seed: int = 0,
    sizes: Sequence[int] = ORACLE_SIZES,
    score_fn: PatternScorer = fast_pattern_scores,
    max_draws: Optional[int] = None,
) -> OracleReport:
    """
    Compare `score_fn` with the brute-force pairwise dedup on random nets whose
    site count is at most `v_cap`. Stops at the first mismatch.
    """
    space = parse_space(space)
    if v_cap > ORACLE_V_LIMIT:
        raise AppBadRequestException(f"v_cap must be <= {ORACLE_V_LIMIT}, got {v_cap}")
    if n_nets < 0:
        raise AppBadRequestException("n_nets must be >= 0")

    report = OracleReport(space=space.value, requested=n_nets, v_cap=v_cap)
    if v_cap <= 0 or n_nets == 0:
        logger.warning(f"Oracle check on {space.value} is vacuous (nets={n_nets}, v_cap={v_cap})")
        report.vacuous = True
        return report

    draws = max_draws or 20 * n_nets
    for draw in range(draws):
        if report.checked >= n_nets:
            break
        net_seed = derive_seed(seed, "oracle", draw)
        size = sizes[draw % len(sizes)]
        try:
            g = _oracle_genome(space, net_seed)
            batch = _oracle_batch(g, size, net_seed)
            n = instantiate(g, net_seed, network_dims(g, batch))
            record = forward_capture(n, batch)
        except AppBaseException as exc:
            logger.debug(f"Oracle draw {draw} unusable: {exc.detail}")
            continue
        if record.site_count == 0:
            continue
        if record.site_count > v_cap:
            report.over_cap += 1
            continue

        fast = score_fn(record)
        naive = (naive_swap_score(record), naive_standard_score(record))
        report.checked += 1
        if fast != naive:
            report.passed = False
            report.mismatch = {
                "genome": encode(g),
                "seed": net_seed,
                "batch": batch.describe(),
                "V": record.site_count,
                "swap": fast[0],
                "naive_swap": naive[0],
                "standard": fast[1],
                "naive_standard": naive[1],
            }
            logger.error(f"Oracle mismatch on {report.mismatch['genome']}: fast={fast} naive={naive}")
            return report

    if report.checked < n_nets:
        report.passed = False
        report.error = (
            f"only {report.checked}/{n_nets} nets with V <= {v_cap} in {draws} draws ({report.over_cap} over the cap)"
        )
        logger.error(f"Oracle check on {space.value} incomplete: {report.error}")
        return report
    logger.info(f"Oracle check on {space.value}: {report.checked} nets, all exact")
    return report


def nested_swap_scores(
    g: Genome,
    batch: InputBatch,
    sizes: Sequence[int],
    *,
    init_seed: int = 0,
    norm: NormMode | str | None = None,
) -> list[int]:
    """SWAP scores of `g` over nested prefixes of `batch`, in `sizes` order."""
    n = instantiate(g, init_seed, network_dims(g, batch), norm=norm)
    return [
        score_all(n, subset(batch, s), RegularisationParams(mode="off")).swap
        for s in sizes
    ]


def saturation_profile(space: SpaceId | str, n_nets: int, spec: BatchSpec, *, seed: int = 0) -> dict:
    """Share of nets whose standard score equals S, and the spread of SWAP scores."""
    space = parse_space(space)
    genomes = _sample_genomes(space, n_nets, seed)
    batch = load_batch(spec, vocab=token_vocab(genomes))
    off = RegularisationParams(mode="off")
    reports = [score_genome(g, batch, off, init_seed=seed) for g in genomes]
    saturated = sum(1 for r in reports if r.standard == batch.size)
    return {
        "nets": len(reports),
        "saturated_fraction": saturated / len(reports) if reports else float("nan"),
        "distinct_swap_values": len({r.swap for r in reports}),
        "swap_mean": float(np.mean([r.swap for r in reports])) if reports else float("nan"),
    }
