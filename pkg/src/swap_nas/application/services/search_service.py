# src/application/services/search_service.py
"""
Steady-state evolutionary search driven by the regularised SWAP score.

Every random decision draws from a Philox stream keyed by
derive_seed(master_seed, ...), so a run is a pure function of its config no
matter how many scoring threads are used.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional

from swap_nas.application.services.scoring_service import score_genome
from swap_nas.application.workers.scoring_pool import JobResult, run_jobs
from swap_nas.domain.entities.genome import Genome
from swap_nas.domain.entities.network import InputBatch
from swap_nas.domain.entities.search_state import Individual, SearchState
from swap_nas.domain.enums.regularisation_mode import RegularisationMode
from swap_nas.domain.exceptions.base_exception import AppBadRequestException, AppRuntimeException
from swap_nas.domain.netgraph.operators import crossover, mutate, random_genome
from swap_nas.domain.schemas.score_schema import RegularisationParams, ScoreReport
from swap_nas.domain.schemas.search_schema import SearchConfig
from swap_nas.domain.scoring.patterns import RowHasher, row_hash64
from swap_nas.domain.scoring.regularisation import adaptive_update
from swap_nas.domain.utilities.config import settings
from swap_nas.domain.utilities.seeding import derive_seed, make_rng
from swap_nas.infrastructure.persistence.batches import load_batch

logger = logging.getLogger(__name__)

GenomeSource = Callable[[int], Genome]


class SearchService:
    def __init__(
        self,
        cfg: SearchConfig,
        *,
        batch: Optional[InputBatch] = None,
        threads: Optional[int] = None,
        hasher: RowHasher = row_hash64,
    ):
        self.cfg = cfg
        self.batch = batch if batch is not None else load_batch(cfg.batch, vocab=settings.TFORM_VOCAB)
        self.threads = threads
        self.hasher = hasher

    # ---------- scoring ----------
    def _score(self, g: Genome, reg: RegularisationParams) -> ScoreReport:
        return score_genome(g, self.batch, reg, init_seed=self.cfg.init_seed, hasher=self.hasher)

    def _score_with_retries(self, source: GenomeSource, reg: RegularisationParams, label: str) -> tuple[Genome, ScoreReport]:
        """Draw a genome from `source(attempt)` and score it, resampling on runtime failures."""
        last_error: AppRuntimeException | None = None
        for attempt in range(self.cfg.retries + 1):
            try:
                g = source(attempt)
                return g, self._score(g, reg)
            except AppRuntimeException as exc:
                last_error = exc
                logger.warning(f"Scoring {label} failed (attempt {attempt + 1}): {exc.detail}")
        raise last_error

    def _record(self, report: ScoreReport, cycle: int, reg: RegularisationParams) -> ScoreReport:
        update = {"cycle": cycle}
        if reg.mode is not RegularisationMode.OFF:
            update.update(mu=reg.mu, sigma=reg.sigma)
        return report.model_copy(update=update)

    def _close_cycle(self, state: SearchState, scored: int, failed: int) -> None:
        if state.reg.mode is RegularisationMode.ADAPTIVE:
            state.reg = adaptive_update([r.params_m for r in state.history], state.reg)
        scores = [ind.score for ind in state.population]
        state.trace.append({
            "cycle": state.cycle,
            "mu": state.reg.mu,
            "sigma": state.reg.sigma,
            "population_best": max(scores),
            "population_worst": min(scores),
            "best": state.best.score,
            "best_genome": state.best.report.genome,
            "scored": scored,
            "failed": failed,
        })

    # ---------- algorithm ----------
    def init_population(self) -> SearchState:
        cfg = self.cfg
        reg = cfg.reg

        def _job(i: int):
            def _source(attempt: int) -> Genome:
                return random_genome(cfg.space, derive_seed(cfg.master_seed, "init", i, attempt))
            return lambda: self._score_with_retries(_source, reg, f"initial genome {i}")

        results = run_jobs([_job(i) for i in range(cfg.population_size)], self.threads)
        failed = [r for r in results if not r.ok]
        if failed:
            if not isinstance(failed[0].error, AppRuntimeException):
                raise failed[0].error
            raise AppRuntimeException(
                f"could not score initial genome {failed[0].index} after {cfg.retries + 1} attempts: {failed[0].error.detail}"
            )

        state = SearchState(population=[], reg=reg)
        for result in results:
            g, report = result.value
            report = self._record(report, 0, reg)
            individual = Individual(genome=g, report=report, birth=state.next_birth())
            state.population.append(individual)
            state.history.append(report)
            state.offer_best(individual)

        self._close_cycle(state, scored=len(results), failed=0)
        logger.info(f"Initialised population of {len(state.population)}: best={state.best.score:.4g}")
        return state

    def _select_parent(self, state: SearchState) -> Genome:
        cfg = self.cfg
        rng = make_rng(derive_seed(cfg.master_seed, "cycle", state.cycle, "select"))
        picks = rng.choice(len(state.population), size=cfg.tournament_size, replace=False)
        ranked = sorted((state.population[int(i)] for i in picks), key=lambda ind: (-ind.score, ind.birth))
        best, second = ranked[0], ranked[1]

        if rng.random() < cfg.crossover_prob:
            try:
                return crossover(best.genome, second.genome, derive_seed(cfg.master_seed, "cycle", state.cycle, "crossover"))
            except AppBadRequestException as exc:
                logger.debug(f"Crossover skipped: {exc.detail}")
        return best.genome

    def run_cycle(self, state: SearchState) -> SearchState:
        cfg = self.cfg
        state.cycle += 1
        cycle, reg = state.cycle, state.reg
        parent = self._select_parent(state)

        def _job(k: int):
            def _source(attempt: int) -> Genome:
                return mutate(parent, derive_seed(cfg.master_seed, "cycle", cycle, "child", k, attempt))
            return lambda: self._score_with_retries(_source, reg, f"child {k} of cycle {cycle}")

        results: list[JobResult] = run_jobs([_job(k) for k in range(cfg.mutation_times)], self.threads)
        children: list[Individual] = []
        for result in results:
            if not result.ok:
                logger.warning(f"Cycle {cycle}: child {result.index} skipped ({result.error.detail})")
                continue
            g, report = result.value
            report = self._record(report, cycle, reg)
            state.history.append(report)
            children.append(Individual(genome=g, report=report, birth=-1))

        if children:
            # highest score wins, lowest child index on ties
            winner = max(enumerate(children), key=lambda item: (item[1].score, -item[0]))[1]
            winner = Individual(genome=winner.genome, report=winner.report, birth=state.next_birth())
            state.population.append(winner)
            worst = min(state.population, key=lambda ind: (ind.score, ind.birth))
            state.population.remove(worst)
            for child in children:
                state.offer_best(child)
        else:
            logger.warning(f"Cycle {cycle}: every child failed scoring, population unchanged")

        self._close_cycle(state, scored=len(children), failed=len(results) - len(children))
        logger.info(
            f"Cycle {cycle}/{cfg.cycles}: population best={max(i.score for i in state.population):.4g} "
            f"overall best={state.best.score:.4g} mu={state.reg.mu:.4g} sigma={state.reg.sigma:.4g}"
        )
        return state

    def evolve(self) -> SearchState:
        logger.info(
            f"Search started: space={self.cfg.space.value} P={self.cfg.population_size} C={self.cfg.cycles} "
            f"batch={self.batch.describe()} reg={self.cfg.reg.mode.value}"
        )
        state = self.init_population()
        for _ in range(self.cfg.cycles):
            self.run_cycle(state)
        logger.info(f"Search finished: best={state.best.report.genome} score={state.best.score:.4g}")
        return state


def init_population(cfg: SearchConfig, **kwargs) -> SearchState:
    return SearchService(cfg, **kwargs).init_population()


def run_cycle(state: SearchState, cfg: SearchConfig, **kwargs) -> SearchState:
    return SearchService(cfg, **kwargs).run_cycle(state)


def run_search(cfg: SearchConfig, **kwargs) -> tuple[Genome, ScoreReport, list[ScoreReport]]:
    state = SearchService(cfg, **kwargs).evolve()
    return state.best.genome, state.best.report, state.history
