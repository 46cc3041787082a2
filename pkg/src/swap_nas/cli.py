# src/cli.py
"""
swap-nas command line.

Every flag has a config-file key of the same name in snake case
(--population-size 10 <-> population_size=10). Values resolve as
flag > config file > environment / .env > built-in default, and each command
that writes files leaves effective_config.env next to them.

Exit codes: 0 success, 1 usage error, 2 runtime or numeric error, 3 oracle failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import uvicorn
from pydantic import ValidationError

from swap_nas.application.services.harness_service import (
    ablate_batch_size,
    ablate_input_dims,
    correlate_metrics,
    correlation_rows,
    oracle_check,
)
from swap_nas.application.services.scoring_service import score_genome, token_vocab
from swap_nas.application.services.search_service import SearchService
from swap_nas.domain.enums.batch_kind import BatchKind
from swap_nas.domain.enums.norm_mode import NormMode
from swap_nas.domain.enums.regularisation_mode import RegularisationMode
from swap_nas.domain.enums.space_id import SpaceId
from swap_nas.domain.exceptions.base_exception import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    AppBadRequestException,
    AppBaseException,
    OracleFailureException,
)
from swap_nas.domain.netgraph.codec import decode
from swap_nas.domain.netgraph.operators import parse_space
from swap_nas.domain.schemas.batch_schema import BatchSpec
from swap_nas.domain.schemas.score_schema import RegularisationParams
from swap_nas.domain.schemas.search_schema import SearchConfig
from swap_nas.domain.utilities.config import settings
from swap_nas.infrastructure.persistence.artifacts import to_json_line, write_csv, write_jsonl, write_text
from swap_nas.infrastructure.persistence.batches import load_batch
from swap_nas.infrastructure.persistence.ground_truth import read_ground_truth
from swap_nas.infrastructure.persistence.run_config import read_run_config, write_effective_config

logger = logging.getLogger("swap_nas")


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def _str_list(value: str) -> list[str]:
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _space(value: str):
    try:
        return parse_space(value)
    except AppBadRequestException as exc:
        raise argparse.ArgumentTypeError(exc.detail)


def _enum(kind):
    def _cast(value: str):
        try:
            return kind(str(value).strip().lower())
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"invalid choice '{value}' (choose from {', '.join(k.value for k in kind)})"
            )
    return _cast


@dataclass(frozen=True)
class Option:
    name: str
    cast: Callable[[str], Any]
    default: Callable[[], Any]
    help: str


OPTIONS = {
    o.name: o
    for o in (
        # run
        Option("seed", int, lambda: settings.SWAP_SEED, "master seed (env SWAP_SEED)"),
        Option("init_seed", int, lambda: settings.INIT_SEED, "weight-initialisation seed"),
        Option("threads", int, lambda: settings.SCORING_THREADS, "max concurrent scoring jobs"),
        Option("out", str, lambda: settings.OUTPUT_DIR, "output directory"),
        Option("norm", _enum(NormMode), lambda: NormMode(settings.NORM_MODE), "normalisation: batch|none"),
        Option("precision", str, lambda: settings.ENGINE_PRECISION, "float32|float64"),
        # genome sizes
        Option("stem_channels", int, lambda: settings.STEM_CHANNELS, "cell-space stem channels"),
        Option("stack_depth", int, lambda: settings.STACK_DEPTH, "cells per stage"),
        Option("nb201_nodes", int, lambda: settings.NB201_NODES, "computed nodes per NB201 cell"),
        Option("darts_nodes", int, lambda: settings.DARTS_NODES, "computed nodes per DARTS-lite cell"),
        Option("seq_len", int, lambda: settings.TFORM_SEQ_LEN, "transformer sequence length"),
        # batch
        Option("batch_kind", _enum(BatchKind), lambda: BatchKind(settings.BATCH_KIND), "image|tokens|gaussian_noise"),
        Option("batch_size", int, lambda: settings.BATCH_SIZE, "samples per batch"),
        Option("dims", _int_list, lambda: None, "per-sample dims, e.g. 3,32,32 (tokens: T)"),
        Option("batch_seed", int, lambda: None, "batch seed (defaults to --seed)"),
        Option("batch_file", str, lambda: None, "binary batch file instead of a generated batch"),
        # regularisation
        Option("reg", _enum(RegularisationMode), lambda: RegularisationMode(settings.REG_MODE), "off|static|adaptive"),
        Option("mu", float, lambda: settings.REG_MU, "regulariser centre, millions of parameters"),
        Option("sigma", float, lambda: settings.REG_SIGMA, "regulariser width"),
        # commands
        Option("genome", str, lambda: None, "encoded genome"),
        Option("space", _space, lambda: None, "NB201|DLITE|TFORM|CHAIN"),
        Option("population_size", int, lambda: settings.POPULATION_SIZE, "population size P"),
        Option("cycles", int, lambda: settings.CYCLES, "search cycles C"),
        Option("tournament_size", int, lambda: None, "tournament size (default P/2)"),
        Option("mutation_times", int, lambda: settings.MUTATION_TIMES, "children per cycle"),
        Option("crossover_prob", float, lambda: settings.CROSSOVER_PROB, "probability of crossing the top two candidates"),
        Option("retries", int, lambda: settings.SCORING_RETRIES, "resamples after a scoring failure"),
        Option("csv", str, lambda: None, "ground-truth CSV (arch_id, encoding, accuracy)"),
        Option("seeds", _int_list, lambda: [0, 1, 2, 3, 4], "comma-separated seeds"),
        Option("sizes", _int_list, lambda: [8], "comma-separated batch sizes"),
        Option("crops", _str_list, lambda: ["3", "8", "16", "32"], "input dims: side, HxW or CxHxW, comma-separated"),
        Option("nets", int, lambda: 10, "networks sampled per setting"),
        Option("vcap", int, lambda: 2000, "maximum activation sites per oracle net"),
    )
}

RUN = ["seed", "init_seed", "threads", "out", "norm", "precision"]
SIZES = ["stem_channels", "stack_depth", "nb201_nodes", "darts_nodes", "seq_len"]
BATCH = ["batch_kind", "batch_size", "dims", "batch_seed", "batch_file"]
REG = ["reg", "mu", "sigma"]

COMMAND_OPTIONS = {
    "score": ["genome"] + RUN + BATCH + REG,
    "search": ["space", "population_size", "cycles", "tournament_size", "mutation_times", "crossover_prob", "retries"]
    + RUN + SIZES + BATCH + REG,
    "correlate": ["csv", "seeds"] + RUN + BATCH + REG,
    "ablate batch-size": ["space", "sizes", "seeds", "nets", "csv"] + RUN + SIZES + BATCH + REG,
    "ablate input-dim": ["space", "crops", "seeds", "nets", "csv"] + RUN + SIZES + BATCH + REG,
    "oracle-check": ["space", "nets", "vcap", "seed", "out", "norm", "precision"],
    "serve": [],
}


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with code 1; 2 is reserved for runtime failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_options(parser: argparse.ArgumentParser, names: Sequence[str]) -> None:
    parser.add_argument("--config", default=None, help="flat key=value config file")
    for name in names:
        option = OPTIONS[name]
        if name == "genome":
            parser.add_argument("genome", nargs="?", default=None, help=option.help)
            continue
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, type=option.cast, default=None, help=option.help)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="swap-nas", description="Training-free architecture scoring and search.")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser, required=True)

    _add_options(commands.add_parser("score", help="score one genome"), COMMAND_OPTIONS["score"])

    search = commands.add_parser("search", help="evolutionary search")
    _add_options(search, COMMAND_OPTIONS["search"])
    search.add_argument("--adaptive", action="store_true", help="shorthand for --reg adaptive")

    _add_options(commands.add_parser("correlate", help="metric vs ground-truth correlation"), COMMAND_OPTIONS["correlate"])

    ablate = commands.add_parser("ablate", help="batch-size and input-dimension ablations")
    kinds = ablate.add_subparsers(dest="ablation", parser_class=ArgumentParser, required=True)
    _add_options(kinds.add_parser("batch-size"), COMMAND_OPTIONS["ablate batch-size"])
    _add_options(kinds.add_parser("input-dim"), COMMAND_OPTIONS["ablate input-dim"])

    _add_options(commands.add_parser("oracle-check", help="fast vs brute-force pattern counts"), COMMAND_OPTIONS["oracle-check"])

    serve = commands.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def resolve(args: argparse.Namespace, names: Sequence[str]) -> dict[str, Any]:
    """Apply flag > config file > default precedence over `names`."""
    file_values = read_run_config(args.config, allowed=set(OPTIONS)) if getattr(args, "config", None) else {}
    values: dict[str, Any] = {}
    for name in names:
        option = OPTIONS[name]
        value = getattr(args, name, None)
        if value is None and name in file_values:
            try:
                value = option.cast(file_values[name])
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise AppBadRequestException(f"invalid value for '{name}' in {args.config}: {exc}")
        values[name] = option.default() if value is None else value

    if getattr(args, "adaptive", False):
        values["reg"] = RegularisationMode.ADAPTIVE
    if "batch_kind" in values and values["dims"] is None:
        values["dims"] = [values.get("seq_len") or settings.TFORM_SEQ_LEN] if values["batch_kind"] is BatchKind.TOKENS else list(settings.IMAGE_DIMS)
    if "batch_seed" in values and values["batch_seed"] is None:
        values["batch_seed"] = values["seed"]
    return values


def _apply_engine_settings(values: dict[str, Any]) -> None:
    """Engine and genome-size options are read from the settings singleton at call time."""
    mapping = {
        "norm": "NORM_MODE",
        "precision": "ENGINE_PRECISION",
        "stem_channels": "STEM_CHANNELS",
        "stack_depth": "STACK_DEPTH",
        "nb201_nodes": "NB201_NODES",
        "darts_nodes": "DARTS_NODES",
        "seq_len": "TFORM_SEQ_LEN",
    }
    for name, field in mapping.items():
        if name in values:
            value = values[name]
            setattr(settings, field, value.value if isinstance(value, NormMode) else value)


def _batch_spec(values: dict[str, Any]) -> BatchSpec:
    return _validated(
        BatchSpec,
        kind=values["batch_kind"],
        size=values["batch_size"],
        dims=tuple(values["dims"]),
        seed=values["batch_seed"],
        path=values["batch_file"],
    )


def _reg(values: dict[str, Any]) -> RegularisationParams:
    return _validated(RegularisationParams, mu=values["mu"], sigma=values["sigma"], mode=values["reg"])


def _require(values: dict[str, Any], *names: str) -> None:
    for name in names:
        if values.get(name) is None:
            raise AppBadRequestException(f"missing required option --{name.replace('_', '-')}")


def _snapshot(values: dict[str, Any], command: str) -> None:
    path = write_effective_config(values["out"], values, header=f"swap-nas {command}")
    logger.info(f"Effective config written to {path}")


# ---------- commands ----------
def cmd_score(values: dict[str, Any]) -> int:
    _require(values, "genome")
    genome = decode(values["genome"])
    batch = load_batch(_batch_spec(values), vocab=token_vocab([genome]))
    _snapshot(values, "score")
    report = score_genome(genome, batch, _reg(values), init_seed=values["init_seed"])
    print(to_json_line(report.to_record()))
    return EXIT_OK


def cmd_search(values: dict[str, Any]) -> int:
    _require(values, "space")
    cfg = _validated(
        SearchConfig,
        space=values["space"],
        population_size=values["population_size"],
        cycles=values["cycles"],
        tournament_size=values["tournament_size"],
        mutation_times=values["mutation_times"],
        crossover_prob=values["crossover_prob"],
        retries=values["retries"],
        reg=_reg(values),
        master_seed=values["seed"],
        init_seed=values["init_seed"],
        batch=_batch_spec(values),
    )
    values["tournament_size"] = cfg.tournament_size
    _snapshot(values, "search")

    state = SearchService(cfg, threads=values["threads"]).evolve()
    out = values["out"]
    write_jsonl(os.path.join(out, "history.jsonl"), (r.to_record() for r in state.history))
    write_jsonl(os.path.join(out, "cycles.jsonl"), state.trace)
    write_text(os.path.join(out, "best.txt"), state.best.report.genome)
    print(state.best.report.genome)
    return EXIT_OK


def _read_table(values: dict[str, Any]):
    return read_ground_truth(values["csv"]) if values.get("csv") else None


def cmd_correlate(values: dict[str, Any]) -> int:
    _require(values, "csv")
    table = _read_table(values)
    _snapshot(values, "correlate")
    reports = correlate_metrics(table, _batch_spec(values), values["seeds"], reg=_reg(values), threads=values["threads"])

    out = values["out"]
    records = [r.model_dump() for r in reports]
    write_jsonl(os.path.join(out, "correlation.jsonl"), records)
    write_csv(
        os.path.join(out, "correlation.csv"),
        ({k: r[k] for k in ("metric", "rho", "std_err", "n", "skipped", "setting", "error")} for r in records),
    )
    write_csv(
        os.path.join(out, "correlation_long.csv"),
        (row.model_dump() for row in correlation_rows(reports)),
        columns=["metric", "setting", "seed", "value"],
    )
    for report in reports:
        print(f"{report.metric}\t{report.rho if report.rho is not None else 'undefined'}\t{report.std_err}")
    return EXIT_OK


def cmd_ablate(values: dict[str, Any], ablation: str) -> int:
    _require(values, "space")
    table = _read_table(values)
    name = ablation.replace("-", "_")
    _snapshot(values, f"ablate {ablation}")

    common = dict(table=table, n_nets=values["nets"], reg=_reg(values), threads=values["threads"])
    if ablation == "batch-size":
        summary, rows = ablate_batch_size(values["space"], values["sizes"], values["seeds"], spec=_batch_spec(values), **common)
    else:
        summary, rows = ablate_input_dims(
            values["space"],
            values["crops"],
            values["batch_kind"],
            values["seeds"],
            size=values["batch_size"],
            source_dims=values["dims"] if values["batch_kind"] is BatchKind.IMAGE else None,
            **common,
        )

    out = values["out"]
    write_csv(os.path.join(out, f"ablation_{name}.csv"), (s.model_dump() for s in summary))
    write_csv(os.path.join(out, f"ablation_{name}_long.csv"), (r.model_dump() for r in rows), columns=["metric", "setting", "seed", "value"])
    for s in summary:
        print(f"{s.setting}\t{s.metric}\t{s.mean}\t{s.std_err}\t{s.n}")
    return EXIT_OK


def cmd_oracle_check(values: dict[str, Any]) -> int:
    _snapshot(values, "oracle-check")
    report = oracle_check(values["space"] or SpaceId.NB201, values["nets"], values["vcap"], seed=values["seed"])
    write_text(os.path.join(values["out"], "oracle.json"), json.dumps(report.model_dump(), indent=2))
    print(json.dumps(report.model_dump()))
    if not report.passed:
        detail = report.error or f"oracle mismatch: {json.dumps(report.mismatch)}"
        raise OracleFailureException(detail)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    uvicorn.run("swap_nas.main:app", host=args.host, port=args.port)
    return EXIT_OK


def _validated(model, **fields):
    try:
        return model(**fields)
    except ValidationError as exc:
        raise AppBadRequestException(f"invalid {model.__name__}: {exc.errors()[0]['msg']}")


def run(args: argparse.Namespace) -> int:
    if args.command == "serve":
        return cmd_serve(args)

    key = f"ablate {args.ablation}" if args.command == "ablate" else args.command
    values = resolve(args, COMMAND_OPTIONS[key])
    _apply_engine_settings(values)
    if args.command == "score":
        return cmd_score(values)
    if args.command == "search":
        return cmd_search(values)
    if args.command == "correlate":
        return cmd_correlate(values)
    if args.command == "ablate":
        return cmd_ablate(values, args.ablation)
    return cmd_oracle_check(values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    try:
        return run(args)
    except AppBaseException as exc:
        logger.error(exc.detail, exc_info=args.verbose)
        print(f"error: {exc.detail}", file=sys.stderr)
        if exc.exit_code == EXIT_USAGE:
            print(f"hint: swap-nas {args.command} --help", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.error(f"Unexpected failure: {exc}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
