"""Configuration-driven pipeline: single sources, all combiners, one report.

A run executes, per penalty kind: double-CV predictions for each source,
the cross-validated null model, the naive stacked fit, the configured
mixtures, the model-based combination, per-source recalibration, and
both sequential orderings; every vector is scored with the same metrics
and written to the table and machine layouts. All randomness flows from
the single seed, so identical invocations produce identical reports.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
from dataclasses import dataclass

from .combine import (
    mix,
    naive_stack,
    recalibrate_loo,
    search_mixture_weight,
    sequential_offset,
    stack_logistic_loo,
)
from .crossval import double_cv_predict, make_folds
from .data import (
    StudyBundle,
    SyntheticConfig,
    align_samples,
    generate_synthetic,
    load_outcome_csv,
    load_source_csv,
    write_report,
)
from .glm import PredictionVector
from .metrics import MetricsRow, metrics_row, null_probs_cv


class PipelineError(RuntimeError):
    """Raised when a pipeline stage fails; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    """Everything one reproducible run needs."""

    mode: str = "synthetic"
    source1: str | None = None
    source2: str | None = None
    outcome: str | None = None
    synthetic: SyntheticConfig | None = None
    penalty: str = "both"
    outer_folds: int = 10
    inner_folds: int = 10
    sequential_outer: str = "kfold"  # 'kfold' (reuses outer_folds) or 'loo'
    mixture: tuple[str, ...] = ("fixed:0.5",)
    seed: int = 42
    output: str = "report"
    layout: str = "both"
    n_lambda: int = 15
    min_ratio: float = 1e-2

    def __post_init__(self) -> None:
        if self.mode not in ("real", "synthetic"):
            raise ValueError(f"mode must be 'real' or 'synthetic', got {self.mode!r}")
        if self.penalty not in ("ridge", "lasso", "both"):
            raise ValueError(f"penalty must be ridge, lasso or both, got {self.penalty!r}")
        if self.sequential_outer not in ("kfold", "loo"):
            raise ValueError(
                f"sequential_outer must be 'kfold' or 'loo', got {self.sequential_outer!r}"
            )
        if self.layout not in ("table", "machine", "both"):
            raise ValueError(f"layout must be table, machine or both, got {self.layout!r}")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        for spec in self.mixture:
            _parse_mixture_spec(spec)
        if self.mode == "real":
            missing = [k for k in ("source1", "source2", "outcome") if getattr(self, k) is None]
            if missing:
                raise ValueError(f"real mode needs file paths for: {', '.join(missing)}")
        elif self.synthetic is None:
            self.synthetic = SyntheticConfig(seed=self.seed)

    @property
    def penalties(self) -> tuple[str, ...]:
        return ("ridge", "lasso") if self.penalty == "both" else (self.penalty,)


@dataclass
class PipelineResult:
    """Cached vectors and rows so reports can be re-derived without refitting."""

    rows: list[MetricsRow]
    vectors: dict[tuple[str, str], PredictionVector]
    null_probs: PredictionVector
    report_paths: list[str]
    bundle: StudyBundle


def _parse_mixture_spec(spec: str) -> tuple[str, float]:
    kind, _, value = spec.partition(":")
    if kind == "fixed":
        w = float(value) if value else 0.5
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"mixture weight must lie in [0, 1], got {w}")
        return "fixed", w
    if kind == "search":
        step = float(value) if value else 0.01
        return "search", step
    raise ValueError(f"mixture spec must be 'fixed:<w>' or 'search:<step>', got {spec!r}")


def load_config(path: str) -> RunConfig:
    """Read the INI-style run configuration (sections: run/data/synthetic/grid)."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    run = parser["run"] if parser.has_section("run") else {}
    kwargs: dict = {}
    for key in ("mode", "penalty", "sequential_outer", "output", "layout"):
        if key in run:
            kwargs[key] = run[key]
    for key in ("outer_folds", "inner_folds", "seed"):
        if key in run:
            kwargs[key] = int(run[key])
    if "mixture" in run:
        kwargs["mixture"] = tuple(s.strip() for s in run["mixture"].split(",") if s.strip())
    if parser.has_section("data"):
        data = parser["data"]
        for key in ("source1", "source2", "outcome"):
            if key in data:
                kwargs[key] = data[key]
    if parser.has_section("grid"):
        grid = parser["grid"]
        if "n_lambda" in grid:
            kwargs["n_lambda"] = int(grid["n_lambda"])
        if "min_ratio" in grid:
            kwargs["min_ratio"] = float(grid["min_ratio"])
    if parser.has_section("synthetic"):
        syn = parser["synthetic"]
        defaults = SyntheticConfig(seed=kwargs.get("seed", RunConfig.seed))
        int_fields = {"n", "p1", "p2", "latent_dim", "seed"}
        syn_kwargs = {}
        for f in dataclasses.fields(SyntheticConfig):
            if f.name in syn:
                raw = syn[f.name]
                syn_kwargs[f.name] = int(raw) if f.name in int_fields else float(raw)
        kwargs["synthetic"] = dataclasses.replace(defaults, **syn_kwargs)
    return RunConfig(**kwargs)


def _load_bundle(config: RunConfig) -> tuple[StudyBundle, PredictionVector | None]:
    if config.mode == "synthetic":
        bundle, bayes = generate_synthetic(config.synthetic)
        return bundle, bayes
    sources = [
        load_source_csv(config.source1, name="source1"),
        load_source_csv(config.source2, name="source2"),
    ]
    outcome = load_outcome_csv(config.outcome)
    return align_samples(sources, outcome), None


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Execute the full comparison and write the configured reports."""

    def stage(name: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc) from exc

    bundle, _ = stage("data", _load_bundle, config)
    if len(bundle.sources) < 2:
        raise PipelineError("data", ValueError("combination runs need two sources"))
    x1, x2 = bundle.sources[0].matrix, bundle.sources[1].matrix
    y = bundle.outcome
    J, K, seed = config.outer_folds, config.inner_folds, config.seed
    cv_kwargs = dict(n_lambda=config.n_lambda, min_ratio=config.min_ratio)
    seq_outer = None if config.sequential_outer == "loo" else J

    plan = stage("folds", make_folds, y, J, seed, True)
    p0 = stage("null_model", null_probs_cv, y, plan)

    rows: list[MetricsRow] = []
    vectors: dict[tuple[str, str], PredictionVector] = {}
    for kind in config.penalties:
        ordered: list[tuple[str, PredictionVector]] = []
        r1 = stage(
            f"{kind}:source1",
            double_cv_predict, x1, y, None, kind, J, K, seed, plan=plan, **cv_kwargs,
        )
        r2 = stage(
            f"{kind}:source2",
            double_cv_predict, x2, y, None, kind, J, K, seed, plan=plan, **cv_kwargs,
        )
        p1, p2 = r1.oof_probs, r2.oof_probs
        ordered.append(("source1", p1))
        ordered.append(("source2", p2))

        naive = stage(
            f"{kind}:naive",
            naive_stack, x1, x2, y, kind,
            outer_folds=J, inner_folds=K, seed=seed, **cv_kwargs,
        )
        ordered.append(("naive", naive.probs))

        for spec in config.mixture:
            mode, value = _parse_mixture_spec(spec)
            if mode == "fixed":
                combined = stage(f"{kind}:mixture", mix, p1, p2, value)
                label = "average" if value == 0.5 else f"mixture(w={value:g})"
            else:
                _, combined = stage(
                    f"{kind}:mixture", search_mixture_weight, p1, p2, y, "deviance", value
                )
                label = "mixture(search)"
            ordered.append((label, combined.probs))

        stacked = stage(f"{kind}:model_based", stack_logistic_loo, p1, p2, y)
        ordered.append(("model-based", stacked.probs))

        rec1 = stage(f"{kind}:recalibrate", recalibrate_loo, p1, y)
        rec2 = stage(f"{kind}:recalibrate", recalibrate_loo, p2, y)
        ordered.append(("recal(source1)", rec1.probs))
        ordered.append(("recal(source2)", rec2.probs))

        seq21 = stage(
            f"{kind}:sequential",
            sequential_offset, p1, x2, y, kind,
            outer_folds=seq_outer, inner_folds=K, seed=seed, **cv_kwargs,
        )
        seq12 = stage(
            f"{kind}:sequential",
            sequential_offset, p2, x1, y, kind,
            outer_folds=seq_outer, inner_folds=K, seed=seed, **cv_kwargs,
        )
        ordered.append(("seq(2|1)", seq21.probs))
        ordered.append(("seq(1|2)", seq12.probs))

        for label, probs in ordered:
            vectors[(kind, label)] = probs
            rows.append(stage("metrics", metrics_row, label, y, probs, p0, kind))

    provenance = {"n": y.n, "seed": seed, "outer_folds": J, "inner_folds": K}
    paths = []
    if config.layout in ("machine", "both"):
        path = config.output + ".jsonl"
        stage("report", write_report, rows, "machine", path, provenance)
        paths.append(path)
    if config.layout in ("table", "both"):
        path = config.output + ".txt"
        stage("report", write_report, rows, "table", path, provenance)
        paths.append(path)
    return PipelineResult(
        rows=rows, vectors=vectors, null_probs=p0, report_paths=paths, bundle=bundle
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnifuse",
        description="Combine two high-dimensional predictor sources for a binary outcome.",
    )
    parser.add_argument("--config", help="INI run configuration (see README)")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--outer-folds", type=int, help="override outer fold count")
    parser.add_argument("--inner-folds", type=int, help="override inner fold count")
    parser.add_argument(
        "--penalty", choices=("ridge", "lasso", "both"), help="override penalty kinds"
    )
    parser.add_argument("--output", help="override the report path stem")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.outer_folds is not None:
            overrides["outer_folds"] = args.outer_folds
        if args.inner_folds is not None:
            overrides["inner_folds"] = args.inner_folds
        if args.penalty is not None:
            overrides["penalty"] = args.penalty
        if args.output is not None:
            overrides["output"] = args.output
        if overrides:
            if "seed" in overrides and config.mode == "synthetic":
                syn = config.synthetic or SyntheticConfig()
                config = dataclasses.replace(
                    config,
                    synthetic=dataclasses.replace(syn, seed=overrides["seed"]),
                    **overrides,
                )
            else:
                config = dataclasses.replace(config, **overrides)
        result = run_pipeline(config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in result.report_paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
