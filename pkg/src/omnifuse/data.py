"""Data ingestion, alignment, synthetic generation, and report output.

CSV is the only ingestion format: one `sample_id` column followed by
numeric feature columns per source, and a two-column outcome file. The
synthetic generator builds two latent-factor sources with a shared and a
source-2-only signal and returns the exact event probabilities alongside
the data, giving every desk-scale experiment a known ceiling. Reports
come in an aligned text layout and a line-delimited JSON layout.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .glm import PROB_EPS, DesignMatrix, OutcomeVector, PredictionVector, _sigmoid
from .metrics import MetricsRow

MACHINE_KEYS = (
    "penalty",
    "method",
    "brier_sum",
    "brier_mean",
    "deviance",
    "q2",
    "c_index",
    "n",
    "seed",
    "outer_folds",
    "inner_folds",
)

TABLE_COLUMNS = (
    "source1",
    "source2",
    "naive",
    "average",
    "model-based",
    "seq(2|1)",
    "seq(1|2)",
)
RECAL_COLUMNS = ("recal(source1)", "recal(source2)")


@dataclass(frozen=True)
class PredictorSource:
    """One named omic-style source: a design matrix plus its display name."""

    name: str
    matrix: DesignMatrix


@dataclass
class StudyBundle:
    """Aligned multi-source study data with provenance."""

    sources: list[PredictorSource]
    outcome: OutcomeVector
    provenance: dict

    def __post_init__(self) -> None:
        ids = self.outcome.sample_ids
        for src in self.sources:
            if src.matrix.sample_ids != ids:
                raise ValueError(f"source {src.name!r} is not aligned with the outcome")


@dataclass(frozen=True)
class SyntheticConfig:
    """Pure-function generator settings; identical config => identical data."""

    n: int = 400
    p1: int = 50
    p2: int = 150
    latent_dim: int = 2
    shared_signal: float = 1.6
    source2_unique_signal: float = 1.2
    noise_sd: float = 1.0
    prevalence_target: float = 0.19
    seed: int = 42

    def __post_init__(self) -> None:
        if min(self.n, self.p1, self.p2, self.latent_dim) < 1:
            raise ValueError("all dimensions must be >= 1")
        if self.shared_signal < 0 or self.source2_unique_signal < 0:
            raise ValueError("signal strengths must be >= 0")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be > 0")
        if not 0.0 < self.prevalence_target < 1.0:
            raise ValueError("prevalence_target must lie in (0, 1)")


# ------------------------------------------------------------------ #
# CSV ingestion
# ------------------------------------------------------------------ #


def load_source_csv(path: str, name: str | None = None) -> PredictorSource:
    """Parse a predictor CSV: header `sample_id,<feature>...`, numeric cells.

    Violations are reported with file row numbers (header = row 1) and
    column names.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if not header or header[0] != "sample_id":
            raise ValueError(f"{path}: first column header must be 'sample_id'")
        features = header[1:]
        if not features:
            raise ValueError(f"{path}: no feature columns")
        if len(set(features)) != len(features):
            raise ValueError(f"{path}: duplicate feature names in header")
        ids: list[str] = []
        seen: set[str] = set()
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            sid = row[0]
            if sid in seen:
                raise ValueError(f"{path}: duplicate sample_id {sid!r} at row {lineno}")
            seen.add(sid)
            parsed = []
            for col, cell in zip(features, row[1:]):
                if cell.strip() == "":
                    raise ValueError(f"{path}: empty cell at row {lineno}, column {col!r}")
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, column {col!r}"
                    ) from None
            ids.append(sid)
            rows.append(parsed)
    matrix = DesignMatrix(np.array(rows, dtype=np.float64), tuple(features), tuple(ids))
    stem = os.path.splitext(os.path.basename(path))[0]
    return PredictorSource(name=name or stem, matrix=matrix)


def load_outcome_csv(path: str) -> OutcomeVector:
    """Parse the outcome CSV: header `sample_id,outcome`, labels strictly 0/1."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if header != ["sample_id", "outcome"]:
            raise ValueError(f"{path}: header must be 'sample_id,outcome'")
        ids: list[str] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}: row {lineno} has {len(row)} cells, expected 2")
            if row[1] not in ("0", "1"):
                raise ValueError(
                    f"{path}: outcome must be '0' or '1', got {row[1]!r} at row {lineno}"
                )
            ids.append(row[0])
            labels.append(int(row[1]))
    return OutcomeVector(np.array(labels), tuple(ids))


def write_source_csv(source: PredictorSource, path: str) -> None:
    """Write a predictor source; floats use repr so reloads are bitwise equal."""
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", *source.matrix.feature_names])
        for sid, row in zip(source.matrix.sample_ids, source.matrix.values):
            writer.writerow([sid, *[repr(float(v)) for v in row]])


def write_outcome_csv(outcome: OutcomeVector, path: str) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "outcome"])
        for sid, label in zip(outcome.sample_ids, outcome.labels):
            writer.writerow([sid, int(label)])


def align_samples(
    sources: Sequence[PredictorSource], outcome: OutcomeVector
) -> StudyBundle:
    """Intersect sample IDs across all inputs and reorder consistently.

    The outcome file's ordering is adopted; dropped counts per input are
    recorded in the bundle provenance.
    """
    if not sources:
        raise ValueError("need at least one predictor source")
    common = set(outcome.sample_ids)
    for src in sources:
        common &= set(src.matrix.sample_ids)
    if not common:
        raise ValueError("no sample ids shared by all inputs")
    order = [sid for sid in outcome.sample_ids if sid in common]
    dropped = {"outcome": outcome.n - len(order)}
    aligned_sources = []
    for src in sources:
        pos = {sid: i for i, sid in enumerate(src.matrix.sample_ids)}
        idx = np.array([pos[sid] for sid in order])
        dropped[src.name] = src.matrix.n - len(order)
        aligned_sources.append(PredictorSource(src.name, src.matrix.take_rows(idx)))
    out_pos = {sid: i for i, sid in enumerate(outcome.sample_ids)}
    out_idx = np.array([out_pos[sid] for sid in order])
    return StudyBundle(
        sources=aligned_sources,
        outcome=outcome.take_rows(out_idx),
        provenance={"aligned_n": len(order), "dropped": dropped},
    )


# ------------------------------------------------------------------ #
# Synthetic data
# ------------------------------------------------------------------ #


def generate_synthetic(cfg: SyntheticConfig) -> tuple[StudyBundle, PredictionVector]:
    """Two latent-factor sources plus exact event probabilities.

    Source 1 loads a shared latent z only; source 2 loads z plus an
    independent latent u. The outcome logit is
    c + shared_signal*(z@gamma) + source2_unique_signal*(u@delta) with c
    solved by bisection so the sampled prevalence lands within 0.02 of
    the target. The returned probabilities are the generator's own
    conditional event probabilities, the ceiling no model can beat.
    """
    rng = np.random.default_rng(cfg.seed)
    r = cfg.latent_dim
    a1 = rng.normal(size=(r, cfg.p1))
    a2 = rng.normal(size=(r, cfg.p2))
    b2 = rng.normal(size=(r, cfg.p2))
    gamma = rng.normal(size=r)
    gamma /= np.linalg.norm(gamma)
    delta = rng.normal(size=r)
    delta /= np.linalg.norm(delta)
    z = rng.normal(size=(cfg.n, r))
    u = rng.normal(size=(cfg.n, r))
    x1 = z @ a1 + cfg.noise_sd * rng.normal(size=(cfg.n, cfg.p1))
    x2 = z @ a2 + u @ b2 + cfg.noise_sd * rng.normal(size=(cfg.n, cfg.p2))
    uniforms = rng.uniform(size=cfg.n)

    signal = cfg.shared_signal * (z @ gamma) + cfg.source2_unique_signal * (u @ delta)

    def prevalence(c: float) -> float:
        return float(np.mean(uniforms < _sigmoid(c + signal)))

    lo, hi = -30.0, 30.0
    c = 0.0
    for _ in range(100):
        c = 0.5 * (lo + hi)
        prev = prevalence(c)
        if abs(prev - cfg.prevalence_target) <= 0.02:
            break
        if prev < cfg.prevalence_target:
            lo = c
        else:
            hi = c
    else:
        raise RuntimeError(
            f"prevalence calibration failed after 100 bisection steps "
            f"(target {cfg.prevalence_target})"
        )
    probs = _sigmoid(c + signal)
    labels = (uniforms < probs).astype(np.int64)

    ids = tuple(f"s{i:04d}" for i in range(cfg.n))
    f1 = tuple(f"source1.{j:03d}" for j in range(cfg.p1))
    f2 = tuple(f"source2.{j:03d}" for j in range(cfg.p2))
    bundle = StudyBundle(
        sources=[
            PredictorSource("source1", DesignMatrix(x1, f1, ids)),
            PredictorSource("source2", DesignMatrix(x2, f2, ids)),
        ],
        outcome=OutcomeVector(labels, ids),
        provenance={"generator": asdict(cfg), "intercept": c},
    )
    bayes = PredictionVector(np.clip(probs, PROB_EPS, 1.0 - PROB_EPS), method="bayes")
    return bundle, bayes


# ------------------------------------------------------------------ #
# Reports
# ------------------------------------------------------------------ #


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_report(
    rows: Sequence[MetricsRow],
    layout: str,
    path: str,
    provenance: dict | None = None,
) -> None:
    """Serialize report rows in the requested layout.

    `machine` emits one JSON record per row with a fixed key order plus
    run provenance and the package version; floats round-trip exactly.
    `table` renders one aligned text block per penalty kind with the
    combination methods as columns.
    """
    if not rows:
        raise ValueError("no rows to report")
    if layout == "machine":
        text = _render_machine(rows, provenance or {})
    elif layout == "table":
        text = _render_table(rows)
    else:
        raise ValueError(f"layout must be 'table' or 'machine', got {layout!r}")
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _render_machine(rows: Sequence[MetricsRow], provenance: dict) -> str:
    out = io.StringIO()
    for row in rows:
        record = {
            "penalty": row.penalty,
            "method": row.label,
            "brier_sum": row.brier_sum,
            "brier_mean": row.brier_mean,
            "deviance": row.deviance,
            "q2": row.q2,
            "c_index": row.c_index,
            "n": provenance.get("n"),
            "seed": provenance.get("seed"),
            "outer_folds": provenance.get("outer_folds"),
            "inner_folds": provenance.get("inner_folds"),
            "version": __version__,
        }
        out.write(json.dumps(record) + "\n")
    return out.getvalue()


def read_machine_report(path: str) -> list[dict]:
    """Parse a machine-layout report back into one dict per record."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


_METRIC_LINES = (
    ("Brier (sum)", "brier_sum"),
    ("Brier (mean)", "brier_mean"),
    ("Deviance", "deviance"),
    ("Q2", "q2"),
    ("c-index", "c_index"),
)


def _render_block(title: str, columns: Sequence[str], by_label: dict[str, MetricsRow]) -> str:
    present = [c for c in columns if c in by_label]
    if not present:
        return ""
    widths = [max(len(c), 12) for c in present]
    lines = [title]
    lines.append(" " * 14 + "  ".join(c.rjust(w) for c, w in zip(present, widths)))
    for name, attr in _METRIC_LINES:
        cells = [
            f"{getattr(by_label[c], attr):.4f}".rjust(w) for c, w in zip(present, widths)
        ]
        lines.append(name.ljust(14) + "  ".join(cells))
    return "\n".join(lines) + "\n"


def _render_table(rows: Sequence[MetricsRow]) -> str:
    penalties = []
    for row in rows:
        if row.penalty not in penalties:
            penalties.append(row.penalty)
    out = io.StringIO()
    for penalty in penalties:
        by_label = {r.label: r for r in rows if r.penalty == penalty}
        extra = [
            label
            for label in by_label
            if label not in TABLE_COLUMNS and label not in RECAL_COLUMNS
        ]
        out.write(_render_block(
            f"== {penalty} ==", list(TABLE_COLUMNS) + extra, by_label
        ))
        recal = _render_block("-- recalibrated single source --", RECAL_COLUMNS, by_label)
        if recal:
            out.write(recal)
        out.write("\n")
    return out.getvalue()
