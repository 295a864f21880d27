"""Campaign orchestration and persistence.

A campaign is fully determined by its :class:`ExperimentConfig`; every run
draws its randomness from a tape derived from ``(master_seed, n, seed, alpha)``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, GenerationError
from .generators import GenSpec, generate, gnp_probability
from .graph import Graph, ball, degree_profile, is_tree_like
from .protocol import MP, MMP, k_of, mmp_scope, initial_colouring, run
from .structure import check_regular_typicality, check_typicality, thresholds
from .tape import RandomnessTape, derive_seed
from .theory import check_condition, default_max_rounds

log = logging.getLogger(__name__)

ENV_SEED = "LOCALMAJORITY_SEED"
ENV_OUTPUT = "LOCALMAJORITY_OUTPUT_DIR"

CSV_COLUMNS = ("n", "d", "k", "alpha", "seed", "consensus_time", "consensus_colour",
               "majority_correct", "bound_Aomega", "lower_h", "config_hash")
NO_CONSENSUS = -1


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "regular"
    n_values: tuple[int, ...] = (1000,)
    d: int | None = 5
    p: float | None = None
    gnp_c: float | None = None
    degrees: tuple[int, ...] | None = None
    protocol: str = "mp"
    k: int = 5
    scope_root: int = 0
    scope_radius: int = 1
    alphas: tuple[float, ...] = (0.02,)
    seeds: tuple[int, ...] = tuple(range(10))
    master_seed: int = 0
    max_rounds: int | None = None
    beta: float = 0.9
    C: float = 1.0
    B: float = 1.0
    eps1: float = 0.02
    eps: float = 0.1
    c: float = 0.1
    kappa_min: float = 0.25
    eta: float = 0.5
    audit: bool = False
    max_attempts: int = 10_000
    require_connected: bool = True
    keep_colourings: bool = False
    output_dir: str = "."
    workers: int = 1

    # fields that do not influence run records
    _NON_SEMANTIC = ("output_dir", "workers")

    def __post_init__(self):
        if self.family not in ("regular", "gnp", "degree-sequence"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.protocol not in ("mp", "mmp"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.k < 1 or self.k % 2 == 0:
            raise ConfigError(f"k must be a positive odd integer, got {self.k}")
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not self.alphas:
            raise ConfigError("alpha grid is empty")
        bad = [a for a in self.alphas if not 0 < a < 0.5]
        if bad:
            raise ConfigError(f"every alpha must lie in (0, 1/2); got {bad}")
        if self.family == "degree-sequence":
            if not self.degrees:
                raise ConfigError("degree-sequence family needs degrees")
        elif not self.n_values:
            raise ConfigError("n grid is empty")
        if self.family == "regular" and self.d is None:
            raise ConfigError("regular family needs d")
        if self.family == "gnp" and (self.p is None) == (self.gnp_c is None):
            raise ConfigError("gnp family needs exactly one of p, gnp_c")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ConfigError("max_rounds must be positive")

    def semantic_dict(self) -> dict:
        out = asdict(self)
        for key in self._NON_SEMANTIC:
            out.pop(key)
        return out

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def grid_sizes(self) -> tuple[int, ...]:
        if self.family == "degree-sequence":
            return (len(self.degrees),)
        return tuple(self.n_values)

    def gen_spec(self, n: int, seed: int) -> GenSpec:
        common = dict(seed=seed, max_attempts=self.max_attempts, require_connected=self.require_connected)
        if self.family == "regular":
            return GenSpec("regular", n=n, d=self.d, **common)
        if self.family == "gnp":
            p = self.p if self.p is not None else gnp_probability(n, self.gnp_c)
            return GenSpec("gnp", n=n, p=p, **common)
        return GenSpec("degree-sequence", degrees=tuple(self.degrees), **common)


# ---------------------------------------------------------------- config files

_TUPLE_INT = {"n_values", "seeds", "degrees"}
_TUPLE_FLOAT = {"alphas"}


def _parse_value(name: str, raw: str, kind):
    raw = raw.strip()
    if name in _TUPLE_INT or name in _TUPLE_FLOAT:
        cast = int if name in _TUPLE_INT else float
        if name == "seeds" and ".." in raw:
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(cast(x) for x in raw.replace(",", " ").split())
    if raw.lower() in ("none", ""):
        return None
    if kind in ("bool",):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def parse_config_text(text: str, env: dict | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines ('#' starts a comment).

    Lists are comma or space separated; ``seeds`` also accepts an inclusive range ``lo..hi``.
    ``LOCALMAJORITY_SEED`` and ``LOCALMAJORITY_OUTPUT_DIR`` override the file.
    """
    kinds = {f.name: str(f.type) for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in kinds or key.startswith("_"):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw, kinds[key])
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    env = os.environ if env is None else env
    if env.get(ENV_SEED):
        values["master_seed"] = int(env[ENV_SEED])
    if env.get(ENV_OUTPUT):
        values["output_dir"] = env[ENV_OUTPUT]
    return ExperimentConfig(**values)


def load_config(path, env: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, env)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    for key in _TUPLE_INT | _TUPLE_FLOAT:
        if data.get(key) is not None:
            data[key] = tuple(data[key])
    return ExperimentConfig(**data)


# ---------------------------------------------------------------- campaigns

@dataclass(frozen=True)
class RunRecord:
    n: int
    d: int
    k: int
    alpha: float
    seed: int
    consensus_time: int            # NO_CONSENSUS when absent
    consensus_colour: str          # blue | red | none | failed
    majority_correct: bool | None
    bound_Aomega: int
    lower_h: float
    condition_satisfied: bool | None = None
    typical: bool | None = None
    error: str | None = None
    red_counts: tuple[int, ...] = ()

    def csv_row(self, config_hash: str) -> list[str]:
        mc = "none" if self.majority_correct is None else str(self.majority_correct).lower()
        return [str(self.n), str(self.d), str(self.k), repr(self.alpha), str(self.seed),
                str(self.consensus_time), self.consensus_colour, mc,
                str(self.bound_Aomega), repr(self.lower_h), config_hash]


def _horizons(n: int, d: int, theta: float, cfg: ExperimentConfig) -> tuple[int, float]:
    if d < 5 or n < 3:
        return 0, math.nan
    t = thresholds(n, d, max(theta, 2.0), C=cfg.C, B=cfg.B, eps1=cfg.eps1, eps=cfg.eps)
    return t.horizon_rounds, t.h


def _failed_records(cfg: ExperimentConfig, n: int, seed: int, message: str) -> list[RunRecord]:
    return [RunRecord(n, 0, cfg.k, a, seed, NO_CONSENSUS, "failed", None, 0, math.nan,
                      error=message) for a in cfg.alphas]


def _audit(g: Graph, cfg: ExperimentConfig, d: int, theta: float) -> bool | None:
    try:
        prof = degree_profile(g, cfg.c, cfg.kappa_min)
        t = thresholds(g.n, d, max(theta, 2.0), C=cfg.C, B=cfg.B, eps1=cfg.eps1, eps=cfg.eps)
        ok = check_typicality(g, t, prof, eta=cfg.eta).passed
        if cfg.family == "regular":
            ok = ok and check_regular_typicality(g, t.L1).passed
        return ok
    except (ValueError, MemoryError) as exc:
        log.warning("audit skipped for n=%d: %s", g.n, exc)
        return None


def _grid_point(cfg: ExperimentConfig, n: int, seed: int) -> list[RunRecord]:
    spec = cfg.gen_spec(n, seed)
    try:
        g = generate(spec, RandomnessTape(derive_seed(cfg.master_seed, n, seed)))
    except GenerationError as exc:
        return _failed_records(cfg, n, seed, str(exc))
    try:
        d = degree_profile(g, cfg.c, cfg.kappa_min).effective_degree
    except ValueError:
        d = int(g.degrees.min())
    theta = 2 * g.m / g.n
    bound, lower_h = _horizons(n, d, theta, cfg)
    typical = _audit(g, cfg, d, theta) if cfg.audit else None
    max_rounds = cfg.max_rounds or default_max_rounds(n, d, cfg.eps)
    if cfg.protocol == "mp":
        protocol = MP(cfg.k)
    else:
        try:
            protocol = MMP(cfg.k, mmp_scope(g, cfg.scope_root, cfg.scope_radius))
        except ValueError as exc:
            return _failed_records(cfg, n, seed, str(exc))
    out = []
    for alpha in cfg.alphas:
        tape = RandomnessTape(derive_seed(cfg.master_seed, n, seed, _alpha_code(alpha)))
        result = run(g, protocol, alpha, tape, max_rounds)
        cond = check_condition(alpha, d, cfg.beta).satisfied if d >= 5 else None
        out.append(RunRecord(
            n=n, d=d, k=cfg.k, alpha=alpha, seed=seed,
            consensus_time=NO_CONSENSUS if result.consensus_time is None else result.consensus_time,
            consensus_colour=result.consensus_colour or "none",
            majority_correct=result.majority_correct,
            bound_Aomega=bound, lower_h=lower_h, condition_satisfied=cond, typical=typical,
            red_counts=result.red_counts,
        ))
    return out


def _alpha_code(alpha: float) -> int:
    return int(round(alpha * 1e12))


def _sort_key(r: RunRecord):
    return (r.n, r.alpha, r.seed)


@dataclass
class CampaignReport:
    config: ExperimentConfig
    records: list[RunRecord]
    environment: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash

    @property
    def aggregates(self) -> list[dict]:
        return aggregate(self.records)

    def audit_summary(self) -> list[dict]:
        out = []
        for (n, alpha), recs in _groups(self.records).items():
            audited = [r.typical for r in recs if r.typical is not None]
            conds = {r.condition_satisfied for r in recs if r.condition_satisfied is not None}
            out.append({
                "n": n, "alpha": alpha,
                "typical_rate": (sum(audited) / len(audited)) if audited else None,
                "condition": "satisfied" if conds == {True} else
                             "unsatisfied" if conds == {False} else "unknown",
            })
        return out

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "config": self.config.semantic_dict(),
            "environment": self.environment,
            "records": [_record_dict(r) for r in self.records],
            "aggregates": self.aggregates,
            "audit": self.audit_summary(),
        }


def _record_dict(r: RunRecord) -> dict:
    out = asdict(r)
    out["red_counts"] = list(r.red_counts)
    for key in ("lower_h",):
        if isinstance(out[key], float) and math.isnan(out[key]):
            out[key] = None
    return out


def _groups(records) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.n, r.alpha), []).append(r)
    return groups


def _quantile(xs: list[int], q: float) -> float | None:
    if not xs:
        return None
    return float(np.quantile(np.asarray(xs, dtype=float), q, method="lower"))


def aggregate(records) -> list[dict]:
    """Per-(n, alpha) summaries computed only from CSV-visible fields."""
    out = []
    for (n, alpha), recs in sorted(_groups(records).items()):
        failed = [r for r in recs if r.consensus_colour == "failed"]
        ran = [r for r in recs if r.consensus_colour != "failed"]
        times = sorted(r.consensus_time for r in ran if r.consensus_time != NO_CONSENSUS)
        correct = sum(1 for r in ran if r.majority_correct)
        bound = max((r.bound_Aomega for r in ran), default=0)
        out.append({
            "n": n, "alpha": alpha, "runs": len(recs), "generation_failures": len(failed),
            "consensus": len(times), "non_consensus": len(ran) - len(times),
            "majority_correct": correct,
            "fraction_correct": correct / len(recs) if recs else None,
            "time_median": _quantile(times, 0.5), "time_p90": _quantile(times, 0.9),
            "time_max": float(times[-1]) if times else None,
            "bound_Aomega": bound,
            "within_bound": sum(1 for t in times if t <= bound),
        })
    return out


def run_campaign(config: ExperimentConfig) -> CampaignReport:
    """Generate, (optionally) audit and simulate every grid point."""
    points = [(n, s) for n in config.grid_sizes() for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_grid_point, [config] * len(points), *zip(*points)))
    else:
        chunks = [_grid_point(config, n, s) for n, s in points]
    records = sorted((r for chunk in chunks for r in chunk), key=_sort_key)
    env = {"version": __version__, "master_seed": config.master_seed,
           "config_hash": config.config_hash, "numpy": np.__version__}
    return CampaignReport(config, records, env)


def rerun_from_report(data: dict) -> CampaignReport:
    """Rebuild the config stored in an emitted JSON report and run it again."""
    cfg = config_from_dict(data["config"])
    if cfg.config_hash != data["config_hash"]:
        raise ConfigError("stored config does not match its hash")
    return run_campaign(cfg)


# ---------------------------------------------------------------- reports

def report_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.records:
        w.writerow(r.csv_row(report.config_hash))
    return buf.getvalue()


def report_json(report: CampaignReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit_report(report: CampaignReport, fmt: str, path) -> Path:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    text = report_csv(report) if fmt == "csv" else report_json(report)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def records_from_csv(text: str) -> list[RunRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        mc = row["majority_correct"]
        out.append(RunRecord(
            n=int(row["n"]), d=int(row["d"]), k=int(row["k"]), alpha=float(row["alpha"]),
            seed=int(row["seed"]), consensus_time=int(row["consensus_time"]),
            consensus_colour=row["consensus_colour"],
            majority_correct=None if mc == "none" else mc == "true",
            bound_Aomega=int(row["bound_Aomega"]), lower_h=float(row["lower_h"]),
        ))
    return out


# ---------------------------------------------------------------- experiments

def planted_lower_bound(g: Graph, d: int, h: int, v: int, tape: RandomnessTape,
                        alpha: float = 0.02, k: int | None = None,
                        max_rounds: int = 50, background=None) -> int | None:
    """First round at which ``v`` is blue after planting an all-red G[v, h].

    Outside the ball the colouring is the tape's (or ``background``).  By
    locality and stability the answer is never below ``h``.  Returns None if
    ``v`` stays red for ``max_rounds`` rounds.
    """
    b = ball(g, v, h)
    if not is_tree_like(b, d, h):
        raise ValueError(f"vertex {v} is not {d}-tree-like to depth {h}")
    x = initial_colouring(g.n, alpha, tape) if background is None else np.array(background, dtype=np.uint8)
    x[list(b.vertices)] = 0
    protocol = MP(k if k is not None else 2 * ((d - 1) // 2) + 1)
    for t in range(1, max_rounds + 1):
        x = protocol.step(g, x, tape, t)
        if x[v]:
            return t
    return None


@dataclass(frozen=True)
class SweepCurve:
    alphas: tuple[float, ...]
    fractions: tuple[float, ...]
    runs: tuple[int, ...]
    alpha_max: float | None
    report: CampaignReport

    def rows(self):
        return list(zip(self.alphas, self.fractions, self.runs))


def sweep_alpha(config: ExperimentConfig) -> SweepCurve:
    """Empirical majority-correct fraction per alpha, with the analytical alpha_max."""
    if list(config.alphas) != sorted(config.alphas):
        raise ConfigError("alpha grid must be sorted ascending")
    report = run_campaign(config)
    by_alpha: dict[float, list[RunRecord]] = {}
    for r in report.records:
        by_alpha.setdefault(r.alpha, []).append(r)
    fractions = tuple(sum(1 for r in by_alpha[a] if r.majority_correct) / len(by_alpha[a])
                      for a in config.alphas)
    d = next((r.d for r in report.records if r.d >= 5), config.d or 0)
    a_max = check_condition(min(config.alphas), d, config.beta).alpha_max if d >= 5 else None
    return SweepCurve(tuple(config.alphas), fractions,
                      tuple(len(by_alpha[a]) for a in config.alphas), a_max, report)


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **changes)
