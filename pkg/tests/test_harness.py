import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from localmajority.errors import ConfigError
from localmajority.generators import gen_regular
from localmajority.graph import ball, complete_graph, is_tree_like
from localmajority.harness import (
    CSV_COLUMNS, ENV_OUTPUT, ENV_SEED, NO_CONSENSUS, CampaignReport, ExperimentConfig, aggregate,
    emit_report, load_config, parse_config_text, planted_lower_bound, records_from_csv, report_csv,
    report_json, rerun_from_report, run_campaign, sweep_alpha, with_overrides,
)
from localmajority.structure import count_tree_regular
from localmajority.tape import RandomnessTape

SMALL = ExperimentConfig(family="regular", n_values=(200,), d=5, k=5, alphas=(0.05,), seeds=(0, 1, 2))


# ---------------------------------------------------------------- config files

CONFIG_TEXT = """
# a small campaign
family = regular
n_values = 100, 200
d = 5
k = 5
alphas = 0.02 0.1     # space separated is fine too
seeds = 0..4
master_seed = 7
audit = true
"""


def test_parse_config():
    cfg = parse_config_text(CONFIG_TEXT, env={})
    assert cfg.n_values == (100, 200) and cfg.alphas == (0.02, 0.1)
    assert cfg.seeds == (0, 1, 2, 3, 4) and cfg.master_seed == 7 and cfg.audit


def test_env_overrides():
    cfg = parse_config_text(CONFIG_TEXT, env={ENV_SEED: "99", ENV_OUTPUT: "/tmp/out"})
    assert cfg.master_seed == 99 and cfg.output_dir == "/tmp/out"


def test_output_dir_does_not_change_hash():
    a = parse_config_text(CONFIG_TEXT, env={})
    b = parse_config_text(CONFIG_TEXT, env={ENV_OUTPUT: "/elsewhere"})
    c = parse_config_text(CONFIG_TEXT, env={ENV_SEED: "8"})
    assert a.config_hash == b.config_hash != c.config_hash


def test_load_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(CONFIG_TEXT)
    assert load_config(p, env={}) == parse_config_text(CONFIG_TEXT, env={})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg", env={})


@pytest.mark.parametrize("text", [
    "seeds =",
    "seeds = 1, 1",
    "alphas = 0.5",
    "alphas = 0",
    "alphas =",
    "bogus = 3",
    "just some words",
    "k = 4",
    "k = five",
    "family = torus",
    "protocol = vote",
    "family = gnp\np = 0.1\ngnp_c = 3",
    "audit = maybe",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text, env={})


def test_empty_seed_list_in_code():
    with pytest.raises(ConfigError):
        ExperimentConfig(seeds=())


# ---------------------------------------------------------------- campaigns and reports

@pytest.fixture(scope="module")
def small_report():
    return run_campaign(SMALL)


def test_campaign_records(small_report):
    recs = small_report.records
    assert [(r.n, r.alpha, r.seed) for r in recs] == [(200, 0.05, s) for s in range(3)]
    for r in recs:
        assert r.consensus_colour in ("blue", "red", "none")
        assert r.d == 5 and r.bound_Aomega >= 1
        assert (r.consensus_time == NO_CONSENSUS) == (r.consensus_colour == "none")


def test_campaign_deterministic(small_report):
    again = run_campaign(SMALL)
    assert again.records == small_report.records
    assert report_csv(again) == report_csv(small_report)


def test_workers_do_not_change_records(small_report):
    assert run_campaign(with_overrides(SMALL, workers=2)).records == small_report.records


def test_csv_schema_and_order(small_report):
    rows = list(csv.reader(io.StringIO(report_csv(small_report))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert all(row[-1] == small_report.config_hash for row in rows[1:])
    assert [int(r[4]) for r in rows[1:]] == [0, 1, 2]


def test_empty_campaign_is_header_only():
    text = report_csv(CampaignReport(SMALL, []))
    assert text == ",".join(CSV_COLUMNS) + "\n"


def test_reemit_byte_identical(small_report, tmp_path):
    for fmt in ("csv", "json"):
        a = emit_report(small_report, fmt, tmp_path / f"a.{fmt}").read_bytes()
        b = emit_report(small_report, fmt, tmp_path / f"b.{fmt}").read_bytes()
        assert a == b


def test_emit_errors(small_report, tmp_path):
    with pytest.raises(ValueError):
        emit_report(small_report, "xml", tmp_path / "x")
    with pytest.raises(OSError, match="nowhere"):
        emit_report(small_report, "csv", tmp_path / "nowhere" / "r.csv")


def test_csv_aggregates_match_json():
    cfg = with_overrides(SMALL, n_values=(100, 150), alphas=(0.05, 0.3), seeds=tuple(range(4)))
    report = run_campaign(cfg)
    from_csv = aggregate(records_from_csv(report_csv(report)))
    assert from_csv == json.loads(report_json(report))["aggregates"]


def test_rerun_from_report_bit_exact(small_report):
    data = json.loads(report_json(small_report))
    again = rerun_from_report(data)
    assert report_json(again) == report_json(small_report)
    data["config"]["master_seed"] += 1
    with pytest.raises(ConfigError):
        rerun_from_report(data)


def test_json_records_mirror_csv(small_report):
    data = json.loads(report_json(small_report))
    assert data["config_hash"] == small_report.config_hash
    assert len(data["records"]) == len(small_report.records)
    assert data["records"][0]["red_counts"][0] == small_report.records[0].red_counts[0]


def test_unsatisfied_condition_is_flagged():
    report = run_campaign(with_overrides(SMALL, alphas=(0.4,)))
    assert report.audit_summary()[0]["condition"] == "unsatisfied"
    assert report.aggregates[0]["fraction_correct"] is not None


def test_satisfied_condition_is_flagged(small_report):
    assert small_report.audit_summary()[0]["condition"] == "satisfied"


def test_generation_failure_recorded_and_campaign_continues():
    # degree sequence of a star plus an edge can never be connected
    cfg = ExperimentConfig(family="degree-sequence", degrees=(3, 1, 1, 1, 1, 1), d=None,
                           k=1, seeds=(0, 1), max_attempts=20)
    report = run_campaign(cfg)
    assert len(report.records) == 2
    assert all(r.consensus_colour == "failed" and r.error for r in report.records)
    agg = report.aggregates[0]
    assert agg["generation_failures"] == 2 and agg["majority_correct"] == 0


def test_non_consensus_is_counted():
    cfg = with_overrides(SMALL, alphas=(0.45,), max_rounds=1, seeds=tuple(range(5)))
    agg = run_campaign(cfg).aggregates[0]
    assert agg["runs"] == 5
    assert agg["consensus"] + agg["non_consensus"] == 5 and agg["non_consensus"] >= 1


def test_audit_fills_typicality():
    report = run_campaign(with_overrides(SMALL, audit=True, seeds=(0,)))
    assert report.records[0].typical in (True, False)
    assert report.audit_summary()[0]["typical_rate"] in (0.0, 1.0)


def test_gnp_and_mmp_campaigns():
    cfg = ExperimentConfig(family="gnp", n_values=(300,), d=None, gnp_c=3.0, protocol="mmp",
                           k=3, scope_radius=0, alphas=(0.05,), seeds=(0, 1))
    report = run_campaign(cfg)
    assert len(report.records) == 2
    assert all(r.consensus_colour != "failed" for r in report.records)


def test_mmp_scope_not_a_tree_is_recorded():
    # dense G(n, p) has a triangle through vertex 0, so the radius-1 scope is rejected per grid point
    cfg = ExperimentConfig(family="gnp", n_values=(300,), d=None, gnp_c=3.0, protocol="mmp",
                           k=3, scope_radius=1, alphas=(0.05,), seeds=(0, 1))
    report = run_campaign(cfg)
    assert all(r.consensus_colour == "failed" and "tree" in r.error for r in report.records)


def test_regular_campaign_mostly_correct():
    cfg = with_overrides(SMALL, n_values=(1000,), alphas=(0.02,), seeds=tuple(range(20)))
    agg = run_campaign(cfg).aggregates[0]
    assert agg["majority_correct"] >= 19


# ---------------------------------------------------------------- planted lower bound

@pytest.fixture(scope="module")
def host():
    g = gen_regular(10_000, 5, RandomnessTape(0))
    _, verts = count_tree_regular(g, 5, 2, 2, 100)
    return g, verts


def test_planted_two_hop_ball_keeps_root_red(host):
    g, verts = host
    v = verts[0]
    for s in range(100):
        first = planted_lower_bound(g, 5, 2, v, RandomnessTape(s))
        assert first is None or first >= 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40), st.integers(0, 200), st.integers(0, 2))
def test_planted_never_below_h(host, seed, idx, h):
    g, verts = host
    v = verts[idx % len(verts)]
    rng = np.random.default_rng(seed)
    background = (rng.random(g.n) < 0.6).astype(np.uint8)     # mostly blue outside
    first = planted_lower_bound(g, 5, h, v, RandomnessTape(seed), background=background)
    assert first is None or first >= h


def test_planted_h_zero():
    g = complete_graph(8)
    first = planted_lower_bound(g, 7, 0, 0, RandomnessTape(0), background=np.ones(8, dtype=np.uint8))
    assert first == 1


def test_all_red_never_blue(host):
    g, verts = host
    red = np.zeros(g.n, dtype=np.uint8)
    assert planted_lower_bound(g, 5, 1, verts[0], RandomnessTape(3), background=red, max_rounds=20) is None


def test_planted_rejects_non_tree_vertex():
    with pytest.raises(ValueError):
        planted_lower_bound(complete_graph(6), 5, 1, 0, RandomnessTape(0))


def test_planted_ball_is_tree(host):
    g, verts = host
    assert is_tree_like(ball(g, verts[0], 2), 5, 2)


# ---------------------------------------------------------------- alpha sweep

def test_sweep_one_point():
    curve = sweep_alpha(with_overrides(SMALL, seeds=(0,)))
    assert len(curve.rows()) == 1 and curve.runs == (1,)
    # d = 5 amplifies 4a(1 - a) by 3; beta = 0.9 gives 4a(1 - a) = 0.3
    assert abs(curve.alpha_max - (1 - math.sqrt(0.7)) / 2) < 1e-12


def test_sweep_requires_sorted():
    with pytest.raises(ConfigError):
        sweep_alpha(with_overrides(SMALL, alphas=(0.2, 0.1)))


def test_sweep_shape():
    cfg = with_overrides(SMALL, n_values=(100,), alphas=(0.02, 0.49), seeds=tuple(range(40)))
    curve = sweep_alpha(cfg)
    low, high = curve.fractions
    assert low >= 0.95
    assert high < 0.8
    assert not math.isnan(curve.alpha_max)
