import filecmp
import json

import numpy as np
import pytest
from scipy.special import expit, logit

from elitecore.design import ModelSpec, encode_design
from elitecore.effects import average_marginal_effects
from elitecore.graph import largest_component, project_coboard
from elitecore.logit import fit_logistic
from elitecore.pipeline import PipelineConfig, analyse_month
from elitecore.registry import PositionIndex, parse_positions
from elitecore.synth import (
    DgpSpec,
    InfeasibleConfig,
    SynthConfig,
    calibrate_intercept,
    default_dgp,
    fringe_units,
    generate_registry,
    girth,
    petersen_edges,
    synthetic_panel,
    write_registry,
)


def categories(reg, month=0):
    idx = PositionIndex(reg.positions, reg.months[-1].last_day)
    out = analyse_month(idx.snapshot(reg.months[month]), PipelineConfig())
    return {r[0]: r[1] for r in out["rows"]}, out["summary"]


def test_petersen_wiring():
    for n in (5, 10, 150):
        edges = petersen_edges(n)
        deg = np.bincount(np.array(edges).ravel(), minlength=2 * n)
        assert (deg == 3).all() and girth(2 * n, edges) >= 5
    # GP(8, 2) splits its inner rim into two 4-cycles
    assert girth(16, petersen_edges(8)) == 4


def test_deterministic_bytes(tmp_path):
    cfg = SynthConfig(seed=7, n_directors=400, n_boards=90, core_size=10, months=3)
    a = write_registry(generate_registry(cfg), tmp_path / "a")
    b = write_registry(generate_registry(SynthConfig.from_dict(json.loads(json.dumps(cfg.__dict__)))),
                       tmp_path / "b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors
    c = write_registry(generate_registry(SynthConfig(seed=8, n_directors=400, n_boards=90, core_size=10)),
                       tmp_path / "c")
    assert (a / "positions.csv").read_bytes() != (c / "positions.csv").read_bytes()


def test_written_positions_parse(tmp_path):
    reg = generate_registry(SynthConfig(seed=1, n_directors=300, n_boards=70, core_size=10))
    out = write_registry(reg, tmp_path)
    assert len(parse_positions(out / "positions.csv")) == len(reg.positions)
    truth = (out / "ground_truth.csv").read_text().splitlines()
    assert truth[0].startswith("director_id") and len(truth) == 301


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_no_planted_core_no_elite(seed):
    cat, summary = categories(generate_registry(SynthConfig(seed=seed, core_size=0)))
    assert 4 not in cat.values() and summary["broker_count"] == 0


@pytest.mark.parametrize("seed", [0, 11, 22])
def test_planted_core_recovered(seed):
    reg = generate_registry(SynthConfig(seed=seed))
    cat, _ = categories(reg)
    tier = reg.truth.tier
    assert all(cat[d] == 4 for d in reg.truth.planted_core)
    assert all(cat[d] == 3 for d in cat if tier[d] == "fringe")
    periphery = [d for d in cat if tier[d] == "periphery"]
    assert sum(cat[d] in (1, 2) for d in periphery) >= 0.9 * len(periphery)
    assert any(cat[d] == 1 for d in periphery)


def test_fringe_units():
    assert fringe_units(20, 1.0) == ["cube", "prism"]
    assert fringe_units(10, 1.0) == ["cube"]
    assert fringe_units(0, 1.0) == [] and fringe_units(300, 0.0) == []
    reg = generate_registry(SynthConfig(seed=5))
    values = {reg.truth.tier[d]: set() for d in reg.truth.planted_coreness}
    for d, v in reg.truth.planted_coreness.items():
        values[reg.truth.tier[d]].add(round(v, 6))
    assert values == {"core": {1.0}, "fringe": {0.75, round(10 / 12, 6)}}


def test_truth_coreness_matches_pipeline():
    reg = generate_registry(SynthConfig(seed=8, n_directors=2000, n_boards=400, core_size=30))
    idx = PositionIndex(reg.positions, reg.months[-1].last_day)
    out = analyse_month(idx.snapshot(reg.months[0]), PipelineConfig())
    got = {r[0]: float(r[3]) for r in out["rows"] if float(r[3]) > 0}
    assert got == pytest.approx(reg.truth.planted_coreness, abs=1e-6)


def test_core_in_largest_component_every_month():
    reg = generate_registry(SynthConfig(seed=3, months=4, turnover=0.3))
    idx = PositionIndex(reg.positions, reg.months[-1].last_day)
    for m in reg.months:
        assert reg.truth.planted_core <= largest_component(project_coboard(idx.snapshot(m)))


@pytest.mark.parametrize("kw, match", [
    ({"n_directors": 0}, "positive"),
    ({"core_size": 7}, "even"),
    ({"core_size": 6}, "girth"),
    ({"core_size": 16}, "girth"),
    ({"core_size": 60, "n_boards": 100}, "boards"),
    ({"core_size": 2000, "n_directors": 1000}, "exceeds"),
    ({"core_size": 500, "n_directors": 800, "n_boards": 5000}, "core and fringe need"),
    ({"standalone_share": 1.0}, "standalone_share"),
    ({"n_boards": 600, "board_size_mu": 0.0, "board_size_sigma": 0.01, "board_size_min": 1, "board_size_max": 1},
     "seats"),
])
def test_infeasible(kw, match):
    with pytest.raises(InfeasibleConfig, match=match):
        generate_registry(SynthConfig(**kw))


def test_unknown_config_key():
    with pytest.raises(ValueError):
        SynthConfig.from_dict({"seed": 1, "n_director": 5})


def test_large_companies_rank_high():
    from elitecore.ranking import pca_company_rank

    reg = generate_registry(SynthConfig(seed=2))
    ranks = pca_company_rank(reg.financials, year=2013).ranks
    top = {c for c, r in ranks.items() if r <= len(reg.truth.large_companies)}
    assert len(top & reg.truth.large_companies) >= 0.8 * len(reg.truth.large_companies)


def test_calibrated_intercept():
    eta = np.random.default_rng(0).normal(size=1000)
    c = calibrate_intercept(eta, 0.007)
    assert expit(c + eta).mean() == pytest.approx(0.007, rel=1e-9)
    with pytest.raises(ValueError):
        calibrate_intercept(eta, 1.0)


def test_null_dgp_base_rate():
    spec = ModelSpec("null", response="gov_committee", terms=["std_coreness"])
    null = DgpSpec(spec, {}, intercept=float(logit(0.007)))
    for seed in range(5):
        frame, truth = synthetic_panel(seed, n_rows=200_000, dgp=null)
        rate = frame["gov_committee"].mean()
        assert 0.8 * 0.007 <= rate <= 1.2 * 0.007
        assert truth["std_coreness"] == 0


def test_registry_committee_rate():
    reg = generate_registry(SynthConfig(seed=5, n_directors=3000, n_boards=600, core_size=0))
    members = [e for r in reg.committees if r.kind.value == "Government" for e in r.entries]
    expected = 0.007 * 3000
    assert 0.5 * expected < len(members) < 2 * expected


def test_zero_coreness_coverage():
    dgp = default_dgp()
    zero = DgpSpec(dgp.spec, {k: v for k, v in dgp.coefficients.items() if "std_coreness" not in k})
    covered = 0
    for seed in range(100):
        frame, _ = synthetic_panel(10_000 + seed, n_rows=50_000, dgp=zero)
        d = encode_design(frame, dgp.spec)
        row = average_marginal_effects(fit_logistic(d), d).get("std_coreness")
        covered += row.ci_low <= 0 <= row.ci_high
    assert covered >= 93
