import csv
import io
import json
from fractions import Fraction

import pytest

from qotlab.adversary import RELIABILITY
from qotlab.commitment import BcMode
from qotlab.harness import (
    CSV_HEADER,
    DEFAULT_TRIALS,
    SCENARIOS,
    RunSummary,
    Scenario,
    emit_report,
    lying_abort_probability,
    make_scenario,
    render_report,
    run_scenario,
    run_sessions,
    wilson,
    worker_count,
)
from qotlab.protocol import ProtocolConfig, Variant
from qotlab.session import Strategy

JSON_KEYS = ["scenario", "trials", "match_rate", "wilson95", "abort_rate", "analytic_reference", "digest", "metrics"]


def small(name, trials=40, **kw):
    return make_scenario(name, n=12, trials=trials, **kw)


def test_presets_cover_all_scenarios():
    assert set(SCENARIOS) == {
        "honest-aon", "cheat-aon", "cheat-aon-bccc", "honest-12ot", "cheat-12ot-t0", "cheat-12ot-t1",
        "lying-unveiler", "lo-ideal", "lo-bcqot",
    }
    assert DEFAULT_TRIALS["lo-ideal"] == 100
    assert DEFAULT_TRIALS["cheat-aon"] == 10_000


def test_scenario_validation():
    with pytest.raises(ValueError):
        make_scenario("nope")
    with pytest.raises(ValueError):
        make_scenario("cheat-12ot-t1", variant=Variant.AON)
    with pytest.raises(ValueError):
        Scenario("honest-aon", ProtocolConfig(n=12), 0)
    sc = make_scenario("honest-aon", bc_mode=BcMode.BCCC, variant=Variant.ONE_OUT_OF_TWO)
    assert sc.config.bc_mode is BcMode.BCCC and sc.config.variant is Variant.ONE_OUT_OF_TWO


def test_wilson_interval():
    lo, hi = wilson(75, 100)
    assert lo < 0.75 < hi
    assert (lo, hi) == pytest.approx((0.6569, 0.8245), abs=1e-3)
    assert wilson(0, 0) == (0.0, 1.0)


def test_summary_rejects_rate_outside_interval():
    with pytest.raises(ValueError):
        RunSummary("honest-aon", 10, 0.9, (0.1, 0.2), 0.0, 0.75, "x")


def test_lying_abort_reference():
    assert lying_abort_probability(5) == pytest.approx(1 - Fraction(1, 32))
    assert lying_abort_probability(0) == 0.0


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("QOTLAB_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("QOTLAB_WORKERS", "0")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("QOTLAB_WORKERS")
    assert worker_count() >= 1


def test_results_do_not_depend_on_worker_count():
    config = ProtocolConfig(n=12)
    one = run_sessions(config, Strategy.ENTANGLING, 12, 9, workers=1)
    two = run_sessions(config, Strategy.ENTANGLING, 12, 9, workers=2)
    assert one == two


def test_report_is_byte_identical_across_runs_and_workers():
    a = render_report([run_scenario(small("cheat-aon"), 5, workers=1)])
    b = render_report([run_scenario(small("cheat-aon"), 5, workers=2)])
    assert a == b
    c = render_report([run_scenario(small("cheat-aon"), 6, workers=1)])
    assert json.loads(a)["digest"] != json.loads(c)["digest"]


def test_json_key_order_and_csv_header():
    s = run_scenario(small("honest-aon"), 1, workers=1)
    rec = json.loads(render_report([s], "json"))
    assert list(rec) == JSON_KEYS
    both = json.loads(render_report([s, s], "json"))
    assert isinstance(both, list) and len(both) == 2
    rows = list(csv.reader(io.StringIO(render_report([s], "csv"))))
    assert rows[0] == CSV_HEADER
    assert rows[1][0] == "honest-aon" and rows[1][1] == "40"
    with pytest.raises(ValueError):
        render_report([s], "xml")
    with pytest.raises(ValueError):
        render_report([], "json")


def test_emit_report(tmp_path):
    s = run_scenario(small("honest-aon", trials=5), 1, workers=1)
    out = tmp_path / "r.json"
    emit_report([s], "json", out)
    assert json.loads(out.read_text())["trials"] == 5
    with pytest.raises(OSError):
        emit_report([s], "json", tmp_path / "missing" / "r.json")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["r.json"]


def test_scenario_metrics():
    honest = run_scenario(small("honest-aon", trials=200), 2, workers=1)
    assert honest.abort_rate == 0 and 0.6 < honest.match_rate < 0.9
    assert honest.analytic_reference == 0.75
    cheat = run_scenario(small("cheat-aon", trials=60), 2, workers=1)
    assert cheat.metrics["coherent_fraction"] == 1.0
    assert cheat.metrics["mean_p_correct"] == pytest.approx(RELIABILITY, abs=1e-9)
    bccc = run_scenario(small("cheat-aon-bccc", trials=60), 2, workers=1)
    assert bccc.metrics["coherent_fraction"] == 0.0
    assert bccc.analytic_reference == 0.75
    lying = run_scenario(small("lying-unveiler", trials=60), 2, workers=1)
    assert lying.metrics["abort_reference"] == pytest.approx(1 - 0.5**3)
    assert lying.abort_rate > 0.7


def test_12ot_and_dependence_metrics():
    s = run_scenario(small("cheat-12ot-t1", trials=60), 3, workers=1)
    assert {"other_bit_accuracy", "joint_accuracy", "dependence_nonconstant_fraction"} <= set(s.metrics)
    lo = run_scenario(small("lo-bcqot", trials=60), 3, workers=1)
    assert lo.metrics["dependence_nonconstant_fraction"] == 1.0
    assert lo.metrics["projection_valid"] is False
    assert lo.match_rate == pytest.approx(lo.metrics["joint_accuracy"])
    assert "honest_joint_accuracy" in lo.metrics


def test_lo_ideal_scenario():
    s = run_scenario(make_scenario("lo-ideal", trials=5), 0)
    assert s.match_rate == 1.0
    assert s.metrics["extractions"] == 20
    assert s.metrics["max_trace_distance"] < 1e-9


def test_cache_shares_sessions():
    cache = {}
    sc = small("cheat-12ot-t0", trials=10)
    first = run_scenario(sc, 4, workers=1, cache=cache)
    assert len(cache) == 1
    assert run_scenario(sc, 4, workers=1, cache=cache) == first
