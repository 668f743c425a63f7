import pytest

from teleopsim.scenario import (ScenarioError, load_scenario, parse_scenario)

MINIMAL = {
    "name": "mini",
    "duration_s": 5,
    "uplink": {"base_delay_us": 1000},
    "downlink": {"base_delay_us": 1000},
}


def test_minimal_scenario_gets_defaults():
    scenario, warnings = parse_scenario(dict(MINIMAL))
    assert warnings == []
    assert scenario.seed == 0
    assert scenario.mode == "virtual"
    assert scenario.vehicle.tick_period_us == 10_000
    assert scenario.vehicle.telemetry_period_us == 50_000
    assert scenario.operator.kind == "sine"
    assert scenario.operator.rate_hz == 100.0
    assert scenario.lag_window_us == 1_000_000
    assert scenario.uplink.base_delay_us == 1_000


def test_loss_prob_out_of_range_reports_field_path():
    doc = dict(MINIMAL, uplink={"base_delay_us": 1000, "loss_prob": 1.5})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    assert any("uplink.loss_prob" in e for e in err.value.errors)


def test_zero_duration_reports_field():
    doc = dict(MINIMAL, duration_s=0)
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    assert any("duration_s" in e for e in err.value.errors)


def test_all_errors_reported_at_once():
    doc = dict(MINIMAL, duration_s=-1,
               uplink={"base_delay_us": 1000, "loss_prob": 2.0},
               vehicle={"tick_period_us": -5},
               operator={"kind": "mystery"})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    joined = "\n".join(err.value.errors)
    for needle in ("duration_s", "uplink.loss_prob", "vehicle.tick_period_us",
                   "operator.kind"):
        assert needle in joined


def test_unknown_top_level_key_is_warning():
    doc = dict(MINIMAL, futurism={"x": 1})
    scenario, warnings = parse_scenario(doc)
    assert scenario.name == "mini"
    assert any("futurism" in w for w in warnings)


def test_unknown_nested_key_is_warning():
    doc = dict(MINIMAL, uplink={"base_delay_us": 1000, "colour": "red"})
    _, warnings = parse_scenario(doc)
    assert any("uplink.colour" in w for w in warnings)


def test_type_errors_have_paths():
    doc = dict(MINIMAL, uplink={"base_delay_us": "fast"})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    assert any("uplink.base_delay_us" in e for e in err.value.errors)


def test_telemetry_period_must_align_with_tick():
    doc = dict(MINIMAL, vehicle={"telemetry_period_us": 15_000})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc)
    assert any("telemetry_period_us" in e for e in err.value.errors)


def test_trace_kind_requires_existing_file(tmp_path):
    doc = dict(MINIMAL, operator={"kind": "trace", "trace_path": "nope.csv"})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(doc, base_dir=tmp_path)
    assert any("trace_path" in e for e in err.value.errors)

    trace = tmp_path / "trace.csv"
    trace.write_text("t_us,steering,throttle,brake\n0,0.1,0.0,0.0\n")
    doc["operator"]["trace_path"] = "trace.csv"
    scenario, _ = parse_scenario(doc, base_dir=tmp_path)
    assert scenario.operator.trace_path.endswith("trace.csv")


def test_load_scenario_reads_yaml(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(
        "name: filed\nduration_s: 2\n"
        "uplink: {base_delay_us: 500}\ndownlink: {base_delay_us: 500}\n")
    scenario, _ = load_scenario(path)
    assert scenario.name == "filed"
    assert scenario.duration_us == 2_000_000


def test_committed_scenarios_validate():
    for name in ("reference", "rtt_baseline", "g2g_nominal", "lag_sine",
                 "lag_stress", "cockpit_live"):
        scenario, warnings = load_scenario(f"scenarios/{name}.yaml")
        assert warnings == [], (name, warnings)
        assert scenario.duration_s > 0
