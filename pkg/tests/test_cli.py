import json

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

from univkern.classify import RULEBOOK
from univkern.cli import REPORT_SCHEMA, dumps_report, jsonable, main, run
from univkern.config import DEFAULT_SEED, dump_config, parse_config
from univkern.errors import InvalidValue, ParseError, UnknownFamily

from bundled import CONFIGS

MINIMAL = """
name = "g"
actions = ["classify"]

[kernel]
family = "gaussian-ti"
"""


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.seed == DEFAULT_SEED
    assert cfg.kernel == {"family": "gaussian-ti", "bandwidth": 1.0, "window": 8.0, "grid": 801}
    assert cfg.actions == ("classify",)


def test_action_defaults_filled():
    cfg = parse_config(MINIMAL.replace('["classify"]', '["probe-dense"]'))
    sec = cfg.section("probe-dense")
    assert sec["ridge"] == 1e-10 and sec["grid"] == 401 and sec["center_counts"] == [5, 9, 17, 25]


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        parse_config(MINIMAL.replace("gaussian-ti", "foo"))


def test_negative_ridge_path():
    text = MINIMAL.replace('["classify"]', '["probe-dense"]') + "\n[probe-dense]\nridge = -1.0\n"
    with pytest.raises(InvalidValue) as e:
        parse_config(text)
    assert e.value.path == "probe-dense.ridge"


@pytest.mark.parametrize("extra,path", [
    ("\nbogus = 1\n", "config.bogus"),
    ("\n[probe-dense]\nridg = 1.0\n", "probe-dense.ridg"),
    ("\n[expect]\nuniversal = \"maybe\"\n", "expect.universal"),
])
def test_unknown_or_bad_keys(extra, path):
    text = MINIMAL.replace("[kernel]", extra + "\n[kernel]") if "bogus" in extra else MINIMAL + extra
    with pytest.raises(InvalidValue) as e:
        parse_config(text)
    assert e.value.path == path


def test_nested_kernel_key_rejected():
    text = MINIMAL.replace("gaussian-ti", "weighted-polynomial") + "\n[kernel.weight]\nfamly = 1\n"
    with pytest.raises(InvalidValue) as e:
        parse_config(text)
    assert e.value.path == "kernel.weight.famly"


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse_config('name = "x"\nactions = [\n  "classify",\n  = 3\n')
    assert e.value.line == 4 and e.value.column is not None


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_round_trip_bundled(path):
    cfg = parse_config(path.read_text())
    assert parse_config(dump_config(cfg)) == cfg


@given(st.integers(0, 2**31), st.floats(0.1, 5), st.sampled_from(["sin:3", "monomial:2", "const:1"]),
       st.lists(st.integers(1, 40), min_size=1, max_size=5, unique=True))
def test_round_trip_generated(seed, bandwidth, target, counts):
    text = (f'name = "r"\nseed = {seed}\nactions = ["classify", "probe-dense"]\n'
            f'[kernel]\nfamily = "gaussian-ti"\nbandwidth = {bandwidth!r}\n'
            f'[probe-dense]\ntargets = ["{target}"]\ncenter_counts = {sorted(counts)}\n')
    cfg = parse_config(text)
    assert parse_config(dump_config(cfg)) == cfg


def test_jsonable_non_finite():
    assert jsonable({"a": float("inf"), "b": [float("nan"), -float("inf")]}) == {
        "a": "inf", "b": ["nan", "-inf"]}
    json.loads(dumps_report({"x": float("nan")}))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_bundled_reports_validate_and_pass(path):
    code, report, _ = run(parse_config(path.read_text()))
    jsonschema.validate(jsonable(report), REPORT_SCHEMA)
    assert code == 0, [c for c in report["checks"] if not c["passed"]]
    for v in report.get("verdicts", {}).values():
        assert v["rule_id"] is None or v["rule_id"] in RULEBOOK


def test_classify_gaussian_exit_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["classify", str(_write(tmp_path, MINIMAL)), "--out", str(out), "--quiet"]) == 0
    rep = json.loads((out / "g-classify.json").read_text())
    assert [rep["verdicts"][k]["status"] for k in ("universal", "characteristic", "c0_universal")] \
        == ["yes"] * 3


def test_classify_cosine_exit_zero(tmp_path):
    text = MINIMAL.replace("gaussian-ti", "cosine-ti")
    out = tmp_path / "out"
    assert main(["classify", str(_write(tmp_path, text)), "--out", str(out), "--quiet"]) == 0
    rep = json.loads((out / "g-classify.json").read_text())
    assert {v["status"] for v in rep["verdicts"].values()} == {"no"}


def test_witness_on_full_space_exit_one(tmp_path, capsys):
    text = MINIMAL.replace('["classify"]', '["classify", "probe-witness"]')
    out = tmp_path / "out"
    assert main(["report", str(_write(tmp_path, text)), "--out", str(out), "--quiet"]) == 1
    rep = json.loads((out / "g-report.json").read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["error"]["type"] == "GapIntersectsSupport" and rep["error"]["module"] == "probe"
    assert "verdicts" in rep  # partial report keeps completed actions
    assert "GapIntersectsSupport" in capsys.readouterr().err


def test_threshold_failure_exit_two(tmp_path):
    text = MINIMAL + '\n[expect]\nuniversal = "no"\n'
    assert main(["classify", str(_write(tmp_path, text)), "--out", str(tmp_path), "--quiet"]) == 2


def test_config_errors_exit_one(tmp_path, capsys):
    assert main(["classify", str(_write(tmp_path, "name = [")), "--quiet"]) == 1
    assert "ParseError" in capsys.readouterr().err
    assert main(["classify", str(tmp_path / "missing.toml"), "--quiet"]) == 1


def test_env_out_and_overrides(tmp_path, monkeypatch):
    text = MINIMAL.replace('["classify"]', '["probe-dense"]')
    monkeypatch.setenv("UNIVKERN_OUT", str(tmp_path / "env"))
    assert main(["probe", str(_write(tmp_path, text)), "--seed", "7", "--grid", "101",
                 "--quiet"]) == 0
    rep = json.loads((tmp_path / "env" / "g-probe.json").read_text())
    assert rep["seed"] == 7
    assert rep["probes"]["probe-dense"]["metadata"]["grid_size"] == 101
    csv = (tmp_path / "env" / "g-probe-dense.csv").read_text().splitlines()
    assert csv[0] == "basis_size,target_name,sup_error"


def test_summary_printed(tmp_path, capsys):
    main(["classify", str(_write(tmp_path, MINIMAL)), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert "accumulation-point-uniqueness" in out and "status pass" in out
