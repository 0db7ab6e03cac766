import csv
import json
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, strategies as st

from fpplab.cli import main
from fpplab.config import ExperimentConfig, law_spec, parse_lattice, parse_law
from fpplab.errors import ConfigError, HeavyTailError, LawError
from fpplab.weights import WeightLaw

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _validate(outdir: Path, name: str):
    doc = json.loads((outdir / f"{name}.json").read_text())
    jsonschema.validate(doc, json.loads((SCHEMAS / f"{name}.schema.json").read_text()))
    return doc


laws = st.one_of(
    st.builds(lambda c: f"constant:{c!r}", st.floats(0, 5)),
    st.builds(lambda a, w: f"uniform:{a!r},{a + w!r}", st.floats(0, 3), st.floats(0.01, 3)),
    st.builds(lambda r: f"exponential:{r!r}", st.floats(0.1, 5)),
)


@given(laws, st.integers(0, 2**63), st.integers(1, 5000), st.booleans(), st.floats(0, 1))
def test_config_round_trip(law, seed, R, quick, lam):
    cfg = ExperimentConfig(law=law, seed=seed, replicas=R, quick=quick, lam=lam)
    back = ExperimentConfig.loads(cfg.dumps())
    assert back == cfg and back.hash() == cfg.hash()


def test_config_hash_ignores_output_and_threads():
    a = ExperimentConfig(output="a", threads=1)
    b = ExperimentConfig(output="b", threads=8)
    assert a.hash() == b.hash() != ExperimentConfig(seed=2).hash()


def test_config_rejections():
    with pytest.raises(ConfigError):
        ExperimentConfig.loads("bogus = 1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.loads("[law]\nkind = 'uniform'\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.loads("seed = \n")
    with pytest.raises(ConfigError):
        ExperimentConfig(radii=[8, 4])
    with pytest.raises(ConfigError):
        ExperimentConfig(replicas=0)


def test_law_strings():
    law = parse_law("atom:0.1,0,uniform:1,2")
    assert law == WeightLaw.atom_mixture(0.1, 0.0, WeightLaw.uniform(1, 2))
    assert parse_law(law_spec(law)) == law
    with pytest.raises(HeavyTailError):
        parse_law("pareto:1.5")
    with pytest.raises(LawError):
        parse_law("uniform:2")
    with pytest.raises(LawError):
        parse_law("gamma:1")
    assert parse_lattice("1,0;-1,0;0,1;0,-1", 2) == parse_lattice("standard", 2)


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main(list(args) + ["-o", str(out)])
    return code, out


def test_ball(tmp_path):
    code, out = _run(tmp_path, "ball", "--law", "constant:1", "--radius", "3")
    assert code == 0
    rows = list(csv.reader((out / "ball.csv").open()))
    assert rows[0] == ["x0", "x1", "distance"] and len(rows) == 26
    _validate(out, "manifest")


def test_avgdist(tmp_path):
    code, out = _run(tmp_path, "avgdist", "--x", "0,0", "--y", "3,1", "--replicas", "20")
    assert code == 0
    doc = _validate(out, "avgdist")
    assert 4 <= doc["mean"] <= 8


def test_fluct(tmp_path):
    code, out = _run(tmp_path, "fluct", "--radius", "4", "--replicas", "100", "--pairs", "50")
    assert code == 0
    _validate(out, "fluct")


@pytest.mark.parametrize("oracle", ["geodesic", "word", "l2", "omega", "dbar"])
def test_sagstar(tmp_path, oracle):
    code, out = _run(tmp_path, "sagstar", "--from", "0,0", "--to", "6,2", "--oracle", oracle,
                     "--replicas", "12")
    assert code == 0
    doc = _validate(out, "sagstar")
    assert doc["eps"] >= 0


def test_sag_seq_and_threshold_exit(tmp_path):
    code, out = _run(tmp_path, "sag-seq", "--from", "0,0", "--to", "30,6", "--parts", "3",
                     "--oracle", "word")
    assert code == 0
    assert len(_validate(out, "sag-seq")["points"]) == 4
    code, _ = _run(tmp_path, "sag-seq", "--from", "0,0", "--to", "6,0", "--parts", "3", "--oracle", "word")
    assert code == 1


def test_monotone(tmp_path):
    code, out = _run(tmp_path, "monotone", "--radius", "12", "--oracle", "word")
    assert code == 0 and _validate(out, "monotone")["status"] == "holds"


def test_hull_check(tmp_path):
    code, out = _run(tmp_path, "hull-check", "--points", "1,0;-1,0;1,2;-1,-2", "--n", "3")
    assert code == 0 and _validate(out, "hull-check")["passed"]


def test_cauchy_and_shape(tmp_path):
    code, out = _run(tmp_path, "cauchy", "--r1", "4", "--r2", "8", "--oracle", "word")
    assert code == 0 and _validate(out, "cauchy")["defect"] == 0.125
    code, out = _run(tmp_path, "shape", "--radii", "4,8", "--oracle", "l2", "--r-max", "16")
    assert code == 0
    _validate(out, "shape")


def test_certify(tmp_path, capsys):
    code, out = _run(tmp_path, "certify", "--law", "atom:0.1,0,constant:1")
    assert code == 0
    doc = _validate(out, "certify")
    assert doc["status"] == "Valid" and doc["a_doubleprime"] == 0.025390625
    assert "a_doubleprime" in capsys.readouterr().out


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(ExperimentConfig(law="atom:0.3,0,constant:1", degree=4).dumps())
    code, out = _run(tmp_path, "certify", "--config", str(cfg))
    assert code == 0 and json.loads((out / "certify.json").read_text())["status"] == "HypothesisViolated"
    code, out = _run(tmp_path, "certify", "--config", str(cfg), "--law", "uniform:1,2")
    assert json.loads((out / "certify.json").read_text())["status"] == "Valid"
    man = _validate(out, "manifest")
    assert man["command"] == "certify" and man["outputs"] == ["certify.json"]


def test_exit_codes(tmp_path):
    assert _run(tmp_path, "certify", "--law", "pareto:1")[0] == 2
    assert _run(tmp_path, "certify", "--config", str(tmp_path / "missing.toml"))[0] == 2
    assert _run(tmp_path, "ball", "--radius", "x")[0] == 2
    assert _run(tmp_path, "sagstar", "--oracle", "nonsense")[0] == 2
    assert _run(tmp_path, "cauchy", "--law", "uniform:0,1", "--oracle", "dbar")[0] == 2
    # a vertex budget far too small: the engine refuses rather than answering wrongly
    assert _run(tmp_path, "ball", "--radius", "40", "--vertex-budget", "100")[0] == 1
    assert main(["nosuchcommand"]) == 2


def test_reproduce_quick_is_thread_independent(tmp_path, monkeypatch):
    outs = []
    for t in ("1", "8"):
        monkeypatch.setenv("FPP_THREADS", t)
        code, out = _run(tmp_path / t, "reproduce", "--quick")
        assert code == 0
        _validate(out, "reproduce")
        outs.append((out / "reproduce.csv").read_bytes())
    assert outs[0] == outs[1]


def test_budgets_are_restored(tmp_path):
    from fpplab import engine, lattice
    before = engine.DEFAULT_MAX_VOLUME, lattice.DEFAULT_POINT_BUDGET
    _run(tmp_path, "ball", "--radius", "40", "--vertex-budget", "100", "--point-budget", "10")
    assert (engine.DEFAULT_MAX_VOLUME, lattice.DEFAULT_POINT_BUDGET) == before
