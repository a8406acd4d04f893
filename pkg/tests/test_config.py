import json

import pytest

from invglm.config import RunConfig, apply_override, dump_json, load_config
from invglm.errors import ConfigError


def test_override_parses_json_values():
    cfg = RunConfig()
    apply_override(cfg, "simulate.cnr=0.5")
    apply_override(cfg, 'fit.methods=["OLS"]')
    apply_override(cfg, "fit.svr.C=10")
    apply_override(cfg, "out_dir=plain/text")
    assert cfg.simulate.cnr == 0.5
    assert cfg.fit.methods == ["OLS"]
    assert cfg.fit.svr.C == 10
    assert cfg.out_dir == "plain/text"


@pytest.mark.parametrize("assignment,field", [
    ("simulate.bogus=1", "simulate.bogus"),
    ("fit=3", "fit"),
    ("novalue", "novalue"),
])
def test_override_errors_name_the_field(assignment, field):
    with pytest.raises(ConfigError) as exc:
        apply_override(RunConfig(), assignment)
    assert field in str(exc.value)


@pytest.mark.parametrize("assignment,field", [
    ("simulate.cnr=0", "simulate.cnr"),
    ("workers=0", "workers"),
    ('fit.methods=["lasso"]', "fit.methods"),
    ("infer.alphas=[0.05, 1.5]", "infer.alphas"),
    ("l1study.n=7", "l1study.n"),
    ("seed=-1", "seed"),
])
def test_validation(assignment, field):
    with pytest.raises(ConfigError) as exc:
        load_config(None, [assignment])
    assert field in str(exc.value)


def test_file_then_overrides(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 3, "simulate": {"n": 400}}))
    cfg = load_config(str(p), ["simulate.n=500"], "simulate")
    assert (cfg.seed, cfg.simulate.n, cfg.command) == (3, 500, "simulate")


def test_resolved_round_trip(tmp_path):
    cfg = load_config(None, ["fit.svr.epsilon=0.2"], "fit")
    dump_json(cfg.to_dict(), tmp_path / "r.json")
    again = load_config(str(tmp_path / "r.json"), [], "fit")
    assert again == cfg


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "absent.json"))
