import json

import pytest

from rover.callgraph import DEFAULT_CAP, DEFAULT_DENYLIST
from rover.config import (
    CONFIG_ENV,
    PipelineConfig,
    apply_overrides,
    load_config,
)
from rover.errors import RoverError
from rover.index import DEFAULT_SUFFIXES


def write_config(tmp_path, doc, name="rover.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_defaults():
    config = load_config(env={})
    assert config.scratch_dir == "scratch"
    assert config.out_dir == "out"
    assert config.parallelism == 1
    assert config.enrichment_cap == DEFAULT_CAP
    assert config.denylist == DEFAULT_DENYLIST
    assert config.suffixes == DEFAULT_SUFFIXES
    assert config.agent.model_id == "gpt-4o-2024-08-06"
    assert config.agent.max_main_rounds == 3


def test_file_load_pipeline_and_agent_sections(tmp_path):
    path = write_config(tmp_path, {
        "scratch_dir": "work",
        "parallelism": 4,
        "denylist": ["std::*", "log_*"],
        "agent": {"model_id": "test-model", "max_main_rounds": 5},
    })
    config = load_config(path, env={})
    assert config.scratch_dir == "work"
    assert config.parallelism == 4
    assert config.denylist == ("std::*", "log_*")
    assert config.agent.model_id == "test-model"
    assert config.agent.max_main_rounds == 5
    # untouched fields keep their defaults
    assert config.out_dir == "out"
    assert config.agent.temperature == pytest.approx(0.2)


def test_agent_keys_accepted_at_top_level(tmp_path):
    path = write_config(tmp_path, {"temperature": 0.7, "max_patch_retries": 2})
    config = load_config(path, env={})
    assert config.agent.temperature == pytest.approx(0.7)
    assert config.agent.max_patch_retries == 2


def test_fixed_locations_coerced_to_tuple(tmp_path):
    path = write_config(tmp_path, {
        "agent": {"fixed_locations": ["src/app.c:copy_input"]},
    })
    config = load_config(path, env={})
    assert config.agent.fixed_locations == ("src/app.c:copy_input",)


def test_unknown_key_rejected(tmp_path):
    path = write_config(tmp_path, {"scracth_dir": "oops"})
    with pytest.raises(RoverError, match="unknown config option 'scracth_dir'"):
        load_config(path, env={})


def test_unknown_agent_key_rejected(tmp_path):
    path = write_config(tmp_path, {"agent": {"modle_id": "x"}})
    with pytest.raises(RoverError, match="unknown agent option"):
        load_config(path, env={})


def test_non_object_config_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(RoverError, match="must be a JSON object"):
        load_config(str(path), env={})


def test_invalid_json_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(RoverError, match="not valid JSON"):
        load_config(str(path), env={})


def test_explicit_missing_path_is_an_error(tmp_path):
    with pytest.raises(RoverError, match="config file not found"):
        load_config(str(tmp_path / "nope.json"), env={})


def test_env_var_supplies_path(tmp_path):
    path = write_config(tmp_path, {"out_dir": "elsewhere"})
    config = load_config(env={CONFIG_ENV: path})
    assert config.out_dir == "elsewhere"


def test_stale_env_path_is_ignored(tmp_path):
    config = load_config(env={CONFIG_ENV: str(tmp_path / "gone.json")})
    assert config.out_dir == "out"


def test_explicit_path_beats_env(tmp_path):
    file_a = write_config(tmp_path, {"out_dir": "from-flag"}, "a.json")
    file_b = write_config(tmp_path, {"out_dir": "from-env"}, "b.json")
    config = load_config(file_a, env={CONFIG_ENV: file_b})
    assert config.out_dir == "from-flag"


def test_overrides_win_over_file(tmp_path):
    path = write_config(tmp_path, {"parallelism": 4, "out_dir": "filed"})
    config = load_config(path, env={})
    apply_overrides(config, {"parallelism": 8, "out_dir": None,
                             "model_id": "cli-model"})
    assert config.parallelism == 8
    assert config.out_dir == "filed"  # None means "flag not given"
    assert config.agent.model_id == "cli-model"


def test_cost_usd():
    config = PipelineConfig()
    cost = config.cost_usd("gpt-4o-2024-08-06", 1000, 100)
    assert cost == pytest.approx(1000 * 2.5e-06 + 100 * 1.0e-05)
    assert config.cost_usd("unknown-model", 1000, 100) == 0.0


def test_to_dict_uses_plain_lists():
    doc = PipelineConfig().to_dict()
    assert isinstance(doc["denylist"], list)
    assert isinstance(doc["suffixes"], list)
    assert doc["agent"]["model_id"] == "gpt-4o-2024-08-06"
    json.dumps(doc)  # must be serializable as-is
