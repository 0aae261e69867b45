"""Pipeline configuration with JSON file loading and overrides.

Precedence, lowest to highest: built-in defaults, a JSON config file
(``--config`` flag or the ROVER_CONFIG environment variable), then
individual command-line flags.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from .agent import AgentConfig
from .callgraph import DEFAULT_CAP, DEFAULT_DENYLIST
from .errors import RoverError
from .index import DEFAULT_SUFFIXES

CONFIG_ENV = "ROVER_CONFIG"

# Per-token prices in USD, keyed by model id.  Used to turn token
# counters into cost estimates; unknown models cost zero.
DEFAULT_PRICE_TABLE: Dict[str, Dict[str, float]] = {
    "gpt-4o-2024-08-06": {"input": 2.5e-06, "output": 1.0e-05},
}


@dataclass
class PipelineConfig:
    agent: AgentConfig = field(default_factory=AgentConfig)
    scratch_dir: str = "scratch"
    out_dir: str = "out"
    parallelism: int = 1
    enrichment_cap: int = DEFAULT_CAP
    denylist: Tuple[str, ...] = DEFAULT_DENYLIST
    suffixes: Tuple[str, ...] = DEFAULT_SUFFIXES
    tool_result_max_chars: int = 4000
    price_table: Dict[str, Dict[str, float]] = field(
        default_factory=lambda: dict(DEFAULT_PRICE_TABLE)
    )

    def cost_usd(self, model_id: str, tokens_in: int, tokens_out: int) -> float:
        prices = self.price_table.get(model_id)
        if not prices:
            return 0.0
        return tokens_in * prices.get("input", 0.0) + tokens_out * prices.get(
            "output", 0.0
        )

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["denylist"] = list(self.denylist)
        doc["suffixes"] = list(self.suffixes)
        return doc


_AGENT_FIELDS = {f.name for f in dataclasses.fields(AgentConfig)}
_PIPELINE_FIELDS = {
    f.name for f in dataclasses.fields(PipelineConfig) if f.name != "agent"
}
_TUPLE_FIELDS = {"denylist", "suffixes", "fixed_locations"}


def _apply_doc(config: PipelineConfig, doc: dict, source: str) -> None:
    if not isinstance(doc, dict):
        raise RoverError(f"{source}: config must be a JSON object")
    for key, value in doc.items():
        if key == "agent":
            if not isinstance(value, dict):
                raise RoverError(f"{source}: agent section must be an object")
            for akey, avalue in value.items():
                if akey not in _AGENT_FIELDS:
                    raise RoverError(f"{source}: unknown agent option {akey!r}")
                if akey in _TUPLE_FIELDS and avalue is not None:
                    avalue = tuple(avalue)
                setattr(config.agent, akey, avalue)
        elif key in _PIPELINE_FIELDS:
            if key in _TUPLE_FIELDS:
                value = tuple(value)
            setattr(config, key, value)
        elif key in _AGENT_FIELDS:
            # Allow agent options at the top level for convenience.
            if key in _TUPLE_FIELDS and value is not None:
                value = tuple(value)
            setattr(config.agent, key, value)
        else:
            raise RoverError(f"{source}: unknown config option {key!r}")


def load_config(
    path: Optional[str] = None, env: Optional[dict] = None
) -> PipelineConfig:
    """Build a config from defaults plus an optional JSON file.

    When ``path`` is not given, the ROVER_CONFIG environment variable is
    consulted.  A missing explicit path is an error; a missing env path
    is ignored so a stale variable cannot break every invocation.
    """
    environ = os.environ if env is None else env
    config = PipelineConfig()
    chosen = path
    from_env = False
    if chosen is None:
        chosen = environ.get(CONFIG_ENV) or None
        from_env = chosen is not None
    if chosen is None:
        return config
    if not os.path.isfile(chosen):
        if from_env:
            return config
        raise RoverError(f"config file not found: {chosen}")
    with open(chosen, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RoverError(f"config file {chosen} is not valid JSON: {exc}")
    _apply_doc(config, doc, chosen)
    return config


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Apply non-None override values (typically parsed CLI flags)."""
    doc = {k: v for k, v in overrides.items() if v is not None}
    _apply_doc(config, doc, "command line")
    return config
