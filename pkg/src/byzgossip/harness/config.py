"""Load and validate experiment configurations."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from byzgossip.adversary import DEFAULT_EPS
from byzgossip.topology import Topology, TopologyError, build_complete, build_two_worlds

SEED_OFFSET_ENV = "BYZGOSSIP_SEED_OFFSET"

DEFAULT_DEFENSES = ("gcr", "local_clip", "local_trim", "none")
DEFAULT_ATTACKS = ("alie", "foe", "dissensus", "spectral_heterogeneity")


class ConfigError(ValueError):
    """Raised for malformed configurations or unbuildable topologies."""


@lru_cache(maxsize=None)
def config_schema() -> dict:
    text = resources.files("byzgossip.harness").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class DefenseSpec:
    """A defense tag plus its parameters, as given in the config."""

    name: str
    tau: float | None = None
    b: int | None = None
    over_clip: bool = False
    assumed_byz: int | None = None

    def params(self, default_b: int) -> dict:
        out: dict = {}
        if self.name == "fixed":
            out["tau"] = self.tau
        if self.name in ("local_clip", "local_trim"):
            out["b"] = default_b if self.b is None else self.b
        if self.name == "gcr":
            out["over_clip"] = self.over_clip
            out["assumed_byz"] = self.assumed_byz
        return out

    @property
    def label(self) -> str:
        if self.name == "fixed":
            return f"fixed{self.tau:g}"
        if self.b is not None:
            return f"{self.name}_b{self.b}"
        if self.over_clip:
            return f"{self.name}_overclip"
        return self.name


@dataclass(frozen=True)
class ExperimentConfig:
    topology: dict
    d: int = 5
    T: int = 100
    eta: float | str = "auto"
    defenses: tuple[DefenseSpec, ...] = tuple(DefenseSpec(n) for n in DEFAULT_DEFENSES)
    attacks: tuple[str, ...] = DEFAULT_ATTACKS
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    eps: float = DEFAULT_EPS
    byz_sweep: tuple[int, ...] | None = None
    output: str = "out"
    base_dir: Path = field(default=Path("."), compare=False)

    def build_topology(self, byz_per_node: int | None = None) -> Topology:
        """Construct the topology, optionally overriding the Byzantine count per node."""
        spec = dict(self.topology)
        kind = spec["kind"]
        try:
            if kind == "file":
                if byz_per_node is not None:
                    raise ConfigError("byz_sweep needs a generated topology (two_worlds or complete)")
                path = Path(spec["path"])
                if not path.is_absolute():
                    path = self.base_dir / path
                return Topology.load(path)
            per = spec["byz_per_node"] if byz_per_node is None else byz_per_node
            if kind == "two_worlds":
                return build_two_worlds(spec["clique_size"], spec["cross_degree"], per)
            return build_complete(spec["n_h"], per)
        except (TopologyError, OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot build topology: {exc}") from exc

    def effective_seeds(self) -> tuple[int, ...]:
        """Seeds shifted by the ``BYZGOSSIP_SEED_OFFSET`` environment variable."""
        raw = os.environ.get(SEED_OFFSET_ENV, "0") or "0"
        try:
            offset = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{SEED_OFFSET_ENV} must be an integer, got {raw!r}") from exc
        return tuple(s + offset for s in self.seeds)


def _defense(item) -> DefenseSpec:
    if isinstance(item, str):
        return DefenseSpec(item)
    if item["name"] == "fixed" and "tau" not in item:
        raise ConfigError("defense 'fixed' needs a 'tau'")
    return DefenseSpec(item["name"], item.get("tau"), item.get("b"),
                       item.get("over_clip", False), item.get("assumed_byz"))


def parse_config(doc: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    """Validate a decoded JSON document against the schema and build the config."""
    try:
        jsonschema.validate(doc, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    kw: dict = {"topology": dict(doc["topology"]), "base_dir": Path(base_dir)}
    for key in ("d", "T", "eta", "eps", "output"):
        if key in doc:
            kw[key] = doc[key]
    if "defenses" in doc:
        kw["defenses"] = tuple(_defense(x) for x in doc["defenses"])
    if "attacks" in doc:
        kw["attacks"] = tuple(doc["attacks"])
    if "seeds" in doc:
        kw["seeds"] = tuple(doc["seeds"])
    if "byz_sweep" in doc:
        kw["byz_sweep"] = tuple(doc["byz_sweep"])
    cfg = ExperimentConfig(**kw)
    if cfg.byz_sweep is not None and cfg.topology["kind"] == "file":
        raise ConfigError("byz_sweep needs a generated topology (two_worlds or complete)")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(doc, base_dir=path.parent)
