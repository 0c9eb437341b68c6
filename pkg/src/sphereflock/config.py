"""Run configuration and its JSON round trip."""

import json
from dataclasses import dataclass, field

from .dynamics import SimParams
from .errors import SphereFlockError
from .scenarios import ScenarioSpec


class ConfigError(SphereFlockError, ValueError):
    pass


@dataclass
class RunConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    params: SimParams = field(default_factory=SimParams)
    output_dir: str = "out"
    emit_plots: bool = False
    snapshot_every: int = 1  # in recorded samples

    def __post_init__(self):
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")
        if self.scenario.kind == "appendixB":
            raise ConfigError("appendixB is a kinematic path and cannot seed a run")
        if self.scenario.n != self.params.n:
            raise ConfigError(f"scenario has {self.scenario.n} agents but params.n = {self.params.n}")

    def to_dict(self):
        return {"scenario": self.scenario.to_dict(), "params": self.params.to_dict(),
                "output_dir": self.output_dir, "emit_plots": self.emit_plots,
                "snapshot_every": self.snapshot_every}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(scenario=ScenarioSpec.from_dict(d.get("scenario", {})),
                       params=SimParams.from_dict(d.get("params", {})),
                       output_dir=str(d.get("output_dir", "out")),
                       emit_plots=bool(d.get("emit_plots", False)),
                       snapshot_every=int(d.get("snapshot_every", 1)))
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls.from_dict(data)


def load(path):
    try:
        with open(path) as fh:
            return RunConfig.loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
