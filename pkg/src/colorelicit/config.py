"""Run configuration: YAML loading, defaulting, and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError, DegenerateTarget
from .respondents import RespondentConfig
from .samplers import METHODS, SamplerConfig
from .targets import TargetSpec

DEFAULT_OBJECTS = ("Chocolate", "Lemon", "Strawberry", "Grass", "Eggshell", "Lavender")

# "all" expands to the four methods at run time.
METHOD_CHOICES = METHODS + ("all",)


@dataclass
class RunConfig:
    objects: tuple[str, ...] = DEFAULT_OBJECTS
    method: str = "mcmc"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    respondent: RespondentConfig = field(default_factory=RespondentConfig)
    target: TargetSpec | None = None
    out_dir: Path = Path("runs")
    reference_path: Path | None = None
    hue_metric: str = "linear"
    burn_in: int = 0

    def methods(self) -> tuple[str, ...]:
        return METHODS if self.method == "all" else (self.method,)

    def digest_data(self) -> dict:
        """JSON-able view of everything that determines a run's outputs."""
        return {
            "objects": list(self.objects),
            "method": self.method,
            "sampler": {
                "iterations": self.sampler.iterations,
                "chains": self.sampler.chains,
                "proposal_variance": self.sampler.proposal_variance,
                "uniform_jump": self.sampler.uniform_jump,
                "gibbs_order": list(self.sampler.gibbs_order),
                "gibbs_counting": self.sampler.gibbs_counting,
                "master_seed": self.sampler.master_seed,
            },
            "respondent": {
                "kind": self.respondent.kind,
                "endpoint": self.respondent.endpoint,
                "model": self.respondent.model,
                "temperature": self.respondent.temperature,
                "max_retries": self.respondent.max_retries,
                "match_mode": self.respondent.match_mode,
                "match_threshold": self.respondent.match_threshold,
            },
            "target": self.target.to_dict() if self.target else None,
            "hue_metric": self.hue_metric,
            "burn_in": self.burn_in,
        }


_SAMPLER_KEYS = {
    "iterations", "chains", "proposal_variance", "uniform_jump",
    "gibbs_order", "gibbs_counting",
}
_RESPONDENT_KEYS = {
    "kind", "endpoint", "model", "temperature", "max_retries", "timeout",
    "api_key_env", "max_concurrent", "match_mode", "match_threshold",
}
_TOP_KEYS = {
    "objects", "method", "seed", "output", "reference", "hue_metric",
    "burn_in", "sampler", "respondent", "target",
}


def _check_keys(section: dict, allowed: set[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(
                f"unknown field {prefix}{key!r}", field=f"{prefix}{key}"
            )


def parse_config(data: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a config mapping and apply defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    _check_keys(data, _TOP_KEYS, "")

    method = data.get("method", "mcmc")
    if method not in METHOD_CHOICES:
        raise ConfigError(
            f"unknown method {method!r}; valid methods: {', '.join(METHOD_CHOICES)}",
            field="method",
        )

    objects = tuple(data.get("objects", DEFAULT_OBJECTS))
    if not objects or not all(isinstance(o, str) and o for o in objects):
        raise ConfigError("objects must be a nonempty list of names", field="objects")

    sampler_data = dict(data.get("sampler") or {})
    _check_keys(sampler_data, _SAMPLER_KEYS, "sampler.")
    if "gibbs_order" in sampler_data:
        sampler_data["gibbs_order"] = tuple(sampler_data["gibbs_order"])
    try:
        sampler = SamplerConfig(
            method=method if method != "all" else "mcmc",
            master_seed=int(data.get("seed", 0)),
            **sampler_data,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sampler: {exc}", field="sampler") from exc

    respondent_data = dict(data.get("respondent") or {})
    _check_keys(respondent_data, _RESPONDENT_KEYS, "respondent.")
    try:
        respondent = RespondentConfig(**respondent_data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"respondent: {exc}", field="respondent") from exc

    target = None
    if data.get("target") is not None:
        try:
            target = TargetSpec.from_dict(data["target"])
        except (KeyError, TypeError, DegenerateTarget) as exc:
            raise ConfigError(f"target: {exc}", field="target") from exc

    if respondent.kind == "oracle" and target is None:
        raise ConfigError("oracle mode requires a target", field="target")
    if respondent.kind == "llm":
        if not respondent.endpoint:
            raise ConfigError("llm mode requires respondent.endpoint", field="respondent.endpoint")
        if not respondent.model:
            raise ConfigError("llm mode requires respondent.model", field="respondent.model")

    hue_metric = data.get("hue_metric", "linear")
    if hue_metric not in ("linear", "circular"):
        raise ConfigError(
            f"hue_metric must be linear or circular, got {hue_metric!r}",
            field="hue_metric",
        )
    burn_in = int(data.get("burn_in", 0))
    if burn_in < 0:
        raise ConfigError("burn_in must be >= 0", field="burn_in")

    base = base_dir or Path(".")
    out_dir = Path(data.get("output", "runs"))
    if not out_dir.is_absolute():
        out_dir = base / out_dir
    reference_path = None
    if data.get("reference") is not None:
        reference_path = Path(data["reference"])
        if not reference_path.is_absolute():
            reference_path = base / reference_path

    return RunConfig(
        objects=objects,
        method=method,
        sampler=sampler,
        respondent=respondent,
        target=target,
        out_dir=out_dir,
        reference_path=reference_path,
        hue_metric=hue_metric,
        burn_in=burn_in,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML run configuration.

    Relative output/reference paths resolve against the config file's
    directory.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if data is None:
        data = {}
    return parse_config(data, base_dir=path.parent)
