"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .model import HyperParams

PATH_KEYS = ("train_xml", "test_xml", "embeddings", "annotations", "lexicon", "ontology")
REQUIRED_PATHS = ("train_xml", "test_xml", "embeddings")
DEMO_CONFIG = Path(__file__).parent / "data" / "demo" / "demo.cfg"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    paths: dict[str, Path]
    output_dir: Path
    hp: HyperParams
    seed: int
    probe_runs: int = 10
    probe_jobs: int = 1
    probe_tasks: list[str] = field(default_factory=lambda: ["POS", "Relation", "Sentiment", "AspectSentiment"])
    probe_layers: list[str] | None = None
    relation_max_edges: int = 1
    source: Path | None = None


def parse_kv(text: str, origin: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | os.PathLike, overrides: dict[str, object] | None = None) -> RunConfig:
    path = DEMO_CONFIG if str(path) == "demo" else Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    kv: dict[str, object] = dict(parse_kv(path.read_text(encoding="utf-8"), str(path)))
    for k, v in (overrides or {}).items():
        if v is not None:
            kv[k] = v
    base = path.parent

    if "seed" not in kv or kv["seed"] in ("", None):
        raise ConfigError(f"{path}: 'seed' is required")
    try:
        seed = int(kv["seed"])
    except ValueError:
        raise ConfigError(f"{path}: seed must be an integer, got {kv['seed']!r}") from None

    paths = {}
    for key in PATH_KEYS:
        val = kv.get(key)
        if not val:
            if key in REQUIRED_PATHS:
                raise ConfigError(f"{path}: '{key}' is required")
            continue
        p = Path(str(val)).expanduser()
        p = p if p.is_absolute() else base / p
        if not p.exists():
            raise ConfigError(f"{path}: {key} points to a missing file: {p}")
        paths[key] = p

    out = kv.get("output_dir", "runs/default")
    out = Path(str(out)).expanduser()
    out = out if out.is_absolute() else Path.cwd() / out

    hp_fields = {k: v for k, v in kv.items() if k in HyperParams.__dataclass_fields__}
    hp_fields["seed"] = seed
    try:
        hp = HyperParams.from_dict(hp_fields)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    def _list(key):
        val = kv.get(key)
        return [s.strip() for s in str(val).split(",") if s.strip()] if val else None

    cfg = RunConfig(
        paths=paths,
        output_dir=out,
        hp=hp,
        seed=seed,
        probe_runs=int(kv.get("probe_runs", 10)),
        probe_jobs=int(kv.get("probe_jobs", 1)),
        relation_max_edges=int(kv.get("relation_max_edges", 1)),
        probe_layers=_list("probe_layers"),
        source=path,
    )
    tasks = _list("probe_tasks")
    if tasks:
        cfg.probe_tasks = tasks
    return cfg
