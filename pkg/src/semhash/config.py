"""Flat key=value pipeline configuration with namespaced keys.

Defaults follow the reference experiment setup (20 epochs, batch 256, noise
sigma 2, 10000-feature vocabulary, 20-bit codes, adadelta constants). Unknown
keys are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

_MISSING = object()


def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes", "on"):
        return True
    if s.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_int_list(s: str) -> tuple[int, ...]:
    s = s.strip()
    return tuple(int(p) for p in s.split(",") if p.strip()) if s else ()


def _parse_str_list(s: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in s.split(",") if p.strip())


# key -> (parser, default)
SCHEMA: dict[str, tuple[Any, Any]] = {
    "corpus.path": (str, ""),
    "corpus.queries_path": (str, ""),
    "corpus.format": (str, "auto"),
    "textpipe.min_df_frac": (float, 0.00001),
    "textpipe.max_df_frac": (float, 0.9),
    "textpipe.top_n": (int, 10000),
    "textpipe.stopwords": (str, "builtin"),   # builtin | none | <path>
    "train.epochs": (int, 20),
    "train.batch_size": (int, 256),
    "train.noise_sigma": (float, 2.0),
    "train.loss": (str, "bce"),
    "train.rho": (float, 0.95),
    "train.eps": (float, 1e-6),
    "train.learning_rate": (float, 1.0),
    "train.hidden": (_parse_int_list, (500, 500)),
    "train.code_bits": (int, 20),
    "train.pretrain": (_parse_bool, False),
    "train.pretrain_epochs": (int, 5),
    "train.pretrain_learning_rate": (float, 0.1),
    "train.pretrain_batch_size": (int, 64),
    "hash.threshold": (float, 0.5),
    "hash.radius": (int, 2),
    "hash.min_count": (int, 0),
    "hash.max_radius": (int, -1),             # -1: expand up to the code width
    "query.variant": (str, "tfidf"),
    "query.alpha": (float, 1.0),
    "query.sigma": (float, -1.0),             # -1: reuse train.noise_sigma
    "query.prf_k": (int, 5),
    "query.prf_scope": (str, "preselection"),
    "query.rank_depth": (int, 100),
    "eval.k_max": (int, 100),
    "eval.variants": (_parse_str_list, ("tfidf", "gsa", "prf", "gsa+prf", "reconstruction")),
    "run.dir": (str, "runs/default"),
    "seed": (int, 0),
    "threads": (int, 1),
}


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    values: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @property
    def run_dir(self) -> Path:
        return Path(self.values["run.dir"])

    def artifact(self, name: str) -> Path:
        return self.run_dir / name

    def gsa_sigma(self) -> float:
        sigma = self.values["query.sigma"]
        return self.values["train.noise_sigma"] if sigma <= 0 else sigma

    def max_radius(self, width: int) -> int:
        mr = self.values["hash.max_radius"]
        return width if mr < 0 else min(mr, width)

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.values):
            val = self.values[key]
            if isinstance(val, tuple):
                val = ",".join(str(v) for v in val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


def _coerce(key: str, raw: str) -> Any:
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parser, _ = SCHEMA[key]
    try:
        return parser(raw)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {e}") from None


def parse_config_file(path: str | Path) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, raw = line.partition("=")
        out[key.strip()] = _coerce(key.strip(), raw.strip())
    return out


def resolve_config(
    file_path: str | Path | None = None, overrides: dict[str, str] | None = None
) -> PipelineConfig:
    """Defaults, then config file, then overrides (highest precedence)."""
    values = {key: default for key, (_, default) in SCHEMA.items()}
    if file_path:
        values.update(parse_config_file(file_path))
    for key, raw in (overrides or {}).items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return PipelineConfig(values=values)
