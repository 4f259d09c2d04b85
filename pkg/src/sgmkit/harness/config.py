"""
config.py
─────────
Experiment configuration files and byte-stable CSV output.

Configs are JSON files; defaults are resolved up front and the fully
resolved config is echoed next to every output, so artifacts never depend
on implicit defaults.  Validation collects *all* problems before failing.
CSV cells use RFC-4180 quoting with shortest-roundtrip decimal formatting
for floats, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .. import targets


class ConfigError(ValueError):
    """Invalid experiment configuration; message lists every problem."""


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    return obj


def resolve(defaults: dict, user: dict, allowed: set | None = None) -> dict:
    cfg = dict(defaults)
    cfg.update(user)
    if allowed is not None:
        unknown = set(user) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def validate(cfg: dict, checks: list) -> None:
    """checks: (key, predicate, message); raises with every failure listed."""
    problems = [msg for key, ok, msg in checks if not ok]
    if problems:
        raise ConfigError("invalid config:\n  - " + "\n  - ".join(problems))


def target_from(spec) -> object:
    """Target factory from a config fragment."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "standard-normal")
    d = int(spec.get("d", 1))
    if kind == "standard-normal":
        return targets.standard_normal(d)
    if kind == "bimodal":
        return targets.symmetric_bimodal(d, float(spec.get("sep", 2.0)),
                                         float(spec.get("var", 0.25)))
    if kind == "mixture":
        return targets.GaussianMixture(spec["weights"], spec["means"],
                                       spec["variances"])
    if kind == "uniform-cube":
        return targets.UniformCube(d)
    raise ConfigError(f"unknown target kind {kind!r}")


def fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, fieldnames: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(fieldnames)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(k, "") for k in fieldnames]
            w.writerow([fmt_cell(v) for v in row])


def echo_config(out_dir, name: str, cfg: dict) -> None:
    """Persist the fully resolved config next to the outputs."""
    path = Path(out_dir) / f"{name}.resolved.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=1, sort_keys=True)
        fh.write("\n")
