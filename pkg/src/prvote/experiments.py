"""Batch harness: sample instances per culture grid point, draw one random
committee each, evaluate axioms, and aggregate satisfaction counts to CSV.

Per-point seeds derive from the master seed and the grid coordinates, so a
configuration reproduces byte-identical CSV output regardless of evaluation
order.  Axiom evaluation uses the compiled kernels; a work-guard trip marks
the affected row ``skipped`` and the run continues.

Configuration files are TOML::

    [experiment]
    family = "approval"          # or "ranked"
    n = 100
    m = 50
    k = 10
    instances = 50
    seed = 20240809
    axioms = ["pjr", "ejr", "pjr+", "ejr+"]

    [[grid]]
    model = "resampling"
    p = [0.2, 0.4, 0.6, 0.8]
    phi = { start = 0.05, stop = 1.0, step = 0.05 }

Each ``[[grid]]`` table expands to the cartesian product of its parameter
lists; ``{start, stop, step}`` ranges are inclusive of ``stop`` up to float
rounding.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from prvote import kernels
from prvote.core import Instance, ScaleGuardError
from prvote.sampling import (
    APPROVAL_MODELS,
    RANKING_MODELS,
    CultureSpec,
    sample_committee,
    sample_profile,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - environment-dependent import
    import tomli as tomllib

__all__ = [
    "ExperimentConfig",
    "run_experiment",
    "write_csv",
    "CSV_COLUMNS",
    "AXIOM_EVALUATORS",
]

CSV_COLUMNS = [
    "model",
    "p",
    "phi",
    "g",
    "alpha",
    "dim",
    "n",
    "m",
    "k",
    "axiom",
    "satisfied",
    "total",
]

_PARAM_NAMES = ("p", "phi", "g", "alpha", "dim")

AXIOM_EVALUATORS: dict[str, Callable] = {
    "ejr+": lambda fast, committee: fast.ejr_plus(committee),
    "pjr+": lambda fast, committee: fast.pjr_plus(committee),
    "ejr": lambda fast, committee: fast.ejr(committee),
    "pjr": lambda fast, committee: fast.pjr(committee),
    "psc": lambda fast, committee: fast.psc(committee),
    "rank-pjr+": lambda fast, committee: fast.rank_pjr_plus(committee),
    "rank-ejr+": lambda fast, committee: fast.rank_ejr_plus(committee),
}


def _expand_param(value) -> list:
    if isinstance(value, Mapping):
        start, stop, step = value["start"], value["stop"], value["step"]
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


@dataclass(frozen=True)
class GridPoint:
    model: str
    params: tuple  # ((name, value), ...) in canonical order

    def as_dict(self) -> dict:
        return dict(self.params)


@dataclass
class ExperimentConfig:
    family: str
    n: int
    m: int
    k: int
    instances: int
    seed: int
    axioms: list
    points: list = field(default_factory=list)

    @staticmethod
    def from_dict(data: Mapping) -> "ExperimentConfig":
        exp = data["experiment"]
        family = exp["family"]
        if family not in ("approval", "ranked"):
            raise ValueError(f"unknown family {family!r}")
        axioms = list(exp["axioms"])
        for axiom in axioms:
            if axiom not in AXIOM_EVALUATORS:
                raise ValueError(f"unknown axiom {axiom!r}")
        points = []
        for entry in data.get("grid", []):
            model = entry["model"]
            allowed = APPROVAL_MODELS if family == "approval" else RANKING_MODELS
            if model not in allowed:
                raise ValueError(f"model {model!r} not valid for family {family!r}")
            names = [name for name in _PARAM_NAMES if name in entry]
            expanded = [_expand_param(entry[name]) for name in names]
            index = [0] * len(names)
            while True:
                params = tuple(
                    (name, values[i])
                    for name, values, i in zip(names, expanded, index)
                )
                points.append(GridPoint(model, params))
                for pos in range(len(names) - 1, -1, -1):
                    index[pos] += 1
                    if index[pos] < len(expanded[pos]):
                        break
                    index[pos] = 0
                else:
                    break
                continue
        return ExperimentConfig(
            family=family,
            n=int(exp["n"]),
            m=int(exp["m"]),
            k=int(exp["k"]),
            instances=int(exp["instances"]),
            seed=int(exp["seed"]),
            axioms=axioms,
            points=points,
        )

    @staticmethod
    def from_toml(path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            return ExperimentConfig.from_dict(tomllib.load(fh))


def _derived_seed(master: int, point_index: int, instance: int, stream: int) -> int:
    seq = np.random.SeedSequence((master, point_index, instance, stream))
    return int(seq.generate_state(2, np.uint64)[0])


def run_experiment(config: ExperimentConfig, progress: Callable | None = None) -> list:
    """Evaluate every grid point; returns one row dict per (point, axiom)."""
    if config.instances == 0:
        return []
    rows = []
    for point_index, point in enumerate(config.points):
        params = point.as_dict()
        counts = {axiom: 0 for axiom in config.axioms}
        skipped = {axiom: False for axiom in config.axioms}
        for instance_index in range(config.instances):
            spec = CultureSpec(
                point.model,
                n=config.n,
                m=config.m,
                seed=_derived_seed(config.seed, point_index, instance_index, 0),
                **params,
            )
            instance = Instance(sample_profile(spec), config.k)
            committee = sample_committee(
                instance, _derived_seed(config.seed, point_index, instance_index, 1)
            )
            fast = kernels.FastInstance(instance)
            for axiom in config.axioms:
                if skipped[axiom]:
                    continue
                try:
                    counts[axiom] += bool(AXIOM_EVALUATORS[axiom](fast, committee))
                except ScaleGuardError:
                    skipped[axiom] = True
        for axiom in config.axioms:
            row = {name: "" for name in CSV_COLUMNS}
            row.update(
                model=point.model,
                n=config.n,
                m=config.m,
                k=config.k,
                axiom=axiom,
                total=config.instances,
                satisfied="skipped" if skipped[axiom] else counts[axiom],
            )
            for name, value in params.items():
                row[name] = _format_param(value)
            rows.append(row)
        if progress is not None:
            progress(point_index + 1, len(config.points))
    return rows


def _format_param(value) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def write_csv(rows: list, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
