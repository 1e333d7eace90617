"""Problem files and bundled datasets.

A problem file is JSON of the form
``{"p": [...], "k": 3, "bivariates": [[i, j, value], ...]}`` with 0-based
indices. Probabilities written as ``"num/den"`` strings switch the problem
to exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import BivariateSpec, MarginalVector, validate_marginals
from .errors import OutOfRange

DATASETS = ("n12", "n11")


@dataclass(frozen=True)
class Problem:
    p: MarginalVector
    k: int | None = None
    bivariates: BivariateSpec | None = None
    raw: dict | None = None


def dataset_path(name: str):
    """Path of a bundled JSON dataset (``"n12"`` or ``"n12.json"``)."""
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in DATASETS:
        raise OutOfRange(f"unknown dataset {name!r}; choose from {DATASETS}")
    return resources.files("pairbounds") / "data" / f"{stem}.json"


def load_dataset(name: str) -> dict:
    return json.loads(dataset_path(name).read_text())


def _read(source) -> dict:
    path = Path(source)
    if path.exists():
        return json.loads(path.read_text())
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if stem in DATASETS:
        return load_dataset(stem)
    raise OutOfRange(f"no such problem file: {source}")


def problem_from_dict(data: dict) -> Problem:
    if "p" not in data:
        raise OutOfRange("problem JSON needs a 'p' field")
    p = validate_marginals(data["p"])
    k = data.get("k")
    k = int(k) if isinstance(k, (int, float)) and not isinstance(k, bool) else None
    biv = None
    if data.get("bivariates") is not None:
        biv = BivariateSpec.general(p.n, data["bivariates"])
    return Problem(p, k, biv, data)


def load_problem(source) -> Problem:
    """Read a problem from a path, falling back to the bundled datasets.

    A ``k`` that is not a single integer (the golden tables list every
    ``k``) is ignored.
    """
    return problem_from_dict(_read(source))


def problem_to_dict(problem: Problem) -> dict:
    def out(v):
        return str(v) if not isinstance(v, float) else v

    data = {"p": [out(v) for v in problem.p.original()]}
    if problem.k is not None:
        data["k"] = problem.k
    if problem.bivariates is not None:
        data["bivariates"] = [[i, j, out(v)] for (i, j), v in sorted(problem.bivariates.pairs.items())]
    return data
