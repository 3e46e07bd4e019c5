"""Public benchmark networks and JSON instance descriptors.

``karate`` and ``lesmis`` ship with the package. Other networks are looked
up as ``<name>.txt`` (edge list) in the directory named by the
``COLLAPSE_CORE_DATA`` environment variable.
"""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

from .graph import Graph, parse_edge_list, read_edge_list

DATA_ENV = "COLLAPSE_CORE_DATA"
BUNDLED = ("karate", "lesmis")

# network -> (n, m, {k: (nodes, edges) after preprocessing})
BENCHMARKS = {
    "dolphins": (62, 159, {4: (36, 109), 3: (45, 135), 2: (53, 150)}),
    "football": (115, 613, {8: (114, 606), 7: (115, 613)}),
    "karate": (34, 78, {2: (33, 77)}),
    "lesmis": (77, 254, {6: (38, 186), 4: (41, 197), 3: (48, 215), 2: (59, 236)}),
    "polbooks": (105, 441, {5: (65, 300), 4: (98, 422), 3: (103, 437), 2: (105, 441)}),
}


def dataset_path(name: str) -> Path | None:
    """Location of a network's edge list, or None when it is not available."""
    env = os.environ.get(DATA_ENV)
    if env:
        for suffix in (".txt", ".edges", ".csv"):
            p = Path(env) / f"{name}{suffix}"
            if p.is_file():
                return p
    if name in BUNDLED:
        return Path(str(resources.files(__package__) / "data" / f"{name}.txt"))
    return None


def load(name: str) -> Graph:
    path = dataset_path(name)
    if path is None:
        raise FileNotFoundError(
            f"network {name!r} is not bundled; put {name}.txt in ${DATA_ENV}")
    sep = "," if path.suffix == ".csv" else None
    return read_edge_list(path, separator=sep)


def available() -> list[str]:
    return [name for name in BENCHMARKS if dataset_path(name) is not None]


def load_instance(path) -> tuple[str, Graph, int, int]:
    """Read a descriptor ``{graph_path, k, b, name}``.

    ``graph_path`` is resolved relative to the descriptor; a bare dataset
    name is accepted too.
    """
    path = Path(path)
    desc = json.loads(path.read_text())
    missing = {"graph_path", "k", "b"} - desc.keys()
    if missing:
        raise ValueError(f"instance descriptor lacks {sorted(missing)}")
    gp = Path(desc["graph_path"])
    if not gp.is_absolute():
        gp = path.parent / gp
    if gp.is_file():
        g = read_edge_list(gp)
    else:
        g = load(desc["graph_path"])
    name = desc.get("name") or gp.stem
    return name, g, int(desc["k"]), int(desc["b"])


__all__ = ["BENCHMARKS", "available", "dataset_path", "load", "load_instance", "parse_edge_list"]
