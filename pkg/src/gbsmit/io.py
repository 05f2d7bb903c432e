"""JSON formats for graphs, interferometers and bundled data."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np


def adjacency_from_json(data: dict[str, Any]) -> np.ndarray:
    """``{"nodes": int, "edges": [[i, j], ...]}`` (0-indexed) to an adjacency matrix."""
    unknown = set(data) - {"nodes", "edges"}
    if unknown:
        raise ValueError(f"unknown graph keys: {sorted(unknown)}")
    n = int(data["nodes"])
    adj = np.zeros((n, n))
    for edge in data["edges"]:
        i, j = (int(x) for x in edge)
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"invalid edge {edge} for a {n}-node graph")
        adj[i, j] = adj[j, i] = 1
    return adj


def adjacency_to_json(adj) -> dict[str, Any]:
    adj = np.asarray(adj)
    n = len(adj)
    return {"nodes": n, "edges": [[i, j] for i in range(n) for j in range(i + 1, n) if adj[i, j]]}


def load_graph(source: str | Path | dict) -> np.ndarray:
    if isinstance(source, dict):
        return adjacency_from_json(source)
    return adjacency_from_json(json.loads(Path(source).read_text()))


def book_graph() -> np.ndarray:
    """The eight-node book graph shipped with the package."""
    text = resources.files("gbsmit").joinpath("data/book_graph.json").read_text()
    return adjacency_from_json(json.loads(text))


def matrix_from_json(data) -> np.ndarray:
    """Array-of-arrays of ``[re, im]`` pairs to a complex matrix."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("expected rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_json(mat) -> list:
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def load_interferometer(path: str | Path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))
