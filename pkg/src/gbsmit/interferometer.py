"""Lossy linear interferometers: SVD into uniform-loss form and lossy mesh models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-10


@dataclass(frozen=True)
class LossySVD:
    v: np.ndarray
    transmissions: np.ndarray
    w: np.ndarray

    @property
    def gap(self) -> float:
        """Spread ``max eta - min eta`` of the per-channel transmissions."""
        return float(self.transmissions.max() - self.transmissions.min())

    def is_uniform(self, tol: float = 1e-6) -> bool:
        return self.gap < tol

    def reconstruct(self) -> np.ndarray:
        return self.v @ np.diag(np.sqrt(self.transmissions)) @ self.w


def lossy_interferometer_svd(transfer) -> LossySVD:
    """Write a sub-unitary transfer matrix as ``V diag(sqrt(eta)) W``."""
    transfer = np.asarray(transfer, dtype=complex)
    v, s, w = np.linalg.svd(transfer)
    if s.max(initial=0.0) > 1 + TOL:
        raise ValueError(f"singular value {s.max():.12g} exceeds 1; the matrix is not a lossy interferometer")
    return LossySVD(v, np.clip(s, 0, 1) ** 2, w)


def beamsplitter(theta: float, phi: float) -> np.ndarray:
    """Tunable beam splitter (Mach-Zehnder with input phase ``phi``)."""
    return np.array(
        [
            [np.exp(1j * phi) * np.cos(theta), -np.sin(theta)],
            [np.exp(1j * phi) * np.sin(theta), np.cos(theta)],
        ]
    )


def _apply(mat: np.ndarray, i: int, block: np.ndarray) -> np.ndarray:
    out = mat.copy()
    out[[i, i + 1], :] = block @ mat[[i, i + 1], :]
    return out


def clements_mesh(modes: int, loss: float, rng: np.random.Generator) -> np.ndarray:
    """Rectangular mesh of random beam splitters, ``modes`` columns deep.

    Every mode picks up loss ``loss`` in every column, idle waveguides
    included, since all paths through a rectangular mesh have equal length.
    """
    t = np.eye(modes, dtype=complex)
    amp = np.sqrt(1 - loss)
    for col in range(modes):
        for i in range(col % 2, modes - 1, 2):
            t = _apply(t, i, beamsplitter(*rng.uniform(0, 2 * np.pi, 2)))
        t = amp * t
    return t


def reck_mesh(modes: int, loss: float, rng: np.random.Generator) -> np.ndarray:
    """Triangular mesh of random beam splitters; loss ``loss`` on each beam splitter's two modes."""
    t = np.eye(modes, dtype=complex)
    amp = np.sqrt(1 - loss)
    for diag in range(modes - 1):
        for i in range(modes - 2 - diag, modes - 1):
            t = _apply(t, i, amp * beamsplitter(*rng.uniform(0, 2 * np.pi, 2)))
    return t
