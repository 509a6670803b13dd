"""Finite analog beam codebooks built from a grid of steering angles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_vector


@dataclass(frozen=True)
class Codebook:
    """Grid angles and the matching steering vectors (``beams[p]`` is beam ``p``)."""

    grid_angles: np.ndarray
    beams: np.ndarray  # (M, N)
    side: str

    @property
    def size(self) -> int:
        return self.grid_angles.size

    @property
    def num_antennas(self) -> int:
        return self.beams.shape[1]

    @property
    def cosines(self) -> np.ndarray:
        return np.cos(self.grid_angles)

    def matrix(self) -> np.ndarray:
        """Beams as columns, shape ``(N, M)``."""
        return self.beams.T


def grid_angles(m: int) -> np.ndarray:
    """Midpoints of a uniform partition of the cosine domain ``[-1, 1]``."""
    p = np.arange(1, m + 1)
    return np.arccos(1.0 - (2.0 * p - 1.0) / m)


def build_codebook(m: int, n: int, side: str = "BS") -> Codebook:
    """Codebook of ``m`` beams for an ``n``-antenna ULA.

    The grid is equally spaced in ``cos(angle)``, so adjacent beams cross
    over at the same gain loss everywhere in the visible region.
    """
    if m < 1 or n < 1:
        raise ValueError("codebook size and antenna count must be >= 1")
    if side not in ("UE", "BS"):
        raise ValueError("side must be 'UE' or 'BS'")
    angles = grid_angles(m)
    beams = np.stack([steering_vector(a, n) for a in angles])
    return Codebook(angles, beams, side)
