"""ULA steering vectors and narrowband geometric channel draws."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import PositionMatrix, angles_from_positions


def steering_vector(angle: float, n: int) -> np.ndarray:
    """Unit-norm ULA response, entry ``k`` is ``exp(-1j*pi*k*cos(angle)) / sqrt(n)``."""
    if n < 1:
        raise ValueError("antenna count must be >= 1")
    return steering_from_cosine(np.cos(angle), n)


def steering_from_cosine(cosine, n: int) -> np.ndarray:
    """Steering vectors for direction cosine(s); shape ``np.shape(cosine) + (n,)``."""
    k = np.arange(n)
    return np.exp(-1j * np.pi * np.multiply.outer(cosine, k)) / np.sqrt(n)


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray  # (N_BS, N_UE)
    path_gains: np.ndarray  # (L,) complex
    aods: np.ndarray
    aoas: np.ndarray

    def rebuild(self) -> np.ndarray:
        n_bs, n_ue = self.matrix.shape
        return channel_matrix(self.path_gains, np.cos(self.aods), np.cos(self.aoas),
                              n_bs, n_ue)


def draw_path_gains(profile, rng: np.random.Generator, size: int) -> np.ndarray:
    """``CN(0, sigma_l^2)`` path gains, shape ``(size, L)``."""
    profile = np.asarray(profile, dtype=float)
    z = rng.standard_normal((size, profile.size, 2))
    return np.sqrt(profile / 2.0) * (z[..., 0] + 1j * z[..., 1])


def channel_matrix(gains, cos_aod, cos_aoa, n_bs: int, n_ue: int) -> np.ndarray:
    """``sqrt(N_BS N_UE) * sum_l alpha_l a_BS(aoa_l) a_UE(aod_l)^H``.

    ``gains`` may carry leading batch dimensions, shape ``(..., L)``.
    """
    a_bs = steering_from_cosine(np.asarray(cos_aoa), n_bs)  # (L, N_BS)
    a_ue = steering_from_cosine(np.asarray(cos_aod), n_ue)  # (L, N_UE)
    h = np.einsum("...l,lb,lu->...bu", gains, a_bs, a_ue.conj())
    return np.sqrt(n_bs * n_ue) * h


def draw_channel(p: PositionMatrix, profile, n_bs: int, n_ue: int,
                 rng: np.random.Generator) -> ChannelRealization:
    """Random channel realization for the geometry ``p``."""
    profile = np.asarray(profile, dtype=float)
    if profile.size != p.num_paths:
        raise ValueError("profile length must equal the number of paths")
    aods, aoas = angles_from_positions(p)
    gains = draw_path_gains(profile, rng, 1)[0]
    h = channel_matrix(gains, np.cos(aods), np.cos(aoas), n_bs, n_ue)
    return ChannelRealization(h, gains, aods, aoas)
