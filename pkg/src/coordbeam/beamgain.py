"""Average beam-gain matrices, in closed form and by fading Monte-Carlo."""
from __future__ import annotations

import numpy as np

from .channel import channel_matrix, draw_path_gains
from .codebook import Codebook
from .scenario import PositionMatrix, path_cosines

# Below this |sin(pi*delta/2)| the Dirichlet ratio is replaced by its limit.
SINGULAR_EPS = 1e-9


def l_function(delta, n: int):
    """Normalized ULA array factor for a direction-cosine mismatch ``delta``.

    Equals ``n**-0.5 * exp(1j*pi/2*delta) / exp(1j*pi/2*n*delta)
    * sin(pi/2*n*delta) / sin(pi/2*delta)``; at the removable singularities
    (``delta`` an even integer) the sine ratio takes its limit, so the
    magnitude there is ``sqrt(n)``.
    """
    delta = np.asarray(delta, dtype=float)
    half = 0.5 * np.pi * delta
    den = np.sin(half)
    singular = np.abs(den) < SINGULAR_EPS
    safe = np.where(singular, 1.0, den)
    # sin(n x) / sin(x) -> n * (-1)**(k*(n-1)) as x -> k*pi
    k = np.rint(half / np.pi)
    limit = n * np.where((k * (n - 1)) % 2 == 0, 1.0, -1.0)
    ratio = np.where(singular, limit, np.sin(n * half) / safe)
    out = np.exp(1j * half * (1 - n)) * ratio / np.sqrt(n)
    return out[()] if out.ndim == 0 else out


def l_power(delta, n: int) -> np.ndarray:
    """``|l_function(delta, n)|**2`` without forming complex numbers."""
    half = 0.5 * np.pi * np.asarray(delta, dtype=float)
    den = np.sin(half)
    singular = np.abs(den) < SINGULAR_EPS
    safe = np.where(singular, 1.0, den)
    return np.where(singular, float(n), np.sin(n * half) ** 2 / (n * safe * safe))


def gain_from_cosines(cos_aod, cos_aoa, profile, cb_ue: Codebook,
                      cb_bs: Codebook) -> np.ndarray:
    """Gain matrices for path cosines of shape ``(..., L)``; result ``(..., M_BS, M_UE)``."""
    cos_aod = np.asarray(cos_aod)
    cos_aoa = np.asarray(cos_aoa)
    profile = np.asarray(profile, dtype=float)
    d_bs = cos_aoa[..., :, None] - cb_bs.cosines
    d_ue = cb_ue.cosines - cos_aod[..., :, None]
    g_bs = profile[:, None] * l_power(d_bs, cb_bs.num_antennas)
    g_ue = l_power(d_ue, cb_ue.num_antennas)
    return np.einsum("...lq,...lp->...qp", g_bs, g_ue)


def gain_matrices(nodes, profile, cb_ue: Codebook, cb_bs: Codebook) -> np.ndarray:
    """Analytic gain matrices for a batch of position matrices ``(..., L+1, 2)``."""
    cos_aod, cos_aoa = path_cosines(nodes)
    return gain_from_cosines(cos_aod, cos_aoa, profile, cb_ue, cb_bs)


def gain_matrix_analytic(p: PositionMatrix, profile, cb_ue: Codebook,
                         cb_bs: Codebook) -> np.ndarray:
    """Average beam gain ``G[q, p]`` of BS beam ``q`` and UE beam ``p``.

    Parameters
    ----------
    p : PositionMatrix
        Geometry of one UE.
    profile : array_like
        Average path powers, one per path (LoS first).
    cb_ue, cb_bs : Codebook
        UE-side and BS-side codebooks.

    Returns
    -------
    ndarray of shape (M_BS, M_UE)
    """
    profile = np.asarray(profile, dtype=float)
    if profile.size != p.num_paths:
        raise ValueError("profile length must equal the number of paths")
    return gain_matrices(p.nodes, profile, cb_ue, cb_bs)


def gain_matrix_empirical(p: PositionMatrix, profile, cb_ue: Codebook, cb_bs: Codebook,
                          samples: int, rng: np.random.Generator,
                          chunk: int = 1024) -> np.ndarray:
    """Sample mean of ``|w_q^H H v_p|^2`` over independent channel draws."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    profile = np.asarray(profile, dtype=float)
    cos_aod, cos_aoa = path_cosines(p.nodes)
    w = cb_bs.matrix()
    v = cb_ue.matrix()
    acc = np.zeros((cb_bs.size, cb_ue.size))
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        gains = draw_path_gains(profile, rng, n)
        h = channel_matrix(gains, cos_aod, cos_aoa, cb_bs.num_antennas, cb_ue.num_antennas)
        acc += (np.abs(w.conj().T @ h @ v) ** 2).sum(axis=0)
        done += n
    return acc / samples
