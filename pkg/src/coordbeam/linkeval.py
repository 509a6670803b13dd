"""Hybrid receive chain: analog beams, ZF digital combiner, per-UE SINR."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization
from .codebook import Codebook

# Singular values below this fraction of the largest are treated as zero.
ZF_RCOND = 1e-12


@dataclass(frozen=True)
class RateRecord:
    sinr: np.ndarray  # linear, one per UE

    @property
    def rates(self) -> np.ndarray:
        return np.log2(1.0 + self.sinr)

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())


def analog_combiner(assignment: Sequence[tuple[int, int]], cb_bs: Codebook) -> np.ndarray:
    """``W_RF`` with column ``u`` the BS beam ``q_u``; shape ``(N_BS, K)``."""
    return cb_bs.beams[[q for q, _ in assignment]].T


def effective_channel(channels: Sequence[ChannelRealization], assignment,
                      cb_ue: Codebook, cb_bs: Codebook) -> np.ndarray:
    """``K x K`` matrix whose column ``u`` is ``W_RF^H H^u v_{p_u}``."""
    w_rf = analog_combiner(assignment, cb_bs)
    cols = [ch.matrix @ cb_ue.beams[p] for ch, (_, p) in zip(channels, assignment)]
    return w_rf.conj().T @ np.stack(cols, axis=1)


def zf_combiner(h_eff: np.ndarray) -> np.ndarray:
    """Least-squares pseudo-inverse of the effective channel.

    Rank-deficient inputs are not an error: the minimum-norm pseudo-inverse
    is returned and the residual interference shows up in the SINR.
    """
    return np.linalg.pinv(np.asarray(h_eff), rcond=ZF_RCOND)


def combine(channels, assignment, cb_ue: Codebook, cb_bs: Codebook):
    """Return ``(W_D, W_RF, H_eff)`` for one beam assignment."""
    h_eff = effective_channel(channels, assignment, cb_ue, cb_bs)
    return zf_combiner(h_eff), analog_combiner(assignment, cb_bs), h_eff


def evaluate_sinr(channels, assignment, cb_ue: Codebook, cb_bs: Codebook,
                  noise_power: float) -> RateRecord:
    """Per-UE SINR after analog combining and ZF.

    The filtered noise power of UE ``u`` is ``noise_power * ||w_D^u W_RF^H||^2``;
    ZF rows are not unit norm, so it differs between UEs.
    """
    w_d, w_rf, h_eff = combine(channels, assignment, cb_ue, cb_bs)
    a = np.abs(w_d @ h_eff) ** 2
    signal = np.diag(a)
    interference = a.sum(axis=1) - signal
    noise = noise_power * np.sum(np.abs(w_d @ w_rf.conj().T) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        sinr = signal / (interference + noise)
    return RateRecord(sinr)


def draw_noise(n_bs: int, noise_power: float, rng: np.random.Generator,
               size: int | None = None) -> np.ndarray:
    """White ``CN(0, noise_power I)`` antenna noise."""
    shape = (n_bs,) if size is None else (size, n_bs)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(noise_power / 2.0) * (z[..., 0] + 1j * z[..., 1])


def reconstruct_signal(channels, assignment, symbols, noise, cb_ue: Codebook,
                       cb_bs: Codebook) -> np.ndarray:
    """Combiner output ``W_D W_RF^H (sum_u H^u v^u s^u + n)``.

    ``symbols`` has shape ``(..., K)`` and ``noise`` shape ``(..., N_BS)``
    with matching leading dimensions.
    """
    w_d, w_rf, _ = combine(channels, assignment, cb_ue, cb_bs)
    tx = np.stack([ch.matrix @ cb_ue.beams[p] for ch, (_, p) in zip(channels, assignment)],
                  axis=1)  # (N_BS, K)
    y = np.asarray(symbols) @ tx.T + np.asarray(noise)
    return y @ (w_d @ w_rf.conj().T).T
