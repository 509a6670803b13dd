"""Decentralized analog beam selection under hierarchical position information.

Four strategies are provided. *Uncoordinated* maximizes each UE's own
average beam gain. The three coordinated strategies share one code path:
UE ``u`` first replays the decisions of the less informed UEs ``u+1..K-1``
(it can read their beliefs), then scores its own candidate beam pairs with a
greedy interference-aware proxy averaged over Monte-Carlo position draws.
They differ only in where the draws come from: the UE's own estimates taken
as exact (naive), the prior (statistical) or the posterior given the UE's
estimates (robust).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple

import numpy as np

from .beamgain import gain_matrices
from .codebook import Codebook
from .scenario import (BeliefSet, ScenarioConfig, sample_posterior_batch,
                       sample_prior_batch)


class Strategy(str, enum.Enum):
    UNCOORDINATED = "uncoordinated"
    NAIVE = "naive"
    STATISTICAL = "statistical"
    ROBUST = "robust"


COORDINATED = (Strategy.NAIVE, Strategy.STATISTICAL, Strategy.ROBUST)
_STRATEGY_CODE = {s: i for i, s in enumerate(Strategy)}
# Tag separating selection streams from the other per-trial streams.
SELECTION_STREAM = 7


class BeamPair(NamedTuple):
    q: int  # BS beam index
    p: int  # UE beam index


@dataclass(frozen=True)
class SelectionContext:
    """What UE ``ue`` can see when it picks its beams.

    ``beliefs`` holds the belief sets of observers ``ue, ue+1, ..., K-1``
    only; the more informed UEs' beliefs are not reachable from here.
    """

    ue: int
    beliefs: tuple[BeliefSet, ...]
    config: ScenarioConfig
    cb_ue: Codebook
    cb_bs: Codebook
    mc_iterations: int = 64
    seed: int = 0
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mc_iterations < 1:
            raise ValueError("mc_iterations must be positive")
        if len(self.beliefs) != self.config.num_ues - self.ue:
            raise ValueError("context must hold the beliefs of UEs ue..K-1")
        if self.beliefs[0].observer != self.ue:
            raise ValueError("first belief must be the UE's own")

    @classmethod
    def create(cls, beliefs, ue: int, config: ScenarioConfig, cb_ue: Codebook,
               cb_bs: Codebook, mc_iterations: int = 64, seed: int = 0,
               key: tuple[int, ...] = ()) -> "SelectionContext":
        """Context for UE ``ue`` from the full list of K belief sets."""
        return cls(ue, tuple(beliefs[ue:]), config, cb_ue, cb_bs,
                   mc_iterations, seed, tuple(key))

    @property
    def num_ues(self) -> int:
        return self.config.num_ues

    @property
    def noise_power(self) -> float:
        return self.config.noise_power

    @property
    def own_belief(self) -> BeliefSet:
        return self.beliefs[0]

    def belief(self, w: int) -> BeliefSet:
        if w < self.ue:
            raise PermissionError(f"UE {self.ue} cannot read the beliefs of UE {w}")
        return self.beliefs[w - self.ue]

    def for_ue(self, w: int) -> "SelectionContext":
        """The context UE ``w >= ue`` itself works with."""
        if w < self.ue:
            raise PermissionError(f"UE {self.ue} cannot act as UE {w}")
        return replace(self, ue=w, beliefs=self.beliefs[w - self.ue:])

    def rng(self, strategy: Strategy) -> np.random.Generator:
        """Stream owned by (seed, trial key, UE, strategy); replays reuse it."""
        ss = np.random.SeedSequence(
            self.seed,
            spawn_key=self.key + (SELECTION_STREAM, self.ue, _STRATEGY_CODE[strategy]))
        return np.random.default_rng(ss)


def single_user_rate(g: np.ndarray, q: int, p: int, noise_power: float) -> float:
    return float(np.log2(1.0 + g[q, p] / noise_power))


def _argmax_pair(table: np.ndarray) -> BeamPair:
    """Largest entry; ties go to the smallest q, then the smallest p."""
    q, p = divmod(int(np.argmax(table)), table.shape[1])
    return BeamPair(q, p)


def select_uncoordinated(ctx: SelectionContext) -> BeamPair:
    """Best own beam pair on the UE's estimate of its own position matrix."""
    own = ctx.own_belief.estimates[ctx.ue]
    g = gain_matrices(own, ctx.config.profile, ctx.cb_ue, ctx.cb_bs)
    return _argmax_pair(g)


def _column(g: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``g[..., :, p]`` with a per-batch column index ``p``."""
    idx = np.broadcast_to(p[..., None, None], g.shape[:-1] + (1,))
    return np.take_along_axis(g, idx, axis=-1)[..., 0]


def greedy_fix(gains: np.ndarray, known: Mapping[int, BeamPair], u: int,
               noise_power: float) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Guess the beams of the more informed UEs ``0..u-1`` one at a time.

    For each ``w < u`` the proxy SINR of UE ``w`` is maximized jointly over
    its own pair and the still-free UE beams of ``w+1..u``; only ``(q_w, p_w)``
    is kept. Free UE beams enter the objective only through their own
    interference term, so their joint optimum is a per-UE minimum over the
    codebook, which makes the joint search exact at any K.

    Returns a mapping ``w -> (q, p)`` (arrays over the batch dimensions) that
    covers the known UEs and the guessed ones.
    """
    batch = gains.shape[:-3]
    m_ue = gains.shape[-1]
    fixed = {w: (np.full(batch, pair[0]), np.full(batch, pair[1]))
             for w, pair in known.items()}
    for w in range(u):
        interference = np.zeros(batch + (gains.shape[-2],))
        for v, (_, p_v) in fixed.items():
            interference += _column(gains[..., v, :, :], p_v)
        for v in range(w + 1, u + 1):
            interference += gains[..., v, :, :].min(axis=-1)
        proxy = gains[..., w, :, :] / (interference[..., None] + noise_power)
        flat = proxy.reshape(batch + (-1,)).argmax(axis=-1)
        fixed[w] = (flat // m_ue, flat % m_ue)
    return fixed


def greedy_sum_rate_eval(gains, known: Mapping[int, BeamPair], u: int,
                         noise_power: float) -> np.ndarray:
    """Proxy SINR table of UE ``u`` over all its ``(q_u, p_u)`` candidates.

    Parameters
    ----------
    gains : array_like, shape (..., K, M_BS, M_UE)
        Gain matrices of all K UEs, optionally batched over draws.
    known : mapping
        Fixed pairs of the less informed UEs ``u+1..K-1``.
    u : int
        The deciding UE.
    noise_power : float

    Returns
    -------
    ndarray of shape (..., M_BS, M_UE)
        ``G_u[q, p] / (sum_{w != u} G_w[q, p_w] + noise_power)`` with ``p_w``
        taken from ``known`` and from the greedy guesses for UEs ``0..u-1``.
    """
    gains = np.asarray(gains, dtype=float)
    k = gains.shape[-3]
    if set(known) != set(range(u + 1, k)):
        raise ValueError(f"known pairs must cover exactly UEs {u + 1}..{k - 1}")
    fixed = greedy_fix(gains, known, u, noise_power)
    interference = np.zeros(gains.shape[:-3] + (gains.shape[-2],))
    for w, (_, p_w) in fixed.items():
        interference += _column(gains[..., w, :, :], p_w)
    return gains[..., u, :, :] / (interference[..., None] + noise_power)


def _position_draws(ctx: SelectionContext, strategy: Strategy) -> np.ndarray:
    if strategy is Strategy.NAIVE:
        return ctx.own_belief.estimates[None]
    rng = ctx.rng(strategy)
    if strategy is Strategy.STATISTICAL:
        return sample_prior_batch(ctx.config, rng, ctx.mc_iterations)
    if strategy is Strategy.ROBUST:
        return sample_posterior_batch(ctx.own_belief, ctx.config, rng, ctx.mc_iterations)
    raise ValueError(f"{strategy} is not a coordinated strategy")


def average_rate_table(ctx: SelectionContext, strategy: Strategy,
                       known: Mapping[int, BeamPair]) -> np.ndarray:
    """Monte-Carlo mean of ``log2(1 + proxy SINR)`` for every own beam pair."""
    draws = _position_draws(ctx, strategy)
    gains = gain_matrices(draws, ctx.config.profile, ctx.cb_ue, ctx.cb_bs)
    table = greedy_sum_rate_eval(gains, known, ctx.ue, ctx.noise_power)
    return np.log2(1.0 + table).mean(axis=0)


def predict_chain(ctx: SelectionContext, strategy: Strategy) -> dict[int, BeamPair]:
    """Replay the decisions of UEs ``K-1`` down to ``ue+1`` from their own beliefs."""
    decisions: dict[int, BeamPair] = {}
    for w in range(ctx.num_ues - 1, ctx.ue, -1):
        decisions[w] = select(ctx.for_ue(w), strategy, known=dict(decisions))
    return decisions


def select_coordinated(ctx: SelectionContext, strategy: Strategy,
                       known: Mapping[int, BeamPair] | None = None) -> BeamPair:
    """Own beam pair of ``ctx.ue`` for a coordinated strategy.

    ``known`` short-circuits the replay of the less informed UEs; when given
    it must equal what :func:`predict_chain` would return.
    """
    strategy = Strategy(strategy)
    if known is None:
        known = predict_chain(ctx, strategy)
    return _argmax_pair(average_rate_table(ctx, strategy, known))


def select(ctx: SelectionContext, strategy: Strategy,
           known: Mapping[int, BeamPair] | None = None) -> BeamPair:
    strategy = Strategy(strategy)
    if strategy is Strategy.UNCOORDINATED:
        return select_uncoordinated(ctx)
    return select_coordinated(ctx, strategy, known)


def select_all(beliefs, config: ScenarioConfig, cb_ue: Codebook, cb_bs: Codebook,
               strategy: Strategy, mc_iterations: int = 64, seed: int = 0,
               key: tuple[int, ...] = ()) -> list[BeamPair]:
    """Every UE's own decision, taken in hierarchical order (UE K-1 first).

    Each UE's replay of the less informed UEs is bit-identical to what they
    decided, so the chain is evaluated once and reused.
    """
    ctx = SelectionContext.create(beliefs, 0, config, cb_ue, cb_bs, mc_iterations, seed, key)
    decisions = predict_chain(ctx, strategy)
    decisions[0] = select(ctx, strategy, known=decisions)
    return [decisions[u] for u in range(config.num_ues)]
