"""Ground-truth geometry, noisy hierarchical beliefs and position samplers.

Node layout used throughout the package: a position matrix is stored as an
``(L+1, 2)`` array whose rows are the BS, the ``L-1`` reflectors and the UE,
in that order. Batches of position sets are arrays of shape
``(B, K, L+1, 2)``.

UE indices are 0-based: UE 0 is the most informed UE in the hierarchy and
UE ``K-1`` the least informed one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Minimum node separation before angles become undefined.
MIN_SEPARATION = 1e-9
# Rejection attempts per node before falling back to the nearest support point.
MAX_REJECTION_ATTEMPTS = 1000


class DegenerateGeometry(ValueError):
    """A reflector coincides with the BS or the UE so path angles are undefined."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, propagation and array parameters of one scenario."""

    num_ues: int = 2
    num_paths: int = 3
    # 100 m from the BS, 13.4 deg off the array normal
    cluster_center: tuple[float, float] = (23.1, 97.3)
    cluster_radius: float = 7.0
    bs_position: tuple[float, float] = (0.0, 0.0)
    # (x_min, x_max, y_min, y_max)
    reflector_region: tuple[float, float, float, float] = (-60.0, 60.0, 10.0, 90.0)
    path_power_profile: tuple[float, ...] = (0.6, 0.2, 0.2)
    noise_power: float = 4.096
    n_ue: int = 64
    n_bs: int = 64
    m_ue: int = 64
    m_bs: int = 64

    def __post_init__(self):
        for name in ("num_ues", "num_paths", "n_ue", "n_bs", "m_ue", "m_bs"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.cluster_radius < 0:
            raise ValueError("cluster_radius must be >= 0")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        profile = np.asarray(self.path_power_profile, dtype=float)
        if profile.shape != (self.num_paths,):
            raise ValueError(
                f"path_power_profile needs {self.num_paths} entries, got {profile.size}")
        if np.any(profile < 0):
            raise ValueError("path powers must be nonnegative")
        if abs(profile.sum() - 1.0) > 1e-12:
            raise ValueError("path powers must sum to 1")
        x0, x1, y0, y1 = self.reflector_region
        if self.num_paths > 1 and not (x1 >= x0 and y1 >= y0):
            raise ValueError("reflector_region must be (x_min, x_max, y_min, y_max)")

    @property
    def profile(self) -> np.ndarray:
        return np.asarray(self.path_power_profile, dtype=float)


@dataclass(frozen=True)
class PositionMatrix:
    """2-D positions of the BS, the reflectors and one UE."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise ValueError("nodes must have shape (L+1, 2)")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("all coordinates must be finite")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_points(cls, bs, reflectors, ue) -> "PositionMatrix":
        refl = np.asarray(reflectors, dtype=float).reshape(-1, 2)
        return cls(np.vstack([np.asarray(bs, float), refl, np.asarray(ue, float)]))

    @property
    def num_paths(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def bs(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def reflectors(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def ue(self) -> np.ndarray:
        return self.nodes[-1]

    @property
    def columns(self) -> np.ndarray:
        """The ``2 x (L+1)`` matrix form (one column per node)."""
        return self.nodes.T


@dataclass(frozen=True)
class ErrorModel:
    """Maximum position-error radii indexed by ``[observer, subject, node]``."""

    radii: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.ndim != 3 or radii.shape[0] != radii.shape[1]:
            raise ValueError("radii must have shape (K, K, L+1)")
        if np.any(radii < 0) or not np.all(np.isfinite(radii)):
            raise ValueError("error radii must be finite and >= 0")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def per_observer(cls, observer_radii, num_paths: int,
                     bs_known: bool = True) -> "ErrorModel":
        """Every node seen by observer ``u`` gets radius ``observer_radii[u]``.

        The BS column is left error-free when ``bs_known`` is set.
        """
        r = np.asarray(observer_radii, dtype=float)
        k = r.size
        radii = np.broadcast_to(r[:, None, None], (k, k, num_paths + 1)).copy()
        if bs_known:
            radii[:, :, 0] = 0.0
        return cls(radii)

    @classmethod
    def perfect(cls, num_ues: int, num_paths: int) -> "ErrorModel":
        return cls(np.zeros((num_ues, num_ues, num_paths + 1)))

    @property
    def num_ues(self) -> int:
        return self.radii.shape[0]


@dataclass(frozen=True)
class BeliefSet:
    """Estimates held by one observer about every UE's position matrix."""

    observer: int
    estimates: np.ndarray  # (K, L+1, 2)
    radii: np.ndarray  # (K, L+1), this observer's row of the error model
    error_model: ErrorModel | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        if est.ndim != 3 or est.shape[2] != 2:
            raise ValueError("estimates must have shape (K, L+1, 2)")
        if not 0 <= self.observer < est.shape[0]:
            raise ValueError("observer index out of range")
        radii = np.asarray(self.radii, dtype=float)
        if radii.shape != est.shape[:2]:
            raise ValueError("radii must have shape (K, L+1)")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "radii", radii)

    @property
    def num_ues(self) -> int:
        return self.estimates.shape[0]

    @property
    def matrices(self) -> list[PositionMatrix]:
        return [PositionMatrix(e) for e in self.estimates]


def uniform_disk(rng: np.random.Generator, radius, size=()) -> np.ndarray:
    """Points uniform on closed disks of the given radius; shape ``size + (2,)``."""
    size = (int(size),) if np.isscalar(size) else tuple(size)
    u = rng.random(size + (2,))
    rho = np.asarray(radius, dtype=float) * np.sqrt(u[..., 0])
    theta = 2.0 * np.pi * u[..., 1]
    return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)


def sample_position_error(radius: float, rng: np.random.Generator) -> np.ndarray:
    """Offset uniformly distributed on the closed disk ``S(radius)``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return uniform_disk(rng, radius)


def path_cosines(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Direction cosines of every path w.r.t. the shared ULA axis (+x).

    ``nodes`` has shape ``(..., L+1, 2)``. Returns ``(cos_aod, cos_aoa)``,
    each of shape ``(..., L)``, path 0 being the LoS path.
    """
    nodes = np.asarray(nodes, dtype=float)
    bs = nodes[..., :1, :]
    ue = nodes[..., -1:, :]
    refl = nodes[..., 1:-1, :]
    # targets seen from the UE (AoD) and from the BS (AoA)
    dep = np.concatenate([bs, refl], axis=-2) - ue
    arr = np.concatenate([ue, refl], axis=-2) - bs
    d_dep = np.hypot(dep[..., 0], dep[..., 1])
    d_arr = np.hypot(arr[..., 0], arr[..., 1])
    if np.any(d_dep <= MIN_SEPARATION) or np.any(d_arr <= MIN_SEPARATION):
        raise DegenerateGeometry("a node coincides with the BS or the UE")
    return dep[..., 0] / d_dep, arr[..., 0] / d_arr


def _wrap(angle: np.ndarray) -> np.ndarray:
    out = np.mod(angle, 2.0 * np.pi)
    # tiny negative angles round up to exactly 2*pi
    out[out >= 2.0 * np.pi] = 0.0
    return out


def angles_from_positions(p: PositionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """AoDs at the UE and AoAs at the BS, in ``[0, 2*pi)``.

    Path 0 is the LoS path, path ``l > 0`` bounces on reflector ``l``.
    """
    nodes = p.nodes
    bs, ue, refl = nodes[0], nodes[-1], nodes[1:-1]
    dep = np.vstack([bs, refl]) - ue
    arr = np.vstack([ue, refl]) - bs
    if (np.any(np.hypot(*dep.T) <= MIN_SEPARATION)
            or np.any(np.hypot(*arr.T) <= MIN_SEPARATION)):
        raise DegenerateGeometry("a node coincides with the BS or the UE")
    aods = _wrap(np.arctan2(dep[:, 1], dep[:, 0]))
    aoas = _wrap(np.arctan2(arr[:, 1], arr[:, 0]))
    return aods, aoas


def _to_matrices(batch: np.ndarray) -> list[PositionMatrix]:
    return [PositionMatrix(nodes) for nodes in batch]


def sample_prior_batch(config: ScenarioConfig, rng: np.random.Generator,
                       size: int) -> np.ndarray:
    """``size`` independent position sets from the cluster/reflector prior.

    Reflectors are drawn once per set and shared by all K UEs.
    """
    k, n_refl = config.num_ues, config.num_paths - 1
    x0, x1, y0, y1 = config.reflector_region
    out = np.empty((size, k, n_refl + 2, 2))
    out[:, :, 0, :] = config.bs_position
    if n_refl:
        u = rng.random((size, n_refl, 2))
        refl = np.stack([x0 + (x1 - x0) * u[..., 0], y0 + (y1 - y0) * u[..., 1]], axis=-1)
        out[:, :, 1:-1, :] = refl[:, None]
    out[:, :, -1, :] = np.asarray(config.cluster_center) + uniform_disk(
        rng, config.cluster_radius, (size, k))
    return out


def sample_scenario(config: ScenarioConfig, rng: np.random.Generator) -> list[PositionMatrix]:
    """Ground-truth position matrices of the K UEs (shared BS and reflectors)."""
    return _to_matrices(sample_prior_batch(config, rng, 1)[0])


def sample_prior(config: ScenarioConfig, rng: np.random.Generator) -> list[PositionMatrix]:
    """One fresh draw of all K position matrices from the prior."""
    return _to_matrices(sample_prior_batch(config, rng, 1)[0])


def build_beliefs(truth: list[PositionMatrix], em: ErrorModel,
                  rng: np.random.Generator) -> list[BeliefSet]:
    """Noisy estimates of every position matrix, one BeliefSet per observer."""
    true_nodes = np.stack([p.nodes for p in truth])
    k = true_nodes.shape[0]
    if em.radii.shape != (k,) + true_nodes.shape[:2]:
        raise ValueError("error model does not match the scenario dimensions")
    beliefs = []
    for u in range(k):
        offsets = uniform_disk(rng, em.radii[u], em.radii[u].shape)
        beliefs.append(BeliefSet(u, true_nodes + offsets, em.radii[u], em))
    return beliefs


def _project_to_disk(points: np.ndarray, center, radius: float) -> np.ndarray:
    d = points - center
    norm = np.hypot(d[..., 0], d[..., 1])
    scale = np.where(norm > radius, radius / np.maximum(norm, 1e-300), 1.0)
    return center + d * scale[..., None]


def _in_region(points: np.ndarray, region) -> np.ndarray:
    x0, x1, y0, y1 = region
    return ((points[..., 0] >= x0) & (points[..., 0] <= x1)
            & (points[..., 1] >= y0) & (points[..., 1] <= y1))


def _disk_proposal(center, radius):
    return lambda rng, n: center + uniform_disk(rng, radius, n)


def _rect_proposal(region):
    x0, x1, y0, y1 = region
    return lambda rng, n: rng.uniform([x0, y0], [x1, y1], size=(n, 2))


def _rejection(rng, propose, accept, fallback, size) -> np.ndarray:
    """Draw ``size`` points from ``propose`` restricted by ``accept``."""
    out = np.empty((size, 2))
    pending = np.arange(size)
    for _ in range(MAX_REJECTION_ATTEMPTS):
        cand = propose(rng, pending.size)
        ok = accept(cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
        if pending.size == 0:
            return out
    out[pending] = fallback
    return out


def sample_posterior_batch(belief: BeliefSet, config: ScenarioConfig,
                           rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` draws of all K position matrices given one observer's estimates.

    Errors are uniform on disks, so the posterior of a node is uniform on the
    intersection of its likelihood disks (one per subject that observes it)
    with the prior support. Reflectors and the BS are shared nodes: every
    subject's estimate constrains the same point.
    """
    est, radii = belief.estimates, belief.radii
    k, n_nodes = est.shape[:2]
    out = np.empty((size, k, n_nodes, 2))

    # BS: the prior pins it to the configured position.
    if np.all(radii[:, 0] == 0):
        out[:, :, 0, :] = est[:, 0]
    else:
        out[:, :, 0, :] = config.bs_position

    region = config.reflector_region
    for n in range(1, n_nodes - 1):
        r_n, e_n = radii[:, n], est[:, n]
        exact = r_n == 0
        if np.any(exact):
            out[:, :, n, :] = np.where(exact[:, None], e_n, e_n[np.argmax(exact)])
            continue
        best = int(np.argmin(r_n))

        def accept(c, e_n=e_n, r_n=r_n):
            d = np.hypot(c[:, None, 0] - e_n[None, :, 0], c[:, None, 1] - e_n[None, :, 1])
            return np.all(d <= r_n * (1 + 1e-12), axis=1) & _in_region(c, region)

        fallback = np.clip(e_n[best], [region[0], region[2]], [region[1], region[3]])
        # propose from whichever of the tightest disk and the region is smaller
        if np.pi * r_n[best] ** 2 <= (region[1] - region[0]) * (region[3] - region[2]):
            propose = _disk_proposal(e_n[best], r_n[best])
        else:
            propose = _rect_proposal(region)
        out[:, :, n, :] = _rejection(rng, propose, accept, fallback, size)[:, None]

    center = np.asarray(config.cluster_center, dtype=float)
    r_cl = config.cluster_radius
    for w in range(k):
        r, e = radii[w, -1], est[w, -1]
        if r == 0:
            out[:, w, -1, :] = e
        elif r_cl == 0:
            out[:, w, -1, :] = center
        else:
            def accept(c, e=e, r=r):
                return ((np.hypot(c[:, 0] - center[0], c[:, 1] - center[1]) <= r_cl)
                        & (np.hypot(c[:, 0] - e[0], c[:, 1] - e[1]) <= r * (1 + 1e-12)))
            fallback = _project_to_disk(e, center, r_cl)
            # propose from the smaller of the two disks
            propose = _disk_proposal(e, r) if r <= r_cl else _disk_proposal(center, r_cl)
            out[:, w, -1, :] = _rejection(rng, propose, accept, fallback, size)
    return out


def sample_posterior(belief: BeliefSet, config: ScenarioConfig,
                     rng: np.random.Generator) -> list[PositionMatrix]:
    """One draw of all K true position matrices given ``belief``."""
    return _to_matrices(sample_posterior_batch(belief, config, rng, 1)[0])
