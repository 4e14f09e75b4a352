"""Clustered mmWave MIMO channel generation with an exact SVD oracle.

The channel is a sum of rank-1 ray contributions over scattering clusters,
plus an optional LOS term, for uniform linear arrays at both link ends.
Every realization carries its exact singular value decomposition so that
estimation algorithms can be scored against ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_elements: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")


@dataclass(frozen=True)
class LogDistancePathLoss:
    """PL_dB(d) = intercept_db + 10 * exponent * log10(d)."""

    intercept_db: float = 72.0
    exponent: float = 2.92


@dataclass(frozen=True)
class ChannelParams:
    """Scenario parameters for the clustered channel model."""

    n_clusters: int = 5
    rays_per_cluster: tuple = (10, 10, 10, 10, 10)
    carrier_freq_hz: float = 73e9
    link_distance_m: float = 50.0
    los_probability: float = 0.0
    path_loss_model: LogDistancePathLoss = field(default_factory=LogDistancePathLoss)
    cluster_angle_spread_deg: float = 5.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 3.0
    bandwidth_hz: float = 500e6

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if len(self.rays_per_cluster) != self.n_clusters:
            raise ValueError(
                f"rays_per_cluster has {len(self.rays_per_cluster)} entries "
                f"for {self.n_clusters} clusters"
            )
        if any(n < 1 for n in self.rays_per_cluster):
            raise ValueError("rays_per_cluster entries must be positive")
        if not 0.0 <= self.los_probability <= 1.0:
            raise ValueError(f"los_probability must be in [0, 1], got {self.los_probability}")
        if self.carrier_freq_hz <= 0:
            raise ValueError("carrier_freq_hz must be > 0")
        if self.link_distance_m <= 0:
            raise ValueError("link_distance_m must be > 0")
        if self.cluster_angle_spread_deg < 0:
            raise ValueError("cluster_angle_spread_deg must be >= 0")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")


def noise_variance(params: ChannelParams) -> float:
    """Thermal noise power over the signal bandwidth including the noise figure."""
    psd_w_hz = 10.0 ** ((params.noise_psd_dbm_hz - 30.0) / 10.0)
    return psd_w_hz * params.bandwidth_hz * 10.0 ** (params.noise_figure_db / 10.0)


@dataclass(frozen=True)
class RayParams:
    """One propagation path: complex gain, attenuation and endpoint angles."""

    gain: complex
    attenuation_linear: float
    aod_bs_rad: float
    aoa_ms_rad: float

    def __post_init__(self):
        if self.attenuation_linear < 0:
            raise ValueError("attenuation_linear must be >= 0")


@dataclass(frozen=True)
class ChannelRealization:
    """Channel matrix, its exact SVD and the ray geometry that produced it."""

    h: np.ndarray        # N_MS x N_BS
    u: np.ndarray        # N_MS x r, left singular vectors
    sigma: np.ndarray    # length r, descending
    v: np.ndarray        # N_BS x r, right singular vectors
    rays: tuple
    los_present: bool
    los_phase_rad: float


def steering_vector(array: ArrayConfig, angle_rad: float) -> np.ndarray:
    """Unit-norm ULA response vector at the given azimuth angle."""
    if not -math.pi / 2 <= angle_rad <= math.pi / 2:
        raise ValueError(f"angle_rad must lie in [-pi/2, pi/2], got {angle_rad}")
    n = array.n_elements
    k = np.arange(n)
    phase = -2.0 * math.pi * array.spacing * math.sin(angle_rad)
    return np.exp(1j * phase * k) / math.sqrt(n)


def path_loss_linear(params: ChannelParams, distance_m: float) -> float:
    """Linear-scale attenuation of the log-distance path-loss model."""
    if distance_m <= 0:
        raise ValueError(f"distance_m must be > 0, got {distance_m}")
    model = params.path_loss_model
    pl_db = model.intercept_db + 10.0 * model.exponent * math.log10(distance_m)
    return 10.0 ** (-pl_db / 10.0)


def _fix_phases(u: np.ndarray, v: np.ndarray | None = None):
    """Rotate each column of u so its largest-magnitude entry is real positive.

    When v is given, its matching column is rotated by the same unit scalar,
    which leaves u @ diag(s) @ v^H unchanged.
    """
    u = u.copy()
    v = v.copy() if v is not None else None
    for col in range(u.shape[1]):
        idx = int(np.argmax(np.abs(u[:, col])))
        pivot = u[idx, col]
        if abs(pivot) == 0.0:
            continue
        rot = np.conj(pivot) / abs(pivot)
        u[:, col] *= rot
        if v is not None:
            v[:, col] *= rot
    return u if v is None else (u, v)


def dominant_svd(h: np.ndarray, m: int):
    """The m dominant singular triplets of h, with a deterministic phase.

    Returns (u, sigma, v) with sigma descending; each left vector's largest
    entry is rotated to be real positive and the right vector follows.
    """
    h = np.asarray(h)
    if not 1 <= m <= min(h.shape):
        raise ValueError(f"m must be in [1, {min(h.shape)}], got {m}")
    u_full, s_full, vh_full = np.linalg.svd(h, full_matrices=False)
    u = u_full[:, :m]
    v = vh_full[:m].conj().T
    u, v = _fix_phases(u, v)
    return u, s_full[:m].copy(), v


def assemble_channel(
    bs: ArrayConfig,
    ms: ArrayConfig,
    rays,
    gamma: float,
    los_present: bool = False,
    los_phase_rad: float = 0.0,
    los_aoa_ms_rad: float = 0.0,
    los_aod_bs_rad: float = 0.0,
    los_attenuation_linear: float = 0.0,
) -> ChannelRealization:
    """Build a realization from explicit ray parameters and LOS geometry."""
    h = np.zeros((ms.n_elements, bs.n_elements), dtype=complex)
    if rays:
        a_ms = np.stack([steering_vector(ms, r.aoa_ms_rad) for r in rays], axis=1)
        a_bs = np.stack([steering_vector(bs, r.aod_bs_rad) for r in rays], axis=1)
        weights = np.array([r.gain * math.sqrt(r.attenuation_linear) for r in rays])
        h = gamma * (a_ms * weights) @ a_bs.conj().T
    if los_present:
        amp = math.sqrt(ms.n_elements * bs.n_elements * los_attenuation_linear)
        h = h + (
            amp
            * np.exp(1j * los_phase_rad)
            * np.outer(
                steering_vector(ms, los_aoa_ms_rad),
                steering_vector(bs, los_aod_bs_rad).conj(),
            )
        )
    r = min(h.shape)
    u, sigma, v = dominant_svd(h, r)
    return ChannelRealization(
        h=h,
        u=u,
        sigma=sigma,
        v=v,
        rays=tuple(rays),
        los_present=los_present,
        los_phase_rad=los_phase_rad,
    )


def sample_channel(
    params: ChannelParams,
    bs: ArrayConfig,
    ms: ArrayConfig,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one clustered channel realization.

    Cluster central angles are uniform on [-pi/2, pi/2] at both ends; per-ray
    angles add a bounded uniform offset (clipped back into the visible range).
    Ray gains are standard circular complex Gaussians; all rays share the
    link-distance attenuation.
    """
    total_rays = sum(params.rays_per_cluster)
    gamma = math.sqrt(bs.n_elements * ms.n_elements / total_rays)
    attn = path_loss_linear(params, params.link_distance_m)
    spread = math.radians(params.cluster_angle_spread_deg)

    rays = []
    for n_ray in params.rays_per_cluster:
        center_bs = rng.uniform(-math.pi / 2, math.pi / 2)
        center_ms = rng.uniform(-math.pi / 2, math.pi / 2)
        for _ in range(n_ray):
            aod = float(np.clip(center_bs + rng.uniform(-spread, spread), -math.pi / 2, math.pi / 2))
            aoa = float(np.clip(center_ms + rng.uniform(-spread, spread), -math.pi / 2, math.pi / 2))
            gain = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
            rays.append(RayParams(gain=gain, attenuation_linear=attn, aod_bs_rad=aod, aoa_ms_rad=aoa))

    los_present = bool(rng.uniform() < params.los_probability)
    los_phase = float(rng.uniform(0.0, 2.0 * math.pi))
    los_aoa = float(rng.uniform(-math.pi / 2, math.pi / 2))
    los_aod = float(rng.uniform(-math.pi / 2, math.pi / 2))

    return assemble_channel(
        bs,
        ms,
        rays,
        gamma,
        los_present=los_present,
        los_phase_rad=los_phase,
        los_aoa_ms_rad=los_aoa,
        los_aod_bs_rad=los_aod,
        los_attenuation_linear=attn,
    )
