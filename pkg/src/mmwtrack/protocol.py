"""Two-phase training protocol estimating the dominant channel singular vectors.

Phase (a): the base station probes with antipodal random vectors and the
mobile tracks the left singular subspace of the received stream. Phase (b):
the mobile transmits through its estimated precoder and the base station
tracks the right singular subspace. Both phases run either fully digital or
behind fixed analog steering-grid combiners (hybrid mode), in which case the
trackers operate entirely in the reduced RF-chain dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ArrayConfig, ChannelRealization, steering_vector
from .tracking import OojaTracker, PastdTracker, extract_basis, init_from_samples, tracker_run

MODE_FD = "fd"
MODE_HY = "hy"

TRACKER_PASTD = "pastd"
TRACKER_OOJA = "ooja"


@dataclass(frozen=True)
class TrackerSpec:
    """Which tracker the protocol runs, with its hyperparameters."""

    kind: str = TRACKER_PASTD
    beta: float = 0.95
    delta: float = 0.01
    sign: int = 1

    def __post_init__(self):
        if self.kind not in (TRACKER_PASTD, TRACKER_OOJA):
            raise ValueError(f"unknown tracker kind {self.kind!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")


@dataclass(frozen=True)
class ProtocolConfig:
    p_bs: int = 30
    p_ms: int = 30
    warmup: int = 10
    m: int = 1
    mode: str = MODE_FD
    n_rf_bs: int = 20
    n_rf_ms: int = 10
    tx_power_scale: float = 1.0
    tracker: TrackerSpec = field(default_factory=TrackerSpec)

    def __post_init__(self):
        if self.p_bs < 1 or self.p_ms < 1:
            raise ValueError("p_bs and p_ms must be positive")
        if not 0 <= self.warmup < min(self.p_bs, self.p_ms):
            raise ValueError(
                f"warmup must satisfy 0 <= warmup < min(p_bs, p_ms), got {self.warmup}"
            )
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.mode not in (MODE_FD, MODE_HY):
            raise ValueError(f"mode must be 'fd' or 'hy', got {self.mode!r}")
        if self.mode == MODE_HY and self.m > min(self.n_rf_bs, self.n_rf_ms):
            raise ValueError("hybrid mode requires m <= min(n_rf_bs, n_rf_ms)")
        if self.tx_power_scale <= 0:
            raise ValueError("tx_power_scale must be > 0")


@dataclass(frozen=True)
class HybridFrontEnd:
    """Fixed analog combiners: steering vectors on uniform angle grids."""

    d_bs_rf: np.ndarray   # N_BS x N_BS^RF
    d_ms_rf: np.ndarray   # N_MS x N_MS^RF


@dataclass(frozen=True)
class EstimatedBeamformers:
    """Final beamformers; baseband factors are present in hybrid mode only."""

    d_ms: np.ndarray
    d_bs: np.ndarray
    d_ms_bb: np.ndarray | None = None
    d_bs_bb: np.ndarray | None = None


def build_rf_grid(array: ArrayConfig, n_rf: int) -> np.ndarray:
    """Steering-vector columns on the uniform grid -pi/2 + pi*(i-1)/n_rf."""
    if not 1 <= n_rf <= array.n_elements:
        raise ValueError(f"n_rf must be in [1, {array.n_elements}], got {n_rf}")
    angles = -math.pi / 2 + math.pi * np.arange(n_rf) / n_rf
    return np.stack([steering_vector(array, a) for a in angles], axis=1)


def make_front_end(bs: ArrayConfig, ms: ArrayConfig, cfg: ProtocolConfig) -> HybridFrontEnd:
    return HybridFrontEnd(
        d_bs_rf=build_rf_grid(bs, cfg.n_rf_bs),
        d_ms_rf=build_rf_grid(ms, cfg.n_rf_ms),
    )


def effective_channel(h: np.ndarray, front: HybridFrontEnd) -> np.ndarray:
    """Composite channel seen between the two analog combiners."""
    return front.d_ms_rf.conj().T @ h @ front.d_bs_rf


def compose_hybrid(front: HybridFrontEnd, d_bb_ms, d_bb_bs) -> EstimatedBeamformers:
    """Multiply RF and baseband factors, normalizing full columns to unit norm.

    The baseband factors are rescaled by the same amounts so the factorization
    d = d_rf @ d_bb holds exactly for the returned matrices.
    """
    d_ms, d_ms_bb = _lift_and_normalize(front.d_ms_rf, d_bb_ms)
    d_bs, d_bs_bb = _lift_and_normalize(front.d_bs_rf, d_bb_bs)
    return EstimatedBeamformers(d_ms=d_ms, d_bs=d_bs, d_ms_bb=d_ms_bb, d_bs_bb=d_bs_bb)


def _lift_and_normalize(d_rf, d_bb):
    d_bb = np.asarray(d_bb, dtype=complex)
    full = d_rf @ d_bb
    norms = np.linalg.norm(full, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("zero beamformer column cannot be normalized")
    return full / norms, d_bb / norms


def _normalize_columns(w):
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("zero beamformer column cannot be normalized")
    return w / norms


def _make_tracker(spec: TrackerSpec, w0, lam0):
    if spec.kind == TRACKER_PASTD:
        return PastdTracker(w=w0, lam=lam0, beta=spec.beta)
    return OojaTracker(w=w0, delta=spec.delta, sign=spec.sign)


def _noise(sigma2_n: float, n: int, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(sigma2_n / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _antipodal(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=n) * 2.0 - 1.0


def _track_stream(samples, cfg: ProtocolConfig) -> np.ndarray:
    """Warm start on the first cfg.warmup samples, track the rest."""
    dim = samples[0].shape[0]
    if cfg.warmup >= 1:
        w0, lam0 = init_from_samples(samples[: cfg.warmup], cfg.m)
    else:
        w0 = np.eye(dim, dtype=complex)[:, : cfg.m]
        lam0 = np.ones(cfg.m)
    tracker = _make_tracker(cfg.tracker, w0, lam0)
    tracker_run(tracker, samples[cfg.warmup :])
    return extract_basis(tracker)


def run_phase_a(
    chan: ChannelRealization,
    cfg: ProtocolConfig,
    front: HybridFrontEnd | None,
    sigma2_n: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Downlink probing; returns the tracked left-subspace basis.

    Full antenna dimension in FD mode, RF-chain dimension in hybrid mode.
    """
    n_ms, n_bs = chan.h.shape
    if cfg.mode == MODE_HY and front is None:
        raise ValueError("hybrid mode requires a HybridFrontEnd")
    amp = math.sqrt(cfg.tx_power_scale)
    comb = front.d_ms_rf.conj().T if cfg.mode == MODE_HY else None
    samples = []
    for _ in range(cfg.p_bs):
        s = amp * _antipodal(n_bs, rng)
        r = chan.h @ s + _noise(sigma2_n, n_ms, rng)
        samples.append(comb @ r if comb is not None else r)
    return _track_stream(samples, cfg)


def run_phase_b(
    chan: ChannelRealization,
    d_ms: np.ndarray,
    cfg: ProtocolConfig,
    front: HybridFrontEnd | None,
    sigma2_n: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uplink probing through the estimated precoder; tracks the right subspace."""
    n_ms, n_bs = chan.h.shape
    if d_ms.shape != (n_ms, cfg.m):
        raise ValueError(f"d_ms has shape {d_ms.shape}, expected ({n_ms}, {cfg.m})")
    if cfg.mode == MODE_HY and front is None:
        raise ValueError("hybrid mode requires a HybridFrontEnd")
    amp = math.sqrt(cfg.tx_power_scale)
    comb = front.d_bs_rf.conj().T if cfg.mode == MODE_HY else None
    h_up = chan.h.conj().T
    samples = []
    for _ in range(cfg.p_ms):
        s = amp * _antipodal(cfg.m, rng)
        r = h_up @ (d_ms @ s) + _noise(sigma2_n, n_bs, rng)
        samples.append(comb @ r if comb is not None else r)
    return _track_stream(samples, cfg)


def run_protocol(
    chan: ChannelRealization,
    cfg: ProtocolConfig,
    front: HybridFrontEnd | None,
    sigma2_n: float,
    rng: np.random.Generator,
) -> EstimatedBeamformers:
    """Run both phases and return the composed, unit-column beamformers."""
    if cfg.mode == MODE_FD:
        d_ms = _normalize_columns(run_phase_a(chan, cfg, None, sigma2_n, rng))
        d_bs = _normalize_columns(run_phase_b(chan, d_ms, cfg, None, sigma2_n, rng))
        return EstimatedBeamformers(d_ms=d_ms, d_bs=d_bs)
    if front is None:
        front = make_front_end(
            ArrayConfig(chan.h.shape[1]), ArrayConfig(chan.h.shape[0]), cfg
        )
    d_bb_ms = run_phase_a(chan, cfg, front, sigma2_n, rng)
    d_ms, _ = _lift_and_normalize(front.d_ms_rf, d_bb_ms)
    d_bb_bs = run_phase_b(chan, d_ms, cfg, front, sigma2_n, rng)
    return compose_hybrid(front, d_bb_ms, d_bb_bs)
