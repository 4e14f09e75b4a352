"""Online dominant-subspace trackers for streams of complex vectors.

Two trackers are provided: a deflation-based RLS tracker that extracts
eigenvectors sequentially with a forgetting factor, and an Oja-style
stochastic update with an exact closed-form orthonormalization. Both can be
warm-started from a short batch via the sample covariance eigendecomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import _fix_phases

EIGVAL_FLOOR = 1e-12
PROJ_NORM_FLOOR = 1e-24


def init_from_samples(samples, m: int):
    """Warm-start basis from the sample covariance of a short batch.

    Returns (w, lam): the m dominant orthonormal eigenvectors of
    (1/K) sum r r^H and their eigenvalues clamped below at a small floor.
    A degenerate (all-zero) batch falls back to the canonical basis.
    """
    samples = [np.asarray(s, dtype=complex) for s in samples]
    if len(samples) < 1:
        raise ValueError("need at least one sample")
    n = samples[0].shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    r = np.stack(samples, axis=1)
    cov = (r @ r.conj().T) / r.shape[1]
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:m]
    lam = np.maximum(evals[order].real, EIGVAL_FLOOR)
    if evals[order[0]].real <= EIGVAL_FLOOR:
        w = np.eye(n, dtype=complex)[:, :m]
    else:
        w = _fix_phases(evecs[:, order])
    return w, lam


@dataclass
class PastdTracker:
    """Deflation RLS tracker: per-vector eigenpair updates with forgetting.

    Columns of w are the current eigenvector estimates; lam holds the
    exponentially weighted eigenvalue estimates. Columns are not kept exactly
    unit norm step to step; basis() renormalizes on extraction.
    """

    w: np.ndarray
    lam: np.ndarray
    beta: float = 0.95
    step_count: int = 0

    def __post_init__(self):
        self.w = np.array(self.w, dtype=complex)
        self.lam = np.array(self.lam, dtype=float)
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if np.any(self.lam <= 0.0):
            raise ValueError("lam entries must be strictly positive")
        if self.w.shape[1] != self.lam.shape[0]:
            raise ValueError("w and lam disagree on subspace dimension")

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def step(self, r) -> "PastdTracker":
        x = np.asarray(r, dtype=complex)
        if x.shape != (self.dim,):
            raise ValueError(f"sample has shape {x.shape}, expected ({self.dim},)")
        for m in range(self.w.shape[1]):
            u = self.w[:, m]
            y = np.vdot(u, x)
            self.lam[m] = self.beta * self.lam[m] + abs(y) ** 2
            u += (x - u * y) * (np.conj(y) / self.lam[m])
            x = x - u * y  # deflate with the updated vector
        self.step_count += 1
        return self

    def basis(self) -> np.ndarray:
        norms = np.linalg.norm(self.w, axis=0)
        return self.w / norms


@dataclass
class OojaTracker:
    """Oja update plus exact rank-1 orthonormalization of the basis.

    sign=+1 tracks the principal subspace, sign=-1 the minor subspace; the
    orthonormalizing correction is the same for both because the residual is
    orthogonal to the current basis.
    """

    w: np.ndarray
    delta: float = 0.01
    sign: int = 1
    step_count: int = 0

    def __post_init__(self):
        self.w = np.array(self.w, dtype=complex)
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def step(self, r) -> "OojaTracker":
        x = np.asarray(r, dtype=complex)
        if x.shape != (self.dim,):
            raise ValueError(f"sample has shape {x.shape}, expected ({self.dim},)")
        v = self.w.conj().T @ x
        nv2 = float(np.real(np.vdot(v, v)))
        if nv2 < PROJ_NORM_FLOOR:
            # update degenerates to the identity map as v -> 0
            self.step_count += 1
            return self
        z = self.w @ v
        p = x - z
        np2 = float(np.real(np.vdot(p, p)))
        phi = 1.0 / math.sqrt(1.0 + self.delta**2 * np2 * nv2)
        tau = (phi - 1.0) / nv2
        # W (I + tau v v^H) + sign * delta * phi * p v^H, as one rank-1 update
        self.w += np.outer(tau * z + self.sign * self.delta * phi * p, v.conj())
        self.step_count += 1
        return self

    def basis(self) -> np.ndarray:
        return self.w.copy()


def tracker_run(tracker, stream):
    """Fold the per-sample update over a stream, in order."""
    for r in stream:
        tracker.step(r)
    return tracker


def extract_basis(tracker) -> np.ndarray:
    """Current subspace estimate, with unit-norm columns."""
    return tracker.basis()
