"""Adaptive state-variance tracking for nonstationary data.

The fixed-parameter filter in `statespec.ssm` reacts to abrupt spectral
change only as fast as its fitted gain allows.  The estimator here keeps
an exponentially weighted moving average of squared window-to-window
observation differences per chain; whenever that average rises above
what the baseline parameters can explain, the excess is used as the
state variance for the current window, opening the gain exactly when the
data demand it.  One forward pass, no refitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import frozen_array
from .segmentation import EigenCoefficients
from .ssm import FilterTrace, ModelParams, Spectrogram, ssmt_spectrogram

__all__ = [
    "NonstationarityTracker",
    "AdaptiveParams",
    "ema_update",
    "adaptive_state_variance",
    "assmt_filter",
    "assmt_spectrogram",
]


@dataclass(frozen=True)
class NonstationarityTracker:
    """Moving average of squared observation differences per chain."""

    ema: np.ndarray  # (J, M), >= 0
    alpha: float
    prev_obs: np.ndarray  # (J, M) complex

    def __post_init__(self):
        ema = frozen_array(self.ema, dtype=float, ndim=2, name="ema")
        prev_obs = frozen_array(self.prev_obs, dtype=complex, ndim=2, name="prev_obs")
        if ema.shape != prev_obs.shape:
            raise ValueError("ema and prev_obs must share a shape")
        if np.any(ema < 0) or not np.all(np.isfinite(ema)):
            raise ValueError("ema must be finite and non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        object.__setattr__(self, "ema", ema)
        object.__setattr__(self, "prev_obs", prev_obs)
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class AdaptiveParams:
    """Baseline model plus the switching threshold it implies.

    The threshold is the expected squared difference of consecutive
    observations under the baseline model: state_var + 2 obs_var.  It is
    recomputed from the stored fields on each access so it can never go
    stale.
    """

    baseline_state_var: np.ndarray  # (J, M)
    obs_var: np.ndarray  # (M,)

    def __post_init__(self):
        state_var = frozen_array(
            self.baseline_state_var, dtype=float, ndim=2, name="baseline_state_var"
        )
        obs_var = frozen_array(self.obs_var, dtype=float, ndim=1, name="obs_var")
        if not np.all(np.isfinite(state_var)) or np.any(state_var < 0):
            raise ValueError("baseline_state_var must be finite and non-negative")
        if not np.all(np.isfinite(obs_var)) or np.any(obs_var <= 0):
            raise ValueError("obs_var must be finite and strictly positive")
        if state_var.shape[1] != obs_var.size:
            raise ValueError("baseline_state_var columns must match obs_var length")
        object.__setattr__(self, "baseline_state_var", state_var)
        object.__setattr__(self, "obs_var", obs_var)

    @classmethod
    def from_model_params(cls, params: ModelParams) -> "AdaptiveParams":
        return cls(baseline_state_var=params.state_var, obs_var=params.obs_var)

    @property
    def threshold(self) -> np.ndarray:
        return 2.0 * self.obs_var[None, :] + self.baseline_state_var


def ema_update(tracker: NonstationarityTracker, obs_k: np.ndarray) -> NonstationarityTracker:
    """Blend the newest squared difference into the tracker.

    Returns a new tracker with
    ``ema' = (1 - alpha) * ema + alpha * ||obs_k - prev_obs||^2`` and
    ``prev_obs`` replaced by ``obs_k``.  With alpha = 0 the average never
    moves; with alpha = 1 it equals the latest squared difference.
    """
    obs_k = np.asarray(obs_k, dtype=complex)
    if obs_k.shape != tracker.prev_obs.shape:
        raise ValueError("obs_k shape must match the tracker")
    if not np.all(np.isfinite(obs_k)):
        raise ValueError("obs_k must be finite")
    diff = obs_k - tracker.prev_obs
    diff2 = diff.real**2 + diff.imag**2
    ema = (1.0 - tracker.alpha) * tracker.ema + tracker.alpha * diff2
    return NonstationarityTracker(ema=ema, alpha=tracker.alpha, prev_obs=obs_k)


def adaptive_state_variance(ema_value, baseline_state_var, obs_var):
    """State variance for the current window, floored at the baseline.

    Elementwise ``max(ema_value - 2 * obs_var, baseline_state_var)``: the
    moving average in excess of twice the observation noise is attributed
    to state motion; anything at or below the threshold keeps the
    baseline, so quiet stretches reproduce the fixed-parameter filter.
    """
    ema_value = np.asarray(ema_value, dtype=float)
    if np.any(ema_value < 0):
        raise ValueError("ema_value must be non-negative")
    out = np.maximum(ema_value - 2.0 * np.asarray(obs_var, dtype=float), baseline_state_var)
    return out if out.ndim else float(out)


def assmt_filter(
    obs: EigenCoefficients,
    params: AdaptiveParams,
    alpha: float = 0.95,
    init_mean: np.ndarray | None = None,
    init_var: np.ndarray | None = None,
) -> tuple[FilterTrace, np.ndarray]:
    """Single forward pass with the state variance driven by the tracker.

    Parameters
    ----------
    obs : EigenCoefficients
    params : AdaptiveParams
        Baseline variances, typically from `em_fit` on an initial
        stretch of the same recording.
    alpha : float
        Tracker weight on the newest squared difference, in [0, 1].
    init_mean, init_var : ndarray, optional
        Starting state, (J, M); zero mean and the baseline variance when
        omitted, mirroring the fixed-parameter filter.

    Returns
    -------
    (FilterTrace, ndarray)
        The filter trace and the (K, J, M) state variances actually used.

    Notes
    -----
    The first window is filtered under the baseline because no difference
    exists yet; the tracker is seeded with the first available squared
    difference, so the second window already sees it at full weight.
    Each observation window is read exactly once.
    """
    coeffs = obs.coeffs
    k_windows, j_bins, m_tapers = coeffs.shape
    if params.baseline_state_var.shape != (j_bins, m_tapers):
        raise ValueError("params shape must match (bins, tapers) of obs")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("observations must be finite")

    baseline = params.baseline_state_var
    obs_var_row = params.obs_var[None, :]
    mean = (
        np.zeros((j_bins, m_tapers), dtype=complex)
        if init_mean is None
        else np.array(init_mean, dtype=complex)
    )
    var = baseline.copy() if init_var is None else np.array(init_var, dtype=float)
    if mean.shape != (j_bins, m_tapers) or var.shape != (j_bins, m_tapers):
        raise ValueError("init_mean and init_var must have shape (bins, tapers)")
    if np.any(var < 0):
        raise ValueError("init_var must be non-negative")
    means = np.empty((k_windows, j_bins, m_tapers), dtype=complex)
    variances = np.empty((k_windows, j_bins, m_tapers))
    gains = np.empty((k_windows, j_bins, m_tapers))
    state_var_trace = np.empty((k_windows, j_bins, m_tapers))

    tracker = None
    prev = None
    for k in range(k_windows):
        obs_k = coeffs[k]
        if k == 0:
            state_var = baseline
        else:
            if tracker is None:
                diff = obs_k - prev
                tracker = NonstationarityTracker(
                    ema=diff.real**2 + diff.imag**2, alpha=alpha, prev_obs=obs_k
                )
            else:
                tracker = ema_update(tracker, obs_k)
            state_var = adaptive_state_variance(tracker.ema, baseline, obs_var_row)
        prev = obs_k
        prior = var + state_var
        gain = prior / (obs_var_row + prior)
        mean = mean + gain * (obs_k - mean)
        var = (1.0 - gain) * prior
        means[k] = mean
        variances[k] = var
        gains[k] = gain
        state_var_trace[k] = state_var
    trace = FilterTrace(
        means=means,
        variances=variances,
        gains=gains,
        frequencies_hz=obs.frequencies_hz,
        window_times_s=obs.window_times_s,
    )
    return trace, state_var_trace


def assmt_spectrogram(trace: FilterTrace, one_sided: bool = False) -> Spectrogram:
    """Spectrogram of an adaptive trace; identical assembly to the fixed filter."""
    return ssmt_spectrogram(trace, one_sided=one_sided)
