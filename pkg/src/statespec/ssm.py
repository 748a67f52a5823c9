"""State-space smoothing of tapered Fourier coefficients.

Each (frequency bin, taper) pair carries an independent scalar complex
state-space model: the latent coefficient follows a random walk and is
observed in circularly symmetric complex Gaussian noise.  Because the
model is diagonal, filtering reduces to one scalar Kalman recursion per
chain, vectorized here across all chains at once.

Variances follow the complex convention throughout: a variance sigma^2
means E ||v||^2 = sigma^2 for the full complex value (each real and
imaginary part carries sigma^2 / 2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._util import frozen_array
from .segmentation import EigenCoefficients

__all__ = [
    "DB_FLOOR",
    "ModelParams",
    "FilterState",
    "FilterTrace",
    "Spectrogram",
    "EMConfig",
    "EMFit",
    "kalman_gain",
    "kalman_step",
    "filter_all",
    "steady_state_gain",
    "em_fit",
    "mt_spectrogram",
    "ssmt_spectrogram",
]

# Linear powers below this are clamped before any dB conversion.
DB_FLOOR = 1e-15


@dataclass(frozen=True)
class ModelParams:
    """Time-invariant noise variances of the per-chain state-space models.

    Attributes
    ----------
    state_var : ndarray, shape (J, M)
        Random-walk increment variance per (bin, taper) chain, >= 0.
    obs_var : ndarray, shape (M,)
        Observation noise variance per taper, shared across bins, > 0.
    """

    state_var: np.ndarray
    obs_var: np.ndarray

    def __post_init__(self):
        state_var = frozen_array(self.state_var, dtype=float, ndim=2, name="state_var")
        obs_var = frozen_array(self.obs_var, dtype=float, ndim=1, name="obs_var")
        if not np.all(np.isfinite(state_var)) or np.any(state_var < 0):
            raise ValueError("state_var must be finite and non-negative")
        if not np.all(np.isfinite(obs_var)) or np.any(obs_var <= 0):
            raise ValueError("obs_var must be finite and strictly positive")
        if state_var.shape[1] != obs_var.size:
            raise ValueError("state_var columns must match obs_var length")
        object.__setattr__(self, "state_var", state_var)
        object.__setattr__(self, "obs_var", obs_var)


@dataclass(frozen=True)
class FilterState:
    """Posterior of a single chain after one update."""

    mean: complex
    variance: float
    gain: float

    def __post_init__(self):
        mean = complex(self.mean)
        if not (np.isfinite(mean.real) and np.isfinite(mean.imag)):
            raise ValueError("mean must be finite")
        if not (np.isfinite(self.variance) and self.variance >= 0):
            raise ValueError("variance must be finite and non-negative")
        if not (0.0 <= self.gain <= 1.0):
            raise ValueError("gain must lie in [0, 1]")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "gain", float(self.gain))


@dataclass(frozen=True)
class FilterTrace:
    """Filtered means, variances, and gains for every window and chain."""

    means: np.ndarray  # (K, J, M) complex
    variances: np.ndarray  # (K, J, M)
    gains: np.ndarray  # (K, J, M)
    frequencies_hz: np.ndarray  # (J,)
    window_times_s: np.ndarray  # (K,)

    def __post_init__(self):
        means = frozen_array(self.means, dtype=complex, ndim=3, name="means")
        variances = frozen_array(self.variances, dtype=float, ndim=3, name="variances")
        gains = frozen_array(self.gains, dtype=float, ndim=3, name="gains")
        freqs = frozen_array(self.frequencies_hz, dtype=float, ndim=1, name="frequencies_hz")
        times = frozen_array(self.window_times_s, dtype=float, ndim=1, name="window_times_s")
        if variances.shape != means.shape or gains.shape != means.shape:
            raise ValueError("means, variances, and gains must share a shape")
        k, j, _ = means.shape
        if freqs.shape != (j,) or times.shape != (k,):
            raise ValueError("axis lengths must match the trace shape")
        if np.any(variances < 0):
            raise ValueError("variances must be non-negative")
        if np.any(gains < 0) or np.any(gains > 1):
            raise ValueError("gains must lie in [0, 1]")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "window_times_s", times)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.means.shape


@dataclass(frozen=True)
class Spectrogram:
    """Power as a function of window time and frequency."""

    power: np.ndarray  # (K, J')
    frequencies_hz: np.ndarray  # (J',)
    window_times_s: np.ndarray  # (K,)
    scale: str = "linear"

    def __post_init__(self):
        power = frozen_array(self.power, dtype=float, ndim=2, name="power")
        freqs = frozen_array(self.frequencies_hz, dtype=float, ndim=1, name="frequencies_hz")
        times = frozen_array(self.window_times_s, dtype=float, ndim=1, name="window_times_s")
        if self.scale not in ("linear", "dB"):
            raise ValueError("scale must be 'linear' or 'dB'")
        if power.shape != (times.size, freqs.size):
            raise ValueError("power shape must be (num windows, num bins)")
        if not np.all(np.isfinite(power)):
            raise ValueError("power must be finite")
        if self.scale == "linear" and np.any(power < 0):
            raise ValueError("linear power must be non-negative")
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "window_times_s", times)

    def to_db(self) -> "Spectrogram":
        """Return the spectrogram in dB, flooring linear power at DB_FLOOR."""
        if self.scale == "dB":
            return self
        power = 10.0 * np.log10(np.maximum(self.power, DB_FLOOR))
        return Spectrogram(power, self.frequencies_hz, self.window_times_s, scale="dB")

    def to_linear(self) -> "Spectrogram":
        if self.scale == "linear":
            return self
        power = 10.0 ** (self.power / 10.0)
        return Spectrogram(power, self.frequencies_hz, self.window_times_s, scale="linear")


def kalman_gain(prior_var, state_var, obs_var):
    """Gain of one scalar update: (prior + state) / (obs + prior + state).

    Accepts scalars or broadcastable arrays.  The result lies in [0, 1)
    because ``obs_var`` must be strictly positive.
    """
    prior_var = np.asarray(prior_var, dtype=float)
    state_var = np.asarray(state_var, dtype=float)
    obs_var = np.asarray(obs_var, dtype=float)
    if np.any(obs_var <= 0):
        raise ValueError("obs_var must be strictly positive")
    if np.any(prior_var < 0) or np.any(state_var < 0):
        raise ValueError("prior_var and state_var must be non-negative")
    spread = prior_var + state_var
    gain = spread / (obs_var + spread)
    return gain if gain.ndim else float(gain)


def kalman_step(prev: FilterState, observation: complex, state_var: float, obs_var: float) -> FilterState:
    """Advance one chain by a single window.

    The predicted mean equals the previous posterior mean (random walk),
    so the update is a convex combination of the previous mean and the
    new observation with weight ``gain`` on the observation.
    """
    observation = complex(observation)
    if not (np.isfinite(observation.real) and np.isfinite(observation.imag)):
        raise ValueError("observation must be finite")
    gain = kalman_gain(prev.variance, state_var, obs_var)
    mean = (1.0 - gain) * prev.mean + gain * observation
    variance = (1.0 - gain) * (prev.variance + state_var)
    return FilterState(mean=mean, variance=variance, gain=gain)


def filter_all(
    obs: EigenCoefficients,
    params: ModelParams,
    init_mean: np.ndarray | None = None,
    init_var: np.ndarray | None = None,
) -> FilterTrace:
    """Run the causal filter over every window for all chains at once.

    Parameters
    ----------
    obs : EigenCoefficients
    params : ModelParams
        Shapes must match the (J, M) layout of ``obs``.
    init_mean, init_var : ndarray, optional
        State prior before the first window.  Defaults: zero mean and a
        variance equal to each chain's state variance.

    Returns
    -------
    FilterTrace

    Notes
    -----
    The variance and gain sequences depend only on the parameters, never
    on the observed values, so traces over different data with the same
    parameters share them exactly.
    """
    coeffs = obs.coeffs
    k_windows, j_bins, m_tapers = coeffs.shape
    if params.state_var.shape != (j_bins, m_tapers):
        raise ValueError("params.state_var shape must match (bins, tapers) of obs")
    mean = (
        np.zeros((j_bins, m_tapers), dtype=complex)
        if init_mean is None
        else np.array(init_mean, dtype=complex)
    )
    var = (
        params.state_var.copy()
        if init_var is None
        else np.array(init_var, dtype=float)
    )
    if mean.shape != (j_bins, m_tapers) or var.shape != (j_bins, m_tapers):
        raise ValueError("init_mean and init_var must have shape (bins, tapers)")
    if np.any(var < 0):
        raise ValueError("init_var must be non-negative")

    state_var = params.state_var
    obs_var = params.obs_var[None, :]
    means = np.empty((k_windows, j_bins, m_tapers), dtype=complex)
    variances = np.empty((k_windows, j_bins, m_tapers))
    gains = np.empty((k_windows, j_bins, m_tapers))
    for k in range(k_windows):
        prior = var + state_var
        gain = prior / (obs_var + prior)
        mean = mean + gain * (coeffs[k] - mean)
        var = (1.0 - gain) * prior
        means[k] = mean
        variances[k] = var
        gains[k] = gain
    return FilterTrace(
        means=means,
        variances=variances,
        gains=gains,
        frequencies_hz=obs.frequencies_hz,
        window_times_s=obs.window_times_s,
    )


def steady_state_gain(state_var: float, obs_var: float) -> float:
    """Fixed point the filter gain converges to under constant parameters.

    With r = state_var / obs_var the limit gain solves C^2 + r C - r = 0,
    giving C = 2 / (1 + sqrt(1 + 4 / r)); r = 1 yields the golden-ratio
    conjugate (sqrt(5) - 1) / 2.
    """
    if obs_var <= 0:
        raise ValueError("obs_var must be strictly positive")
    if state_var < 0:
        raise ValueError("state_var must be non-negative")
    if state_var == 0.0:
        return 0.0
    ratio = state_var / obs_var
    return 2.0 / (1.0 + np.sqrt(1.0 + 4.0 / ratio))


@dataclass(frozen=True)
class EMConfig:
    """Convergence settings for `em_fit`.

    ``tol`` is the relative log-likelihood change that counts as
    converged; ``init_params`` optionally replaces the moment-based
    starting point.
    """

    tol: float = 1e-6
    max_iter: int = 50
    init_params: ModelParams | None = None

    def __post_init__(self):
        if not self.tol >= 0:
            raise ValueError("tol must be non-negative")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        object.__setattr__(self, "max_iter", int(self.max_iter))


@dataclass(frozen=True)
class EMFit:
    """Result of `em_fit`: fitted parameters plus the likelihood path."""

    params: ModelParams
    log_likelihoods: np.ndarray
    converged: bool
    n_iter: int

    def __post_init__(self):
        lls = frozen_array(self.log_likelihoods, dtype=float, ndim=1, name="log_likelihoods")
        object.__setattr__(self, "log_likelihoods", lls)
        object.__setattr__(self, "converged", bool(self.converged))
        object.__setattr__(self, "n_iter", int(self.n_iter))


def _moment_init(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Moment-based starting point for EM.

    The mean squared window-to-window difference of a chain equals
    state_var + 2 obs_var, so the median difference across bins (least
    contaminated by narrowband activity) anchors the noise level and the
    per-bin excess above it seeds the state variance.
    """
    diff2 = np.abs(np.diff(coeffs, axis=0)) ** 2
    dbar = diff2.mean(axis=0)  # (J, M)
    obs_var = 0.25 * np.median(dbar, axis=0)  # (M,)
    obs_var = np.maximum(obs_var, np.finfo(float).tiny)
    state_var = np.maximum(dbar - 2.0 * obs_var[None, :], 0.05 * dbar)
    state_var = np.maximum(state_var, np.finfo(float).tiny)
    return state_var, obs_var


def _e_step(coeffs, state_var, obs_var, init_var):
    """Filter, smooth, and collect the moments the M-step needs.

    Returns the smoothed first/second moments, the lagged cross moments,
    and the innovations-form log-likelihood of the current parameters.
    """
    k_windows, j_bins, m_tapers = coeffs.shape
    zf = np.zeros((k_windows + 1, j_bins, m_tapers), dtype=complex)
    pf = np.empty((k_windows + 1, j_bins, m_tapers))
    pp = np.empty((k_windows, j_bins, m_tapers))
    pf[0] = init_var
    obs_row = obs_var[None, :]
    ll = 0.0
    gain = None
    for k in range(1, k_windows + 1):
        pred = pf[k - 1] + state_var
        innov_var = pred + obs_row
        innov = coeffs[k - 1] - zf[k - 1]
        gain = pred / innov_var
        zf[k] = zf[k - 1] + gain * innov
        pf[k] = (1.0 - gain) * pred
        pp[k - 1] = pred
        ll += float(
            np.sum(-np.log(np.pi * innov_var) - (innov.real**2 + innov.imag**2) / innov_var)
        )

    zs = np.empty_like(zf)
    ps = np.empty_like(pf)
    zs[k_windows] = zf[k_windows]
    ps[k_windows] = pf[k_windows]
    sgain = np.empty((k_windows, j_bins, m_tapers))
    for k in range(k_windows - 1, -1, -1):
        g = pf[k] / pp[k]
        zs[k] = zf[k] + g * (zs[k + 1] - zf[k])
        ps[k] = pf[k] + g**2 * (ps[k + 1] - pp[k])
        sgain[k] = g

    # Lagged second moments: cross[i] holds Cov(Z_{i+1}, Z_i | all data).
    cross = np.empty((k_windows, j_bins, m_tapers))
    cross[k_windows - 1] = (1.0 - gain) * pf[k_windows - 1]
    for k in range(k_windows - 1, 0, -1):
        cross[k - 1] = sgain[k - 1] * (pf[k] + sgain[k] * (cross[k] - pf[k]))
    return zs, ps, cross, ll


def em_fit(obs: EigenCoefficients, config: EMConfig | None = None) -> EMFit:
    """Maximum-likelihood noise variances via expectation-maximization.

    Parameters
    ----------
    obs : EigenCoefficients
        At least two windows.
    config : EMConfig, optional

    Returns
    -------
    EMFit
        ``log_likelihoods[i]`` is the exact likelihood of the parameters
        entering iteration i, so the trace is non-decreasing up to
        round-off.  If ``max_iter`` is exhausted before the relative
        change drops below ``tol``, the latest (highest-likelihood)
        parameters are still returned and ``converged`` is False.

    Notes
    -----
    The state prior for the very first window is held fixed across
    iterations (zero mean, variance from the starting point); treating it
    as a constant of the model keeps every iteration an exact ascent
    step.  Each taper's observation variance is pooled across bins, so
    the M-step couples chains within a taper but never across tapers.
    """
    cfg = config if config is not None else EMConfig()
    coeffs = obs.coeffs
    k_windows, j_bins, m_tapers = coeffs.shape
    if k_windows < 2:
        raise ValueError("em_fit requires at least two windows")

    if cfg.init_params is not None:
        if cfg.init_params.state_var.shape != (j_bins, m_tapers):
            raise ValueError("init_params shape must match (bins, tapers) of obs")
        state_var = cfg.init_params.state_var.copy()
        obs_var = cfg.init_params.obs_var.copy()
    else:
        state_var, obs_var = _moment_init(coeffs)
    init_var = state_var.copy()  # first-window prior, fixed across iterations

    tiny = np.finfo(float).tiny
    lls: list[float] = []
    converged = False
    for _ in range(cfg.max_iter):
        zs, ps, cross, ll = _e_step(coeffs, state_var, obs_var, init_var)
        lls.append(ll)
        if len(lls) > 1 and abs(lls[-1] - lls[-2]) <= cfg.tol * abs(lls[-2]):
            converged = True
            break
        second = ps + zs.real**2 + zs.imag**2
        lag = cross + (zs[1:] * np.conj(zs[:-1])).real
        increments = second[1:] + second[:-1] - 2.0 * lag
        state_var = np.maximum(increments.mean(axis=0), 0.0)
        resid = np.abs(coeffs - zs[1:]) ** 2 + ps[1:]
        obs_var = np.maximum(resid.mean(axis=(0, 1)), tiny)
    if not converged:
        warnings.warn(
            f"em_fit did not converge within {cfg.max_iter} iterations",
            UserWarning,
            stacklevel=2,
        )
    params = ModelParams(state_var=state_var, obs_var=obs_var)
    return EMFit(
        params=params,
        log_likelihoods=np.asarray(lls),
        converged=converged,
        n_iter=len(lls),
    )


def _reduce_grid(power, freqs, one_sided):
    if not one_sided:
        return power, freqs
    n = power.shape[1] // 2 + 1
    return power[:, :n], freqs[:n]


def mt_spectrogram(obs: EigenCoefficients, one_sided: bool = False) -> Spectrogram:
    """Classical multitaper estimate: eigen-spectra averaged over tapers."""
    power = np.mean(np.abs(obs.coeffs) ** 2, axis=2)
    power, freqs = _reduce_grid(power, obs.frequencies_hz, one_sided)
    return Spectrogram(power, freqs, obs.window_times_s, scale="linear")


def ssmt_spectrogram(trace: FilterTrace, one_sided: bool = False) -> Spectrogram:
    """Denoised estimate: squared filtered means averaged over tapers."""
    power = np.mean(np.abs(trace.means) ** 2, axis=2)
    power, freqs = _reduce_grid(power, trace.frequencies_hz, one_sided)
    return Spectrogram(power, freqs, trace.window_times_s, scale="linear")
