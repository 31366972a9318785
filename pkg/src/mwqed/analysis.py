"""Fitting and model-selection utilities for decay trajectories.

All fitters are deterministic: fixed multi-start grids, fixed iteration
caps, no randomness.  Times and rates are in recoil units unless the
caller converts at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import chi2 as chi2_dist

from .errors import ConvergenceError, PhysicsError


# --------------------------------------------------------------------------
# piecewise-exponential decay
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseExpFit:
    """Continuous two-segment exponential fit of a decaying population."""

    gamma_early: float
    gamma_late: float
    t_c: float
    log_amplitude: float
    residual: float  # sum of squared log-residuals
    covariance: np.ndarray  # 3x3, for (log A, gamma_early, gamma_late)
    t_c_unconstrained: bool

    @property
    def ratio(self) -> float:
        return self.gamma_late / self.gamma_early

    def model(self, t):
        t = np.asarray(t, dtype=float)
        logp = (self.log_amplitude - self.gamma_early * t
                - (self.gamma_late - self.gamma_early)
                * np.maximum(t - self.t_c, 0.0))
        return np.exp(logp)


def _piecewise_lstsq(t, logy, t_c):
    x = np.column_stack([np.ones_like(t), -t, -np.maximum(t - t_c, 0.0)])
    coef, _, _, _ = np.linalg.lstsq(x, logy, rcond=None)
    resid = logy - x @ coef
    return coef, float(resid @ resid), x


def fit_piecewise(t, population, window=None) -> PiecewiseExpFit:
    """Continuous two-rate exponential fit of log-population.

    For each candidate crossover t_c the model log P = log A - g_e t
    - (g_l - g_e) max(t - t_c, 0) is linear; the best t_c is found by a
    coarse scan over interior samples followed by a fine local scan.
    `window` restricts the fit to t in [window[0], window[1]].
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(population, dtype=float)
    if window is not None:
        m = (t >= window[0]) & (t <= window[1])
        t, y = t[m], y[m]
    if len(t) < 12:
        raise PhysicsError(
            f"need at least 12 samples (6 per segment), got {len(t)}")
    if np.any(y <= 0):
        raise PhysicsError("population must be positive for a log-space fit")
    if t[-1] <= t[0]:
        raise PhysicsError("degenerate fit window")
    logy = np.log(y)

    # coarse scan: crossover candidates keep >= 6 points on each side
    candidates = t[5:-5]
    scans = [(tc, _piecewise_lstsq(t, logy, tc)[1]) for tc in candidates]
    tc_best, _ = min(scans, key=lambda p: p[1])
    # fine scan around the winner
    lo = max(tc_best - 2 * (t[1] - t[0]) * 4, t[5])
    hi = min(tc_best + 2 * (t[1] - t[0]) * 4, t[-6])
    for tc in np.linspace(lo, hi, 201):
        sse = _piecewise_lstsq(t, logy, tc)[1]
        if sse < min(s for _, s in scans):
            scans.append((tc, sse))
    tc_best = min(scans, key=lambda p: p[1])[0]

    coef, sse, x = _piecewise_lstsq(t, logy, tc_best)
    log_a, g_early, dg = coef
    g_late = g_early + dg
    dof = max(len(t) - 3, 1)
    sigma2 = sse / dof
    cov = sigma2 * np.linalg.inv(x.T @ x)
    # propagate to (log A, g_early, g_late) = coef @ [[1,0,0],[0,1,0],[0,1,1]]^T
    jac = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 1.0, 1.0]])
    cov = jac @ cov @ jac.T
    err_dg = math.sqrt(max(cov[1, 1] + cov[2, 2], 0.0))
    unconstrained = abs(dg) < max(3 * err_dg, 1e-12 * max(abs(g_early), 1.0))
    return PiecewiseExpFit(
        gamma_early=float(g_early), gamma_late=float(g_late),
        t_c=float(tc_best), log_amplitude=float(log_a), residual=sse,
        covariance=cov, t_c_unconstrained=bool(unconstrained))


# --------------------------------------------------------------------------
# beat fits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BeatFit:
    """Interference fit between a decaying and a persistent amplitude."""

    form: str
    alpha0: float
    alpha_inf: float
    omega: float
    gamma: float
    residual: float
    omega_unidentifiable: bool = False

    def model(self, t):
        t = np.asarray(t, dtype=float)
        if self.form == "decaying_amplitude":
            alpha_t = (self.alpha_inf
                       + (self.alpha0 - self.alpha_inf) * np.exp(-self.gamma * t))
            return np.abs(alpha_t * np.exp(-1j * self.omega * t)
                          + (1 - self.alpha0)) ** 2
        return np.abs(self.alpha0 * np.exp(-1j * self.omega * t - self.gamma * t / 2)
                      + (1 - self.alpha0)) ** 2


def fit_beat(t, population, form="dissipative_vs_bound", gamma=None,
             n_starts=24) -> BeatFit:
    """Fit a beating population with a deterministic frequency multi-start.

    Forms:
      "decaying_amplitude":  P = |alpha_t e^{-i w t} + (1 - alpha0)|^2 with
          alpha_t = alpha_inf + (alpha0 - alpha_inf) e^{-gamma t};
      "dissipative_vs_bound":  P = |alpha0 e^{-i w t - gamma t / 2}
          + (1 - alpha0)|^2.

    `gamma` fixes the damping rate; if None it is fitted.  Start frequencies
    span a fixed grid up to the Nyquist limit plus the periodogram peak.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(population, dtype=float)
    if form not in ("decaying_amplitude", "dissipative_vs_bound"):
        raise PhysicsError(f"unknown beat-fit form {form!r}")
    if len(t) < 8:
        raise PhysicsError(f"need at least 8 samples, got {len(t)}")
    scale = float(np.max(np.abs(y)))
    if np.ptp(y) < 1e-10 * max(scale, 1e-300):
        a = float(np.clip(math.sqrt(max(y[0], 0.0)), 0.0, 1.05))
        return BeatFit(form=form, alpha0=a, alpha_inf=a, omega=0.0,
                       gamma=0.0 if gamma is None else float(gamma),
                       residual=float(np.sum((y - y[0]) ** 2)),
                       omega_unidentifiable=True)

    dt = float(np.min(np.diff(t)))
    w_nyquist = math.pi / dt
    # periodogram seed on the mean-subtracted, uniformly resampled signal
    tu = np.linspace(t[0], t[-1], 4 * len(t))
    yu = np.interp(tu, t, y) - np.mean(y)
    freq = np.fft.rfftfreq(len(tu), tu[1] - tu[0]) * 2 * math.pi
    power = np.abs(np.fft.rfft(yu))
    w_seed = float(freq[1 + np.argmax(power[1:])])
    span = t[-1] - t[0]
    starts = sorted(set(
        [w_seed] + list(np.linspace(2 * math.pi / span, 0.8 * w_nyquist,
                                    n_starts))))

    fit_gamma = gamma is None
    g_fixed = 0.0 if fit_gamma else float(gamma)
    g_guess = 2.0 / span

    def unpack(p):
        if form == "decaying_amplitude":
            a0, ainf, w = p[0], p[1], p[2]
            g = p[3] if fit_gamma else g_fixed
        else:
            a0, w = p[0], p[1]
            ainf = 0.0
            g = p[2] if fit_gamma else g_fixed
        return a0, ainf, w, g

    def residuals(p):
        a0, ainf, w, g = unpack(p)
        return BeatFit(form=form, alpha0=a0, alpha_inf=ainf, omega=w,
                       gamma=g, residual=0.0).model(t) - y

    best = None
    for w0 in starts:
        if form == "decaying_amplitude":
            p0 = [0.9, 0.8, w0] + ([g_guess] if fit_gamma else [])
            lo = [0.0, 0.0, 0.0] + ([0.0] if fit_gamma else [])
            hi = [1.05, 1.05, w_nyquist] + ([np.inf] if fit_gamma else [])
        else:
            p0 = [0.7, w0] + ([g_guess] if fit_gamma else [])
            lo = [0.0, 0.0] + ([0.0] if fit_gamma else [])
            hi = [1.05, w_nyquist] + ([np.inf] if fit_gamma else [])
        sol = least_squares(residuals, p0, bounds=(lo, hi),
                            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=4000)
        if best is None or sol.cost < best.cost:
            best = sol
    if best is None or not best.success and best.cost > 1e-3 * scale**2 * len(t):
        raise ConvergenceError(
            "beat fit did not converge",
            residual=None if best is None else float(best.cost))
    a0, ainf, w, g = unpack(best.x)
    return BeatFit(form=form, alpha0=float(a0), alpha_inf=float(ainf),
                   omega=float(w), gamma=float(g),
                   residual=float(2 * best.cost))


# --------------------------------------------------------------------------
# chi-square array-size selection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChiSquareReport:
    """Goodness of fit of candidate array sizes against measured points."""

    m_values: tuple
    chi2: np.ndarray
    chi0: float
    best_m: int

    def normalized(self) -> np.ndarray:
        return self.chi2 / self.chi0


def select_array_size(data, sigma, candidates, predict) -> ChiSquareReport:
    """Score candidate coherence lengths M by chi^2 against data.

    `predict(M)` must return model values aligned with `data`;
    chi^2(M) = sum ((data - predict(M)) / sigma)^2.  The normalization
    chi0 is the 95% point of the chi^2 distribution with one degree of
    freedom per data point; ties break toward smaller M.
    """
    y = np.asarray(data, dtype=float)
    s = np.asarray(sigma, dtype=float)
    if s.ndim == 0:
        s = np.full_like(y, float(s))
    if np.any(s <= 0):
        raise PhysicsError("all uncertainties must be positive")
    if len(candidates) == 0:
        raise PhysicsError("need at least one candidate M")
    ms = tuple(int(m) for m in candidates)
    chi2 = np.empty(len(ms))
    for i, m in enumerate(ms):
        model = np.asarray(predict(m), dtype=float)
        if model.shape != y.shape:
            raise PhysicsError(
                f"predict({m}) returned shape {model.shape}, data is {y.shape}")
        chi2[i] = float(np.sum(((y - model) / s) ** 2))
    chi0 = float(chi2_dist.ppf(0.95, len(y)))
    order = sorted(range(len(ms)), key=lambda i: (chi2[i], ms[i]))
    return ChiSquareReport(m_values=ms, chi2=chi2, chi0=chi0,
                           best_m=ms[order[0]])
