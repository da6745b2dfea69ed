"""Order-parameter relaxation from the in-phase state, with decay-law fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import integrate
from .model import SystemSpec
from .util import ordered_map


def order_parameter(phases) -> complex:
    """Mean of e^{i theta} (the population order parameter, normalized by N)."""
    phases = np.asarray(phases, dtype=np.float64)
    if phases.size == 0:
        raise ValueError("need at least one phase")
    return complex(np.mean(np.cos(phases)), np.mean(np.sin(phases)))


def noise_floor(n: int, realizations: int) -> float:
    """Expected |Z| for N*R pooled incoherent phases: sqrt(pi / (4 N R))."""
    if n < 1 or realizations < 1:
        raise ValueError("counts must be >= 1")
    return math.sqrt(math.pi / (4.0 * n * realizations))


@dataclass
class DecayCurve:
    times: np.ndarray
    values: np.ndarray  # mean |Z(t)| (or |mean Z(t)| in abs_mean mode)
    stderr: np.ndarray
    realizations: int
    n: int
    mode: str = "mean_abs"  # mean_abs | abs_mean

    @property
    def floor(self) -> float:
        """Incoherent-state plateau of this curve's statistic."""
        if self.mode == "mean_abs":
            return noise_floor(self.n, 1)
        return noise_floor(self.n, self.realizations)

    def scaled(self, factor: float) -> "DecayCurve":
        return DecayCurve(self.times, self.values * factor, self.stderr * factor,
                          self.realizations, self.n, self.mode)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,mean_absZ,stderr\n")
            for t, v, e in zip(self.times, self.values, self.stderr):
                fh.write(f"{float(t)!r},{float(v)!r},{float(e)!r}\n")


def _realization_absz(args) -> np.ndarray:
    n, k, j, coupling, seed, dt, steps = args
    spec = SystemSpec(n=n, k=k, j=j, seed=seed, coupling=coupling, init="zero")
    rec = integrate(spec.build(), dt=dt, transient=0, recorded=steps,
                    record_initial=True)
    return np.abs(rec.order_param)


def _realization_z(args) -> np.ndarray:
    n, k, j, coupling, seed, dt, steps = args
    spec = SystemSpec(n=n, k=k, j=j, seed=seed, coupling=coupling, init="zero")
    rec = integrate(spec.build(), dt=dt, transient=0, recorded=steps,
                    record_initial=True)
    return rec.order_param


def decay_experiment(
    n: int,
    k: int,
    j: float,
    realizations: int,
    seed: int,
    *,
    dt: float = 0.01,
    steps: int = 1000,
    coupling: str = "lowrank",
    mode: str = "mean_abs",
    workers: int = 1,
) -> DecayCurve:
    """Average the order-parameter magnitude over fresh realizations.

    Every realization redraws frequencies and coupling; initial phases are
    all zero.  mean_abs averages |Z| per time; abs_mean takes |mean Z|.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    if mode not in ("mean_abs", "abs_mean"):
        raise ValueError(f"unknown mode {mode!r}")
    args = [(n, k, j, coupling, [seed, r], dt, steps) for r in range(realizations)]
    if mode == "mean_abs":
        rows = np.asarray(ordered_map(_realization_absz, args, workers))
        values = rows.mean(axis=0)
        if realizations > 1:
            stderr = rows.std(axis=0, ddof=1) / math.sqrt(realizations)
        else:
            stderr = np.zeros_like(values)
    else:
        rows = np.asarray(ordered_map(_realization_z, args, workers))
        values = np.abs(rows.mean(axis=0))
        stderr = np.zeros_like(values)
    times = dt * np.arange(steps + 1)
    return DecayCurve(times, values, stderr, realizations, n, mode)


@dataclass(frozen=True)
class DecayFit:
    model: str  # "exponential" | "powerlaw"
    rate: float  # decay rate (exponential) or exponent (power law)
    window: tuple
    residual: float  # RMS residual of the winning model in log space
    r_squared: float
    score: float  # exponential residual minus power-law residual
    exponential_rate: float = 0.0
    exponential_r2: float = 0.0
    powerlaw_exponent: float = 0.0
    powerlaw_r2: float = 0.0


def _lsq_line(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return slope, math.sqrt(ss_res / len(x)), r2


def default_window(curve: DecayCurve, floor_mult: float = 3.0):
    """[0.5, t_floor]: ends where the curve first drops below 3x its floor."""
    below = np.nonzero(curve.values < floor_mult * curve.floor)[0]
    t_hi = curve.times[below[0]] if below.size else curve.times[-1]
    return 0.5, float(t_hi)


def fit_decay(curve: DecayCurve, window=None) -> DecayFit:
    """Fit log|Z| vs t and log|Z| vs log t on the window; keep the better.

    Residuals are compared in log|Z|, so the comparison and the fitted
    slopes are invariant under rescaling the curve.
    """
    if window is None:
        window = default_window(curve)
    t_lo, t_hi = window
    mask = (curve.times >= t_lo) & (curve.times <= t_hi) & (curve.values > 0)
    if np.count_nonzero(mask) < 10:
        raise ValueError("fit window has fewer than 10 usable points")
    t = curve.times[mask]
    logv = np.log(curve.values[mask])
    slope_e, res_e, r2_e = _lsq_line(t, logv)
    slope_p, res_p, r2_p = _lsq_line(np.log(t), logv)
    score = res_e - res_p
    common = dict(window=(t_lo, t_hi), score=score,
                  exponential_rate=-slope_e, exponential_r2=r2_e,
                  powerlaw_exponent=-slope_p, powerlaw_r2=r2_p)
    if res_e <= res_p:
        return DecayFit(model="exponential", rate=-slope_e, residual=res_e,
                        r_squared=r2_e, **common)
    return DecayFit(model="powerlaw", rate=-slope_p, residual=res_p,
                    r_squared=r2_p, **common)
