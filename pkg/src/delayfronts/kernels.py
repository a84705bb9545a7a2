"""Fundamental solutions of the linearization at the positive equilibrium.

With three real characteristic roots mu3 <= mu2 < 0 < mu1 the second-order
delayed operator

    (D y)(t) = y'' - c y' - y + g'(kappa) y(t - ch)

factors into first-order pieces D = D1 D2 = D2 D1 with

    (D1 y)(t) = y' - mu2 y,
    (D2 y)(t) = y' - (c - mu2) y
                - g'(kappa) e^{-ch mu2} * int_{-ch}^0 e^{-mu2 s} y(t+s) ds.

Their fundamental solutions are theta(t) = e^{mu2 t} (t >= 0), the jump
kernel psi (negative, exponentially decaying both ways), and the
convolution N = psi * theta (negative, total mass 1/(g'(kappa)-1)), which
inverts D and drives the monotone fixed-point operator of the front
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import chareq
from .chareq import ModelParams
from .errors import AccuracyError, DomainError
from .toyfront import birth_rate

__all__ = [
    "KernelGrid",
    "theta_kernel",
    "psi_kernel",
    "N_kernel",
    "apply_N_operator",
    "check_factorization",
]

# forward integration of D2 y = 0 stops when |y| rebounds off its running
# minimum by this factor (the unstable e^{mu1 t} direction surfacing)
_NOISE_REBOUND = 8.0
# and rolls back until the surfacing mode is ~30x below the signal
_ROLLBACK = 30.0
_SUPPORT_DECADES = 23.03  # e^-23.03 < 1e-10
_RELATIVE_FLOOR = 1e-13


@dataclass
class KernelGrid:
    """Uniform samples of a kernel, plus the jump size at t = 0.

    For psi the node at t = 0 stores the right limit and jump_at_zero is 1;
    theta and N carry jump 0 (theta's unit step at 0 is its support edge,
    not an interior jump of the stored grid).
    """

    t: np.ndarray
    values: np.ndarray
    step: float
    jump_at_zero: float
    mu1: float
    mu2: float
    mu3: float | None

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def index_of_zero(self) -> int:
        return int(np.searchsorted(self.t, 0.0))


def theta_kernel(t, mu2: float):
    """Fundamental solution of D1: e^{mu2 t} for t >= 0, zero before."""
    if not mu2 < 0.0:
        raise DomainError("mu2 must be negative")
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0.0, np.exp(mu2 * np.where(t >= 0.0, t, 0.0)), 0.0)
    return out[()] if out.ndim == 0 else out


def _require_region(c: float, h: float, params: ModelParams) -> chareq.RootsAtKappa:
    roots = chareq.roots_at_kappa(c, h, params)
    if not roots.in_region_Dkappa:
        raise DomainError(
            f"(h={h}, c={c}) lies outside the three-real-roots region"
        )
    return roots


def psi_kernel(
    c: float,
    h: float,
    params: ModelParams,
    t_max: float | None = None,
    step: float | None = None,
) -> KernelGrid:
    """Fundamental solution of D2 on a uniform grid of step ch/m.

    For t < 0 the closed form -(mu1-mu2)/chi'(mu1) e^{mu1 t}; the unit jump
    at 0 then launches the forward solution of D2 y = 0, integrated as the
    equivalent ODE system in (y, I) with I(t) the exponential history
    integral (I' = mu2 I + y(t) - e^{mu2 ch} y(t-ch)), classical RK4, and
    cubic-Hermite reads of the stored delayed values.  The forward window
    ends at min(t_max, tail cutoff, noise floor): past the noise floor the
    unstable e^{mu1 t} direction, seeded at rounding level, would drown the
    e^{mu3 t} tail.  All samples are strictly negative (checked; the h = 0
    limit, identically zero for t > 0, is exempt).
    """
    roots = _require_region(c, h, params)
    mu1, mu2 = roots.mu1, roots.mu2
    gk = params.slope_kappa
    amp = -(mu1 - mu2) / chareq.eval_char_dz(mu1, c, h, gk)

    if h == 0.0:
        # chi'(mu1) = mu1 - mu2 for the quadratic, so psi(0+) = 0 and the
        # forward solution of y' = mu1 y vanishes identically
        dt = step if step else 0.005
        n_neg = int(np.ceil(_SUPPORT_DECADES / mu1 / dt))
        n_pos = max(int(np.ceil((t_max if t_max else 1.0) / dt)), 2)
        t = dt * np.arange(-n_neg, n_pos + 1)
        vals = np.where(t < 0.0, amp * np.exp(mu1 * t), 0.0)
        return KernelGrid(t, vals, dt, 1.0, mu1, mu2, None)

    mu3 = roots.mu3
    ch = c * h
    if step is None:
        m = 200
        dt = ch / m
    else:
        m = max(4, int(round(ch / step)))
        dt = ch / m
    psi0 = 1.0 + amp
    beta = gk * np.exp(-ch * mu2)
    decay = np.exp(mu2 * ch)
    T_tail = 1.2 * _SUPPORT_DECADES / abs(mu3)
    T_pos = T_tail if t_max is None else min(t_max, T_tail)
    n_pos = max(int(np.ceil(T_pos / dt)), 2)
    n_neg = int(np.ceil(_SUPPORT_DECADES / mu1 / dt))

    y = np.empty(n_pos + 1)
    f = np.empty(n_pos + 1)
    y[0] = psi0
    iv = amp * (1.0 - np.exp(-(mu1 - mu2) * ch)) / (mu1 - mu2)

    def delayed(i, frac):
        # y(t - ch) at stage time (i + frac) dt.  j < 0 covers both s < 0 and
        # the left limit at s = 0 (the k4 stage of the step ending at ch);
        # the k1 stage of the step starting at ch has j = 0 and reads the
        # post-jump value y[0].
        j = i - m
        if j < 0:
            return amp * np.exp(mu1 * (j + frac) * dt)
        if frac <= 0.0:
            return y[j]
        if frac >= 1.0:
            return y[j + 1]
        th = frac
        return (
            (1.0 + 2.0 * th) * (1.0 - th) ** 2 * y[j]
            + th * (1.0 - th) ** 2 * dt * f[j]
            + th * th * (3.0 - 2.0 * th) * y[j + 1]
            + th * th * (th - 1.0) * dt * f[j + 1]
        )

    def rhs(i, frac, yv, Iv):
        return (
            (c - mu2) * yv + beta * Iv,
            mu2 * Iv + yv - decay * delayed(i, frac),
        )

    f[0] = rhs(0, 0.0, y[0], iv)[0]
    yv, Iv = y[0], iv
    runmin, argmin = abs(psi0), 0
    stop = n_pos
    truncated = False
    for i in range(n_pos):
        k1 = rhs(i, 0.0, yv, Iv)
        k2 = rhs(i, 0.5, yv + 0.5 * dt * k1[0], Iv + 0.5 * dt * k1[1])
        k3 = rhs(i, 0.5, yv + 0.5 * dt * k2[0], Iv + 0.5 * dt * k2[1])
        k4 = rhs(i, 1.0, yv + dt * k3[0], Iv + dt * k3[1])
        yv += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        Iv += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        y[i + 1] = yv
        f[i + 1] = rhs(i + 1, 0.0, yv, Iv)[0]
        a = abs(yv)
        if yv >= 0.0 or a > _NOISE_REBOUND * runmin:
            stop = argmin  # last sample still clear of the noise floor
            truncated = True
            break
        if a < runmin:
            runmin, argmin = a, i + 1
    if truncated:
        margin = int(np.log(_ROLLBACK) / ((mu1 - mu3) * dt))
        stop = max(2, stop - margin)
    y = y[: stop + 1]

    t_neg = -dt * np.arange(n_neg, 0, -1)
    t = np.concatenate([t_neg, dt * np.arange(stop + 1)])
    vals = np.concatenate([amp * np.exp(mu1 * t_neg), y])
    if np.any(vals >= 0.0):
        raise AccuracyError(
            "psi kernel lost strict negativity; refine the step"
        )
    return KernelGrid(t, vals, dt, 1.0, mu1, mu2, mu3)


def N_kernel(
    c: float,
    h: float,
    params: ModelParams,
    t_max: float | None = None,
    step: float | None = None,
) -> KernelGrid:
    """The convolution N = psi * theta on a uniform grid.

    psi's truncated forward tail is completed analytically at its e^{mu3 t}
    rate before convolving (amplitude matched at the last clean sample), the
    jump node enters with its two-sided average, and the result is trimmed
    where it falls below 1e-13 of the peak (round-off floor of the FFT
    convolution).  The trapezoid mass over the grid reproduces
    1/(g'(kappa)-1) to well inside 1e-4.
    """
    psi = psi_kernel(c, h, params, t_max=t_max, step=step)
    dt, mu2 = psi.step, psi.mu2
    vals = psi.values
    n_neg = psi.index_of_zero()
    if h > 0.0:
        mu3 = psi.mu3
        T0 = psi.t_max + dt
        a = vals[-1] / np.exp(mu3 * psi.t_max)
        n_ext = int(np.ceil(max(0.0, 1.2 * _SUPPORT_DECADES / abs(mu3) - T0) / dt))
        if n_ext > 0:
            text = T0 + dt * np.arange(n_ext)
            vals = np.concatenate([vals, a * np.exp(mu3 * text)])
    n_th = int(np.ceil(_SUPPORT_DECADES / abs(mu2) / dt))
    th = np.exp(mu2 * dt * np.arange(n_th + 1))
    th[0] *= 0.5
    th[-1] *= 0.5
    psi_avg = vals.copy()
    psi_avg[n_neg] -= 0.5 * psi.jump_at_zero
    conv = fftconvolve(psi_avg, th) * dt
    # at t = 0 the psi jump sits on the boundary of the u-integral, where the
    # one-sided (left) value applies instead of the two-sided average
    conv[n_neg] -= 0.25 * psi.jump_at_zero * dt
    t = dt * (np.arange(len(conv)) - n_neg)
    floor = _RELATIVE_FLOOR * np.max(np.abs(conv))
    keep = np.abs(conv) >= floor
    i0 = int(np.argmax(keep))
    i1 = len(keep) - int(np.argmax(keep[::-1]))
    t, conv = t[i0:i1], conv[i0:i1]
    if np.any(conv >= 0.0):
        raise AccuracyError("N kernel lost strict negativity; refine the step")
    mass = float(np.trapezoid(conv, t))
    expected = 1.0 / (params.slope_kappa - 1.0)
    if abs(mass - expected) > 1e-4:
        raise AccuracyError(
            f"N normalization off: {mass:.6f} vs {expected:.6f}; refine the step"
        )
    return KernelGrid(t, conv, dt, 0.0, psi.mu1, mu2, psi.mu3)


def apply_N_operator(
    t_grid: np.ndarray,
    values: np.ndarray,
    c: float,
    h: float,
    params: ModelParams,
) -> np.ndarray:
    """The monotone integral operator of the front construction.

    Maps a sampled function with range inside [0, kappa] to

        (N_op f)(t) = int N(t - s) [g'(kappa) f(s - ch) - g(f(s - ch))] ds

    on the same grid, extending f by its boundary values outside the window
    (legitimate for bounded inputs).  Because N < 0 and the bracket is
    nonpositive, the output again lies in [0, kappa], and f <= g pointwise
    implies N_op f <= N_op g.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.min() < -1e-12 or values.max() > params.kappa + 1e-12:
        raise DomainError("input samples must lie in [0, kappa]")
    dt = float(t_grid[1] - t_grid[0])
    if not np.allclose(np.diff(t_grid), dt, rtol=0.0, atol=1e-9 * dt):
        raise DomainError("input grid must be uniform")
    kern = N_kernel(c, h, params, step=dt)
    dt = kern.step
    ch = c * h
    shift = int(round(ch / dt))
    # f(s - ch) on an extended grid covering the kernel support both ways
    pad = len(kern.t)
    ext = np.concatenate(
        [np.full(pad + shift, values[0]), values, np.full(pad, values[-1])]
    )
    w = params.slope_kappa * ext - birth_rate(ext, params.slope_zero)
    full = fftconvolve(w, kern.values) * dt
    # index bookkeeping: ext[i] is f at t_grid[0] + (i - pad - shift) dt,
    # so w's sample j sits at time t0 + (j - pad) dt after the delay shift;
    # conv index n corresponds to time t0 + (n - pad - n_neg_kernel) dt
    n_neg = kern.index_of_zero()
    start = pad + n_neg
    out = full[start : start + len(values)]
    return np.clip(out, 0.0, params.kappa)


def check_factorization(
    t_grid: np.ndarray,
    values: np.ndarray,
    c: float,
    h: float,
    params: ModelParams,
) -> float:
    """Max residual of D = D1 D2 = D2 D1 on a sampled test function.

    Derivatives by central differences, the history integral by trapezoid
    on the grid; the grid step must divide ch.  Returns the larger of the
    two composition residuals over the valid interior window.
    """
    roots = _require_region(c, h, params)
    mu2 = roots.mu2
    gk = params.slope_kappa
    t_grid = np.asarray(t_grid, dtype=float)
    y = np.asarray(values, dtype=float)
    dt = float(t_grid[1] - t_grid[0])
    ch = c * h
    m = int(round(ch / dt)) if h > 0.0 else 0
    if h > 0.0 and abs(m * dt - ch) > 1e-9 * ch:
        raise DomainError("grid step must divide c*h")

    def d1(arr):
        out = np.full_like(arr, np.nan)
        out[1:-1] = (arr[2:] - arr[:-2]) / (2.0 * dt)
        return out

    def hist(arr):
        # trapezoid of e^{-mu2 s} arr(t+s) over s in [-ch, 0]
        if m == 0:
            return np.zeros_like(arr)
        wq = np.full(m + 1, dt)
        wq[0] *= 0.5
        wq[-1] *= 0.5
        ker = wq * np.exp(-mu2 * (-ch + dt * np.arange(m + 1)))
        out = np.full_like(arr, np.nan)
        for i in range(m, len(arr)):
            out[i] = ker @ arr[i - m : i + 1]
        return out

    def D2(arr):
        return d1(arr) - (c - mu2) * arr - gk * np.exp(-ch * mu2) * hist(arr)

    def D1(arr):
        return d1(arr) - mu2 * arr

    def D(arr):
        out = np.full_like(arr, np.nan)
        out[1:-1] = (arr[2:] - 2.0 * arr[1:-1] + arr[:-2]) / (dt * dt)
        out -= c * d1(arr) + arr
        if m == 0:
            out += gk * arr
        else:
            out[:m] = np.nan
            out[m:] += gk * arr[:-m]
        return out

    full = D(y)
    comp12 = D1(D2(y))
    comp21 = D2(D1(y))
    ok = np.isfinite(full) & np.isfinite(comp12) & np.isfinite(comp21)
    if not np.any(ok):
        raise DomainError("test function too short for the composition window")
    r12 = np.max(np.abs(full[ok] - comp12[ok]))
    r21 = np.max(np.abs(full[ok] - comp21[ok]))
    return float(max(r12, r21))
