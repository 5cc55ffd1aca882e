"""Rayleigh quotient evaluation, normalized descent and run classification.

The descent keeps the weighted p-norm pinned to 1 after every accepted step
(the quotient is degree-0 homogeneous, so this only conditions the iterates)
and backtracks from an adaptive step with a standard Armijo test, so the
quotient trace is strictly decreasing on accepted steps.  An optional
spectral smoothing of the gradient keeps the step count resolution-
independent; it changes the descent direction, never the gradient itself.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvariantError
from .fields import TrialFunction
from .forms import (
    DEFAULT_PAD,
    apply_dirichlet_form,
    apply_smoothing,
    fourier_form,
    hardy_weights,
    power_weights,
)

__all__ = [
    "MinimizeOptions",
    "MinimizerReport",
    "WindowProfile",
    "rayleigh_quotient",
    "quotient_gradient",
    "minimize_quotient",
    "window_mass_profile",
    "default_windows",
    "classify_run",
    "CLASSIFICATIONS",
]

CLASSIFICATIONS = ("converged", "concentrating", "translating_x1", "vanishing")

# classification thresholds: single-window dominance, window shrink factor,
# box-relative centroid drift, residual sup-window mass
DOMINANCE = 0.90
SHRINK = 2.0
DRIFT = 0.25
VANISH = 0.30


@dataclass(frozen=True)
class MinimizeOptions:
    max_iters: int = 5000
    tol: float = 1e-8
    armijo: float = 1e-4
    backtracking: int = 60
    plateau: int = 10
    precondition: bool = True
    pad: int = DEFAULT_PAD
    step0: float = 1.0

    def to_dict(self):
        return {
            "max_iters": self.max_iters,
            "tol": self.tol,
            "armijo": self.armijo,
            "backtracking": self.backtracking,
            "plateau": self.plateau,
            "precondition": self.precondition,
            "pad": self.pad,
            "step0": self.step0,
        }


def _norm_data(u, params):
    w = power_weights(u.grid, params.p, params.b)
    pth = float(np.sum(w * np.abs(u.values) ** params.p))
    return w, pth


def rayleigh_quotient(u, params, pad=DEFAULT_PAD):
    """Energy over squared weighted norm; undefined for the zero field."""
    if u.is_zero():
        raise DomainError("Rayleigh quotient of the zero field is undefined")
    _, pth = _norm_data(u, params)
    e = fourier_form(u, params.s, pad=pad) - params.lam * float(
        np.sum(hardy_weights(u.grid, params.s) * u.values**2)
    )
    return e * pth ** (-2.0 / params.p)


def quotient_gradient(u, params, pad=DEFAULT_PAD):
    """Node-value gradient of the quotient; boundary entries forced to zero.

    2 P^(-2/p) [A u - lam W u - (E/P) w |u|^(p-2) u] with A the matrix-free
    form operator, W the Hardy weight multiplier, P the weighted p-th power.
    By construction the gradient is orthogonal to u.
    """
    if u.is_zero():
        raise DomainError("gradient at the zero field is undefined")
    wn, pth = _norm_data(u, params)
    au = apply_dirichlet_form(u, params.s, pad=pad)
    wh = hardy_weights(u.grid, params.s)
    e = float(np.sum(u.values * au)) - params.lam * float(np.sum(wh * u.values**2))
    pu = wn * np.abs(u.values) ** (params.p - 2.0) * u.values
    g = 2.0 * pth ** (-2.0 / params.p) * (au - params.lam * wh * u.values - (e / pth) * pu)
    g[u.grid.boundary_mask()] = 0.0
    return g


def euler_lagrange_residual(u, params, pad=DEFAULT_PAD):
    """Relative residual of A u - lam W u = (E/P) w |u|^(p-2) u at u."""
    wn, pth = _norm_data(u, params)
    au = apply_dirichlet_form(u, params.s, pad=pad)
    wh = hardy_weights(u.grid, params.s)
    e = float(np.sum(u.values * au)) - params.lam * float(np.sum(wh * u.values**2))
    r = au - params.lam * wh * u.values - (e / pth) * wn * np.abs(u.values) ** (
        params.p - 2.0
    ) * u.values
    r[u.grid.boundary_mask()] = 0.0
    denom = math.sqrt(float(np.sum(au**2)))
    return math.sqrt(float(np.sum(r**2))) / denom if denom > 0 else 0.0


@dataclass
class WindowProfile:
    """Weighted p-mass per window, over strips crossed with transverse balls."""

    windows: list
    masses: list
    normalization: float

    def dominant_fraction(self):
        if self.normalization <= 0.0 or not self.masses:
            return 0.0
        return max(self.masses) / self.normalization

    def to_dict(self):
        return {
            "windows": self.windows,
            "masses": self.masses,
            "normalization": self.normalization,
        }


def window_mass_profile(u, params, windows):
    """Weighted p-mass of u inside each window.

    A window is a dict with keys x1 (interval [lo, hi]) and optionally center
    (transverse point) and rho (transverse ball radius); without center/rho
    the window is a full slab.
    """
    grid = u.grid
    dens = power_weights(grid, params.p, params.b) * np.abs(u.values) ** params.p
    mesh = grid.meshgrid()
    masses = []
    for w in windows:
        lo, hi = w["x1"]
        mask = (mesh[0] >= lo) & (mesh[0] < hi)
        if grid.n > 1 and w.get("rho") is not None:
            center = w["center"]
            r2 = sum((mesh[a] - center[a - 1]) ** 2 for a in range(1, grid.n))
            mask &= r2 < w["rho"] ** 2
        masses.append(float(np.sum(dens[mask])))
    total = float(np.sum(dens))
    if sum(masses) > total + 1e-10 and not _windows_overlap(windows):
        raise InvariantError("window masses exceed the total weighted mass")
    return WindowProfile(windows=list(windows), masses=masses, normalization=total)


def _windows_overlap(windows):
    spans = sorted((w["x1"][0], w["x1"][1]) for w in windows)
    return any(b0 < a1 for (_, a1), (b0, _) in zip(spans, spans[1:]))


def _mass_moments(u, params):
    """x_1 centroid and spread of the weighted p-mass, plus the total."""
    grid = u.grid
    dens = power_weights(grid, params.p, params.b) * np.abs(u.values) ** params.p
    total = float(np.sum(dens))
    if total <= 0.0:
        return 0.0, 0.0, 0.0
    mesh = grid.meshgrid()
    c1 = float(np.sum(dens * mesh[0])) / total
    w1 = math.sqrt(float(np.sum(dens * (mesh[0] - c1) ** 2)) / total)
    return c1, w1, total


def default_windows(u, params, cap=8.0):
    """Windows adapted to the field: one strip around the mass centroid.

    The central strip spans 2.5 mass-widths (capped) around the x_1 centroid
    and, for n >= 2, a transverse ball around the transverse centroid; the
    remaining x_1 range is covered by two full slabs.
    """
    grid = u.grid
    c1, w1, total = _mass_moments(u, params)
    l1 = grid.hi[0]
    half = min(max(2.5 * w1, 2.0 * grid.h[0]), cap)
    lo = max(0.0, c1 - half)
    hi = min(l1, c1 + half)
    main = {"x1": [lo, hi]}
    if grid.n > 1 and total > 0.0:
        dens = power_weights(grid, params.p, params.b) * np.abs(u.values) ** params.p
        mesh = grid.meshgrid()
        center = [float(np.sum(dens * mesh[a])) / total for a in range(1, grid.n)]
        spread = math.sqrt(
            sum(
                float(np.sum(dens * (mesh[a] - center[a - 1]) ** 2)) / total
                for a in range(1, grid.n)
            )
        )
        main["center"] = center
        main["rho"] = min(max(2.5 * spread, 2.0), cap)
    windows = [{"x1": [0.0, lo]}, main, {"x1": [hi, l1 + grid.h[0]]}]
    return windows


@dataclass
class MinimizerReport:
    """Outcome of one quotient minimization run."""

    params: object
    quotient_trace: list
    best_quotient: float
    final_field: TrialFunction
    termination: str
    window_profile: WindowProfile
    el_residual: float
    iterations: int
    opts: MinimizeOptions = field(default_factory=MinimizeOptions)

    def validate(self):
        t = self.quotient_trace
        if any(b > a for a, b in zip(t, t[1:])):
            raise InvariantError("quotient trace is not non-increasing")
        if t and self.best_quotient != t[-1]:
            raise InvariantError("best quotient must be the last trace entry")
        if not self.best_quotient > 0.0:
            raise InvariantError(
                f"best quotient must be positive, got {self.best_quotient}"
            )
        return self

    def to_dict(self, include_trace=True):
        out = {
            "params": self.params.to_dict(),
            "best_quotient": self.best_quotient,
            "termination": self.termination,
            "iterations": self.iterations,
            "el_residual": self.el_residual,
            "grid": self.final_field.grid.describe(),
            "window_profile": self.window_profile.to_dict(),
            "opts": self.opts.to_dict(),
        }
        if include_trace:
            out["quotient_trace"] = list(self.quotient_trace)
        return out


def minimize_quotient(params, init, opts=None):
    """Backtracking descent on the quotient with per-step renormalization.

    Terminates on a relative-plateau tolerance, the iteration cap, or a stall
    (the configured number of consecutive backtracking failures).
    """
    opts = opts or MinimizeOptions()
    if init.is_zero():
        raise DomainError("initial field must be nonzero")
    grid = init.grid
    wn = power_weights(grid, params.p, params.b)

    def normalized(vals):
        pth = float(np.sum(wn * np.abs(vals) ** params.p))
        return vals / pth ** (1.0 / params.p)

    u = TrialFunction(grid, normalized(init.values))
    q = rayleigh_quotient(u, params, pad=opts.pad)
    trace = [q]
    step = opts.step0
    termination = "max_iters"
    iterations = 0

    for it in range(opts.max_iters):
        iterations = it + 1
        g = quotient_gradient(u, params, pad=opts.pad)
        if opts.precondition:
            d = apply_smoothing(grid, g, params.s, pad=opts.pad)
            d[grid.boundary_mask()] = 0.0
        else:
            d = g
        slope = float(np.sum(g * d))
        if not slope > 1e-28 * (1.0 + q * q):
            termination = "tolerance"
            break

        accepted = False
        t = step
        for _ in range(opts.backtracking):
            cand = TrialFunction(grid, normalized(u.values - t * d))
            qn = rayleigh_quotient(cand, params, pad=opts.pad)
            if qn <= q - opts.armijo * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            termination = "stall"
            break

        u, q = cand, qn
        trace.append(q)
        step = t * 2.0

        k = opts.plateau
        if len(trace) > k:
            prev = trace[-1 - k]
            if prev - q <= opts.tol * abs(q):
                termination = "tolerance"
                break

    profile = window_mass_profile(u, params, default_windows(u, params))
    report = MinimizerReport(
        params=params,
        quotient_trace=trace,
        best_quotient=trace[-1],
        final_field=u,
        termination=termination,
        window_profile=profile,
        el_residual=euler_lagrange_residual(u, params, pad=opts.pad),
        iterations=iterations,
        opts=opts,
    )
    return report.validate()


def classify_run(reports):
    """Label a sequence of runs at increasing resolution or box size.

    Heuristics with explicit thresholds: a stable dominant window means
    converged; mass moving into windows shrinking by the configured factor
    means concentrating; a centroid drifting by the configured fraction of
    the box means translating; a decaying sup-window mass means vanishing.
    """
    if len(reports) < 2:
        raise DomainError("classification needs at least two runs")
    n = reports[0].final_field.grid.n
    if any(r.final_field.grid.n != n for r in reports):
        raise DomainError("runs live in inconsistent dimensions")
    boxes = [r.final_field.grid.hi[0] for r in reports]
    if any(b1 < b0 for b0, b1 in zip(boxes, boxes[1:])):
        raise DomainError("runs must come at non-decreasing box sizes")

    feats = []
    for r in reports:
        c1, w1, _ = _mass_moments(r.final_field, r.params)
        feats.append((c1, max(w1, r.final_field.grid.h[0]), r.window_profile.dominant_fraction()))
    c1s = [f[0] for f in feats]
    w1s = [f[1] for f in feats]
    doms = [f[2] for f in feats]

    drift = abs(c1s[-1] - c1s[0]) >= DRIFT * boxes[-1]
    shrink = w1s[0] / w1s[-1] >= SHRINK
    stable_width = max(w1s) / min(w1s) < SHRINK
    if all(d >= DOMINANCE for d in doms) and not drift and stable_width:
        return "converged"
    if drift:
        return "translating_x1"
    if shrink:
        return "concentrating"
    if doms[-1] < VANISH and doms[-1] < doms[0]:
        return "vanishing"
    return "converged"
