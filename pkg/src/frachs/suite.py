"""Deterministic families of test fields.

smooth_suite returns twelve compactly supported C^2 fields per dimension,
each tagged with an order s, mixing widths, centers, plateaus, two-lobe and
anisotropic shapes.  wall_family returns fields hugging the wall like
x_1^beta with beta decreasing toward the Hardy-critical exponent s - 1/2,
which drives the Hardy quotient down toward its sharp constant from above.
"""

import numpy as np

from .errors import DomainError
from .fields import TrialFunction, radial_bump

__all__ = ["smooth_suite", "wall_family", "wall_profile"]

_S_CYCLE = (0.3, 0.5, 0.7, 0.4, 0.6, 0.35)


def _combine(grid, parts):
    vals = np.zeros(grid.shape)
    for amp, f in parts:
        vals = vals + amp * f.values
    vals[grid.boundary_mask()] = 0.0
    return TrialFunction(grid, vals)


def _modulated(grid, center, width, freq):
    base = radial_bump(grid, center, width)
    mesh = grid.meshgrid()
    mod = 1.0 + 0.3 * np.cos(freq * (mesh[0] - center[0]))
    vals = base.values * mod
    vals[grid.boundary_mask()] = 0.0
    return TrialFunction(grid, vals)


def smooth_suite(grid):
    """Twelve named smooth fields with their assigned orders s.

    Every support stays at least half a unit off the wall and well inside the
    box, so the fields are admissible for the half-space splitting checks.
    """
    n = grid.n
    if n == 1:
        specs = [
            ("bump_a", radial_bump(grid, (3.0,), 1.5)),
            ("bump_b", radial_bump(grid, (5.0,), 2.0)),
            ("bump_c", radial_bump(grid, (2.0,), 1.0)),
            ("plateau_a", radial_bump(grid, (4.0,), 2.0, shape="plateau")),
            ("two_lobe", _combine(grid, [
                (1.0, radial_bump(grid, (3.0,), 1.0)),
                (-0.6, radial_bump(grid, (5.5,), 1.2)),
            ])),
            ("bump_d", radial_bump(grid, (8.0,), 2.5)),
            ("asym", _combine(grid, [
                (1.0, radial_bump(grid, (2.5,), 1.2)),
                (0.5, radial_bump(grid, (4.0,), 0.8)),
            ])),
            ("narrow", radial_bump(grid, (1.5,), 0.7)),
            ("plateau_b", radial_bump(grid, (6.0,), 1.8, shape="plateau")),
            ("modulated", _modulated(grid, (3.5,), 1.4, 2.0)),
            ("twin", _combine(grid, [
                (1.0, radial_bump(grid, (2.2,), 0.9)),
                (1.0, radial_bump(grid, (7.0,), 1.5)),
            ])),
            ("wide", radial_bump(grid, (6.0,), 3.0)),
        ]
    elif n == 2:
        specs = [
            ("bump_a", radial_bump(grid, (3.0, 0.0), 1.5)),
            ("bump_b", radial_bump(grid, (5.0, 2.0), 2.0)),
            ("bump_c", radial_bump(grid, (2.0, -1.0), 1.0)),
            ("plateau_a", radial_bump(grid, (4.0, 0.0), 1.8, shape="plateau")),
            ("two_lobe", _combine(grid, [
                (1.0, radial_bump(grid, (3.0, -1.5), 1.2)),
                (-0.6, radial_bump(grid, (4.5, 1.5), 1.2)),
            ])),
            ("bump_d", radial_bump(grid, (7.0, 0.0), 2.0)),
            ("aniso", radial_bump(grid, (3.5, 0.0), 1.8, stretch=(1.0, 0.55))),
            ("narrow", radial_bump(grid, (1.8, 0.5), 0.8)),
            ("plateau_b", radial_bump(grid, (5.5, -2.0), 1.5, shape="plateau")),
            ("modulated", _modulated(grid, (3.0, 1.0), 1.5, 2.5)),
            ("twin", _combine(grid, [
                (1.0, radial_bump(grid, (2.5, -2.5), 1.0)),
                (1.0, radial_bump(grid, (6.0, 2.5), 1.3)),
            ])),
            ("wide", radial_bump(grid, (5.0, 0.0), 2.4)),
        ]
    elif n == 3:
        specs = [
            ("bump_a", radial_bump(grid, (3.0, 0.0, 0.0), 1.5)),
            ("bump_b", radial_bump(grid, (5.0, 1.0, -1.0), 1.8)),
            ("bump_c", radial_bump(grid, (2.0, -1.0, 1.0), 1.0)),
            ("plateau_a", radial_bump(grid, (4.0, 0.0, 0.0), 1.6, shape="plateau")),
            ("two_lobe", _combine(grid, [
                (1.0, radial_bump(grid, (3.0, -1.5, 0.0), 1.1)),
                (-0.6, radial_bump(grid, (4.5, 1.5, 0.0), 1.1)),
            ])),
            ("aniso", radial_bump(grid, (3.5, 0.0, 0.0), 1.6, stretch=(1.0, 0.6, 0.8))),
        ]
    else:
        raise DomainError(f"no suite for dimension {n}")
    return [(name, u, _S_CYCLE[i % len(_S_CYCLE)]) for i, (name, u) in enumerate(specs)]


def wall_profile(grid, s, delta, reach=8.0):
    """Field behaving like x_1^(s - 1/2 + delta) near the wall.

    The profile is tapered to zero at x_1 = reach by a quintic step and, for
    n >= 2, localized by a transverse bump of unit scale.  Smaller delta
    pushes the Hardy quotient closer to the sharp constant.
    """
    beta = s - 0.5 + delta
    if beta <= s - 0.5:
        raise DomainError("delta must be positive to keep the energy finite")
    mesh = grid.meshgrid()
    x1 = mesh[0]
    with np.errstate(divide="ignore"):
        radial = np.where(x1 > 0.0, x1, 1.0) ** beta
    radial = np.where(x1 > 0.0, radial, 0.0)
    t = np.clip((reach - x1) / (0.5 * reach), 0.0, 1.0)
    taper = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    vals = radial * taper
    for a in range(1, grid.n):
        prof = np.exp(-((mesh[a] / 2.0) ** 2) * 2.0)
        cut = np.clip((0.75 * grid.hi[a] - np.abs(mesh[a])) / (0.2 * grid.hi[a]), 0.0, 1.0)
        cut = cut * cut * cut * (10.0 + cut * (-15.0 + 6.0 * cut))
        vals = vals * prof * cut
    vals[grid.boundary_mask()] = 0.0
    return TrialFunction(grid, vals)


def wall_family(grid, s, deltas=(0.45, 0.4, 0.35, 0.3, 0.25, 0.2)):
    """Wall-concentrated fields with decreasing exponents; quotients decrease."""
    return [wall_profile(grid, s, d) for d in deltas]
