"""Discrete trial functions on half-space boxes.

A Grid is a uniform tensor grid whose first axis spans [0, L1] (the node at
x_1 = 0 lies on the half-space boundary) and whose remaining axes span
symmetric intervals [-L', L'].  A TrialFunction stores real samples that
vanish on every boundary node of the box, which encodes compact support in
the open half-space after extension by zero.
"""

import csv
import math

import numpy as np

from .errors import DomainError

__all__ = [
    "Grid",
    "TrialFunction",
    "default_grid",
    "bubble",
    "translated_cutoff_family",
    "radial_bump",
    "dilate",
    "translate_cells",
    "save_field",
    "load_field",
]


class Grid:
    """Uniform tensor grid on [0, L1] x [-L', L']^(n-1)."""

    def __init__(self, lo, hi, m):
        lo = tuple(float(x) for x in lo)
        hi = tuple(float(x) for x in hi)
        m = tuple(int(k) for k in m)
        if not (len(lo) == len(hi) == len(m)):
            raise DomainError("lo, hi, m must have equal lengths")
        self.n = len(m)
        if self.n not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.n}")
        if lo[0] != 0.0:
            raise DomainError("axis 1 must start at the half-space wall x_1 = 0")
        for a in range(self.n):
            if m[a] < 8:
                raise DomainError(f"need at least 8 nodes per axis, got m={m[a]}")
            if hi[a] <= lo[a]:
                raise DomainError("box extents must be increasing")
        self.lo = lo
        self.hi = hi
        self.m = m
        self.h = tuple((hi[a] - lo[a]) / (m[a] - 1) for a in range(self.n))
        self.shape = m

    def axes(self):
        return [np.linspace(self.lo[a], self.hi[a], self.m[a]) for a in range(self.n)]

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def coords_flat(self):
        """All node coordinates as an (N, n) array, row-major node order."""
        mesh = self.meshgrid()
        return np.stack([c.ravel() for c in mesh], axis=1)

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def num_nodes(self):
        return int(np.prod(self.m))

    def boundary_mask(self):
        """Boolean array marking every node on the boundary of the box."""
        cached = getattr(self, "_bmask", None)
        if cached is None:
            mask = np.zeros(self.shape, dtype=bool)
            for a in range(self.n):
                sl = [slice(None)] * self.n
                sl[a] = 0
                mask[tuple(sl)] = True
                sl[a] = -1
                mask[tuple(sl)] = True
            mask.setflags(write=False)
            self._bmask = cached = mask
        return cached

    def isotropic_h(self):
        h0 = self.h[0]
        if any(abs(h - h0) > 1e-12 * h0 for h in self.h):
            raise DomainError(f"grid spacing must be isotropic, got {self.h}")
        return h0

    def same_geometry(self, other):
        return (
            self.n == other.n
            and self.lo == other.lo
            and self.hi == other.hi
            and self.m == other.m
        )

    def describe(self):
        return {"n": self.n, "lo": list(self.lo), "hi": list(self.hi), "m": list(self.m)}

    def __repr__(self):
        box = " x ".join(f"[{lo:g},{hi:g}]" for lo, hi in zip(self.lo, self.hi))
        return f"Grid({box}, m={self.m})"


_DEFAULTS = {
    1: ((0.0,), (64.0,), (4097,)),
    2: ((0.0, -16.0), (32.0, 16.0), (257, 257)),
    3: ((0.0, -8.0, -8.0), (16.0, 8.0, 8.0), (65, 65, 65)),
}


def default_grid(n, m=None, scale=1.0):
    """Stock grid for dimension n; m overrides every per-axis node count."""
    if n not in _DEFAULTS:
        raise DomainError(f"no default grid for n={n}")
    lo, hi, m0 = _DEFAULTS[n]
    if scale != 1.0:
        lo = tuple(x * scale for x in lo)
        hi = tuple(x * scale for x in hi)
    if m is not None:
        m0 = (int(m),) * n
    return Grid(lo, hi, m0)


class TrialFunction:
    """Real samples on a Grid, zero on the box boundary, immutable."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise DomainError(
                f"value shape {values.shape} does not match grid {grid.shape}"
            )
        if np.any(values[grid.boundary_mask()] != 0.0):
            raise DomainError("trial function must vanish on all boundary nodes")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)

    @property
    def n(self):
        return self.grid.n

    def is_zero(self):
        return not np.any(self.values)

    def support_indices(self):
        """Flat indices of nonzero nodes (row-major node order)."""
        return np.flatnonzero(self.values.ravel())

    def __mul__(self, alpha):
        return TrialFunction(self.grid, self.values * float(alpha))

    __rmul__ = __mul__


def boundary_cutoff(grid, inner_fraction=0.8):
    """C^2 bump: 1 on the inner fraction of the box, 0 at the boundary.

    Built per axis from the quintic smoothstep, so products of samples stay
    twice continuously differentiable.
    """
    margin_frac = (1.0 - inner_fraction) / 2.0
    out = np.ones(grid.shape)
    for a, ax in enumerate(grid.axes()):
        extent = grid.hi[a] - grid.lo[a]
        margin = margin_frac * extent
        d = np.minimum(ax - grid.lo[a], grid.hi[a] - ax) / margin
        t = np.clip(d, 0.0, 1.0)
        prof = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        shp = [1] * grid.n
        shp[a] = -1
        out = out * prof.reshape(shp)
    return out


def bubble(grid, center, scale, n, s):
    """Sampled whole-space extremal (1 + |x - c|^2 / scale^2)^((2s-n)/2).

    Multiplied by the C^2 cutoff vanishing at the box boundary, so the result
    is a valid TrialFunction; the profile equals 1 at the center before the
    cutoff.
    """
    if n != grid.n:
        raise DomainError(f"dimension mismatch: grid n={grid.n}, requested n={n}")
    if not scale > 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    center = tuple(float(c) for c in center)
    for a in range(grid.n):
        if not (grid.lo[a] < center[a] < grid.hi[a]):
            raise DomainError(f"center {center} not strictly inside the box")
    mesh = grid.meshgrid()
    r2 = sum((mesh[a] - center[a]) ** 2 for a in range(grid.n)) / scale**2
    vals = (1.0 + r2) ** ((2.0 * s - n) / 2.0)
    return TrialFunction(grid, vals * boundary_cutoff(grid))


def _default_profile(r2):
    """Smooth compactly supported radial profile on the unit ball, C^2 at r=1."""
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = (1.0 - r2[inside]) ** 3
    return out


def translated_cutoff_family(grid, h, profile=_default_profile):
    """Sample of phi(h (x - e_1)) where phi is supported in the unit ball.

    e_1 = (1, 0, ..., 0); the support shrinks toward e_1 as h grows.  profile
    maps squared radius to values and must vanish for r >= 1.
    """
    if h < 1.0:
        raise DomainError(f"dilation factor h must be >= 1, got {h}")
    center = (1.0,) + (0.0,) * (grid.n - 1)
    # support is the ball of radius 1/h about e_1; it must fit in the box
    for a in range(grid.n):
        if center[a] - 1.0 / h < grid.lo[a] - 1e-12 or center[a] + 1.0 / h > grid.hi[a] + 1e-12:
            raise DomainError(f"support of the h={h} member escapes the box")
    mesh = grid.meshgrid()
    r2 = sum((h * (mesh[a] - center[a])) ** 2 for a in range(grid.n))
    vals = profile(r2)
    bnd = grid.boundary_mask()
    vals[bnd] = 0.0
    return TrialFunction(grid, vals)


def radial_bump(grid, center, width, shape="cubic", amplitude=1.0, stretch=None):
    """Compact C^2 bump of the given half-width around center.

    shape 'cubic' is (1 - r^2)^3; 'plateau' is flat on the inner 60% with a
    quintic edge.  stretch optionally scales per-axis radii (anisotropy).
    """
    center = tuple(float(c) for c in center)
    mesh = grid.meshgrid()
    if stretch is None:
        stretch = (1.0,) * grid.n
    r2 = sum(
        ((mesh[a] - center[a]) / (width * stretch[a])) ** 2 for a in range(grid.n)
    )
    if shape == "cubic":
        vals = _default_profile(r2)
    elif shape == "plateau":
        r = np.sqrt(r2)
        t = np.clip((1.0 - r) / 0.4, 0.0, 1.0)
        vals = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    else:
        raise DomainError(f"unknown bump shape {shape!r}")
    vals = amplitude * vals
    vals[grid.boundary_mask()] = 0.0
    return TrialFunction(grid, vals)


def dilate(u, beta):
    """Return x -> u(beta x) on the grid whose box is shrunk by beta.

    beta is a positive integer, so the dilated field keeps the same node
    values on the scaled node set and no interpolation is involved.
    """
    if not isinstance(beta, int) or beta < 1:
        raise DomainError(f"dilation factor must be a positive integer, got {beta}")
    if beta == 1:
        return u
    g = u.grid
    new = Grid(
        tuple(x / beta for x in g.lo),
        tuple(x / beta for x in g.hi),
        g.m,
    )
    return TrialFunction(new, u.values.copy())


def translate_cells(u, axis, k):
    """Shift the samples by k whole cells along an axis (transverse axes only).

    The vacated region must already be zero, otherwise mass would be pushed
    through the box boundary.
    """
    if axis == 0:
        raise DomainError("translation along the wall-normal axis is not exact")
    vals = np.roll(u.values, k, axis=axis)
    # the roll wraps; verify the wrapped-through slab was zero
    sl = [slice(None)] * u.grid.n
    sl[axis] = slice(0, k) if k > 0 else slice(k, None)
    if np.any(np.abs(vals[tuple(sl)]) > 0):
        raise DomainError("translated support would leave the box")
    return TrialFunction(u.grid, vals)


def save_field(u, path):
    """Write a TrialFunction as flat CSV.

    First row: n, then per-axis lo, hi pairs, then per-axis node counts.
    Remaining rows: node values in row-major order, one per row.
    """
    g = u.grid
    header = [g.n]
    for a in range(g.n):
        header += [repr(g.lo[a]), repr(g.hi[a])]
    header += list(g.m)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for v in u.values.ravel():
            w.writerow([repr(float(v))])


def load_field(path):
    """Read a TrialFunction written by save_field."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise DomainError(f"empty field file {path}")
    head = rows[0]
    n = int(head[0])
    if len(head) != 1 + 3 * n:
        raise DomainError(f"malformed field header in {path}")
    lo = tuple(float(head[1 + 2 * a]) for a in range(n))
    hi = tuple(float(head[2 + 2 * a]) for a in range(n))
    m = tuple(int(head[1 + 2 * n + a]) for a in range(n))
    grid = Grid(lo, hi, m)
    vals = np.array([float(r[0]) for r in rows[1:]], dtype=np.float64)
    if vals.size != grid.num_nodes:
        raise DomainError(
            f"field file {path} holds {vals.size} values, grid wants {grid.num_nodes}"
        )
    return TrialFunction(grid, vals.reshape(grid.shape))
