"""Uniform Cartesian grids and discrete calculus in 1/2/3 dimensions.

Stencils are second-order centered differences except for `advect`, which is
first-order upwind.  Boundary handling is either periodic wrap-around or
"far-field" clamping, where ghost nodes outside the box hold a fixed constant
(the far-field value of the field being differenced).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

PERIODIC = "periodic"
FAR_FIELD = "far-field"

SNAPSHOT_MAGIC = b"DNSF"
SNAPSHOT_HEADER_BYTES = 64


def _as_tuple(x, dim, name):
    if np.isscalar(x):
        return (x,) * dim
    t = tuple(x)
    if len(t) != dim:
        raise ValueError(f"{name} must have {dim} entries, got {len(t)}")
    return t


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian mesh.

    Spacing is length/n on periodic grids (node i at origin + i*h) and
    length/(n-1) on far-field grids (nodes include both box faces).
    """

    dim: int
    n: tuple
    length: tuple
    boundary: str = PERIODIC
    origin: tuple = None

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        object.__setattr__(self, "n", _as_tuple(self.n, self.dim, "n"))
        object.__setattr__(self, "length", _as_tuple(self.length, self.dim, "length"))
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * self.dim)
        else:
            object.__setattr__(
                self, "origin", _as_tuple(self.origin, self.dim, "origin")
            )
        if self.boundary not in (PERIODIC, FAR_FIELD):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if any(ni < 3 for ni in self.n):
            raise ValueError("need at least 3 nodes per axis")
        if any(li <= 0 for li in self.length):
            raise ValueError("domain extents must be positive")

    @property
    def h(self):
        if self.boundary == PERIODIC:
            return tuple(L / ni for L, ni in zip(self.length, self.n))
        return tuple(L / (ni - 1) for L, ni in zip(self.length, self.n))

    @property
    def shape(self):
        return self.n

    @property
    def min_h(self):
        return min(self.h)

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def axes(self):
        return [
            self.origin[k] + self.h[k] * np.arange(self.n[k])
            for k in range(self.dim)
        ]

    def nodes(self):
        """Node coordinates, shape (*n, dim)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def zeros(self):
        return np.zeros(self.n)

    def zeros_vector(self):
        return np.zeros(self.n + (self.dim,))

    def check_scalar(self, f):
        if f.shape[: self.dim] != self.n:
            raise ValueError(f"field shape {f.shape} does not match grid {self.n}")

    def check_vector(self, u):
        if u.shape[: self.dim] != self.n or u.shape[self.dim] != self.dim:
            raise ValueError(
                f"vector field shape {u.shape} does not match grid {self.n}"
            )


def shifted(f, axis, offset, grid, pad=0.0):
    """Values of f at node index i+offset along `axis` (ghosts = pad)."""
    out = np.roll(f, -offset, axis=axis)
    if grid.boundary == FAR_FIELD:
        sl = [slice(None)] * f.ndim
        if offset > 0:
            sl[axis] = slice(-offset, None)
        else:
            sl[axis] = slice(None, -offset)
        out[tuple(sl)] = pad
    return out


def d1(f, axis, grid, pad=0.0):
    """Centered first difference along one axis."""
    h = grid.h[axis]
    return (shifted(f, axis, +1, grid, pad) - shifted(f, axis, -1, grid, pad)) / (2 * h)


def grad(f, grid, pad=0.0):
    """Gradient of a scalar field, shape (*n, dim)."""
    grid.check_scalar(f)
    return np.stack([d1(f, k, grid, pad) for k in range(grid.dim)], axis=-1)


def jacobian(u, grid, pad=0.0):
    """J[..., i, j] = d u_i / d x_j for a vector field, shape (*n, dim, dim)."""
    grid.check_vector(u)
    cols = [d1(u, k, grid, pad) for k in range(grid.dim)]
    return np.stack(cols, axis=-1)


def div(u, grid, pad=0.0):
    grid.check_vector(u)
    return sum(d1(u[..., k], k, grid, pad) for k in range(grid.dim))


def laplacian(f, grid, pad=0.0):
    out = np.zeros_like(f)
    for k in range(grid.dim):
        h2 = grid.h[k] ** 2
        out += (
            shifted(f, k, +1, grid, pad) - 2 * f + shifted(f, k, -1, grid, pad)
        ) / h2
    return out


def advect(v, f, grid, pad=0.0):
    """First-order upwind v . grad f for a scalar f."""
    grid.check_vector(v)
    grid.check_scalar(f)
    out = np.zeros(grid.n)
    for k in range(grid.dim):
        h = grid.h[k]
        back = (f - shifted(f, k, -1, grid, pad)) / h
        fwd = (shifted(f, k, +1, grid, pad) - f) / h
        vk = v[..., k]
        out += vk * np.where(vk >= 0, back, fwd)
    return out


def advect_vector(v, u, grid, pad=0.0):
    """Componentwise upwind v . grad u for a vector field u."""
    grid.check_vector(u)
    return np.stack(
        [advect(v, u[..., c], grid, pad) for c in range(grid.dim)], axis=-1
    )


def integrate(f, grid, mask=None):
    """Midpoint-rule sum f * prod(h) over all (or masked) nodes."""
    grid.check_scalar(np.asarray(f) if np.ndim(f) else np.broadcast_to(f, grid.n))
    vals = np.asarray(f)
    if mask is not None:
        if mask.shape != grid.n:
            raise ValueError("mask shape does not match grid")
        vals = np.where(mask, vals, 0.0)
    return float(np.sum(vals)) * grid.cell_volume


@dataclass
class NormReport:
    """Discrete Sobolev-type norm ladder of a field.

    hk entries include all derivative orders <= k; `weighted_grad4` is the
    weighted fourth-derivative norm |w grad^4 f|_2 (0 when no weight given).
    """

    l2: float
    h1: float
    h2: float
    h3: float
    linf: float
    weighted_grad4: float = 0.0
    seminorms: tuple = field(default=())


def _all_first_derivs(f, grid, pad=0.0):
    """Stack of first derivatives over every trailing index combination."""
    return np.stack([d1(f, k, grid, pad) for k in range(grid.dim)], axis=-1)


def _interior_mask(grid, margin):
    mask = np.ones(grid.n, dtype=bool)
    if grid.boundary == FAR_FIELD:
        for k in range(grid.dim):
            sl = [slice(None)] * grid.dim
            sl[k] = slice(0, margin)
            mask[tuple(sl)] = False
            sl[k] = slice(-margin, None)
            mask[tuple(sl)] = False
    return mask


def sobolev_norms(f, grid, weight=None, pad=0.0):
    """Norm ladder up to third derivatives plus the weighted grad^4 monitor.

    On far-field grids norms are taken over interior nodes only (margin 4),
    since clamped ghosts pollute stacked stencils near the boundary.
    """
    if any(ni < 9 for ni in grid.n):
        raise ValueError("need at least 9 nodes per axis for the norm ladder")
    f = np.asarray(f, dtype=float)
    vol = grid.cell_volume
    mask = _interior_mask(grid, 4)

    def masked_sq(g):
        # sum of squares over all trailing axes, interior nodes only
        sq = np.sum(g.reshape(grid.n + (-1,)) ** 2, axis=-1)
        return float(np.sum(np.where(mask, sq, 0.0))) * vol

    l2sq = masked_sq(f)
    stacks = [f]
    semisq = []
    cur = f
    for order in range(4):
        cur = _all_first_derivs(cur, grid, pad if order == 0 else 0.0)
        stacks.append(cur)
        semisq.append(masked_sq(cur))

    h1 = np.sqrt(l2sq + semisq[0])
    h2 = np.sqrt(l2sq + semisq[0] + semisq[1])
    h3 = np.sqrt(l2sq + semisq[0] + semisq[1] + semisq[2])
    flat = np.abs(f.reshape(grid.n + (-1,)))
    linf = float(np.max(np.where(mask[..., None], flat, 0.0)))

    wg4 = 0.0
    if weight is not None:
        g4 = stacks[4]
        sq = np.sum(g4.reshape(grid.n + (-1,)) ** 2, axis=-1) * weight**2
        wg4 = float(np.sqrt(np.sum(np.where(mask, sq, 0.0)) * vol))

    return NormReport(
        l2=float(np.sqrt(l2sq)),
        h1=float(h1),
        h2=float(h2),
        h3=float(h3),
        linf=linf,
        weighted_grad4=wg4,
        seminorms=tuple(np.sqrt(s) for s in semisq),
    )


def l2_norm(f, grid):
    """Plain discrete L2 norm of a scalar or vector field."""
    vals = np.asarray(f, dtype=float).reshape(grid.n + (-1,))
    return float(np.sqrt(np.sum(vals**2) * grid.cell_volume))


# ---------------------------------------------------------------------------
# Field snapshot file format
#
# 64-byte header, little endian:
#   bytes  0..3   magic "DNSF"
#   bytes  4..7   uint32 dim
#   bytes  8..19  3 x uint32 nodes per axis (unused axes = 1)
#   bytes 20..23  uint32 boundary flag (0 periodic, 1 far-field)
#   bytes 24..47  3 x float64 spacing per axis (unused axes = 0)
#   bytes 48..55  float64 time
#   bytes 56..63  zero padding
# followed by n0*n1*n2 float64 values in row-major (C) node order.
# ---------------------------------------------------------------------------

_HEADER_FMT = "<4sI3I I 3d d 8x"


def write_snapshot(path, values, grid, time):
    grid.check_scalar(values)
    n3 = list(grid.n) + [1] * (3 - grid.dim)
    h3 = list(grid.h) + [0.0] * (3 - grid.dim)
    bflag = 0 if grid.boundary == PERIODIC else 1
    header = struct.pack(_HEADER_FMT, SNAPSHOT_MAGIC, grid.dim, *n3, bflag, *h3, time)
    assert len(header) == SNAPSHOT_HEADER_BYTES
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_snapshot(path):
    """Returns (values, meta dict with dim/n/h/boundary/time)."""
    with open(path, "rb") as fh:
        header = fh.read(SNAPSHOT_HEADER_BYTES)
        magic, dim, n0, n1, n2, bflag, h0, h1, h2, time = struct.unpack(
            _HEADER_FMT, header
        )
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        n = (n0, n1, n2)[:dim]
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(n)
    meta = {
        "dim": dim,
        "n": n,
        "h": (h0, h1, h2)[:dim],
        "boundary": PERIODIC if bflag == 0 else FAR_FIELD,
        "time": time,
    }
    return data, meta
