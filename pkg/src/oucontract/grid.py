"""Tensor-product grids with per-node Gaussian weights and Dirichlet masks.

Nodes are classified against a level-set domain: interior where G < 0,
exterior where G >= 0.  Virtual neighbors beyond the box edge count as
exterior with value 0, consistent with the staircase Dirichlet treatment
of the solver (every function on the grid is the extension-by-zero of its
interior part).  The per-node quadrature weight is theta_d(x) times the
cell volume, which makes sums over node sets cell-sum approximations of
Gaussian integrals over the corresponding region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .gauss import QuadratureRule, density_1d
from .domains import LevelSetDomain

_CLASSIFY_CHUNK = 65536


@dataclass
class GaussianGrid:
    dim: int
    lo: np.ndarray
    hi: np.ndarray
    shape: tuple[int, ...]
    axes: list[np.ndarray]
    h: np.ndarray
    interior: np.ndarray = field(repr=False)   # (shape,) bool
    domain: LevelSetDomain | None = None

    @classmethod
    def build(
        cls,
        domain: LevelSetDomain | None,
        lo,
        hi,
        h: float | list[float],
        dim: int | None = None,
    ) -> "GaussianGrid":
        """Grid over the box [lo_i, hi_i] with spacing <= h_i per axis.

        domain=None means the whole box is interior (whole-space problems
        truncated to the box).
        """
        if dim is None:
            dim = domain.dim if domain is not None else len(np.atleast_1d(lo))
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,)).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,)).copy()
        hs = np.broadcast_to(np.asarray(h, dtype=float), (dim,)).copy()
        if np.any(hi <= lo) or np.any(hs <= 0):
            raise ValueError("need hi > lo and h > 0")
        shape = tuple(int(math.floor((b - a) / s + 0.5)) + 1 for a, b, s in zip(lo, hi, hs))
        axes = [np.linspace(lo[i], hi[i], shape[i]) for i in range(dim)]
        h_eff = np.array([ax[1] - ax[0] for ax in axes])
        if domain is None:
            interior = np.ones(shape, dtype=bool)
        else:
            interior = cls._classify(domain, axes, shape)
        return cls(dim, lo, hi, shape, axes, h_eff, interior, domain)

    @staticmethod
    def _classify(domain: LevelSetDomain, axes, shape) -> np.ndarray:
        n = int(np.prod(shape))
        out = np.empty(n, dtype=bool)
        for start in range(0, n, _CLASSIFY_CHUNK):
            idx = np.arange(start, min(start + _CLASSIFY_CHUNK, n))
            multi = np.unravel_index(idx, shape)
            pts = np.column_stack([axes[a][multi[a]] for a in range(len(shape))])
            out[idx] = np.asarray(domain.value(pts)) < 0.0
        return out.reshape(shape)

    # -- masks ---------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_interior(self) -> int:
        return int(np.sum(self.interior))

    def eroded_interior(self, depth: int) -> np.ndarray:
        """Interior nodes whose axis neighborhoods up to ``depth`` are interior.

        depth=1 gives nodes with a full 2d-point central stencil; depth=2
        gives nodes whose entire composite stencil (values and their own
        central gradients) stays interior.  Box edges erode as exterior.
        """
        mask = self.interior.copy()
        for _ in range(depth):
            nxt = mask.copy()
            for a in range(self.dim):
                up = np.zeros_like(mask)
                dn = np.zeros_like(mask)
                sl_to = [slice(None)] * self.dim
                sl_from = [slice(None)] * self.dim
                sl_to[a], sl_from[a] = slice(0, -1), slice(1, None)
                up[tuple(sl_to)] = mask[tuple(sl_from)]
                sl_to[a], sl_from[a] = slice(1, None), slice(0, -1)
                dn[tuple(sl_to)] = mask[tuple(sl_from)]
                nxt &= up & dn
            mask = nxt
        return mask

    @property
    def full_stencil(self) -> np.ndarray:
        return self.eroded_interior(1)

    @property
    def cut_adjacent(self) -> np.ndarray:
        """Interior nodes with at least one non-interior axis neighbor."""
        return self.interior & ~self.full_stencil

    # -- geometry ------------------------------------------------------

    def node_coordinates(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g.reshape(-1) for g in grids])

    def axis_density(self, a: int) -> np.ndarray:
        return density_1d(self.axes[a])

    def node_weights(self) -> np.ndarray:
        """theta_d(x) * prod(h) per node, shape = grid shape."""
        cell = float(np.prod(self.h))
        w = np.ones(self.shape)
        for a in range(self.dim):
            view = [None] * self.dim
            view[a] = slice(None)
            w = w * self.axis_density(a)[tuple(view)]
        return w * cell

    def gaussian_mass_outside_box(self) -> float:
        """Upper bound on gamma^d mass not covered by the box."""
        inside = 1.0
        for a in range(self.dim):
            inside *= float(ndtr(self.hi[a]) - ndtr(self.lo[a]))
        return 1.0 - inside

    def cell_rule(self, mask: np.ndarray | None = None) -> QuadratureRule:
        """Cell-sum quadrature rule over a node mask (default: interior)."""
        m = self.interior if mask is None else mask
        flat = m.reshape(-1)
        coords = self.node_coordinates()[flat]
        weights = self.node_weights().reshape(-1)[flat]
        return QuadratureRule(coords, weights, kind="grid-cell")

    def interpolator(self, values: np.ndarray, fill_value: float = 0.0):
        from scipy.interpolate import RegularGridInterpolator

        return RegularGridInterpolator(
            self.axes,
            values.reshape(self.shape),
            method="linear",
            bounds_error=False,
            fill_value=fill_value,
        )


@dataclass
class ScalarField:
    """Nodal values on a grid, pinned to exactly 0 on exterior nodes."""

    grid: GaussianGrid
    values: np.ndarray  # (shape,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        self.values[~self.grid.interior] = 0.0

    @classmethod
    def from_callable(cls, grid: GaussianGrid, f) -> "ScalarField":
        vals = np.zeros(grid.n_nodes)
        flat_interior = grid.interior.reshape(-1)
        pts = grid.node_coordinates()[flat_interior]
        if pts.shape[0]:
            vals[flat_interior] = np.asarray(f(pts), dtype=float)
        return cls(grid, vals.reshape(grid.shape))

    @classmethod
    def zeros(cls, grid: GaussianGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def _shifted(values: np.ndarray, axis: int, step: int, fill=0.0) -> np.ndarray:
    """values at node + step*e_axis, zero-filled past the box edge."""
    out = np.full_like(values, fill)
    sl_to = [slice(None)] * values.ndim
    sl_from = [slice(None)] * values.ndim
    if step == 1:
        sl_to[axis], sl_from[axis] = slice(0, -1), slice(1, None)
    elif step == -1:
        sl_to[axis], sl_from[axis] = slice(1, None), slice(0, -1)
    else:
        raise ValueError("step must be +-1")
    out[tuple(sl_to)] = values[tuple(sl_from)]
    return out


def discrete_gradient(field: ScalarField) -> np.ndarray:
    """Nodal gradient, shape (*grid.shape, dim).

    Central differences where both axis neighbors are interior; one-sided
    differences against the pinned zero where a neighbor is exterior (or
    past the box edge).  Exterior nodes carry gradient 0.
    """
    grid = field.grid
    u = field.values
    interior = grid.interior
    out = np.zeros(grid.shape + (grid.dim,))
    for a in range(grid.dim):
        h = grid.h[a]
        u_up = _shifted(u, a, +1)
        u_dn = _shifted(u, a, -1)
        int_up = _shifted(interior.astype(bool), a, +1, fill=False)
        int_dn = _shifted(interior.astype(bool), a, -1, fill=False)
        central = int_up & int_dn
        comp = np.zeros(grid.shape)
        comp[central] = (u_up[central] - u_dn[central]) / (2.0 * h)
        up_only = int_up & ~int_dn      # lower neighbor pinned to 0
        comp[up_only] = (u[up_only] - 0.0) / h
        dn_only = ~int_up & int_dn      # upper neighbor pinned to 0
        comp[dn_only] = (0.0 - u[dn_only]) / h
        # both neighbors exterior: symmetric difference of two zeros
        comp[~interior] = 0.0
        out[..., a] = comp
    return out
