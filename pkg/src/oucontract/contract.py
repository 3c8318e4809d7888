"""Gradient-contractivity checks for the Dirichlet resolvent.

For a test function y compactly supported in a domain O with nonnegative
Gaussian boundary curvature, and u = (I - sigma*L)^-1 y, the following
facts hold in the continuum and are verified here at grid resolution:

1. pointwise, with q_eps = sqrt(eps^2 + |grad u|^2),

       |grad u|^2 / q_eps - sigma * L q_eps  <  |grad y|        in O;

2. the outward normal slope of q_eps is <= 0 on the boundary;

3. integral over O of L(g(q_eps)) dgamma <= 0 for convex increasing g
   with g(0) = 0 (g = t^p, smoothed for p < 2);

4. the headline inequality
   ||grad u||_Lp(O,gamma) <= ||grad y||_Lp(O,gamma) for p > 1.

Discrete gradient norms are cell quadratures restricted to nodes whose
full central stencil is interior; the excluded boundary band contributes
exactly zero to the right-hand side because test bumps keep a declared
margin from the boundary, and its effect on the left-hand side is folded
into the h-coupled tolerance of the sweep assertions.  p = 1 records are
reported but never asserted.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domains import LevelSetDomain, project_to_boundary, ProjectionError
from .grid import GaussianGrid, ScalarField, discrete_gradient
from .solver import (
    OuOperator,
    ResolventJob,
    assemble_ou_operator,
    discrete_ou_apply,
    solve_resolvent,
)

_SUPPORT_FLOOR = 1e-3  # below this 1 - |x-c|^2/r^2 the bump underflows to 0


@dataclass(frozen=True)
class BumpFunction:
    """Smooth compactly supported test function.

    y(x) = A * exp(1 - 1/(1 - |x - c|^2/r^2)) inside the ball B(c, r),
    zero outside; y(c) = A.  The gradient has the closed form
    grad y = -2 y(x) (x - c) / (r^2 u^2) with u = 1 - |x - c|^2/r^2,
    used wherever the right-hand side of an inequality needs |grad y|.
    """

    center: np.ndarray
    radius: float
    amplitude: float = 1.0
    label: str = "bump"

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def _u(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rho2 = np.sum((x - self.center) ** 2, axis=-1) / self.radius**2
        return 1.0 - rho2

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        u = self._u(x)
        out = np.zeros_like(u)
        inside = u > _SUPPORT_FLOOR
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / u[inside])
        return float(out[0]) if single else out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        u = self._u(pts)
        out = np.zeros_like(pts)
        inside = u > _SUPPORT_FLOOR
        if np.any(inside):
            vals = self.amplitude * np.exp(1.0 - 1.0 / u[inside])
            coef = -2.0 * vals / (self.radius**2 * u[inside] ** 2)
            out[inside] = coef[:, None] * (pts[inside] - self.center)
        return out[0] if single else out

    def grad_norm(self, x) -> np.ndarray:
        g = self.gradient(x)
        return np.linalg.norm(np.atleast_2d(g), axis=-1) if g.ndim > 1 else float(
            np.linalg.norm(g)
        )

    @property
    def sup_norm(self) -> float:
        return abs(self.amplitude)


def make_bump(
    domain: LevelSetDomain,
    center,
    radius: float,
    margin: float,
    amplitude: float = 1.0,
    label: str | None = None,
    n_directions: int = 128,
    seed: int = 7,
) -> BumpFunction:
    """Bump with verified support containment B(center, radius+margin) in O.

    The enlarged sphere is sampled along seeded random directions plus all
    axis directions; any sample with G >= 0 rejects the bump.
    """
    center = np.asarray(center, dtype=float)
    d = center.size
    if not domain.contains(center):
        raise ValueError("support not compactly inside O")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_directions, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.vstack([np.eye(d), -np.eye(d)])
    dirs = np.vstack([dirs, axes])
    pts = center + (radius + margin) * dirs
    if np.any(np.asarray(domain.value(pts)) >= 0.0):
        raise ValueError("support not compactly inside O")
    name = label if label is not None else f"bump(c={list(np.round(center, 3))},r={radius})"
    return BumpFunction(center, radius, amplitude, name)


# ---------------------------------------------------------------------------
# auxiliary fields


def gradient_magnitude_fields(u: ScalarField, eps: float) -> tuple[ScalarField, ScalarField]:
    """(|grad u|, sqrt(eps^2 + |grad u|^2)) as nodal fields on interior nodes."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    grad = discrete_gradient(u)
    mag = np.linalg.norm(grad, axis=-1)
    smooth = np.sqrt(eps * eps + mag * mag)
    phi = ScalarField(u.grid, mag)
    phi_eps = ScalarField(u.grid, smooth)
    return phi, phi_eps


def convex_power_surrogate(p: float, delta: float):
    """Smooth convex g with g(0) = 0 and |g(t) - t^p| <= delta^p.

    g(t) = t^p for p >= 2 (already C^2 on [0, inf)); for p < 2 the
    regularization g(t) = (t^2 + delta^2)^(p/2) - delta^p is used.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if p >= 2:

        def g(t):
            return np.asarray(t, dtype=float) ** p

    else:

        def g(t):
            t = np.asarray(t, dtype=float)
            return (t * t + delta * delta) ** (p / 2.0) - delta**p

    return g


# ---------------------------------------------------------------------------
# pointwise and boundary checks


@dataclass
class ViolationReport:
    n_checked: int
    violations: list[tuple[int, float]]  # (flat node index, excess)
    worst_excess: float

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def check_pointwise_inequality(
    u: ScalarField,
    y: BumpFunction,
    sigma: float,
    eps: float,
    tol: float,
    density_floor: float = 1e-9,
) -> ViolationReport:
    """Verify |grad u|^2/q - sigma*L_h q <= |grad y| + tol, q = phi_eps.

    Checked on interior nodes whose composite stencil is fully interior
    (the node and its axis neighbors all have central gradients), so no
    one-sided or pinned value enters the left side.  Nodes where the
    Gaussian density falls below ``density_floor`` are excluded: the
    conjugate-gradient solve controls the residual in the theta-weighted
    norm, so nodal values that far out carry noise amplified by
    theta^(-1/2) and no reliable pointwise information (the excluded
    region has Gaussian mass below the floor itself).
    """
    grid = u.grid
    phi, phi_eps = gradient_magnitude_fields(u, eps)
    l_phi_eps = discrete_ou_apply(phi_eps)
    core = grid.eroded_interior(2)
    if density_floor > 0.0:
        cell = float(np.prod(grid.h))
        core = core & (grid.node_weights() >= density_floor * cell)
    lhs = np.zeros(grid.shape)
    lhs[core] = phi.values[core] ** 2 / phi_eps.values[core] - sigma * l_phi_eps.values[core]
    coords = grid.node_coordinates().reshape(grid.shape + (grid.dim,))
    rhs = np.zeros(grid.shape)
    rhs[core] = y.grad_norm(coords[core])
    excess = np.zeros(grid.shape)
    excess[core] = lhs[core] - rhs[core] - tol
    bad = core & (excess > 0.0)
    flat_bad = np.flatnonzero(bad.reshape(-1))
    violations = [(int(i), float(excess.reshape(-1)[i])) for i in flat_bad]
    worst = float(np.max(excess[core])) if np.any(core) else 0.0
    return ViolationReport(int(np.sum(core)), violations, worst)


@dataclass
class BoundarySlopeReport:
    n_checked: int
    n_skipped: int
    max_slope: float
    violations: list[tuple[int, float]]

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def check_boundary_normal_slope(
    u: ScalarField,
    domain: LevelSetDomain,
    eps: float,
    n_samples: int,
    seed: int,
    tol: float,
) -> BoundarySlopeReport:
    """One-sided normal slope of phi_eps at sampled boundary points <= tol.

    The slope is (q(x - t1*nu) - q(x - t2*nu)) / (t2 - t1) with t1 < t2
    chosen as the smallest multiples of the grid diagonal whose
    interpolation cells are fully interior; samples where no such probes
    exist inside the grid are skipped and counted.
    """
    grid = u.grid
    _, phi_eps = gradient_magnitude_fields(u, eps)
    interp = grid.interpolator(phi_eps.values)
    mask_interp = grid.interpolator(grid.interior.astype(float))
    diag = float(np.linalg.norm(grid.h))
    rng = np.random.default_rng(seed)
    slopes = []
    n_skipped = 0
    for i in range(n_samples):
        try:
            bp = project_to_boundary(domain, rng.standard_normal(grid.dim))
        except ProjectionError:
            n_skipped += 1
            continue
        probe = None
        for mult in (1.5, 2.0, 3.0, 4.0, 6.0):
            t1 = mult * diag
            t2 = t1 + 2.0 * diag
            p1 = bp.x - t1 * bp.nu
            p2 = bp.x - t2 * bp.nu
            if (
                mask_interp(p1[None, :])[0] > 1.0 - 1e-12
                and mask_interp(p2[None, :])[0] > 1.0 - 1e-12
            ):
                probe = (p1, p2, t2 - t1)
                break
        if probe is None:
            n_skipped += 1
            continue
        p1, p2, dt = probe
        slope = float((interp(p1[None, :])[0] - interp(p2[None, :])[0]) / dt)
        slopes.append(slope)
    if not slopes:
        return BoundarySlopeReport(0, n_skipped, 0.0, [])
    slopes_arr = np.asarray(slopes)
    violations = [
        (int(i), float(s - tol)) for i, s in enumerate(slopes_arr) if s > tol
    ]
    return BoundarySlopeReport(len(slopes), n_skipped, float(np.max(slopes_arr)), violations)


def boundary_flux_integral(
    u: ScalarField,
    eps: float,
    p: float,
    surrogate_delta: float = 1e-3,
) -> float:
    """Cell quadrature of L_h(g(phi_eps)) over the deep interior.

    In the continuum this equals the outward boundary flux of g(phi_eps)
    weighted by the Gaussian density, which is <= 0 under the curvature
    hypothesis; the discrete value is asserted against an O(h) tolerance
    by the callers.
    """
    grid = u.grid
    _, phi_eps = gradient_magnitude_fields(u, eps)
    g = convex_power_surrogate(p, surrogate_delta)
    psi = ScalarField(grid, g(phi_eps.values))
    l_psi = discrete_ou_apply(psi)
    core = grid.eroded_interior(2)
    w = grid.node_weights()
    return float(np.sum(l_psi.values[core] * w[core]))


# ---------------------------------------------------------------------------
# the contractivity sweep


@dataclass
class ContractRecord:
    domain: str
    bump: str
    sigma: float
    p: float
    lhs: float
    rhs: float
    ratio: float
    h: float
    residual: float
    converged: bool

    def key(self):
        return (self.domain, self.bump, self.sigma, self.p)


@dataclass
class SweepResult:
    records: list[ContractRecord]
    solutions: dict = field(default_factory=dict)  # (sigma, bump label) -> ResolventSolution

    def converged_records(self) -> list[ContractRecord]:
        return [r for r in self.records if r.converged]


def default_contract_tol(h: float) -> float:
    """Assertion slack for ratio <= 1 + tol; couples to the grid spacing."""
    return max(0.02, 10.0 * h)


def gradient_lp_ratio(
    u: ScalarField,
    bump: BumpFunction,
    p: float,
) -> tuple[float, float]:
    """(||grad u||_p, ||grad y||_p) over full-stencil interior nodes.

    The right side uses the bump's analytic gradient, exact on the node
    set; the bump's margin keeps its support away from the excluded cut
    band, so the restriction loses nothing on that side.
    """
    grid = u.grid
    mask = grid.full_stencil
    w = grid.node_weights()[mask]
    if w.size == 0 or float(np.sum(w)) <= 0.0:
        raise ValueError("region has no quadrature mass")
    grad_u = discrete_gradient(u)[mask]
    lhs_vals = np.linalg.norm(grad_u, axis=-1)
    coords = grid.node_coordinates().reshape(grid.shape + (grid.dim,))[mask]
    rhs_vals = bump.grad_norm(coords)
    lhs = float(np.sum(w * lhs_vals**p) ** (1.0 / p))
    rhs = float(np.sum(w * rhs_vals**p) ** (1.0 / p))
    return lhs, rhs


def _worker_cap() -> int:
    env = os.environ.get("OU_CONTRACT_THREADS", "")
    try:
        cap = int(env)
    except ValueError:
        cap = 0
    if cap < 1:
        return 1
    return cap


def contractivity_sweep(
    domain: LevelSetDomain,
    grid: GaussianGrid,
    sigmas,
    ps,
    bumps,
    solver_tol: float = 1e-10,
    keep_solutions: bool = True,
) -> SweepResult:
    """Solve the resolvent per (sigma, bump) and record Lp gradient ratios.

    One linear solve serves every p; records are merged in deterministic
    (domain, bump, sigma, p) order regardless of worker count.  Jobs run
    on up to OU_CONTRACT_THREADS workers (default 1).
    """
    operators: dict[float, OuOperator] = {
        float(s): assemble_ou_operator(grid, float(s)) for s in sigmas
    }
    jobs = [(float(s), b) for s in sigmas for b in bumps]

    def run(k: int):
        sigma, bump = jobs[k]
        rhs = ScalarField.from_callable(grid, bump)
        sol = solve_resolvent(
            ResolventJob(grid, sigma, rhs), tol=solver_tol, operator=operators[sigma]
        )
        return k, sol

    cap = _worker_cap()
    if cap > 1:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            results = dict(pool.map(run, range(len(jobs))))
    else:
        results = dict(run(k) for k in range(len(jobs)))

    records: list[ContractRecord] = []
    solutions = {}
    h_max = float(np.max(grid.h))
    for k, (sigma, bump) in enumerate(jobs):
        sol = results[k]
        if keep_solutions:
            solutions[(sigma, bump.label)] = sol
        for p in ps:
            lhs, rhs = gradient_lp_ratio(sol.u, bump, float(p))
            ratio = lhs / rhs if rhs > 0 else math.inf
            records.append(
                ContractRecord(
                    domain=domain.name,
                    bump=bump.label,
                    sigma=sigma,
                    p=float(p),
                    lhs=lhs,
                    rhs=rhs,
                    ratio=ratio,
                    h=h_max,
                    residual=sol.residual,
                    converged=sol.converged,
                )
            )
    records.sort(key=lambda r: r.key())
    return SweepResult(records, solutions)
