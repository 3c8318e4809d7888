"""Karhunen-Loeve truncations of Brownian motion and bridge, and the
domains they induce on R^m.

The Wiener measure on L^2[0,1], and its pinned bridge variant,
diagonalize over

    brownian motion:  lambda_n = 1 / (pi^2 (n - 1/2)^2),
                      e_n(s) = sqrt(2) sin((n - 1/2) pi s),
    brownian bridge:  lambda_n = 1 / (pi n)^2,
                      e_n(s) = sqrt(2) sin(n pi s),

and h_n = sqrt(lambda_n) e_n is an orthonormal basis of the Cameron-Martin
space with inner product <f, g>_H = integral f' g' ds.  A scalar profile
g with |g'| >= c and the envelope bounds

    alpha_1 g + beta_1 <= xi g'(xi) <= alpha_2 g + beta_2

induces for each truncation m the level function

    G_m(xi) = integral_0^1 g( sum_{i<=m} xi_i h_i(s) ) ds  -  r

on R^m, whose sublevel set has nonnegative Gaussian boundary curvature
whenever the threshold alpha_2 r <= -(beta_2 + sup|g''| * I_f) holds with
I_f = 1/2 for the motion and 1/6 for the bridge (I_f is the integral of
the squared-basis trace sum f(s), which is s - s^2 in the bridge case).
All envelope constants are declared by the caller and validated on a
grid, never inferred.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contract import BumpFunction
from .domains import LevelSetDomain, gaussian_curvature, project_to_boundary
from .gauss import gauss_hermite_rule
from .grid import GaussianGrid, ScalarField, discrete_gradient
from .solver import ResolventJob, solve_resolvent

BM = "brownian_motion"
BRIDGE = "brownian_bridge"
_TRACE_INTEGRAL = {BM: 0.5, BRIDGE: 1.0 / 6.0}
_EVAL_CHUNK = 65536


def composite_gauss_legendre(n_panels: int, nodes_per_panel: int = 8):
    """Composite Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    width = 1.0 / n_panels
    nodes = []
    weights = []
    for k in range(n_panels):
        a = k * width
        nodes.append(a + 0.5 * width * (x + 1.0))
        weights.append(0.5 * width * w)
    return np.concatenate(nodes), np.concatenate(weights)


def basel_partial_sum(m: int) -> float:
    """sum_{n<=m} (n - 1/2)^-2, increasing to pi^2/2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = np.arange(1, m + 1, dtype=float)
    return float(np.sum((n - 0.5) ** -2))


@dataclass
class KLBasis:
    """Truncated Karhunen-Loeve system with an s-quadrature on [0, 1]."""

    kind: str
    m: int
    lambdas: np.ndarray
    s_nodes: np.ndarray
    s_weights: np.ndarray
    h_table: np.ndarray = field(repr=False)   # (m, n_s) values of h_i
    hp_table: np.ndarray = field(repr=False)  # (m, n_s) values of h_i'

    @classmethod
    def build(cls, kind: str, m: int, n_panels: int | None = None,
              nodes_per_panel: int = 8) -> "KLBasis":
        if kind not in (BM, BRIDGE):
            raise ValueError(f"unknown basis kind {kind!r}")
        if m < 1:
            raise ValueError("truncation must be >= 1")
        if n_panels is None:
            n_panels = max(16, m)
        s, w = composite_gauss_legendre(n_panels, nodes_per_panel)
        idx = np.arange(1, m + 1, dtype=float)
        if kind == BM:
            freq = (idx - 0.5) * math.pi
        else:
            freq = idx * math.pi
        lambdas = 1.0 / freq**2
        h = np.sqrt(2.0 * lambdas)[:, None] * np.sin(freq[:, None] * s[None, :])
        hp = math.sqrt(2.0) * np.cos(freq[:, None] * s[None, :])
        return cls(kind, m, lambdas, s, w, h, hp)

    def h_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        idx = np.arange(1, self.m + 1, dtype=float)
        freq = (idx - 0.5) * math.pi if self.kind == BM else idx * math.pi
        return np.sqrt(2.0 / freq**2)[:, None] * np.sin(freq[:, None] * s[None, :])

    def gram_H(self) -> np.ndarray:
        """<h_i, h_j>_H = integral h_i' h_j' ds by quadrature."""
        return (self.hp_table * self.s_weights[None, :]) @ self.hp_table.T

    def h1_integral(self) -> float:
        return float(self.h_table[0] @ self.s_weights)

    def paths(self, coeffs: np.ndarray) -> np.ndarray:
        """Path values sum_i xi_i h_i(s_k) for coefficient rows."""
        return np.atleast_2d(np.asarray(coeffs, dtype=float)) @ self.h_table


def trace_density(s, m: int, basis: KLBasis) -> np.ndarray | float:
    """f_m(s) = sum_{n<=m} h_n(s)^2 for the basis kind.

    Any truncation m may be requested regardless of the built basis size;
    m = 0 gives the empty sum.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if m == 0:
        out = np.zeros_like(s_arr)
    else:
        idx = np.arange(1, m + 1, dtype=float)
        freq = (idx - 0.5) * math.pi if basis.kind == BM else idx * math.pi
        h = np.sqrt(2.0 / freq**2)[:, None] * np.sin(freq[:, None] * s_arr[None, :])
        out = np.sum(h * h, axis=0)
    return float(out[0]) if np.isscalar(s) or np.asarray(s).ndim == 0 else out


# ---------------------------------------------------------------------------
# scalar profiles g and their declared envelope constants


@dataclass
class FunctionalSpec:
    """A profile g with declared constants, inducing G_m = int g(path) - r."""

    g: Callable
    gp: Callable
    gpp: Callable
    c: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    r: float
    gpp_sup: float
    kind: str = BM
    name: str = "functional"

    @property
    def trace_integral(self) -> float:
        return _TRACE_INTEGRAL[self.kind]

    def threshold_slack(self) -> float:
        """-(beta2 + gpp_sup * I_f) - alpha2 * r, nonnegative when admissible."""
        return -(self.beta2 + self.gpp_sup * self.trace_integral) - self.alpha2 * self.r

    def curvature_lower_bound_numerator(self) -> float:
        return -self.gpp_sup * self.trace_integral - self.alpha2 * self.r - self.beta2


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str]
    worst_slack: dict
    witness: dict

    def __bool__(self):
        return self.ok


def validate_functional(
    spec: FunctionalSpec,
    grid_lo: float = -20.0,
    grid_hi: float = 20.0,
    grid_step: float = 1e-2,
) -> ValidationReport:
    """Scan the declared inequalities for g on a validation grid.

    Checks, each with its witnessing point on failure:
      |g'| >= c, the two-sided envelope on xi*g', |g''| <= gpp_sup,
      r in the (grid) range of g, and the admissibility threshold.
    """
    xi = np.arange(grid_lo, grid_hi + 0.5 * grid_step, grid_step)
    gv = np.asarray(spec.g(xi), dtype=float)
    gp = np.asarray(spec.gp(xi), dtype=float)
    gpp = np.asarray(spec.gpp(xi), dtype=float)
    failures: list[str] = []
    witness: dict = {}
    worst: dict = {}

    def _check(name, slack_arr):
        k = int(np.argmin(slack_arr))
        worst[name] = float(slack_arr[k])
        if slack_arr[k] < 0:
            failures.append(name)
            witness[name] = float(xi[k])

    _check("gradient_floor", np.abs(gp) - spec.c)
    _check("envelope_lower", xi * gp - (spec.alpha1 * gv + spec.beta1))
    _check("envelope_upper", (spec.alpha2 * gv + spec.beta2) - xi * gp)
    _check("second_derivative_sup", spec.gpp_sup - np.abs(gpp))

    in_range = float(np.min(gv)) <= spec.r <= float(np.max(gv))
    worst["level_in_range"] = 0.0 if in_range else -1.0
    if not in_range:
        failures.append("level_in_range")

    slack = spec.threshold_slack()
    worst["threshold"] = slack
    if slack < 0:
        failures.append("threshold")

    return ValidationReport(not failures, failures, worst, witness)


def _poly_funcs(coeffs):
    c = np.asarray(coeffs, dtype=float)
    c1 = np.polynomial.polynomial.polyder(c)
    c2 = np.polynomial.polynomial.polyder(c, 2)
    pv = np.polynomial.polynomial.polyval
    return (
        lambda x: pv(np.asarray(x, dtype=float), c),
        lambda x: pv(np.asarray(x, dtype=float), c1),
        lambda x: pv(np.asarray(x, dtype=float), c2),
    )


def _rational_funcs(num, den):
    p = np.asarray(num, dtype=float)
    q = np.asarray(den, dtype=float)
    pv = np.polynomial.polynomial.polyval
    p1, p2 = np.polynomial.polynomial.polyder(p), np.polynomial.polynomial.polyder(p, 2)
    q1, q2 = np.polynomial.polynomial.polyder(q), np.polynomial.polynomial.polyder(q, 2)

    def g(x):
        x = np.asarray(x, dtype=float)
        return pv(x, p) / pv(x, q)

    def gp(x):
        x = np.asarray(x, dtype=float)
        P, Q = pv(x, p), pv(x, q)
        return (pv(x, p1) * Q - P * pv(x, q1)) / Q**2

    def gpp(x):
        x = np.asarray(x, dtype=float)
        P, Q = pv(x, p), pv(x, q)
        Pp, Qp = pv(x, p1), pv(x, q1)
        Ppp, Qpp = pv(x, p2), pv(x, q2)
        return (Ppp * Q * Q - 2.0 * Pp * Qp * Q + 2.0 * P * Qp * Qp - P * Qpp * Q) / Q**3

    return g, gp, gpp


def affine_level_spec(r: float = -1.0, kind: str = BM) -> FunctionalSpec:
    """g(xi) = xi: xi g' = g exactly, so alpha = 1, beta = 0, g'' = 0."""
    g, gp, gpp = _poly_funcs([0.0, 1.0])
    return FunctionalSpec(g, gp, gpp, c=1.0, alpha1=1.0, alpha2=1.0,
                          beta1=0.0, beta2=0.0, r=r, gpp_sup=0.0,
                          kind=kind, name=f"affine(r={r})")


def rational_reference_spec(kind: str = BM, r: float = -0.75) -> FunctionalSpec:
    """The shipped nonlinear profile g = (-xi^3 - xi/2) / (1 + xi^2).

    Equivalently g(xi) = -xi + 0.5 xi/(1 + xi^2): a degree-(m+1)/degree-m
    rational with g' in [-1.0625, -0.5] and xi g' - g = -xi^3/(1+xi^2)^2
    bounded by 3 sqrt(3)/16 < 0.33.
    """
    g, gp, gpp = _rational_funcs([0.0, -0.5, 0.0, -1.0], [1.0, 0.0, 1.0])
    return FunctionalSpec(g, gp, gpp, c=0.5, alpha1=1.0, alpha2=1.0,
                          beta1=-0.33, beta2=0.33, r=r, gpp_sup=0.75,
                          kind=kind, name=f"rational_reference({kind},r={r})")


def functional_spec_from_dict(d: dict) -> FunctionalSpec:
    gdef = d["g"]
    if gdef["type"] == "poly":
        g, gp, gpp = _poly_funcs(gdef["coeffs"])
    elif gdef["type"] == "rational":
        g, gp, gpp = _rational_funcs(gdef["num"], gdef["den"])
    else:
        raise ValueError(f"unsupported g type {gdef['type']!r}")
    return FunctionalSpec(
        g, gp, gpp,
        c=float(d["c"]),
        alpha1=float(d["alpha1"]), alpha2=float(d["alpha2"]),
        beta1=float(d["beta1"]), beta2=float(d["beta2"]),
        r=float(d["r"]), gpp_sup=float(d["gpp_sup"]),
        kind=d.get("kind", BM), name=d.get("name", "functional"),
    )


def load_functional_spec(path) -> FunctionalSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return functional_spec_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# induced level-set domains on R^m


def cylindrical_domain(spec: FunctionalSpec, basis: KLBasis,
                       require_valid: bool = True) -> LevelSetDomain:
    """G_m(xi) = integral g(sum xi_i h_i(s)) ds - r as a LevelSetDomain.

    Derivatives share the basis s-quadrature:
      dG/dxi_i    = integral g'(path) h_i ds,
      d2G/dxi_ij  = integral g''(path) h_i h_j ds.
    """
    if require_valid:
        report = validate_functional(spec)
        if not report.ok:
            raise ValueError(
                f"functional spec rejected: {report.failures}, witness {report.witness}"
            )
    m = basis.m
    H = basis.h_table
    w = basis.s_weights

    def g(xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape[0])
        for start in range(0, xi.shape[0], _EVAL_CHUNK):
            block = xi[start:start + _EVAL_CHUNK]
            paths = block @ H
            out[start:start + block.shape[0]] = np.asarray(spec.g(paths)) @ w
        return out - spec.r

    def grad(xi):
        path = np.asarray(xi, dtype=float) @ H
        return H @ (w * np.asarray(spec.gp(path)))

    def hess(xi):
        path = np.asarray(xi, dtype=float) @ H
        return (H * (w * np.asarray(spec.gpp(path)))[None, :]) @ H.T

    floor = 0.1 * spec.c * abs(basis.h1_integral())
    return LevelSetDomain(m, g, grad, hess, grad_floor=floor,
                          name=f"cylindrical({spec.name},m={m})")


def pathwise_level_value(spec: FunctionalSpec, basis: KLBasis, coeffs) -> float:
    """G_m(xi) for one coefficient vector (quadrature of g along the path)."""
    paths = basis.paths(coeffs)
    vals = np.asarray(spec.g(paths)) @ basis.s_weights
    return float(np.atleast_1d(vals)[0]) - spec.r


@dataclass
class CurvatureAudit:
    min_h_gamma: float
    min_bound_slack: float       # min over samples of (Hgamma - lower bound)
    first_coord_min: float
    first_coord_floor: float
    n_samples: int
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.min_h_gamma >= -self.tol
            and self.min_bound_slack >= -self.tol
            and self.first_coord_min > 0.0
        )


def cylindrical_curvature_audit(
    spec: FunctionalSpec,
    basis: KLBasis,
    n_samples: int,
    seed: int,
    tol: float = 1e-6,
) -> CurvatureAudit:
    """Sample the boundary of the truncated domain and audit Hgamma.

    Per sample the audit checks Hgamma against the analytic lower bound

        (-sup|g''| * I_f - alpha2 r - beta2) / |grad G_m(x)|

    and records |dG/dxi_1|, which must stay above c * |integral h_1 ds|
    (the profile's slope never vanishes and h_1 has one sign).
    """
    if basis.m > 4:
        raise ValueError("curvature audits are limited to truncations m <= 4")
    dom = cylindrical_domain(spec, basis)
    numer = spec.curvature_lower_bound_numerator()
    floor = spec.c * abs(basis.h1_integral())
    rng = np.random.default_rng(seed)
    h_gammas = np.empty(n_samples)
    slacks = np.empty(n_samples)
    first = np.empty(n_samples)
    for i in range(n_samples):
        bp = project_to_boundary(dom, rng.standard_normal(basis.m))
        hg = gaussian_curvature(dom, bp.x)
        gnorm = float(np.linalg.norm(dom.gradient(bp.x)))
        h_gammas[i] = hg
        slacks[i] = hg - numer / gnorm
        first[i] = abs(float(dom.gradient(bp.x)[0]))
    return CurvatureAudit(
        min_h_gamma=float(np.min(h_gammas)),
        min_bound_slack=float(np.min(slacks)),
        first_coord_min=float(np.min(first)),
        first_coord_floor=floor - tol,
        n_samples=n_samples,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# epigraph domains


@dataclass
class EpigraphSpec:
    """G = xi_1 + Phi(xi_2, ..., xi_m) with declared constants.

    The constants must satisfy Phi >= C, ||D2 Phi||_F <= C1,
    <grad Phi(x'), x'> <= C2, ||D2 Phi||_2 <= C3 and
    C - C1 - C2 - C3 >= 0; they are validated on Gaussian samples, and the
    boundary audit checks Hgamma >= (C - C1 - C2 - C3)/|grad G|.
    """

    phi: Callable           # batched (n, m-1) -> (n,)
    phi_grad: Callable      # single (m-1,) -> (m-1,)
    phi_hess: Callable      # single (m-1,) -> (m-1, m-1)
    C: float
    C1: float
    C2: float
    C3: float
    name: str = "epigraph"

    def margin(self) -> float:
        return self.C - self.C1 - self.C2 - self.C3


def constant_epigraph(C: float) -> EpigraphSpec:
    """Phi identically C: the halfspace {xi_1 < -C}."""

    def phi(xp):
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        return np.full(xp.shape[0], C)

    def phi_grad(xp):
        return np.zeros_like(np.asarray(xp, dtype=float))

    def phi_hess(xp):
        k = np.asarray(xp).size
        return np.zeros((k, k))

    return EpigraphSpec(phi, phi_grad, phi_hess, C=C, C1=0.0, C2=0.0, C3=0.0,
                        name=f"halfspace_level(C={C})")


def gauss_ridge_epigraph(c0: float, amp: float, weights) -> EpigraphSpec:
    """Phi(x') = c0 + amp * exp(-t^2/2), t = <w, x'>.

    grad Phi = -amp t e^(-t^2/2) w and D2 Phi = amp (t^2-1) e^(-t^2/2) w w^T,
    so C = c0, C1 = C3 = amp |w|^2 and <grad Phi(x'), x'> = -amp t^2 e^(-t^2/2)
    <= 0, giving C2 = 0.
    """
    w = np.asarray(weights, dtype=float)
    wn2 = float(w @ w)
    if c0 - 2.0 * amp * wn2 < 0:
        raise ValueError("constants violate C - C1 - C2 - C3 >= 0")

    def phi(xp):
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        t = xp @ w
        return c0 + amp * np.exp(-0.5 * t * t)

    def phi_grad(xp):
        t = float(np.asarray(xp, dtype=float) @ w)
        return -amp * t * math.exp(-0.5 * t * t) * w

    def phi_hess(xp):
        t = float(np.asarray(xp, dtype=float) @ w)
        return amp * (t * t - 1.0) * math.exp(-0.5 * t * t) * np.outer(w, w)

    return EpigraphSpec(phi, phi_grad, phi_hess, C=c0, C1=amp * wn2, C2=0.0,
                        C3=amp * wn2, name=f"gauss_ridge(c0={c0},A={amp})")


def epigraph_spec_from_dict(d: dict) -> EpigraphSpec:
    kind = d.get("kind")
    if kind == "constant":
        return constant_epigraph(float(d["C"]))
    if kind == "gauss_ridge":
        return gauss_ridge_epigraph(float(d["c0"]), float(d["amp"]), d["weights"])
    raise ValueError(f"unsupported epigraph kind {kind!r}")


def load_epigraph_spec(path) -> EpigraphSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return epigraph_spec_from_dict(json.load(fh))


def epigraph_domain(spec: EpigraphSpec, m: int) -> LevelSetDomain:
    from .domains import epigraph as _epigraph

    if m < 2:
        raise ValueError("epigraph domains need m >= 2")
    return _epigraph(m, spec.phi, spec.phi_grad, spec.phi_hess,
                     grad_floor=0.5, name=spec.name)


@dataclass
class EpigraphAudit:
    constants_ok: bool
    constant_failures: list[str]
    min_h_gamma: float
    min_bound_slack: float
    n_samples: int
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.constants_ok
            and self.min_h_gamma >= -self.tol
            and self.min_bound_slack >= -self.tol
        )


def epigraph_curvature_audit(
    spec: EpigraphSpec,
    m: int,
    n_samples: int,
    seed: int,
    tol: float = 1e-6,
) -> EpigraphAudit:
    """Validate the declared constants on samples, then audit the boundary."""
    if spec.margin() < 0:
        return EpigraphAudit(False, ["margin"], math.nan, math.nan, 0, tol)
    rng = np.random.default_rng(seed)
    failures = []
    samples = rng.standard_normal((max(n_samples, 8), m - 1))
    phi_vals = np.asarray(spec.phi(samples))
    if np.any(phi_vals < spec.C - tol):
        failures.append("phi_floor")
    for row in samples[: min(64, samples.shape[0])]:
        hess = np.asarray(spec.phi_hess(row))
        grad = np.asarray(spec.phi_grad(row))
        if np.linalg.norm(hess, "fro") > spec.C1 + tol:
            failures.append("hessian_frobenius")
            break
        if float(grad @ row) > spec.C2 + tol:
            failures.append("radial_gradient")
            break
        if np.linalg.norm(hess, 2) > spec.C3 + tol:
            failures.append("hessian_operator")
            break
    if failures:
        return EpigraphAudit(False, failures, math.nan, math.nan, 0, tol)

    dom = epigraph_domain(spec, m)
    margin = spec.margin()
    h_gammas = np.empty(n_samples)
    slacks = np.empty(n_samples)
    for i in range(n_samples):
        bp = project_to_boundary(dom, rng.standard_normal(m))
        hg = gaussian_curvature(dom, bp.x)
        gnorm = float(np.linalg.norm(dom.gradient(bp.x)))
        h_gammas[i] = hg
        slacks[i] = hg - margin / gnorm
    return EpigraphAudit(True, [], float(np.min(h_gammas)), float(np.min(slacks)),
                         n_samples, tol)


# ---------------------------------------------------------------------------
# cylindrical-approximation convergence study


@dataclass
class ConvergenceRow:
    n: int
    d_l2: float
    d_grad: float
    residual_lo: float
    residual_hi: float

    def finite(self) -> bool:
        return math.isfinite(self.d_l2) and math.isfinite(self.d_grad)


def resolvent_convergence_study(
    spec: FunctionalSpec,
    sigma: float,
    dims=(1, 2),
    bump_center: float = 3.2,
    bump_radius: float = 1.0,
    box: float = 6.0,
    h: float = 0.15,
    gh_nodes: int = 20,
    solver_tol: float = 1e-9,
    domain_for: Callable | None = None,
) -> list[ConvergenceRow]:
    """Consecutive-truncation Cauchy differences of the Dirichlet resolvent.

    For each n the resolvent is solved on the truncated domain in R^n with
    the fixed right-hand side y(xi) = bump(xi_1) (cylindrical over the
    first coordinate, so its truncations all coincide) on a common box and
    spacing, then u_n, extended cylindrically, is compared with u_{n+1} on
    a shared Gauss-Hermite tensor rule in n+1 variables:

        D_n      = || u_n - u_{n+1} ||_L2(gamma),
        D_n,grad = || grad u_n - grad u_{n+1} ||_L2(gamma).

    No rate is asserted anywhere; the rows are the raw observables.
    ``domain_for(n)`` overrides the per-truncation domain (used to probe
    genuinely first-coordinate-cylindrical families, whose differences
    vanish to solver tolerance).
    """
    dims = sorted(set(int(n) for n in dims))
    if min(dims) < 1 or max(dims) > 3:
        raise ValueError("dims must be within {1, 2, 3}")
    needed = sorted(set(dims) | {n + 1 for n in dims})
    bump = BumpFunction(np.array([bump_center]), bump_radius, label="axis1-bump")

    solutions: dict[int, dict] = {}
    for n in needed:
        if domain_for is not None:
            dom = domain_for(n)
        else:
            dom = cylindrical_domain(spec, KLBasis.build(spec.kind, n))
        grid = GaussianGrid.build(dom, -box, box, h, dim=n)
        if grid.n_interior == 0:
            raise RuntimeError(f"truncated domain at n={n} misses the grid box")
        rhs = ScalarField.from_callable(grid, lambda pts: bump(pts[:, :1]))
        sol = solve_resolvent(ResolventJob(grid, sigma, rhs), tol=solver_tol)
        if not sol.converged:
            raise RuntimeError(
                f"resolvent solve did not converge at n={n}: residual {sol.residual:.3e}"
            )
        grad = discrete_gradient(sol.u)
        solutions[n] = {
            "grid": grid,
            "u": grid.interpolator(sol.u.values),
            "grad": [grid.interpolator(grad[..., a]) for a in range(n)],
            "residual": sol.residual,
        }

    rows: list[ConvergenceRow] = []
    for n in dims:
        lo, hi = solutions[n], solutions[n + 1]
        rule = gauss_hermite_rule(n + 1, gh_nodes)
        pts = rule.nodes
        u_lo = lo["u"](pts[:, :n])
        u_hi = hi["u"](pts)
        d_l2 = math.sqrt(float(np.sum(rule.weights * (u_lo - u_hi) ** 2)))
        acc = np.zeros(pts.shape[0])
        for a in range(n + 1):
            g_lo = lo["grad"][a](pts[:, :n]) if a < n else 0.0
            g_hi = hi["grad"][a](pts)
            acc += (g_lo - g_hi) ** 2
        d_grad = math.sqrt(float(np.sum(rule.weights * acc)))
        rows.append(ConvergenceRow(n, d_l2, d_grad, lo["residual"], hi["residual"]))
    return rows
