"""Level-set domains O = {G < 0} and their boundary curvature functionals.

A domain is described by a scalar function G on R^d together with its
gradient and Hessian (analytic when available, central-difference
fallbacks otherwise).  At a boundary point x with outer normal
nu = grad G / |grad G| the two curvature quantities used everywhere in
this package are

    mean curvature    H(x)      = lap G / |grad G|
                                  - <D2G grad G, grad G> / |grad G|^3
    Gaussian version  Hgamma(x) = H(x) - <x, nu(x)>

H is the unnormalized sum of principal curvatures of the level set
(the geometric mean curvature is H / (d-1), exposed separately).  In
d = 1 the two terms of H cancel identically, so Hgamma(x) = -x * nu.
Nonnegativity of Hgamma over the boundary is the standing hypothesis for
the gradient-contractivity checks in :mod:`oucontract.contract`.

C^{2,alpha} smoothness of G cannot be probed numerically and is assumed
of the input; the scans here only verify nondegeneracy of the gradient
(|grad G| >= grad_floor near the boundary).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

_EPS = np.finfo(float).eps
_FD_GRAD_STEP = math.sqrt(_EPS)
_FD_HESS_STEP = _EPS ** (1.0 / 3.0)


class DegenerateLevelSetError(ValueError):
    pass


class ProjectionError(RuntimeError):
    pass


def _fd_gradient(g: Callable, x: np.ndarray) -> np.ndarray:
    h = _FD_GRAD_STEP * (1.0 + float(np.linalg.norm(x)))
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (g(x + e) - g(x - e)) / (2.0 * h)
    return grad


def _fd_hessian(g: Callable, x: np.ndarray) -> np.ndarray:
    h = _FD_HESS_STEP * (1.0 + float(np.linalg.norm(x)))
    d = x.size
    hess = np.empty((d, d))
    g0 = g(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        hess[i, i] = (g(x + ei) - 2.0 * g0 + g(x - ei)) / (h * h)
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            cross = (
                g(x + ei + ej) - g(x + ei - ej) - g(x - ei + ej) + g(x - ei - ej)
            ) / (4.0 * h * h)
            hess[i, j] = cross
            hess[j, i] = cross
    return hess


@dataclass
class LevelSetDomain:
    """O = {x : G(x) < 0} with evaluators for G, grad G and D2 G.

    ``g`` must accept batches of shape (n, dim) and return shape (n,);
    single points of shape (dim,) are also accepted.  ``grad`` and
    ``hess`` take single points; when omitted they fall back to central
    differences with steps sqrt(eps)*(1+|x|) and cbrt(eps)*(1+|x|).
    ``grad_floor`` is the declared lower bound on |grad G| near the
    boundary; curvature evaluation refuses to divide by less.
    """

    dim: int
    g: Callable
    grad: Callable | None = None
    hess: Callable | None = None
    grad_floor: float = 1e-8
    name: str = "custom"

    def value(self, x) -> np.ndarray | float:
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 1:
            return float(np.asarray(self.g(arr.reshape(1, -1))).reshape(-1)[0])
        return np.asarray(self.g(arr), dtype=float)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return _fd_gradient(lambda p: self.value(p), x)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        return _fd_hessian(lambda p: self.value(p), x)

    def contains(self, x) -> bool:
        return self.value(np.asarray(x, dtype=float)) < 0.0


@dataclass(frozen=True)
class BoundaryPoint:
    """A point with |G| <= tol_bd and its unit outer normal."""

    x: np.ndarray
    nu: np.ndarray
    g_value: float


def default_boundary_tol(dom: LevelSetDomain, x0) -> float:
    return 1e-10 * (1.0 + abs(dom.value(np.asarray(x0, dtype=float))))


def outer_normal(dom: LevelSetDomain, x) -> np.ndarray:
    grad = dom.gradient(x)
    norm = float(np.linalg.norm(grad))
    if norm < dom.grad_floor:
        raise DegenerateLevelSetError(f"degenerate level set at {np.asarray(x)}")
    return grad / norm


def mean_curvature(dom: LevelSetDomain, x) -> float:
    """H = lap G/|grad G| - <D2G grad G, grad G>/|grad G|^3 at a boundary point."""
    x = np.asarray(x, dtype=float)
    grad = dom.gradient(x)
    norm = float(np.linalg.norm(grad))
    if norm < dom.grad_floor:
        raise DegenerateLevelSetError(f"degenerate level set at {x}")
    hess = dom.hessian(x)
    lap = float(np.trace(hess))
    quad = float(grad @ hess @ grad)
    return lap / norm - quad / norm**3


def geometric_mean_curvature(dom: LevelSetDomain, x) -> float:
    """The normalized version H/(d-1); undefined in d = 1."""
    if dom.dim < 2:
        raise ValueError("geometric normalization needs dim >= 2")
    return mean_curvature(dom, x) / (dom.dim - 1)


def gaussian_curvature(dom: LevelSetDomain, x) -> float:
    """Hgamma = H - <x, nu> at a boundary point."""
    x = np.asarray(x, dtype=float)
    nu = outer_normal(dom, x)
    return mean_curvature(dom, x) - float(x @ nu)


def project_to_boundary(
    dom: LevelSetDomain,
    x0,
    tol_bd: float | None = None,
    max_iter: int = 100,
) -> BoundaryPoint:
    """Move x0 along the gradient ray until |G| <= tol_bd.

    A sign change is located by linear marching along the ray
    x0 + t * u, u = grad G(x0)/|grad G(x0)|, then refined by bisection
    with Newton polish.  Fails if no sign change is found.
    """
    x0 = np.asarray(x0, dtype=float)
    if tol_bd is None:
        tol_bd = default_boundary_tol(dom, x0)
    g0 = dom.value(x0)
    grad0 = dom.gradient(x0)
    gnorm = float(np.linalg.norm(grad0))
    # grad_floor is a statement about the boundary; away from it we only
    # need a usable search direction
    if gnorm < 1e-12:
        raise DegenerateLevelSetError(f"degenerate level set at {x0}")
    u = grad0 / gnorm
    if abs(g0) <= tol_bd:
        return BoundaryPoint(x0.copy(), outer_normal(dom, x0), g0)

    def line(t: float) -> float:
        return dom.value(x0 + t * u)

    # G increases along its own gradient, so march up-ray if inside, down if
    # outside.  Linear marching (not doubling) so a bounded domain lying
    # across the ray cannot be jumped over.
    direction = 1.0 if g0 < 0.0 else -1.0
    step = 0.125 * (1.0 + float(np.linalg.norm(x0)))
    t_lo, g_lo = 0.0, g0
    t_hi = None
    for k in range(1, 161):
        t = direction * step * k
        gt = line(t)
        if gt == 0.0 or (gt > 0.0) != (g_lo > 0.0):
            t_hi, g_hi = t, gt
            break
        t_lo, g_lo = t, gt
    if t_hi is None:
        raise ProjectionError("no boundary along search direction")

    for _ in range(max_iter):
        t_mid = 0.5 * (t_lo + t_hi)
        g_mid = line(t_mid)
        if abs(g_mid) <= tol_bd:
            t_lo = t_hi = t_mid
            break
        if (g_mid > 0.0) == (g_hi > 0.0):
            t_hi, g_hi = t_mid, g_mid
        else:
            t_lo, g_lo = t_mid, g_mid
    t_best = 0.5 * (t_lo + t_hi)
    x = x0 + t_best * u
    # Newton polish along the ray, bisection has already localized the root;
    # push well below tol_bd so downstream identities are not tolerance bound
    for _ in range(8):
        gx = dom.value(x)
        if abs(gx) <= 1e-3 * tol_bd:
            break
        slope = float(dom.gradient(x) @ u)
        if abs(slope) < dom.grad_floor:
            break
        x = x - (gx / slope) * u
    gx = dom.value(x)
    if abs(gx) > tol_bd:
        raise ProjectionError(
            f"projection stalled at |G| = {abs(gx):.3e} > tol_bd = {tol_bd:.3e}"
        )
    return BoundaryPoint(x, outer_normal(dom, x), gx)


@dataclass
class CurvatureScan:
    """Result of sampling Hgamma over the boundary."""

    min_value: float
    argmin: np.ndarray
    n_violations: int
    n_samples: int
    values: np.ndarray = field(repr=False)

    @property
    def nonnegative(self) -> bool:
        return self.n_violations == 0


def curvature_sign_scan(
    dom: LevelSetDomain,
    n_samples: int,
    seed: int,
    tol: float = 0.0,
) -> CurvatureScan:
    """Project Gaussian draws to the boundary and record min Hgamma.

    A sample counts as a violation when Hgamma < -tol.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    values = np.empty(n_samples)
    points = np.empty((n_samples, dom.dim))
    for i in range(n_samples):
        bp = project_to_boundary(dom, rng.standard_normal(dom.dim))
        values[i] = gaussian_curvature(dom, bp.x)
        points[i] = bp.x
    k = int(np.argmin(values))
    return CurvatureScan(
        min_value=float(values[k]),
        argmin=points[k],
        n_violations=int(np.sum(values < -tol)),
        n_samples=n_samples,
        values=values,
    )


# ---------------------------------------------------------------------------
# domain library


def halfspace(dim: int, offset: float, axis: int = 0) -> LevelSetDomain:
    """O = {x_axis < -offset}, level function G = x_axis + offset."""

    def g(x):
        x = np.asarray(x, dtype=float)
        return x[..., axis] + offset

    def grad(x):
        e = np.zeros(dim)
        e[axis] = 1.0
        return e

    def hess(x):
        return np.zeros((dim, dim))

    return LevelSetDomain(dim, g, grad, hess, grad_floor=0.5,
                          name=f"halfspace(offset={offset})")


def ball(dim: int, radius: float, center=None) -> LevelSetDomain:
    """O = {|x - c| < R}, level function G = |x - c|^2 - R^2."""
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.sum((x - c) ** 2, axis=-1) - radius**2

    def grad(x):
        return 2.0 * (np.asarray(x, dtype=float) - c)

    def hess(x):
        return 2.0 * np.eye(dim)

    return LevelSetDomain(dim, g, grad, hess, grad_floor=min(1.0, radius),
                          name=f"ball(R={radius})")


def ellipsoid(semi_axes) -> LevelSetDomain:
    """O = {sum (x_i/a_i)^2 < 1}."""
    a = np.asarray(semi_axes, dtype=float)
    dim = a.size
    inv2 = 1.0 / a**2

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x * inv2, axis=-1) - 1.0

    def grad(x):
        return 2.0 * np.asarray(x, dtype=float) * inv2

    def hess(x):
        return 2.0 * np.diag(inv2)

    return LevelSetDomain(dim, g, grad, hess, grad_floor=min(1.0, float(np.min(1.0 / a))),
                          name=f"ellipsoid({list(a)})")


def epigraph(dim: int, phi, phi_grad, phi_hess, grad_floor: float = 0.5,
             name: str = "epigraph") -> LevelSetDomain:
    """O = {x_1 < -phi(x_2, ..., x_d)}, level function G = x_1 + phi.

    phi takes the trailing d-1 coordinates, batched (n, d-1) -> (n,);
    phi_grad and phi_hess take a single (d-1,) point.
    """

    def g(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] + np.asarray(phi(x[..., 1:]))

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(dim)
        out[0] = 1.0
        out[1:] = np.asarray(phi_grad(x[1:]), dtype=float)
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros((dim, dim))
        out[1:, 1:] = np.asarray(phi_hess(x[1:]), dtype=float)
        return out

    return LevelSetDomain(dim, g, grad, hess, grad_floor=grad_floor, name=name)


def polynomial_domain(dim: int, terms) -> LevelSetDomain:
    """G given by a coefficient table [(coeff, powers), ...].

    ``powers`` is a length-dim tuple of nonnegative integer exponents;
    gradient and Hessian are the exact term-by-term derivatives.
    """
    coeffs = np.array([float(t[0]) for t in terms])
    powers = np.array([list(map(int, t[1])) for t in terms], dtype=int)
    if powers.shape[1] != dim:
        raise ValueError("each powers tuple must have length dim")

    def g(x):
        x = np.asarray(x, dtype=float)
        batch = x.reshape(-1, dim)
        vals = np.zeros(batch.shape[0])
        for c, pw in zip(coeffs, powers):
            term = np.full(batch.shape[0], c)
            for i in range(dim):
                if pw[i]:
                    term = term * batch[:, i] ** pw[i]
            vals += term
        return vals.reshape(x.shape[:-1])

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(dim)
        for c, pw in zip(coeffs, powers):
            for i in range(dim):
                if pw[i] == 0:
                    continue
                term = c * pw[i]
                for jj in range(dim):
                    e = pw[jj] - (1 if jj == i else 0)
                    if e:
                        term = term * x[jj] ** e
                out[i] += term
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros((dim, dim))
        for c, pw in zip(coeffs, powers):
            for i in range(dim):
                for j in range(dim):
                    pij = list(pw)
                    fac = c * pij[i]
                    pij[i] -= 1
                    if pij[i] < 0:
                        continue
                    fac *= pij[j]
                    pij[j] -= 1
                    if pij[j] < 0 or fac == 0:
                        continue
                    term = fac
                    for jj in range(dim):
                        if pij[jj]:
                            term = term * x[jj] ** pij[jj]
                    out[i, j] += term
        return out

    return LevelSetDomain(dim, g, grad, hess, name="polynomial")


def rotated(dom: LevelSetDomain, rot: np.ndarray) -> LevelSetDomain:
    """The image R(O) of a domain under an orthogonal matrix."""
    rot = np.asarray(rot, dtype=float)
    rt = rot.T

    def g(x):
        x = np.asarray(x, dtype=float)
        return dom.value(x @ rot)  # row-vector convention: R^T x per row

    def grad(x):
        return rot @ dom.gradient(rt @ np.asarray(x, dtype=float))

    def hess(x):
        return rot @ dom.hessian(rt @ np.asarray(x, dtype=float)) @ rt

    return LevelSetDomain(dom.dim, g, grad, hess, grad_floor=dom.grad_floor,
                          name=f"rotated({dom.name})")


def domain_from_spec(spec: dict) -> LevelSetDomain:
    """Build a library domain from a parsed {type, dim, parameters} record."""
    kind = spec.get("type")
    dim = int(spec.get("dim", 0))
    params = spec.get("parameters", {})
    if kind == "halfspace":
        return halfspace(dim, float(params["offset"]), int(params.get("axis", 0)))
    if kind == "ball":
        return ball(dim, float(params["radius"]), params.get("center"))
    if kind == "ellipsoid":
        return ellipsoid(params["semi_axes"])
    if kind == "polynomial":
        terms = [(t["coeff"], t["powers"]) for t in params["terms"]]
        return polynomial_domain(dim, terms)
    raise ValueError(f"unknown domain type {kind!r}")


def load_domain(path) -> LevelSetDomain:
    with open(path, "r", encoding="utf-8") as fh:
        return domain_from_spec(json.load(fh))
