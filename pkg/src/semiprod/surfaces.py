"""Fundamental forms and mean curvature of parametric surfaces.

Includes the flow-invariant elliptical cylinders: tubes obtained by
sweeping a homothetic ellipse in the z = 0 leaf through the left
translations along the z-axis.  Their boundary mean curvature has a closed
form whose r^6-leading coefficient is controlled by a trigonometric
expression; choosing the ellipse aspect ratio to keep that expression
positive makes the tube strictly mean convex for all large radii.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import GroupSpec, exp_zA, nonunimodular_spec
from .metric import christoffel_at, metric_at


class DegenerateImmersion(ValueError):
    """First fundamental form is singular at the requested parameters."""


class SpecMismatch(ValueError):
    """Cylinder parameters and group spec disagree."""


class AlphaOutOfRange(ValueError):
    """Aspect-ratio selection requires alpha in [0, 1)."""


class NotFoundWithinRange(RuntimeError):
    """No radius in the scanned grid certifies mean convexity."""


class ParamSurface:
    """Twice-differentiable immersion patch (t, s) -> R^3.

    ``phi`` maps parameters to a coordinate point.  Derivative evaluators
    may be supplied analytically (``first=(d_t, d_s)``,
    ``second=(d_tt, d_ts, d_ss)``); otherwise they fall back to central
    finite differences of ``phi`` (step 1e-5 for first derivatives,
    fourth-order stencils with step 1e-3 for second derivatives, which
    keeps roundoff well below truncation at coordinate scales up to ~1e2).
    """

    def __init__(self, phi, rect=((0.0, 1.0), (0.0, 1.0)), first=None, second=None,
                 fd_step: float = 1e-5, fd_step2: float = 1e-3):
        self.phi = phi
        self.rect = rect
        self._first = first
        self._second = second
        self.h1 = fd_step
        self.h2 = fd_step2

    def value(self, t, s):
        return np.asarray(self.phi(t, s), dtype=float)

    def d_t(self, t, s):
        if self._first is not None:
            return np.asarray(self._first[0](t, s), dtype=float)
        h = self.h1
        return (self.value(t + h, s) - self.value(t - h, s)) / (2.0 * h)

    def d_s(self, t, s):
        if self._first is not None:
            return np.asarray(self._first[1](t, s), dtype=float)
        h = self.h1
        return (self.value(t, s + h) - self.value(t, s - h)) / (2.0 * h)

    def _d1_wide(self, t, s, axis):
        # 4th-order first derivative, used inside the mixed stencil.
        h = self.h2
        if axis == 0:
            f = lambda dt: self.value(t + dt, s)
        else:
            f = lambda ds: self.value(t, s + ds)
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12.0 * h)

    def d_tt(self, t, s):
        if self._second is not None:
            return np.asarray(self._second[0](t, s), dtype=float)
        h = self.h2
        f = lambda dt: self.value(t + dt, s)
        return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12.0 * h * h)

    def d_ts(self, t, s):
        if self._second is not None:
            return np.asarray(self._second[1](t, s), dtype=float)
        h = self.h2
        g = lambda ds: self._d1_wide(t, s + ds, axis=0)
        return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12.0 * h)

    def d_ss(self, t, s):
        if self._second is not None:
            return np.asarray(self._second[2](t, s), dtype=float)
        h = self.h2
        f = lambda ds: self.value(t, s + ds)
        return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12.0 * h * h)


def _unit_normal(g: np.ndarray, pt_dir: np.ndarray, ps_dir: np.ndarray) -> np.ndarray:
    """Metric-unit normal oriented like the parameter cross product."""
    vol = np.sqrt(np.linalg.det(g))
    cov = vol * np.cross(pt_dir, ps_dir)  # interior product of the volume form
    n = np.linalg.solve(g, cov)
    norm = np.sqrt(n @ g @ n)
    if norm < 1e-30:
        raise DegenerateImmersion("parameter derivatives are dependent")
    return n / norm


def fundamental_forms(spec: GroupSpec, surface: ParamSurface, t: float, s: float):
    """First and second fundamental form coefficients and the unit normal.

    Returns (E, F, G, e, f, g, N).  Second-form entries use covariant
    derivatives of the parameter fields assembled from the coordinate
    Christoffel symbols.  Raises :class:`DegenerateImmersion` when
    E*G - F^2 degenerates.
    """
    p = surface.value(t, s)
    met = metric_at(spec, p)
    pt = surface.d_t(t, s)
    ps = surface.d_s(t, s)
    ee = float(pt @ met @ pt)
    ff = float(pt @ met @ ps)
    gg = float(ps @ met @ ps)
    disc = ee * gg - ff * ff
    if disc <= 1e-14 * max(ee * gg, 1.0):
        raise DegenerateImmersion(f"EG - F^2 = {disc} at (t, s) = ({t}, {s})")
    gamma = christoffel_at(spec, p)
    nvec = _unit_normal(met, pt, ps)
    cov_tt = surface.d_tt(t, s) + np.einsum("kij,i,j->k", gamma, pt, pt)
    cov_ts = surface.d_ts(t, s) + np.einsum("kij,i,j->k", gamma, pt, ps)
    cov_ss = surface.d_ss(t, s) + np.einsum("kij,i,j->k", gamma, ps, ps)
    gn = met @ nvec
    return ee, ff, gg, float(gn @ cov_tt), float(gn @ cov_ts), float(gn @ cov_ss), nvec


def mean_curvature(spec: GroupSpec, surface: ParamSurface, t: float, s: float) -> float:
    """Mean curvature with respect to the parameter-oriented unit normal."""
    ee, ff, gg, e2, f2, g2, _ = fundamental_forms(spec, surface, t, s)
    return (e2 * gg - 2.0 * f2 * ff + g2 * ee) / (2.0 * (ee * gg - ff * ff))


@dataclass(frozen=True)
class EllipticalCylinder:
    """Flow-invariant tube over the ellipse x^2 + y^2/mu^2 = r^2 at z = 0.

    The generating curve is (r cos t, r mu sin t, 0), swept by the
    left translations along the z-axis.
    """

    alpha: float
    beta: float
    mu: float
    r: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise AlphaOutOfRange(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.beta < 0.0 or self.mu <= 0.0 or self.r <= 0.0:
            raise ValueError("beta >= 0, mu > 0 and r > 0 required")

    def generator(self, t: float) -> np.ndarray:
        return np.array([self.r * np.cos(t), self.r * self.mu * np.sin(t), 0.0])

    def contains(self, spec: GroupSpec, p) -> bool:
        """Point test: slide p back to the z = 0 leaf along the flow and
        check the ellipse inequality."""
        p = np.asarray(p, dtype=float)
        xy = exp_zA(spec, -p[2]) @ p[:2]
        return xy[0] ** 2 + (xy[1] / self.mu) ** 2 <= self.r ** 2 * (1.0 + 1e-12)


def choose_mu(alpha: float, beta: float) -> float:
    """Aspect ratio making the tube eventually mean convex.

    For beta > 0 the square of the ratio maximizes
    4(1-alpha^2) L - beta^2 [1+alpha-(1-alpha) L]^2, giving
    L = (1+alpha)/(1-alpha) (1 + 2/beta^2); a round tube works for
    beta = 0.  The returned value always satisfies
    :func:`check_property_r`.
    """
    if not (0.0 <= alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie in [0, 1), got {alpha}")
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if beta == 0.0:
        return 1.0
    lam0 = (1.0 + alpha) / (1.0 - alpha) * (1.0 + 2.0 / beta ** 2)
    return float(np.sqrt(lam0))


def rho(alpha: float, beta: float, mu: float, t) -> float | np.ndarray:
    """Angular profile whose cube controls the r^6 term of the tube's mean
    curvature: 2 mu + 2 alpha mu cos 2t + beta (1+alpha-(1-alpha) mu^2) sin 2t."""
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    t = np.asarray(t, dtype=float)
    val = 2.0 * mu + 2.0 * alpha * mu * np.cos(2.0 * t) \
        + beta * (1.0 + alpha - (1.0 - alpha) * mu ** 2) * np.sin(2.0 * t)
    return float(val) if val.ndim == 0 else val


def check_property_r(alpha: float, beta: float, mu: float) -> bool:
    """Strict positivity margin for the angular profile:
    4 mu^2 > 4 alpha^2 mu^2 + beta^2 (1+alpha-(1-alpha) mu^2)^2."""
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    u_sq = 4.0 * alpha ** 2 * mu ** 2 \
        + beta ** 2 * (1.0 + alpha - (1.0 - alpha) * mu ** 2) ** 2
    return 4.0 * mu ** 2 > u_sq


# Backwards-friendly alias matching the R-naming used in reports.
check_property_R = check_property_r


def _cyl_pieces(cyl: EllipticalCylinder, t):
    """Frame components of the generator jet and the flow field along it."""
    alpha, beta, mu, r = cyl.alpha, cyl.beta, cyl.mu, cyl.r
    t = np.asarray(t, dtype=float)
    x = r * np.cos(t)
    y = r * mu * np.sin(t)
    xp = -r * np.sin(t)
    yp = r * mu * np.cos(t)
    xpp = -x
    ypp = -y
    delta = (1.0 + alpha) * x - (1.0 - alpha) * beta * y
    eps = (1.0 + alpha) * beta * x + (1.0 - alpha) * y
    deltap = (1.0 + alpha) * xp - (1.0 - alpha) * beta * yp
    epsp = (1.0 + alpha) * beta * xp + (1.0 - alpha) * yp
    return x, y, xp, yp, xpp, ypp, delta, eps, deltap, epsp


def cylinder_mean_curvature(spec: GroupSpec, cyl: EllipticalCylinder, t):
    """Mean curvature of the tube boundary at generator parameter t, with
    respect to the outward unit normal (closed-form pipeline).

    Everything is evaluated on the z = 0 leaf where the frame and the
    coordinate basis agree; the flow-invariance of the tube extends the
    value to all heights.  The last second-form coefficient uses the
    Killing property of the flow field, g = -<flow, grad of its squared
    norm along the normal>/2.
    """
    if spec.unimodular or spec.alpha != cyl.alpha or spec.beta != cyl.beta:
        raise SpecMismatch("spec must be the non-unimodular pair of the cylinder")
    alpha, beta = cyl.alpha, cyl.beta
    x, y, xp, yp, xpp, ypp, delta, eps, deltap, epsp = _cyl_pieces(cyl, t)

    ee = xp ** 2 + yp ** 2
    ff = delta * xp + eps * yp
    gg = 1.0 + delta ** 2 + eps ** 2

    n3 = eps * xp - delta * yp          # vertical component of the cross product
    big_delta = np.sqrt(yp ** 2 + xp ** 2 + n3 ** 2)

    # Covariant acceleration of the generator.
    acc3 = (1.0 + alpha) * xp ** 2 + 2.0 * alpha * beta * xp * yp + (1.0 - alpha) * yp ** 2
    e2 = (yp * xpp - xp * ypp + n3 * acc3) / big_delta

    # Mixed covariant derivative of generator and flow directions.
    m1 = deltap - (1.0 + alpha) * xp - alpha * beta * yp
    m2 = epsp - alpha * beta * xp - (1.0 - alpha) * yp
    m3 = delta * ((1.0 + alpha) * xp + alpha * beta * yp) \
        + eps * (alpha * beta * xp + (1.0 - alpha) * yp)
    f2 = (yp * m1 - xp * m2 + n3 * m3) / big_delta

    # Killing identity for the flow-flow coefficient.
    g2 = (-((1.0 + alpha) * yp + (1.0 - alpha) * beta * xp
            - ((1.0 + alpha) * delta - (1.0 - alpha) * beta * eps) * n3) * delta
          - ((1.0 + alpha) * beta * yp - (1.0 - alpha) * xp
             - ((1.0 + alpha) * beta * delta + (1.0 - alpha) * eps) * n3) * eps) / big_delta

    h = (e2 * gg - 2.0 * f2 * ff + g2 * ee) / (2.0 * (ee * gg - ff * ff))
    return float(h) if np.ndim(h) == 0 else h


def cylinder_bracket(spec: GroupSpec, cyl: EllipticalCylinder, t):
    """The combination Delta * (eG - 2fF + gE) whose large-r behavior is
    -(r^6/4) rho(t)^3; exposed for the dominance diagnostics."""
    x, y, xp, yp, xpp, ypp, delta, eps, deltap, epsp = _cyl_pieces(cyl, t)
    ee = xp ** 2 + yp ** 2
    ff = delta * xp + eps * yp
    gg = 1.0 + delta ** 2 + eps ** 2
    h = cylinder_mean_curvature(spec, cyl, t)
    big_delta = np.sqrt(yp ** 2 + xp ** 2 + (eps * xp - delta * yp) ** 2)
    return big_delta * 2.0 * (ee * gg - ff * ff) * h


def cylinder_surface(spec: GroupSpec, cyl: EllipticalCylinder) -> ParamSurface:
    """Evaluator-only parametrization (t, s) -> flow_s(generator(t)).

    Derivatives are left to finite differences so the generic
    :func:`mean_curvature` route stays independent of the closed-form
    pipeline.
    """
    if spec.unimodular or spec.alpha != cyl.alpha or spec.beta != cyl.beta:
        raise SpecMismatch("spec must be the non-unimodular pair of the cylinder")

    def phi(t, s):
        xy = exp_zA(spec, s) @ cyl.generator(t)[:2]
        return np.array([xy[0], xy[1], s])

    return ParamSurface(phi, rect=((0.0, 2.0 * np.pi), (-1.0, 1.0)))


@dataclass
class ConvexityCertificate:
    """Sign-scan record: tested radii, the max of the boundary mean
    curvature over the angle grid for each, and the certified onset."""

    r0: float
    radii: np.ndarray
    max_h: np.ndarray

    def rows(self):
        return [(float(r), float(h)) for r, h in zip(self.radii, self.max_h)]


def find_r0(spec: GroupSpec, alpha: float, beta: float, mu: float, radii,
            n_angles: int = 256) -> ConvexityCertificate:
    """Smallest grid radius past which the tube stays strictly mean convex.

    Scans max over ``n_angles`` generator parameters of the boundary mean
    curvature for each radius in the increasing grid ``radii`` and returns
    the smallest grid value from which every larger tested radius has a
    negative max.  Raises :class:`NotFoundWithinRange` if the largest
    radius still fails.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 1 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a nonempty increasing grid")
    ts = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    max_h = np.empty(radii.size)
    for i, r in enumerate(radii):
        cyl = EllipticalCylinder(alpha=alpha, beta=beta, mu=mu, r=float(r))
        max_h[i] = np.max(cylinder_mean_curvature(spec, cyl, ts))
    good = max_h < 0.0
    if not good[-1]:
        raise NotFoundWithinRange(
            f"max mean curvature still {max_h[-1]:.3e} at r = {radii[-1]}"
        )
    idx = radii.size - 1
    while idx > 0 and good[idx - 1]:
        idx -= 1
    return ConvexityCertificate(r0=float(radii[idx]), radii=radii, max_h=max_h)
