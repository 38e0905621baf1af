"""Canonical left-invariant metric: tensor, connection, lengths, geodesics.

In coordinates the metric depends on z only; with w(z) = exp(-z*A) the
horizontal block is w(z)^T w(z) and the vertical direction is unit and
orthogonal to the horizontal plane.  That structure is used throughout:
Christoffel symbols reduce to the z-derivative of the horizontal block,
vertical lines are geodesics, and horizontal leaves are flat with area
element exp(-trace(A) z) dx dy.
"""

from __future__ import annotations

import numpy as np

from .group import GroupSpec, exp_zA, exp_zA_many, _cd_sd


class StepTooLarge(RuntimeError):
    """Geodesic integration drifted beyond the diagnostic energy budget."""


class DNotLessThanOne(ValueError):
    """Eigen-field decay rates need two distinct real eigenvalues (det < 1)."""


def metric_block(spec: GroupSpec, z: float) -> np.ndarray:
    """2x2 horizontal metric block at height z."""
    w = exp_zA(spec, -z)
    return w.T @ w


def metric_block_many(spec: GroupSpec, zs) -> np.ndarray:
    """Horizontal blocks for an array of heights, shape (..., 2, 2)."""
    w = exp_zA_many(spec, -np.asarray(zs, dtype=float))
    return np.einsum("...ji,...jk->...ik", w, w)


def dmetric_block(spec: GroupSpec, z: float) -> np.ndarray:
    """d/dz of the horizontal block: -w^T (A + A^T) w with w = exp(-z*A)."""
    w = exp_zA(spec, -z)
    sym = spec.matrix + spec.matrix.T
    return -(w.T @ sym @ w)


def dmetric_block_many(spec: GroupSpec, zs) -> np.ndarray:
    w = exp_zA_many(spec, -np.asarray(zs, dtype=float))
    sym = spec.matrix + spec.matrix.T
    return -np.einsum("...ji,jk,...kl->...il", w, sym, w)


def metric_at(spec: GroupSpec, p) -> np.ndarray:
    """Full 3x3 coordinate metric at the point p."""
    z = np.asarray(p, dtype=float)[2]
    g = np.eye(3)
    g[:2, :2] = metric_block(spec, z)
    return g


def connection_frame(spec: GroupSpec) -> np.ndarray:
    """Frame connection table T[i, j, k]: the covariant derivative of the
    j-th left-invariant frame field along the i-th one has k-th frame
    component T[i, j, k].  Constant over the group."""
    a, b, c, d = spec.a, spec.b, spec.c, spec.d
    half_sum = 0.5 * (b + c)
    half_diff = 0.5 * (c - b)
    t = np.zeros((3, 3, 3))
    t[0, 0, 2] = a
    t[0, 1, 2] = half_sum
    t[0, 2, 0] = -a
    t[0, 2, 1] = -half_sum
    t[1, 0, 2] = half_sum
    t[1, 1, 2] = d
    t[1, 2, 0] = -half_sum
    t[1, 2, 1] = -d
    t[2, 0, 1] = half_diff
    t[2, 1, 0] = -half_diff
    return t


def christoffel_at(spec: GroupSpec, p) -> np.ndarray:
    """Coordinate Christoffel symbols gamma[k, i, j] at p.

    Only horizontal derivatives of the metric vanish, so the nonzero
    entries are gamma[z, h, k] = -g_hk'/2 and
    gamma[h, k, z] = (g^{-1} g')_hk / 2.
    """
    z = np.asarray(p, dtype=float)[2]
    g2 = metric_block(spec, z)
    dg2 = dmetric_block(spec, z)
    mixed = 0.5 * np.linalg.solve(g2, dg2)
    gamma = np.zeros((3, 3, 3))
    gamma[2, :2, :2] = -0.5 * dg2
    gamma[:2, :2, 2] = mixed
    gamma[:2, 2, :2] = mixed
    return gamma


def path_length(spec: GroupSpec, points) -> float:
    """Length of a piecewise-linear path, metric sampled at segment
    midpoints."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
        raise ValueError("path must be an (n, 3) array with n >= 2")
    delta = pts[1:] - pts[:-1]
    zm = 0.5 * (pts[1:, 2] + pts[:-1, 2])
    g2 = metric_block_many(spec, zm)
    sq = np.einsum("ni,nij,nj->n", delta[:, :2], g2, delta[:, :2]) + delta[:, 2] ** 2
    return float(np.sum(np.sqrt(np.maximum(sq, 0.0))))


def _geodesic_rhs(spec: GroupSpec, state: np.ndarray) -> np.ndarray:
    """RHS of the geodesic system on (position, velocity)."""
    v = state[3:]
    z = state[2]
    g2 = metric_block(spec, z)
    dg2 = dmetric_block(spec, z)
    acc = np.empty(3)
    acc[:2] = -v[2] * np.linalg.solve(g2, dg2 @ v[:2])
    acc[2] = 0.5 * (v[:2] @ dg2 @ v[:2])
    out = np.empty(6)
    out[:3] = v
    out[3:] = acc
    return out


def speed(spec: GroupSpec, p, v) -> float:
    """Metric norm of the vector v at the point p."""
    v = np.asarray(v, dtype=float)
    g2 = metric_block(spec, np.asarray(p, dtype=float)[2])
    return float(np.sqrt(v[:2] @ g2 @ v[:2] + v[2] ** 2))


def geodesic_shoot(spec: GroupSpec, p0, v0, t_total: float, n_steps: int | None = None,
                   full_output: bool = False):
    """Integrate the geodesic with initial point/velocity over [0, t_total].

    Classical fixed-step RK4; default step count max(64, ceil(T/0.01)).
    Returns the (n_steps+1, 3) polyline of points (with velocities when
    ``full_output``).  Raises :class:`StepTooLarge` when the relative speed
    drift exceeds 1e-3, a sign the step is too coarse for the data.
    """
    p0 = np.asarray(p0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if np.allclose(v0, 0.0):
        raise ValueError("initial velocity must be nonzero")
    if n_steps is None:
        n_steps = max(64, int(np.ceil(abs(t_total) / 0.01)))
    if n_steps < 8:
        raise ValueError("n_steps must be at least 8")
    h = t_total / n_steps
    state = np.concatenate([p0, v0])
    points = np.empty((n_steps + 1, 3))
    vels = np.empty((n_steps + 1, 3))
    points[0], vels[0] = p0, v0
    for i in range(n_steps):
        k1 = _geodesic_rhs(spec, state)
        k2 = _geodesic_rhs(spec, state + 0.5 * h * k1)
        k3 = _geodesic_rhs(spec, state + 0.5 * h * k2)
        k4 = _geodesic_rhs(spec, state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        points[i + 1] = state[:3]
        vels[i + 1] = state[3:]
    s0 = speed(spec, points[0], vels[0])
    s1 = speed(spec, points[-1], vels[-1])
    if abs(s1 - s0) > 1e-3 * max(s0, 1e-30):
        raise StepTooLarge(
            f"speed drift {abs(s1 - s0):.3e} exceeds 1e-3 of initial speed; "
            "increase n_steps"
        )
    if full_output:
        return points, vels
    return points


def _path_energy_grad(spec: GroupSpec, pts: np.ndarray):
    """Discrete energy sum of squared segment lengths and its gradient."""
    delta = pts[1:] - pts[:-1]
    zm = 0.5 * (pts[1:, 2] + pts[:-1, 2])
    g2 = metric_block_many(spec, zm)
    dg2 = dmetric_block_many(spec, zm)
    dxy = delta[:, :2]
    sq = np.einsum("ni,nij,nj->n", dxy, g2, dxy) + delta[:, 2] ** 2
    energy = float(np.sum(sq))
    gxy = 2.0 * np.einsum("nij,nj->ni", g2, dxy)          # d(sq)/d(endpoint xy)
    qz = 0.5 * np.einsum("ni,nij,nj->n", dxy, dg2, dxy)   # metric variation term
    grad = np.zeros_like(pts)
    grad[1:, :2] += gxy
    grad[:-1, :2] -= gxy
    grad[1:, 2] += 2.0 * delta[:, 2] + qz
    grad[:-1, 2] += -2.0 * delta[:, 2] + qz
    return energy, grad


def distance_to_vertical_geodesic(spec: GroupSpec, p, base_xy, budget: int = 5000,
                                  n_nodes: int = 65, grad_tol: float = 1e-8,
                                  full_output: bool = False):
    """Upper bound for the distance from p to the vertical line over base_xy.

    Discrete path descent: start from the straight segment to
    (x0, y0, z_p), minimize the discrete energy over the interior nodes and
    the free endpoint height on the line (gradient descent with Armijo
    backtracking), and return the length of the optimized polyline.  The
    value is an upper bound for the true distance up to the midpoint
    quadrature error of the length integral.  When the iteration budget
    runs out the best value found is returned and flagged via
    ``info["converged"]`` (``full_output=True``).
    """
    p = np.asarray(p, dtype=float)
    x0, y0 = float(base_xy[0]), float(base_xy[1])
    end = np.array([x0, y0, p[2]])
    if np.allclose(p, end):
        info = {"converged": True, "iterations": 0, "path": np.array([p, end])}
        return (0.0, info) if full_output else 0.0

    tau = np.linspace(0.0, 1.0, n_nodes)[:, None]
    pts = (1.0 - tau) * p + tau * end

    free = np.zeros_like(pts, dtype=bool)
    free[1:-1, :] = True
    free[-1, 2] = True  # endpoint slides along the line

    energy, grad = _path_energy_grad(spec, pts)
    step = 1.0
    it = 0
    converged = False
    while it < budget:
        g = np.where(free, grad, 0.0)
        gnorm = np.abs(g).max()
        if gnorm < grad_tol:
            converged = True
            break
        gsq = float(np.sum(g * g))
        step = min(step * 2.0, 1.0 / max(gnorm, 1e-30))
        while True:
            trial = pts - step * g
            e_trial, grad_trial = _path_energy_grad(spec, trial)
            if e_trial <= energy - 1e-4 * step * gsq:
                break
            step *= 0.5
            if step < 1e-18:
                break
        if step < 1e-18:
            converged = True  # stuck at numerical floor; treat as done
            break
        pts, energy, grad = trial, e_trial, grad_trial
        it += 1

    value = path_length(spec, pts)
    if full_output:
        return value, {"converged": converged, "iterations": it, "path": pts}
    return value


def apply_isometry_rotation_pi(spec: GroupSpec, axis_xy, p) -> np.ndarray:
    """Half-turn about the vertical line over axis_xy: an isometry whose
    fixed set is that line."""
    p = np.asarray(p, dtype=float)
    return np.array([2.0 * axis_xy[0] - p[0], 2.0 * axis_xy[1] - p[1], p[2]])


def apply_phi_s(spec: GroupSpec, s: float, p) -> np.ndarray:
    """Left translation by (0, 0, s): (p_xy, z) -> (exp(s*A) p_xy, z + s)."""
    p = np.asarray(p, dtype=float)
    out = np.empty(3)
    out[:2] = exp_zA(spec, s) @ p[:2]
    out[2] = p[2] + s
    return out


def appendix_norms(spec: GroupSpec, z: float) -> tuple[float, float, float]:
    """Closed forms for (|dx|^2, |dy|^2, <dx, dy>) at height z.

    Only defined for the normalized non-unimodular family; the three
    expressions agree with the corresponding entries of
    :func:`metric_at`.
    """
    if spec.unimodular:
        raise ValueError("closed-form coordinate norms require a non-unimodular spec")
    alpha, beta = spec.alpha, spec.beta
    c, s = _cd_sd(spec.d_invariant, z)
    e2 = np.exp(-2.0 * z)
    nx2 = e2 * (beta ** 2 * (1.0 + alpha) ** 2 * s ** 2 + (c - alpha * s) ** 2)
    ny2 = e2 * (beta ** 2 * (1.0 - alpha) ** 2 * s ** 2 + (c + alpha * s) ** 2)
    nxy = -2.0 * alpha * beta * e2 * s * (s + c)
    return float(nx2), float(ny2), float(nxy)


def eigen_data(spec: GroupSpec):
    """Eigenvalues 1 +/- sqrt(1-det) of a non-unimodular spec with det < 1,
    with Euclidean-unit eigenvectors.  Returns (lam_plus, v_plus,
    lam_minus, v_minus)."""
    d = spec.d_invariant
    if spec.unimodular or not d < 1.0 - 1e-12:
        raise DNotLessThanOne(f"need non-unimodular det < 1, got det {d}")
    root = np.sqrt(1.0 - d)
    out = []
    for lam in (1.0 + root, 1.0 - root):
        v = np.array([spec.b, lam - spec.a])
        if np.abs(v).max() < 1e-12:
            v = np.array([lam - spec.d, spec.c])
        if np.abs(v).max() < 1e-12:
            v = np.array([1.0, 0.0]) if abs(spec.a - lam) < abs(spec.d - lam) else np.array([0.0, 1.0])
        out.extend([lam, v / np.linalg.norm(v)])
    return tuple(out)


def eigenfield_norm(spec: GroupSpec, sign: int, z: float) -> float:
    """Metric norm exp(-lam*z) at height z of the right-invariant field
    extending the unit eigenvector for the eigenvalue 1 + sign*sqrt(1-det)."""
    lam_p, _, lam_m, _ = eigen_data(spec)
    lam = lam_p if sign > 0 else lam_m
    return float(np.exp(-lam * z))
