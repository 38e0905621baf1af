"""Discrete least-area graphs over convex horizontal domains.

The unknown is the vector of interior heights of a triangulated graph;
boundary heights are pinned.  Interior graphicality of minimizers is a
theorem for this geometry, so restricting to graphs loses nothing and
keeps the discrete problem smooth and unconstrained.  Area of the affine
lift is summed per triangle with the metric sampled at the lifted
centroid (the metric only depends on the height, which makes the exact
gradient cheap).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import minimize
from scipy.sparse.csgraph import dijkstra
from scipy.sparse.linalg import spsolve

from .group import GroupSpec
from .meshing import ConvexDomain, GraphSurface
from .metric import dmetric_block_many, metric_block_many, metric_at, path_length


class MaxIterExceeded(RuntimeError):
    """Optimizer ran out of iterations before meeting the tolerance."""


class NotConvergedWarning(UserWarning):
    """Post-processing called on a graph whose solve did not converge."""


@dataclass
class SolveReport:
    """Outcome of one Plateau solve."""

    area: float
    residual: float
    residual_tol: float
    grad_inf: float
    iterations: int
    converged: bool
    conormal_z: np.ndarray
    steep_ramp: bool = False
    areas: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "area": self.area,
            "residual": self.residual,
            "residual_tol": self.residual_tol,
            "grad_inf": self.grad_inf,
            "iterations": self.iterations,
            "converged": self.converged,
            "steep_ramp": self.steep_ramp,
            "conormal_z": [float(v) for v in self.conormal_z],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _subdivision_weights(n: int) -> np.ndarray:
    """Barycentric corner weights of the regular n x n refinement of a
    triangle: shape (n*n, 3 corners, 3 parent weights)."""
    cells = []
    for i in range(n):
        for j in range(n - i):
            a, b, c = (i, j), (i + 1, j), (i, j + 1)
            cells.append((a, b, c))
            if i + j < n - 1:
                cells.append((b, (i + 1, j + 1), c))
    w = np.zeros((len(cells), 3, 3))
    for s, cell in enumerate(cells):
        for corner, (i, j) in enumerate(cell):
            w[s, corner] = ((n - i - j) / n, i / n, j / n)
    return w


# Composite centroid quadrature on a fixed barycentric refinement.  The
# metric varies exponentially with height; on triangles whose lift spans a
# sizable height range the single-centroid sample badly undermeasures the
# area (the height-dependence is convex), which opens spurious low-area
# states with a few grossly stretched triangles.  Sixteen sub-cells keep
# the per-cell height spread small for every state the solver's height box
# admits, preserving both accuracy on steep boundary layers and coercivity,
# while staying smooth in the heights.
_N_SUB = 4
_W_SUB = _subdivision_weights(_N_SUB)


def _sub_geometry(graph: GraphSurface, heights: np.ndarray):
    tri = graph.triangles
    pc = graph.points[tri]  # (n, 3, 2)
    uc = heights[tri]       # (n, 3)
    pxy = np.einsum("scK,nKx->nscx", _W_SUB, pc)
    us = np.einsum("scK,nK->nsc", _W_SUB, uc)
    e1 = pxy[:, :, 1] - pxy[:, :, 0]
    e2 = pxy[:, :, 2] - pxy[:, :, 0]
    d1 = us[:, :, 1] - us[:, :, 0]
    d2 = us[:, :, 2] - us[:, :, 0]
    zc = us.mean(axis=2)
    return tri, e1, e2, d1, d2, us, zc


def discrete_area(spec: GroupSpec, graph: GraphSurface, heights=None) -> float:
    """Metric area of the affine lift of the graph."""
    u = graph.heights if heights is None else np.asarray(heights, dtype=float)
    _, e1, e2, d1, d2, _, zc = _sub_geometry(graph, u)
    g2 = metric_block_many(spec, zc)
    g11 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e1) + d1 * d1
    g22 = np.einsum("nsi,nsij,nsj->ns", e2, g2, e2) + d2 * d2
    g12 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e2) + d1 * d2
    det = g11 * g22 - g12 * g12
    return float(0.5 * np.sum(np.sqrt(np.maximum(det, 0.0))))


def area_and_gradient(spec: GroupSpec, graph: GraphSurface, heights):
    """Area and its exact gradient with respect to every vertex height."""
    u = np.asarray(heights, dtype=float)
    tri, e1, e2, d1, d2, us, zc = _sub_geometry(graph, u)
    g2 = metric_block_many(spec, zc)
    dg2 = dmetric_block_many(spec, zc)
    g11 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e1) + d1 * d1
    g22 = np.einsum("nsi,nsij,nsj->ns", e2, g2, e2) + d2 * d2
    g12 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e2) + d1 * d2
    det = g11 * g22 - g12 * g12
    area_sub = 0.5 * np.sqrt(np.maximum(det, 1e-300))
    q11 = np.einsum("nsi,nsij,nsj->ns", e1, dg2, e1) / 3.0
    q22 = np.einsum("nsi,nsij,nsj->ns", e2, dg2, e2) / 3.0
    q12 = np.einsum("nsi,nsij,nsj->ns", e1, dg2, e2) / 3.0
    # d(det) per sub-cell corner, then chain through the barycentric
    # weights to the parent corners.
    contrib = np.empty(det.shape + (3,))
    for v, (s1, s2) in enumerate(((-1.0, -1.0), (1.0, 0.0), (0.0, 1.0))):
        ddet = (g22 * (2.0 * d1 * s1 + q11)
                + g11 * (2.0 * d2 * s2 + q22)
                - 2.0 * g12 * (d1 * s2 + d2 * s1 + q12))
        contrib[:, :, v] = ddet / (8.0 * area_sub)
    parent = np.einsum("nsc,scK->nK", contrib, _W_SUB)
    grad = np.zeros(len(u))
    for k in range(3):
        grad += np.bincount(tri[:, k], weights=parent[:, k], minlength=len(u))
    return float(np.sum(area_sub)), grad


def vertex_masses(spec: GroupSpec, graph: GraphSurface, heights) -> np.ndarray:
    """One third of the incident lifted-triangle areas per vertex."""
    u = np.asarray(heights, dtype=float)
    tri, e1, e2, d1, d2, _, zc = _sub_geometry(graph, u)
    g2 = metric_block_many(spec, zc)
    g11 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e1) + d1 * d1
    g22 = np.einsum("nsi,nsij,nsj->ns", e2, g2, e2) + d2 * d2
    g12 = np.einsum("nsi,nsij,nsj->ns", e1, g2, e2) + d1 * d2
    det = g11 * g22 - g12 * g12
    area_tri = 0.5 * np.sqrt(np.maximum(det, 0.0)).sum(axis=1)
    mass = np.zeros(len(u))
    for v in range(3):
        mass += np.bincount(tri[:, v], weights=area_tri / 3.0, minlength=len(u))
    return mass


def harmonic_extension(graph: GraphSurface, boundary_values) -> np.ndarray:
    """Euclidean (cotangent-weight) harmonic extension of boundary heights."""
    values = np.asarray(boundary_values, dtype=float)
    n = graph.n_vertices
    tri = graph.triangles
    p = graph.points
    rows, cols, vals = [], [], []
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        a = p[tri[:, i]] - p[tri[:, k]]
        b = p[tri[:, j]] - p[tri[:, k]]
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        cot = np.einsum("ij,ij->i", a, b) / np.maximum(np.abs(cross), 1e-300)
        w = 0.5 * cot
        rows.extend([tri[:, i], tri[:, j]])
        cols.extend([tri[:, j], tri[:, i]])
        vals.extend([-w, -w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    lap = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    lap = lap + sparse.diags(-np.asarray(lap.sum(axis=1)).ravel())
    heights = np.zeros(n)
    heights[graph.boundary_loop] = values
    interior = graph.interior_indices()
    if interior.size:
        a_ii = lap[interior][:, interior]
        rhs = -lap[interior][:, graph.boundary_loop] @ values
        heights[interior] = spsolve(a_ii.tocsc(), rhs)
    return heights


def _steepness_guard(graph: GraphSurface, kappa: float = 10.0):
    """Smooth cubic hinge on per-edge height jumps.

    The quadrature is trustworthy only while lifted triangles span a
    bounded height range; states with much larger single-edge jumps are
    non-physical artifacts and get penalized.  The hinge is identically
    zero (value and gradient) wherever all jumps stay below the threshold,
    so a converged solution inside the guard is a true critical point of
    the plain area.
    """
    edges = graph.edges()
    lengths = np.linalg.norm(graph.points[edges[:, 0]] - graph.points[edges[:, 1]],
                             axis=1)

    def value_grad(u, threshold):
        jump = u[edges[:, 1]] - u[edges[:, 0]]
        excess = np.abs(jump) - threshold
        active = excess > 0.0
        if not np.any(active):
            return 0.0, None
        exc = excess[active]
        lng = lengths[active]
        val = kappa * float(np.sum(lng * exc ** 3))
        slope = 3.0 * kappa * lng * exc ** 2 * np.sign(jump[active])
        grad = np.zeros_like(u)
        np.add.at(grad, edges[active, 1], slope)
        np.add.at(grad, edges[active, 0], -slope)
        return val, grad

    def max_jump(u):
        return float(np.abs(u[edges[:, 1]] - u[edges[:, 0]]).max())

    return value_grad, max_jump


def solve_plateau(spec: GroupSpec, graph: GraphSurface, tol: float | None = None,
                  max_iter: int = 2000, init: np.ndarray | None = None):
    """Minimize discrete area over interior heights; boundary stays pinned.

    Initialization defaults to the harmonic extension of the boundary
    heights.  Minimization is bounded L-BFGS-B on the interior height
    vector with the exact gradient, followed by matrix-free Newton
    corrections; convergence means gradient max-norm <= tol (default 1e-8
    times the mean edge length).  Returns the solved graph (heights
    updated in place) and a :class:`SolveReport`; non-convergence is
    reported via ``converged=False`` rather than raised.
    """
    u = graph.heights.copy()
    bvals = graph.boundary_heights()
    if not np.all(np.isfinite(bvals)):
        raise ValueError("boundary heights must be set and finite before solving")
    edges = graph.edges()
    mesh_scale = float(np.mean(np.linalg.norm(
        graph.points[edges[:, 0]] - graph.points[edges[:, 1]], axis=1)))
    if tol is None:
        tol = 1e-8 * mesh_scale
    interior = graph.interior_indices()
    if init is None:
        u = harmonic_extension(graph, bvals)
    else:
        u = np.asarray(init, dtype=float).copy()
        u[graph.boundary_loop] = bvals

    areas: list[float] = []

    if interior.size == 0:
        area, grad = area_and_gradient(spec, graph, u)
        graph.heights = u
        report = _make_report(spec, graph, u, area, grad, 0, True, tol, areas)
        return graph, report

    guard, max_jump = _steepness_guard(graph)
    b_min, b_max = float(bvals.min()), float(bvals.max())
    span = b_max - b_min
    extent = graph.points.max(axis=0) - graph.points.min(axis=0)
    r_dom = 0.5 * float(np.hypot(*extent))
    lo = b_min - 1.0 - 0.1 * span
    if spec.unimodular:
        hi = b_max + 1.0 + 0.2 * span
    else:
        hi = b_max + 0.5 * np.log1p(r_dom ** 2) + 2.0 + span
    threshold = max(2.0, 1.3 * max_jump(u), 1.3 * max_jump(graph.heights))

    def objective(x):
        uu = u.copy()
        uu[interior] = x
        area, grad = area_and_gradient(spec, graph, uu)
        pval, pgrad = guard(uu, threshold)
        if pgrad is not None:
            area = area + pval
            grad = grad + pgrad
        return area, grad[interior]

    def record(xk):
        uu = u.copy()
        uu[interior] = xk
        areas.append(discrete_area(spec, graph, uu))

    nit = 0
    areas.append(discrete_area(spec, graph, u))
    for attempt in range(5):
        u[interior] = np.clip(u[interior], lo, hi)
        result = minimize(objective, u[interior], jac=True, method="L-BFGS-B",
                          callback=record,
                          bounds=[(lo, hi)] * interior.size,
                          options={"maxiter": max_iter, "ftol": 1e-18,
                                   "gtol": max(tol, 1e-7), "maxcor": 20})
        u[interior] = result.x
        nit += int(result.nit)
        margin = 1e-9 * max(1.0, hi - lo)
        binds = (np.any(result.x >= hi - margin)
                 or np.any(result.x <= lo + margin))
        guarded = max_jump(u) > 0.9 * threshold
        if not binds and not guarded:
            break
        if binds:
            lo -= 1.0
            hi += max(1.0, 0.5 * (hi - b_max))
        if guarded:
            threshold *= 1.5
    # L-BFGS-B bottoms out near the double-precision floor of the area sum;
    # a few matrix-free Newton-CG corrections push the gradient the rest of
    # the way down (the minimum is a strict local one, so the Hessian on
    # the interior heights is positive definite there).
    def full_objective(uu):
        area, grad = area_and_gradient(spec, graph, uu)
        pval, pgrad = guard(uu, threshold)
        if pgrad is not None:
            return area + pval, grad + pgrad
        return area, grad

    area, grad = full_objective(u)
    u, area, grad, n_newton = _newton_polish(
        spec, graph, u, interior, area, grad, tol, areas, objective)
    nit += n_newton
    grad_inf = float(np.abs(grad[interior]).max())
    converged = grad_inf <= tol * (1.0 + 1e-12)
    guard_active = guard(u, threshold)[1] is not None
    graph.heights = u
    report = _make_report(spec, graph, u, discrete_area(spec, graph, u), grad,
                          nit, converged and not guard_active, tol, areas)
    report.guard_active = guard_active
    return graph, report


def _truncated_cg(hessp, rhs, rtol=1e-8, maxiter=400):
    """Conjugate gradients on H x = rhs, stopping on negative curvature
    (returns the last iterate, or the right-hand side when the very first
    direction already has non-positive curvature)."""
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rs = float(r @ r)
    target = rtol * np.sqrt(rs)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(maxiter):
            hp = hessp(p)
            if not np.all(np.isfinite(hp)):
                break
            curv = float(p @ hp)
            if not np.isfinite(curv) or curv <= 0.0:
                break
            alpha = rs / curv
            x = x + alpha * p
            r = r - alpha * hp
            rs_new = float(r @ r)
            if not np.isfinite(rs_new):
                break
            if np.sqrt(rs_new) <= target:
                return x
            p = r + (rs_new / rs) * p
            rs = rs_new
    return x if np.any(x) else rhs.copy()


def _newton_polish(spec, graph, u, interior, area, grad, tol, areas, objective,
                   max_newton: int = 12):
    """Damped Newton steps with truncated conjugate-gradient solves;
    Hessian-vector products by central differencing of the exact gradient."""
    scale = max(1.0, float(np.abs(u[interior]).max()))
    height_span = max(1.0, float(u.max() - u.min()))
    n_newton = 0
    for _ in range(max_newton):
        g_int = grad[interior]
        gnorm = float(np.abs(g_int).max())
        if gnorm <= tol:
            break

        def hessp(v):
            vnorm = float(np.abs(v).max())
            if vnorm == 0.0:
                return np.zeros_like(v)
            eps = 1e-6 * scale / vnorm
            _, gp = objective(u[interior] + eps * v)
            _, gm = objective(u[interior] - eps * v)
            return (gp - gm) / (2.0 * eps)

        step = _truncated_cg(hessp, -g_int)
        snorm = float(np.abs(step).max())
        if not np.isfinite(snorm) or snorm == 0.0:
            break
        if snorm > 2.0 * height_span:
            step = step * (2.0 * height_span / snorm)
        damp = 1.0
        accepted = False
        for _ in range(30):
            trial = u.copy()
            trial[interior] = u[interior] + damp * step
            with np.errstate(over="ignore", invalid="ignore"):
                a_t, gr_t = area_and_gradient(spec, graph, trial)
            if np.isfinite(a_t) and a_t <= area * (1.0 + 1e-14):
                u, area, grad = trial, a_t, gr_t
                areas.append(a_t)
                accepted = True
                break
            damp *= 0.5
        n_newton += 1
        if not accepted:
            break
    return u, area, grad, n_newton


def _make_report(spec, graph, u, area, grad, nit, converged, tol, areas) -> SolveReport:
    interior = graph.interior_indices()
    mass = vertex_masses(spec, graph, u)
    if interior.size:
        safe_mass = np.maximum(mass[interior], 1e-300)
        residual = float(np.abs(grad[interior] / safe_mass).max())
        grad_inf = float(np.abs(grad[interior]).max())
        residual_tol = tol / float(safe_mass.min())
    else:
        residual, grad_inf, residual_tol = 0.0, 0.0, tol
    conormal = boundary_conormal(spec, graph, check=False)
    return SolveReport(area=area, residual=residual, residual_tol=residual_tol,
                       grad_inf=grad_inf, iterations=nit, converged=converged,
                       conormal_z=conormal, steep_ramp=graph.steep_ramp,
                       areas=areas)


def _metric_dot(spec: GroupSpec, p: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    g = metric_at(spec, p)
    return float(v @ g @ w)


def boundary_conormal_vectors(spec: GroupSpec, graph: GraphSurface) -> np.ndarray:
    """Outward metric-unit conormal of the lifted graph per boundary vertex.

    Per vertex: average over the triangles incident to its two boundary
    edges of the in-plane direction metric-orthogonal to that boundary
    edge, signed to point out of the surface, then renormalized.  These
    two triangles sample the surface closest to the boundary, which keeps
    the one-sided bias of the extraction at half a mesh step; first-order
    accuracy suffices for the boundary integrals that consume it.
    """
    lifted = graph.lifted()
    loop = graph.boundary_loop
    n_loop = len(loop)
    # map each boundary edge (ordered as in the triangle) to its triangle
    edge_tri: dict[tuple[int, int], int] = {}
    for idx, tri in enumerate(graph.triangles):
        for k in range(3):
            edge_tri[(int(tri[k]), int(tri[(k + 1) % 3]))] = idx
    conormals = np.empty((n_loop, 3))
    for i in range(n_loop):
        v = int(loop[i])
        p = lifted[v]
        g = metric_at(spec, p)
        acc = np.zeros(3)
        for a, b in (((int(loop[i - 1])), v), (v, int(loop[(i + 1) % n_loop]))):
            tidx = edge_tri.get((a, b), edge_tri.get((b, a)))
            if tidx is None:
                continue
            tri = graph.triangles[tidx]
            apex = next(int(w) for w in tri if int(w) not in (a, b))
            tangent = lifted[b] - lifted[a]
            tangent = tangent / np.sqrt(tangent @ g @ tangent)
            inward = lifted[apex] - p
            w = inward - (inward @ g @ tangent) * tangent
            norm = np.sqrt(max(w @ g @ w, 1e-300))
            acc -= w / norm  # apex chord points into the surface
        norm = np.sqrt(max(acc @ g @ acc, 1e-300))
        conormals[i] = acc / norm
    return conormals


def boundary_conormal(spec: GroupSpec, graph: GraphSurface, report: SolveReport | None = None,
                      check: bool = True) -> np.ndarray:
    """Inner products of the outward unit conormal with the vertical
    direction, one per boundary-loop vertex.  Values lie in [-1, 1].

    Recovered variationally: the first variation of area under a vertical
    bump at a boundary vertex equals the conormal inner product times the
    vertex's boundary-arc share, and the exact area gradient is available;
    this natural-flux recovery is markedly more accurate near steep
    boundaries than differencing the triangle fan.  Values are clipped to
    the Cauchy-Schwarz range.
    """
    if check and report is not None and not report.converged:
        warnings.warn("conormal requested on a non-converged solve",
                      NotConvergedWarning, stacklevel=2)
    _, grad = area_and_gradient(spec, graph, graph.heights)
    lifted = graph.lifted()
    loop = graph.boundary_loop
    n = len(loop)
    values = np.empty(n)
    for i in range(n):
        prv = lifted[loop[i - 1]]
        mid = lifted[loop[i]]
        nxt = lifted[loop[(i + 1) % n]]
        arc = 0.5 * (path_length(spec, np.array([prv, mid]))
                     + path_length(spec, np.array([mid, nxt])))
        values[i] = grad[loop[i]] / arc
    return np.clip(values, -1.0, 1.0)


def right_invariant_field(spec: GroupSpec, name) -> callable:
    """Right-invariant vector field evaluator from a name or coefficients.

    ``"F1"``/``"F2"`` are the horizontal coordinate fields, ``"F3"`` the
    field generated by the vertical 1-parameter subgroup; a coefficient
    triple (c1, c2, c3) combines them.
    """
    if isinstance(name, str):
        coeff = {"F1": (1.0, 0.0, 0.0), "F2": (0.0, 1.0, 0.0),
                 "F3": (0.0, 0.0, 1.0)}[name]
    else:
        coeff = tuple(float(c) for c in name)

    def fld(p):
        p = np.asarray(p, dtype=float)
        return np.array([
            coeff[0] + coeff[2] * (spec.a * p[0] + spec.b * p[1]),
            coeff[1] + coeff[2] * (spec.c * p[0] + spec.d * p[1]),
            coeff[2],
        ])

    return fld


def flux(spec: GroupSpec, graph: GraphSurface, fld="F3",
         report: SolveReport | None = None) -> float:
    """Boundary integral of <conormal, field> with respect to arclength.

    Vanishes exactly for Killing fields on smooth minimal surfaces; on a
    converged discrete graph the value is O(mesh size).
    """
    if report is not None and not report.converged:
        warnings.warn("flux requested on a non-converged solve",
                      NotConvergedWarning, stacklevel=2)
    field_fn = right_invariant_field(spec, fld) if not callable(fld) else fld
    vectors = boundary_conormal_vectors(spec, graph)
    lifted = graph.lifted()
    loop = graph.boundary_loop
    total = 0.0
    for i in range(len(loop)):
        a = lifted[loop[i]]
        b = lifted[loop[(i + 1) % len(loop)]]
        mid = 0.5 * (a + b)
        g = metric_at(spec, mid)
        eta = 0.5 * (vectors[i] + vectors[(i + 1) % len(loop)])
        eta = eta / np.sqrt(eta @ g @ eta)
        fvec = field_fn(mid)
        seg = b - a
        total += float(eta @ g @ fvec) * float(np.sqrt(seg @ g @ seg))
    return total


def almost_transverse_check(spec: GroupSpec, domain: ConvexDomain,
                            n_samples: int = 256):
    """Sign test of <outward boundary normal, horizontal flow part> on the
    z = 0 leaf, where the metric is Euclidean.

    Returns (ok, samples, margins): ok is True when every margin clears
    -1e-10.
    """
    samples = domain.boundary_points(
        max(1e-9, _domain_perimeter(domain) / n_samples))
    nxt = np.roll(samples, -1, axis=0)
    prv = np.roll(samples, 1, axis=0)
    tang = nxt - prv
    normal = np.column_stack([tang[:, 1], -tang[:, 0]])
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    fh = np.column_stack([spec.a * samples[:, 0] + spec.b * samples[:, 1],
                          spec.c * samples[:, 0] + spec.d * samples[:, 1]])
    margins = np.einsum("ij,ij->i", normal, fh)
    return bool(margins.min() >= -1e-10), samples, margins


def _domain_perimeter(domain: ConvexDomain) -> float:
    v = domain.vertices
    return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())


def intrinsic_radius(spec: GroupSpec, graph: GraphSurface) -> float:
    """Max over vertices of the graph distance to the boundary.

    Multi-source Dijkstra over the mesh edges with metric lengths of the
    lifted edges as weights.  Overestimates the smooth radius by at most
    the mesh anisotropy factor (edge-path detour, typically a few percent
    on the smoothed meshes produced here).
    """
    lifted = graph.lifted()
    e = graph.edges()
    weights = np.array([
        path_length(spec, lifted[[a, b]]) for a, b in e
    ])
    n = graph.n_vertices
    mat = sparse.coo_matrix(
        (np.concatenate([weights, weights]),
         (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
        shape=(n, n)).tocsr()
    dist = dijkstra(mat, directed=False, indices=graph.boundary_loop, min_only=True)
    return float(dist.max())


@dataclass
class ProbeReport:
    """Multi-initialization solve agreement record (evidence only: small
    spread is consistent with uniqueness, not a proof of it)."""

    spread: float
    areas: list
    converged: list

    def to_dict(self) -> dict:
        return {"spread": self.spread, "areas": self.areas,
                "converged": self.converged, "evidence_only": True}


def bilayer_probe(spec: GroupSpec, graph: GraphSurface, n_inits: int = 4,
                  seed: int = 0, tol: float | None = None) -> ProbeReport:
    """Solve from several initializations and report the max pairwise
    sup-difference of the converged heights."""
    bvals = graph.boundary_heights()
    span = float(bvals.max() - bvals.min())
    pad = span + 0.5
    harmonic = harmonic_extension(graph, bvals)
    rng = np.random.default_rng(seed)
    inits = [np.full(graph.n_vertices, bvals.max() + pad),
             np.full(graph.n_vertices, bvals.min() - pad),
             harmonic]
    while len(inits) < n_inits:
        inits.append(harmonic + rng.uniform(-1.0, 1.0, graph.n_vertices) * (span + 0.5))
    inits = inits[:max(1, n_inits)]
    solutions, areas, convs = [], [], []
    for init in inits:
        g = GraphSurface(points=graph.points, triangles=graph.triangles,
                         heights=graph.heights.copy(),
                         boundary_mask=graph.boundary_mask,
                         boundary_loop=graph.boundary_loop)
        g, rep = solve_plateau(spec, g, tol=tol, init=init)
        solutions.append(g.heights.copy())
        areas.append(rep.area)
        convs.append(rep.converged)
    spread = 0.0
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            spread = max(spread, float(np.abs(solutions[i] - solutions[j]).max()))
    return ProbeReport(spread=spread, areas=areas, converged=convs)
