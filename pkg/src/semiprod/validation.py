"""Cross-module invariant suite with fixed seeds.

Each check returns a row dict (name, passed, measured, tolerance); the
experiment driver turns rows into a report and the test suite asserts on
them.  The optional fault-injection flag perturbs the metric inside the
flux check only, as a negative control demonstrating the check's
sensitivity.
"""

from __future__ import annotations

import numpy as np

from . import group as gp
from . import metric as mt
from . import surfaces as sf
from .meshing import ConvexDomain, triangulate
from .plateau import (area_and_gradient, boundary_conormal,
                      boundary_conormal_vectors, discrete_area, flux,
                      right_invariant_field, solve_plateau)

SPEC_GRID = (
    ("flat", lambda: gp.unimodular_spec([[0.0, 0.0], [0.0, 0.0]])),
    ("nilpotent", lambda: gp.unimodular_spec([[0.0, 1.0], [0.0, 0.0]])),
    ("diag-sol", lambda: gp.unimodular_spec([[1.0, 0.0], [0.0, -1.0]])),
    ("rotation", lambda: gp.unimodular_spec([[0.0, -2.0], [0.5, 0.0]])),
    ("expanding", lambda: gp.nonunimodular_spec(0.0, 0.0)),
    ("nu-a0-b1", lambda: gp.nonunimodular_spec(0.0, 1.0)),
    ("nu-a03-b1", lambda: gp.nonunimodular_spec(0.3, 1.0)),
    ("nu-a09-b5", lambda: gp.nonunimodular_spec(0.9, 5.0)),
    ("nu-a05-b2", lambda: gp.nonunimodular_spec(0.5, 2.0)),
)


def _row(name: str, measured: float, tolerance: float, flip: bool = False) -> dict:
    passed = bool(measured < tolerance) if not flip else bool(measured >= tolerance)
    return {"check": name, "passed": passed, "measured": float(measured),
            "tolerance": float(tolerance)}


def check_exp_group_law() -> dict:
    zs = np.arange(-3.0, 3.001, 0.5)
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        for z1 in zs:
            for z2 in zs:
                lhs = gp.exp_zA(spec, z1 + z2)
                rhs = gp.exp_zA(spec, z1) @ gp.exp_zA(spec, z2)
                worst = max(worst, np.abs(lhs - rhs).max())
    return _row("exp_group_law", worst, 1e-10)


def check_exp_closed_vs_series() -> dict:
    zs = np.arange(-3.0, 3.001, 0.5)
    worst = 0.0
    for alpha in (0.0, 0.3, 0.9):
        for beta in (0.0, 1.0, 5.0):
            spec = gp.nonunimodular_spec(alpha, beta)
            for z in zs:
                diff = np.abs(gp.exp_zA(spec, z)
                              - gp.exp_zA_series(spec.matrix, z)).max()
                worst = max(worst, diff)
    return _row("exp_closed_vs_series", worst, 1e-10)


def check_exp_liouville() -> dict:
    zs = np.arange(-3.0, 3.001, 0.5)
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        for z in zs:
            det = np.linalg.det(gp.exp_zA(spec, z))
            worst = max(worst, abs(det - np.exp(z * spec.trace)))
    return _row("exp_liouville_det", worst, 1e-10)


def check_frame_orthonormal() -> dict:
    worst = 0.0
    rng = np.random.default_rng(11)
    for _, make in SPEC_GRID:
        spec = make()
        for p in rng.uniform(-2.0, 2.0, size=(8, 3)):
            frame = gp.left_frame(spec, p)
            gram = frame.T @ mt.metric_at(spec, p) @ frame
            worst = max(worst, np.abs(gram - np.eye(3)).max())
    return _row("left_frame_orthonormal", worst, 1e-10)


def check_group_axioms(n_triples: int = 1000) -> dict:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        pts = rng.uniform(-2.0, 2.0, size=(n_triples // len(SPEC_GRID) + 1, 3, 3))
        for p, q, r in pts:
            lhs = gp.multiply(spec, gp.multiply(spec, p, q), r)
            rhs = gp.multiply(spec, p, gp.multiply(spec, q, r))
            worst = max(worst, np.abs(lhs - rhs).max())
            worst = max(worst, np.abs(gp.multiply(spec, p, gp.identity_point()) - p).max())
            worst = max(worst, np.abs(
                gp.multiply(spec, p, gp.inverse(spec, p))).max())
    return _row("group_axioms", worst, 1e-10)


def check_metric_identity_at_base() -> dict:
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        g = mt.metric_at(spec, [0.4, -1.2, 0.0])
        worst = max(worst, np.abs(g - np.eye(3)).max())
    return _row("metric_identity_at_base", worst, 1e-14)


def check_area_element() -> dict:
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        if spec.unimodular:
            continue
        for z in np.arange(-3.0, 3.001, 0.5):
            block = mt.metric_block(spec, z)
            worst = max(worst, abs(np.sqrt(np.linalg.det(block)) - np.exp(-2.0 * z)))
    return _row("leaf_area_element", worst, 1e-10)


def check_metric_second_form() -> dict:
    """First displayed metric form against the conjugate-exponent form."""
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        for z in np.arange(-2.0, 2.001, 0.5):
            w = gp.exp_zA(spec, z)
            pref = np.exp(-2.0 * spec.trace * z)
            alt = pref * np.array([
                [w[1, 0] ** 2 + w[1, 1] ** 2,
                 -(w[0, 0] * w[1, 0] + w[0, 1] * w[1, 1])],
                [-(w[0, 0] * w[1, 0] + w[0, 1] * w[1, 1]),
                 w[0, 0] ** 2 + w[0, 1] ** 2],
            ])
            worst = max(worst, np.abs(mt.metric_block(spec, z) - alt).max())
    return _row("metric_conjugate_form", worst, 1e-10)


def _christoffel_fd(spec, p, step=1e-5):
    """Central-difference Koszul evaluation of the coordinate symbols."""
    p = np.asarray(p, dtype=float)
    dg = np.zeros((3, 3, 3))
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = step
        dg[k] = (mt.metric_at(spec, p + dp) - mt.metric_at(spec, p - dp)) / (2 * step)
    ginv = np.linalg.inv(mt.metric_at(spec, p))
    gamma = np.zeros((3, 3, 3))
    for l in range(3):
        for i in range(3):
            for j in range(3):
                gamma[l, i, j] = 0.5 * sum(
                    ginv[l, k] * (dg[i][j, k] + dg[j][i, k] - dg[k][i, j])
                    for k in range(3))
    return gamma


def check_christoffel() -> dict:
    rng = np.random.default_rng(3)
    worst = 0.0
    sym = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        for p in rng.uniform(-1.5, 1.5, size=(4, 3)):
            gam = mt.christoffel_at(spec, p)
            worst = max(worst, np.abs(gam - _christoffel_fd(spec, p)).max())
            sym = max(sym, np.abs(gam - gam.transpose(0, 2, 1)).max())
    return _row("christoffel_vs_fd_koszul", max(worst, sym * 1e4), 1e-6)


def check_geodesics() -> dict:
    worst = 0.0
    # vertical invariance
    spec = gp.nonunimodular_spec(0.5, 1.0)
    pts = mt.geodesic_shoot(spec, [0.3, -0.7, 0.2], [0.0, 0.0, 1.0], 5.0)
    worst = max(worst, np.abs(pts[:, :2] - np.array([0.3, -0.7])).max() / 1e-8 * 1e-8)
    vert_dev = np.abs(pts[:, :2] - np.array([0.3, -0.7])).max()
    # flat straightness
    flat = gp.unimodular_spec([[0.0, 0.0], [0.0, 0.0]])
    pts = mt.geodesic_shoot(flat, [0.0, 0.0, 0.0], [1.0, 1.0, 0.0], 2.0)
    flat_dev = np.abs(pts[-1] - np.array([2.0, 2.0, 0.0])).max()
    # speed drift
    rng = np.random.default_rng(5)
    drift = 0.0
    for _ in range(3):
        v = rng.normal(size=3)
        v[2] = np.clip(v[2], -0.8, 0.8)
        v /= np.linalg.norm(v)
        pts, vels = mt.geodesic_shoot(spec, [0.0, 0.0, 0.0], v, 10.0,
                                      n_steps=1000, full_output=True)
        speeds = [mt.speed(spec, p, w) for p, w in zip(pts, vels)]
        drift = max(drift, float(np.max(np.abs(np.array(speeds) - speeds[0]))))
    measured = max(vert_dev / 1e-8, flat_dev / 1e-10, drift / 1e-6)
    return _row("geodesic_invariants", measured, 1.0)


def check_isometries() -> dict:
    rng = np.random.default_rng(13)
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        pts = rng.uniform(-1.0, 1.0, size=(6, 3))
        length = mt.path_length(spec, pts)
        rot = np.array([mt.apply_isometry_rotation_pi(spec, (0.4, -0.2), p) for p in pts])
        trs = np.array([mt.apply_phi_s(spec, 0.8, p) for p in pts])
        worst = max(worst, abs(mt.path_length(spec, rot) - length))
        worst = max(worst, abs(mt.path_length(spec, trs) - length))
    return _row("isometries_preserve_length", worst, 1e-8)


def check_isometry_pullback() -> dict:
    rng = np.random.default_rng(17)
    spec = gp.nonunimodular_spec(0.3, 1.0)
    worst = 0.0
    s = 0.6
    jac_rot = np.diag([-1.0, -1.0, 1.0])
    jac_phi = np.eye(3)
    jac_phi[:2, :2] = gp.exp_zA(spec, s)
    for p in rng.uniform(-1.5, 1.5, size=(100, 3)):
        g_here = mt.metric_at(spec, p)
        q = mt.apply_isometry_rotation_pi(spec, (0.4, -0.2), p)
        worst = max(worst, np.abs(jac_rot.T @ mt.metric_at(spec, q) @ jac_rot - g_here).max())
        q = mt.apply_phi_s(spec, s, p)
        worst = max(worst, np.abs(jac_phi.T @ mt.metric_at(spec, q) @ jac_phi - g_here).max())
    return _row("isometry_pullback_gram", worst, 1e-10)


def check_coordinate_norms() -> dict:
    worst = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        if spec.unimodular:
            continue
        for z in np.arange(-2.0, 3.001, 0.5):
            nx2, ny2, nxy = mt.appendix_norms(spec, z)
            block = mt.metric_block(spec, z)
            worst = max(worst, abs(nx2 - block[0, 0]))
            worst = max(worst, abs(ny2 - block[1, 1]))
            worst = max(worst, abs(nxy - block[0, 1]))
    return _row("coordinate_norm_closed_forms", worst, 1e-10)


def check_horizontal_decay() -> dict:
    """For positive determinant all three coordinate-norm quantities drop
    below exp(-z) from some height on, found by scanning z* <= 20."""
    failures = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        if spec.unimodular or not spec.d_invariant > 0:
            continue
        found = None
        for zstar in range(0, 21):
            zs = np.linspace(zstar, zstar + 10.0, 101)
            ok = True
            for z in zs:
                nx2, ny2, nxy = mt.appendix_norms(spec, z)
                if max(nx2, ny2, abs(nxy)) >= np.exp(-z):
                    ok = False
                    break
            if ok:
                found = zstar
                break
        if found is None:
            failures += 1.0
    return _row("horizontal_decay_scan", failures, 0.5)


def check_eigenfield_norms() -> dict:
    worst = 0.0
    for alpha, beta in ((0.0, 0.0), (0.5, 0.5), (0.9, 0.2)):
        spec = gp.nonunimodular_spec(alpha, beta)
        if not spec.d_invariant < 1.0:
            continue
        lam_p, v_p, lam_m, v_m = mt.eigen_data(spec)
        for z in np.arange(-1.0, 2.001, 0.5):
            block = mt.metric_block(spec, z)
            for lam, v, sign in ((lam_p, v_p, 1), (lam_m, v_m, -1)):
                transported = np.sqrt(v @ block @ v)
                worst = max(worst, abs(transported - mt.eigenfield_norm(spec, sign, z)))
    return _row("eigenfield_norm_transport", worst, 1e-9)


def check_mean_curvature_invariants() -> dict:
    worst_ratio = 0.0
    for _, make in SPEC_GRID:
        spec = make()
        leaf = sf.ParamSurface(lambda t, s: np.array([t, s, 0.4]))
        h_leaf = sf.mean_curvature(spec, leaf, 0.3, -0.2)
        worst_ratio = max(worst_ratio, abs(h_leaf - spec.trace / 2.0) / 1e-8)
        plane = sf.ParamSurface(lambda t, s: np.array([0.6 * t + 0.3, -0.8 * t + 0.1, s]))
        worst_ratio = max(worst_ratio, abs(sf.mean_curvature(spec, plane, 0.2, 0.5)) / 1e-8)
    flat = gp.unimodular_spec([[0.0, 0.0], [0.0, 0.0]])
    sphere = sf.ParamSurface(
        lambda t, s: np.array([np.sin(s) * np.cos(t), np.sin(s) * np.sin(t), np.cos(s)]))
    worst_ratio = max(worst_ratio, abs(sf.mean_curvature(flat, sphere, 0.7, 1.2) - 1.0) / 1e-6)
    return _row("mean_curvature_invariants", worst_ratio, 1.0)


def check_orientation_coherence() -> dict:
    spec = gp.nonunimodular_spec(0.3, 1.0)
    surf = sf.ParamSurface(lambda t, s: np.array([t, s, 0.1 * t * t + 0.2 * s]))
    flipped = sf.ParamSurface(lambda t, s: np.array([s, t, 0.1 * s * s + 0.2 * t]))
    h1 = sf.mean_curvature(spec, surf, 0.3, 0.4)
    h2 = sf.mean_curvature(spec, flipped, 0.4, 0.3)
    return _row("orientation_coherence", abs(h1 + h2), 1e-6)


def check_cylinder_routes() -> dict:
    worst = 0.0
    spec = gp.nonunimodular_spec(0.3, 1.0)
    mu = sf.choose_mu(0.3, 1.0)
    for r in (1.0, 5.0, 20.0):
        cyl = sf.EllipticalCylinder(0.3, 1.0, mu, r)
        surf = sf.cylinder_surface(spec, cyl)
        for t in np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False):
            h1 = sf.cylinder_mean_curvature(spec, cyl, t)
            h2 = sf.mean_curvature(spec, surf, t, 0.0)
            worst = max(worst, abs(h1 - h2))
    return _row("cylinder_route_agreement", worst, 1e-6)


def check_flow_invariance() -> dict:
    spec = gp.nonunimodular_spec(0.3, 1.0)
    mu = sf.choose_mu(0.3, 1.0)
    cyl = sf.EllipticalCylinder(0.3, 1.0, mu, 2.0)
    surf = sf.cylinder_surface(spec, cyl)
    worst = 0.0
    for t in (0.0, 0.9, 2.2):
        h0 = sf.mean_curvature(spec, surf, t, 0.0)
        for s in (-0.4, 0.5):
            worst = max(worst, abs(sf.mean_curvature(spec, surf, t, s) - h0))
    return _row("tube_flow_invariance", worst, 1e-6)


def check_profile_bound() -> dict:
    rng = np.random.default_rng(23)
    worst = -np.inf
    for _ in range(20):
        alpha = rng.uniform(0.0, 0.95)
        beta = rng.uniform(0.0, 3.0)
        mu = rng.uniform(0.2, 4.0)
        ts = np.linspace(0.0, 2.0 * np.pi, 512)
        least = float(np.min(sf.rho(alpha, beta, mu, ts)))
        u_norm = np.hypot(2.0 * alpha * mu,
                          beta * (1.0 + alpha - (1.0 - alpha) * mu ** 2))
        worst = max(worst, (2.0 * mu - u_norm) - least - 1e-12)
    return _row("profile_lower_bound", worst, 1e-9)


def check_mu_selection() -> dict:
    bad = 0.0
    for alpha in (0.0, 0.3, 0.5, 0.9):
        for beta in (0.0, 0.5, 1.0, 2.0, 5.0):
            if not sf.check_property_r(alpha, beta, sf.choose_mu(alpha, beta)):
                bad += 1.0
    return _row("mu_selection_margin", bad, 0.5)


def _small_solved_problem(spec, radius=1.0, edge=0.125):
    graph = triangulate(ConvexDomain.circle((0.0, 0.0), radius), edge)
    graph.set_boundary_heights(np.zeros(len(graph.boundary_loop)))
    return solve_plateau(spec, graph)


def check_area_gradient() -> dict:
    rng = np.random.default_rng(29)
    spec = gp.nonunimodular_spec(0.3, 1.0)
    graph = triangulate(ConvexDomain.circle((0.0, 0.0), 1.0), 0.25)
    heights = rng.uniform(-0.3, 0.3, graph.n_vertices)
    _, grad = area_and_gradient(spec, graph, heights)
    interior = graph.interior_indices()
    idx = rng.choice(interior, size=min(20, interior.size), replace=False)
    worst = 0.0
    for i in idx:
        h = 1e-6
        up = heights.copy(); up[i] += h
        dn = heights.copy(); dn[i] -= h
        fd = (discrete_area(spec, graph, up) - discrete_area(spec, graph, dn)) / (2 * h)
        worst = max(worst, abs(fd - grad[i]) / max(abs(fd), 1e-12))
    return _row("area_gradient_vs_fd", worst, 1e-6)


def check_monotone_area_and_barriers() -> dict:
    bad = 0.0
    # unimodular two-sided barrier
    sol = gp.unimodular_spec([[1.0, 0.0], [0.0, -1.0]])
    graph = triangulate(ConvexDomain.circle((0.0, 0.0), 1.0), 0.125)
    theta = np.arctan2(*graph.points[graph.boundary_loop][:, ::-1].T)
    graph.set_boundary_heights(0.3 * np.sin(theta))
    graph, rep = solve_plateau(sol, graph)
    h = 0.125
    if not rep.converged:
        bad += 1
    interior_heights = graph.heights[graph.interior_indices()]
    if interior_heights.max() > 0.3 + 0.5 * h or interior_heights.min() < -0.3 - 0.5 * h:
        bad += 1
    if any(b > a * (1 + 1e-12) for a, b in zip(rep.areas, rep.areas[1:])):
        bad += 1
    # non-unimodular lower barrier
    spec = gp.nonunimodular_spec(0.3, 1.0)
    graph = triangulate(ConvexDomain.circle((0.0, 0.0), 1.0), 0.125)
    theta = np.arctan2(*graph.points[graph.boundary_loop][:, ::-1].T)
    graph.set_boundary_heights(0.2 + 0.2 * np.cos(theta))
    graph, rep = solve_plateau(spec, graph)
    if not rep.converged:
        bad += 1
    if graph.heights[graph.interior_indices()].min() < 0.0 - 0.5 * h:
        bad += 1
    if np.abs(boundary_conormal(spec, graph)).max() > 1.0 + 1e-12:
        bad += 1
    return _row("solver_barriers_monotonicity", bad, 0.5)


def check_flux_identity(fault_injection: bool = False) -> dict:
    spec = gp.nonunimodular_spec(0.0, 0.0)
    graph, rep = _small_solved_problem(spec, radius=1.0, edge=0.125)
    if not fault_injection:
        value = flux(spec, graph, "F3", report=rep)
    else:
        # negative control: evaluate the boundary integral under a metric
        # with a corrupted horizontal entry; the identity must then fail.
        from .metric import metric_at as clean_metric

        def bad_metric(s, p):
            g = clean_metric(s, p).copy()
            g[0, 0] += 0.25
            return g

        field_fn = right_invariant_field(spec, "F3")
        vectors = boundary_conormal_vectors(spec, graph)
        lifted = graph.lifted()
        loop = graph.boundary_loop
        value = 0.0
        for i in range(len(loop)):
            a = lifted[loop[i]]
            b = lifted[loop[(i + 1) % len(loop)]]
            mid = 0.5 * (a + b)
            g = bad_metric(spec, mid)
            eta = 0.5 * (vectors[i] + vectors[(i + 1) % len(loop)])
            eta = eta / np.sqrt(eta @ g @ eta)
            seg = b - a
            value += float(eta @ g @ field_fn(mid)) * float(np.sqrt(seg @ g @ seg))
    perimeter = 2.0 * np.pi * 1.0
    name = "flux_identity" + ("_fault" if fault_injection else "")
    return _row(name, abs(value), 0.05 * perimeter)


def run_all(seed: int = 0, fault_injection: bool = False) -> list[dict]:
    """Every invariant suite; the seed feeds the randomized checks via
    fixed offsets so identical seeds give identical rows."""
    del seed  # randomized checks use fixed seeds for reproducibility
    rows = [
        check_exp_group_law(),
        check_exp_closed_vs_series(),
        check_exp_liouville(),
        check_frame_orthonormal(),
        check_group_axioms(),
        check_metric_identity_at_base(),
        check_area_element(),
        check_metric_second_form(),
        check_christoffel(),
        check_geodesics(),
        check_isometries(),
        check_isometry_pullback(),
        check_coordinate_norms(),
        check_horizontal_decay(),
        check_eigenfield_norms(),
        check_mean_curvature_invariants(),
        check_orientation_coherence(),
        check_cylinder_routes(),
        check_flow_invariance(),
        check_profile_bound(),
        check_mu_selection(),
        check_area_gradient(),
        check_monotone_area_and_barriers(),
        check_flux_identity(fault_injection=fault_injection),
    ]
    return rows
