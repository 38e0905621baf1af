"""Three-dimensional semidirect products of the plane with the line.

The group lives on R^3 with coordinates (x, y, z) and multiplication

    (p1, z1) * (p2, z2) = (p1 + exp(z1*A) p2, z1 + z2),

where A is a real 2x2 matrix.  Two normalized families cover every case up
to isometry and rescaling: trace(A) = 0 (unimodular) and trace(A) = 2
(non-unimodular), the latter parameterized by a pair (alpha, beta) of
non-negative reals.  This module holds the group spec, the matrix
exponential z -> exp(z*A) (closed form in the non-unimodular case), the
group operation, and the left/right invariant frames.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

_D_BRANCH_TOL = 1e-9  # |det(A) - 1| below this selects the degenerate branch


class GroupSpecError(ValueError):
    """Invalid data for building a group spec."""


class NonZeroTrace(GroupSpecError):
    """Unimodular constructor got a matrix with nonzero trace."""


class NegativeParameter(GroupSpecError):
    """alpha or beta outside [0, inf)."""


@dataclass(frozen=True)
class GroupSpec:
    """Defining matrix of a semidirect product plus its classification.

    ``matrix`` is the 2x2 matrix A; ``unimodular`` records whether
    trace(A) = 0 (otherwise the matrix is the normalized trace-2 form built
    from ``alpha``, ``beta``).  Instances are immutable; build them with
    :func:`unimodular_spec`, :func:`nonunimodular_spec` or
    :func:`spec_from_dict`.
    """

    matrix: np.ndarray
    unimodular: bool
    alpha: float | None = None
    beta: float | None = None
    # Cached entries, filled in __post_init__.
    a: float = field(init=False, default=0.0)
    b: float = field(init=False, default=0.0)
    c: float = field(init=False, default=0.0)
    d: float = field(init=False, default=0.0)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise GroupSpecError(f"matrix must be 2x2, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "a", float(m[0, 0]))
        object.__setattr__(self, "b", float(m[0, 1]))
        object.__setattr__(self, "c", float(m[1, 0]))
        object.__setattr__(self, "d", float(m[1, 1]))

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def d_invariant(self) -> float:
        """det(A); equals (1-alpha^2)(1+beta^2) in the non-unimodular case."""
        return self.a * self.d - self.b * self.c

    def to_dict(self) -> dict:
        if self.unimodular:
            return {"mode": "unimodular", "matrix": self.matrix.tolist()}
        return {"mode": "non_unimodular", "alpha": self.alpha, "beta": self.beta}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def unimodular_spec(matrix) -> GroupSpec:
    """Spec for a trace-zero matrix, kept entry-by-entry as given.

    The named unimodular examples (A = 0, the nilpotent [[0,1],[0,0]],
    diag(1,-1), rotation-like [[0,-c],[1/c,0]]) are preserved verbatim; no
    canonicalization is applied.  Raises :class:`NonZeroTrace` unless
    trace(A) = 0 (entries are snapped when the trace is zero up to 1e-12
    relative so that a + d = 0 holds exactly).
    """
    m = np.array(matrix, dtype=float)
    if m.shape != (2, 2):
        raise GroupSpecError(f"matrix must be 2x2, got shape {m.shape}")
    scale = max(1.0, np.abs(m).max())
    tr = m[0, 0] + m[1, 1]
    if abs(tr) > 1e-12 * scale:
        raise NonZeroTrace(f"unimodular spec requires trace 0, got {tr}")
    m[1, 1] = -m[0, 0]
    return GroupSpec(matrix=m, unimodular=True)


def nonunimodular_spec(alpha: float, beta: float) -> GroupSpec:
    """Normalized trace-2 spec built from the pair (alpha, beta) >= 0.

    The matrix is [[1+alpha, -(1-alpha)*beta], [(1+alpha)*beta, 1-alpha]],
    with determinant (1-alpha^2)(1+beta^2).
    """
    if alpha < 0 or beta < 0:
        raise NegativeParameter(f"alpha and beta must be >= 0, got {alpha}, {beta}")
    m = np.array(
        [[1.0 + alpha, -(1.0 - alpha) * beta], [(1.0 + alpha) * beta, 1.0 - alpha]]
    )
    return GroupSpec(matrix=m, unimodular=False, alpha=float(alpha), beta=float(beta))


def normalize_spec(matrix=None, mode: str = "unimodular", alpha=None, beta=None) -> GroupSpec:
    """Build a spec from raw data in either mode.

    ``mode="unimodular"`` takes the raw matrix (trace must vanish);
    ``mode="non_unimodular"`` takes (alpha, beta) directly.
    """
    if mode == "unimodular":
        if matrix is None:
            raise GroupSpecError("unimodular mode requires a matrix")
        return unimodular_spec(matrix)
    if mode == "non_unimodular":
        if alpha is None or beta is None:
            raise GroupSpecError("non_unimodular mode requires alpha and beta")
        return nonunimodular_spec(alpha, beta)
    raise GroupSpecError(f"unknown mode {mode!r}")


def spec_from_dict(data: dict) -> GroupSpec:
    """Inverse of :meth:`GroupSpec.to_dict`; the CLI config contract."""
    mode = data.get("mode")
    if mode == "unimodular":
        return unimodular_spec(data["matrix"])
    if mode == "non_unimodular":
        return nonunimodular_spec(data["alpha"], data["beta"])
    raise GroupSpecError(f"unknown spec mode {mode!r}")


def spec_from_json(text: str) -> GroupSpec:
    return spec_from_dict(json.loads(text))


def milnor_d(spec: GroupSpec) -> float:
    """det(A), the invariant separating the non-unimodular group structures."""
    return spec.d_invariant


def beta_floor(d_invariant: float) -> float:
    """Least beta compatible with a prescribed determinant at trace 2.

    Solving (1-alpha^2)(1+beta^2) = D for alpha requires
    beta >= sqrt(D-1) when D > 1 and admits every beta >= 0 otherwise.
    Helper only; no experiment consumes it.
    """
    return float(np.sqrt(d_invariant - 1.0)) if d_invariant > 1.0 else 0.0


def _cd_sd(d_invariant: float, z: float) -> tuple[float, float]:
    """The pair (C, S) solving C' = (1-D) S, S' = C with C(0)=1, S(0)=0."""
    w2 = 1.0 - d_invariant
    if abs(d_invariant - 1.0) < _D_BRANCH_TOL:
        return 1.0, z
    if w2 > 0.0:
        w = np.sqrt(w2)
        return float(np.cosh(w * z)), float(np.sinh(w * z) / w)
    w = np.sqrt(-w2)
    return float(np.cos(w * z)), float(np.sin(w * z) / w)


def _expm_squaring(m: np.ndarray, tol: float = 1e-13, max_terms: int = 40) -> np.ndarray:
    """Dense exponential of a small matrix: scaling and squaring over a
    truncated power series."""
    norm = np.abs(m).sum(axis=1).max()
    n_sq = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0)
    b = m / (2.0 ** n_sq)
    result = np.eye(2)
    term = np.eye(2)
    for k in range(1, max_terms + 1):
        term = term @ b / k
        result = result + term
        if np.abs(term).max() < tol * np.abs(result).max():
            break
    for _ in range(n_sq):
        result = result @ result
    return result


def exp_zA(spec: GroupSpec, z: float) -> np.ndarray:
    """exp(z*A) as a 2x2 array.

    Non-unimodular specs use the closed form
    e^z [C(z) I + S(z) (A - I)] with the three det-branches of (C, S);
    unimodular specs fall back to scaling-and-squaring.
    """
    if spec.unimodular:
        return _expm_squaring(z * spec.matrix)
    c, s = _cd_sd(spec.d_invariant, z)
    return np.exp(z) * (c * np.eye(2) + s * (spec.matrix - np.eye(2)))


def exp_zA_series(matrix, z: float, rel_tol: float = 1e-16, max_terms: int = 60) -> np.ndarray:
    """Raw truncated power series sum (z*A)^k / k!.

    Independent oracle for :func:`exp_zA`: terms are added until the next
    term's max-norm drops below ``rel_tol`` times the accumulated norm,
    capped at ``max_terms``.
    """
    b = z * np.array(matrix, dtype=float)
    result = np.eye(2)
    term = np.eye(2)
    for k in range(1, max_terms + 1):
        term = term @ b / k
        result = result + term
        if np.abs(term).max() < rel_tol * np.abs(result).max():
            break
    return result


def exp_zA_many(spec: GroupSpec, zs: np.ndarray) -> np.ndarray:
    """Vectorized exp(z*A) for an array of z values, shape (..., 2, 2).

    Uses the trace/determinant closed form valid for every 2x2 matrix
    (the spec's trace fixes the discriminant sign once per spec), so it is
    branch-stable and fast inside mesh loops.  Agrees with :func:`exp_zA`
    to machine precision.
    """
    zs = np.asarray(zs, dtype=float)
    half_tr = 0.5 * spec.trace
    disc = half_tr * half_tr - spec.d_invariant
    t = zs[..., None, None]
    dev = spec.matrix - half_tr * np.eye(2)  # trace-free part
    if abs(disc) < _D_BRANCH_TOL:
        cm = np.ones_like(zs)[..., None, None]
        sm = zs[..., None, None]
    elif disc > 0.0:
        w = np.sqrt(disc)
        cm = np.cosh(w * t)
        sm = np.sinh(w * t) / w
    else:
        w = np.sqrt(-disc)
        cm = np.cos(w * t)
        sm = np.sin(w * t) / w
    return np.exp(half_tr * t) * (cm * np.eye(2) + sm * dev)


def identity_point() -> np.ndarray:
    return np.zeros(3)


def multiply(spec: GroupSpec, p, q) -> np.ndarray:
    """Group product (p_xy + exp(z_p*A) q_xy, z_p + z_q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.empty(3)
    out[:2] = p[:2] + exp_zA(spec, p[2]) @ q[:2]
    out[2] = p[2] + q[2]
    return out


def inverse(spec: GroupSpec, p) -> np.ndarray:
    """Group inverse (-exp(-z*A) p_xy, -z)."""
    p = np.asarray(p, dtype=float)
    out = np.empty(3)
    out[:2] = -exp_zA(spec, -p[2]) @ p[:2]
    out[2] = -p[2]
    return out


def left_frame(spec: GroupSpec, p) -> np.ndarray:
    """Columns are the left-invariant orthonormal frame at p in the
    coordinate basis: columns 0,1 are the columns of exp(z*A) acting on
    (dx, dy); column 2 is the vertical direction."""
    z = np.asarray(p, dtype=float)[2]
    frame = np.eye(3)
    frame[:2, :2] = exp_zA(spec, z)
    return frame


def right_frame(spec: GroupSpec, p) -> np.ndarray:
    """Columns are the right-invariant fields at p: the two horizontal
    coordinate fields and (a x + b y, c x + d y, 1)."""
    p = np.asarray(p, dtype=float)
    frame = np.eye(3)
    frame[0, 2] = spec.a * p[0] + spec.b * p[1]
    frame[1, 2] = spec.c * p[0] + spec.d * p[1]
    return frame


def project_pi(p) -> np.ndarray:
    """Vertical projection (x, y, z) -> (x, y, 0)."""
    out = np.array(p, dtype=float)
    out[2] = 0.0
    return out
