"""Local invariant-manifold approximations on the cross-section.

Covers the unstable spiral of an upper-branch fixed point, linear
strong-stable leaf models built by backward cone iteration, the leaf
through the mirrored primary return point, level models of the stable
surfaces of the fixed-point ladder, and a singular-value test for
quasi-transversality of tangent configurations.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConeViolation, DomainError
from .orbit_tools import ladder_constant, ladder_seed
from .params import (ReturnMapParams, SectionPoint, SECTION_HALF_WIDTH,
                     small_term_value)
from .return_map import apply_T, jacobian, jacobian_T1

__all__ = [
    "SpiralCurve", "LeafModel", "StableSurface",
    "eval_unstable_spiral", "spiral_tangent", "build_leaf",
    "wss_of_M_minus", "quasi_transversality", "stable_surface_of_Pk",
    "spiral_to_csv", "leaf_to_csv",
]


@dataclass(frozen=True)
class SpiralCurve:
    """Local unstable curve of an upper-branch fixed point, parameterized
    by t in (0, x_p) where x_p is the base x-coordinate."""

    base: SectionPoint
    params: ReturnMapParams

    def __post_init__(self):
        if self.base.x <= 0.0:
            raise ValueError("spiral base must have x > 0")

    @property
    def x_p(self) -> float:
        return self.base.x


def eval_unstable_spiral(s: SpiralCurve, t: float) -> SectionPoint:
    """Point of the unstable spiral at parameter t in (0, x_p).

    Written out explicitly (rather than delegating to the map kernels)
    so the construction-consistency test exercises two code paths: the
    spiral is the image under the upper half-map of the vertical segment
    through the base point, and this routine evaluates that image from
    the closed-form expression.
    """
    p = s.params
    if not 0.0 < t < s.x_p:
        raise DomainError("spiral parameter must lie in (0, x_p)")
    c = p.omega * math.log(1.0 / t)
    tr = t ** p.rho
    y_p = s.base.y
    g = small_term_value(p, t, y_p, s.base.z)
    x = p.mu + p.A * y_p * tr * math.cos(c + p.theta) + g
    y = 1.0 + p.A1 * y_p * tr * math.cos(c + p.theta1) + g
    z = np.asarray(p.z_plus) + np.asarray(p.A_z) * y_p * tr * np.cos(
        c + np.asarray(p.theta_z)) + g
    return SectionPoint(x, y, z)


def spiral_tangent(s: SpiralCurve, t: float, normalize: bool = True) -> np.ndarray:
    """Tangent vector of the spiral at parameter t (derivative of the
    half-map image along the vertical segment through the base)."""
    if not 0.0 < t < s.x_p:
        raise DomainError("spiral parameter must lie in (0, x_p)")
    col = jacobian_T1(SectionPoint(t, s.base.y, s.base.z), s.params)[:, 0]
    if normalize:
        col = col / np.linalg.norm(col)
    return col


@dataclass(frozen=True)
class LeafModel:
    """Linear model of a strong-stable leaf through ``base``:
    (x, y) = (x0 + a1.(z - z0), y0 + a2.(z - z0))."""

    base: SectionPoint
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def point_at(self, z) -> SectionPoint:
        dz = np.atleast_1d(np.asarray(z, dtype=np.float64)) - self.base.z
        return SectionPoint(self.base.x + float(self.a1 @ dz),
                            self.base.y + float(self.a2 @ dz),
                            z)

    def x_at(self, z) -> float:
        return self.point_at(z).x

    def y_at(self, z) -> float:
        return self.point_at(z).y

    def tangent_columns(self, normalize: bool = True) -> np.ndarray:
        """(n-1) x (n-3) matrix of leaf tangent directions."""
        m = self.a1.shape[0]
        cols = np.vstack((self.a1, self.a2, np.eye(m)))
        if normalize:
            cols = cols / np.linalg.norm(cols, axis=0, keepdims=True)
        return cols


def build_leaf(base: SectionPoint, params: ReturnMapParams,
               cone_k: float = 1.0, tol: float = 1e-10,
               max_steps: int = 10) -> LeafModel:
    """Strong-stable leaf coefficients at ``base`` by backward cone
    iteration.

    The z-plane at the end of a forward orbit segment is pulled back
    through the inverse Jacobians; the (x, y)-rows of the normalized
    pullback are the leaf coefficients.  Iteration depth grows until the
    coefficients stabilize to ``tol``.  With the zero small-term model
    the z-columns of the Jacobian vanish identically and the leaf is the
    exact vertical plane (a1 = a2 = 0).
    """
    if base.x == 0.0:
        raise DomainError("leaf base must have |x| > 0")
    m = params.zdim
    if params.small_terms.is_zero:
        return LeafModel(base, np.zeros(m), np.zeros(m))

    def pullback(depth):
        # forward orbit of length `depth`
        pts = [base]
        for _ in range(depth):
            nxt = apply_T(pts[-1], params)
            if nxt.x == 0.0 or abs(nxt.x) > 2.0 * SECTION_HALF_WIDTH:
                break
            pts.append(nxt)
        V = np.vstack((np.zeros((2, m)), np.eye(m)))
        for pt in reversed(pts):
            J = jacobian(pt, params)
            W = np.linalg.solve(J, V)
            zblk = W[2:, :]
            try:
                V = W @ np.linalg.inv(zblk)
            except np.linalg.LinAlgError as exc:
                raise ConeViolation(f"degenerate z-block in pullback: {exc}") from exc
            xy = np.linalg.norm(V[:2, :], axis=0)
            if np.any(xy > cone_k):
                raise ConeViolation(
                    "pullback left the cone |dx,dy| <= K |dz|; base x too large")
        return V[0, :].copy(), V[1, :].copy()

    a1_prev, a2_prev = pullback(1)
    for depth in range(2, max_steps + 1):
        a1, a2 = pullback(depth)
        if (np.max(np.abs(a1 - a1_prev)) < tol
                and np.max(np.abs(a2 - a2_prev)) < tol):
            return LeafModel(base, a1, a2)
        a1_prev, a2_prev = a1, a2
    return LeafModel(base, a1_prev, a2_prev)


def wss_of_M_minus(params: ReturnMapParams, **kw) -> LeafModel:
    """Strong-stable leaf through the mirrored primary return point
    (-mu, 1, S z+); requires mu != 0."""
    if params.mu == 0.0:
        raise DomainError("the mirrored return point needs mu != 0")
    base = SectionPoint(-params.mu, 1.0,
                        np.asarray(params.involution) * np.asarray(params.z_plus))
    return build_leaf(base, params, **kw)


def quasi_transversality(tangentA: np.ndarray, tangentB: np.ndarray,
                         threshold: float = 1e-8):
    """Smallest singular value of the stacked tangent columns.

    Returns ``(is_qt, min_singular)``: quasi-transverse when the two
    spans meet only at zero, i.e. their dimensions sum to at most the
    ambient dimension and the stacked column matrix has full rank with a
    singular-value gap above ``threshold``.
    """
    A = np.atleast_2d(np.asarray(tangentA, dtype=np.float64))
    B = np.atleast_2d(np.asarray(tangentB, dtype=np.float64))
    if A.shape[0] == 1:
        A = A.T
    if B.shape[0] == 1:
        B = B.T
    if A.shape[0] != B.shape[0]:
        raise ValueError("tangent matrices must share the ambient dimension")
    stacked = np.hstack((A, B))
    smin = float(np.linalg.svd(stacked, compute_uv=False)[-1])
    is_qt = (A.shape[1] + B.shape[1] <= A.shape[0]) and smin > threshold
    return is_qt, smin


@dataclass(frozen=True)
class StableSurface:
    """Level model x ~ level of the local stable surface of a ladder
    fixed point, with a sampled thickness bound."""

    k: int
    level: float
    thickness: float


def stable_surface_of_Pk(params: ReturnMapParams, k: int,
                         grid: int = 5) -> StableSurface:
    """Level and thickness of the stable surface of the k-th ladder point.

    The surface is sampled as the preimage of the slab {x = x_k} under
    the upper half-map over a (y, z) grid; the thickness is the largest
    deviation of the sampled preimage from the ladder level.
    """
    level = ladder_seed(params, k)
    if not 0.0 < level < SECTION_HALF_WIDTH:
        raise DomainError("ladder level outside the section; adjust k")
    half = math.pi / (2.0 * params.omega)
    lo, hi = level * math.exp(-half), level * math.exp(half)
    packed = params.packed
    m = params.zdim

    def x_image(x, y, z):
        out = np.empty(m + 2)
        from . import kernels
        kernels.backend().t1_apply(packed, x, y, z, out)
        return out[0]

    ys = np.linspace(0.95, 1.05, grid)
    zs = np.linspace(-0.05, 0.05, grid)
    worst = 0.0
    for y in ys:
        for zv in zs:
            z = np.full(m, zv)
            f = lambda x: x_image(x, y, z) - level
            try:
                root = brentq(f, lo, hi, xtol=1e-16, rtol=8.9e-16)
            except ValueError:
                continue  # no crossing in this winding at extreme grid corners
            worst = max(worst, abs(root - level))
    return StableSurface(k, level, worst)


# ---------------------------------------------------------------------------
# CSV export of samplings for external plotting

def spiral_to_csv(s: SpiralCurve, ts, fh) -> None:
    close = isinstance(fh, (str, bytes))
    if close:
        fh = open(fh, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y"] + [f"z_{j}" for j in range(s.params.zdim)])
        for t in ts:
            pt = eval_unstable_spiral(s, t)
            w.writerow([repr(float(t)), repr(pt.x), repr(pt.y)]
                       + [repr(float(v)) for v in pt.z])
    finally:
        if close:
            fh.close()


def leaf_to_csv(leaf: LeafModel, zs, fh) -> None:
    close = isinstance(fh, (str, bytes))
    if close:
        fh = open(fh, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        m = leaf.a1.shape[0]
        w.writerow([f"z_{j}" for j in range(m)] + ["x", "y"])
        for z in zs:
            pt = leaf.point_at(z)
            w.writerow([repr(float(v)) for v in np.atleast_1d(z)]
                       + [repr(pt.x), repr(pt.y)])
    finally:
        if close:
            fh.close()
