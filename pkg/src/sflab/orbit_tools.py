"""Fixed points and periodic orbits of the model maps.

Newton iteration runs in (ln|x|, y, z) coordinates: the orbits of
interest have x-values spanning many decades and Jacobian entries of
size x^(rho-1), and the logarithmic variable keeps the linear systems
well scaled.  Residuals reported to callers are always in the raw
coordinates.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import Marginal, NoConvergence, SignFlip
from .params import ReturnMapParams, SectionPoint, SECTION_HALF_WIDTH
from .return_map import jacobian_T1, xi_of_x

__all__ = [
    "OrbitRecord", "FixedPointFailure",
    "find_fixed_points_T1", "scan_fixed_points", "find_periodic_orbit",
    "classify_index", "index2_boundary_residual", "index2_boundary_c",
    "index2_region_test", "trace_formula_check", "ladder_constant",
    "ladder_seed", "orbit_jacobian_product", "orbits_to_csv", "orbit_to_dict",
]

NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 20
RESIDUAL_TOL = 1e-10
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class OrbitRecord:
    """A converged periodic orbit of the return map."""

    points: tuple
    multipliers: np.ndarray
    index: int
    residual: float
    branch: tuple

    def __post_init__(self):
        mult = np.asarray(self.multipliers, dtype=np.complex128)
        mult.setflags(write=False)
        object.__setattr__(self, "multipliers", mult)
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "branch", tuple(int(b) for b in self.branch))

    @property
    def period(self) -> int:
        return len(self.points)

    @property
    def x_values(self) -> np.ndarray:
        return np.array([p.x for p in self.points])


@dataclass(frozen=True)
class FixedPointFailure:
    k: int
    reason: str


def ladder_constant(params: ReturnMapParams) -> float:
    """Prefactor C of the fixed-point ladder x_k = C exp(-pi k / omega)."""
    return math.exp((2.0 * params.theta - math.pi) / (2.0 * params.omega))


def ladder_seed(params: ReturnMapParams, k: int) -> float:
    return ladder_constant(params) * math.exp(-math.pi * k / params.omega)


def _map_and_jac(packed, x, y, z, side, jac):
    kb = kernels.backend()
    out = np.empty(packed.m + 2)
    if side > 0:
        kb.t1_apply(packed, x, y, z, out)
        if jac is not None:
            kb.t1_jacobian(packed, x, y, z, jac)
    else:
        kb.t2_apply(packed, x, y, z, out)
        if jac is not None:
            kb.t2_jacobian(packed, x, y, z, jac)
    return out


def _raw_residual(packed, pts, branch):
    k = len(pts)
    worst = 0.0
    for i in range(k):
        img = _map_and_jac(packed, pts[i][0], pts[i][1], pts[i][2:], branch[i], None)
        worst = max(worst, float(np.max(np.abs(img - pts[(i + 1) % k]))))
    return worst


def _newton_orbit(params: ReturnMapParams, seed_pts, branch, residual_tol,
                  max_iter=NEWTON_MAX_ITER):
    """Damped Newton on the composed map minus identity in log-x variables.

    seed_pts: list of raw coordinate arrays (x, y, z...).  Returns the
    refined raw points and the raw residual.
    """
    packed = params.packed
    m = packed.m
    nb = m + 2
    k = len(seed_pts)
    branch = [int(b) for b in branch]

    state = np.empty(k * nb)
    for i, pt in enumerate(seed_pts):
        if pt[0] == 0.0 or (pt[0] > 0) != (branch[i] > 0):
            raise SignFlip(f"seed point {i} does not match its branch label")
        state[i * nb] = math.log(abs(pt[0]))
        state[i * nb + 1:(i + 1) * nb] = pt[1:]

    def unpack(vec):
        pts = []
        for i in range(k):
            w = vec[i * nb]
            pts.append(np.concatenate((
                [branch[i] * math.exp(w)], vec[i * nb + 1:(i + 1) * nb])))
        return pts

    def residual_vec(vec):
        pts = unpack(vec)
        F = np.empty(k * nb)
        for i in range(k):
            img = _map_and_jac(packed, pts[i][0], pts[i][1], pts[i][2:],
                               branch[i], None)
            nxt = pts[(i + 1) % k]
            if img[0] == 0.0 or (img[0] > 0) != (branch[(i + 1) % k] > 0):
                return None, pts  # sign flip along the cycle
            F[i * nb] = math.log(abs(img[0])) - math.log(abs(nxt[0]))
            F[i * nb + 1:(i + 1) * nb] = img[1:] - nxt[1:]
        return F, pts

    F, pts = residual_vec(state)
    if F is None:
        raise SignFlip("seed produces an image on the wrong side of the midline")
    fnorm = np.linalg.norm(F)

    for _ in range(max_iter):
        if fnorm < 1e-13:
            break
        Jfull = np.zeros((k * nb, k * nb))
        for i in range(k):
            jac = np.empty((nb, nb))
            img = _map_and_jac(packed, pts[i][0], pts[i][1], pts[i][2:],
                               branch[i], jac)
            blk = jac.copy()
            blk[0, :] /= img[0]          # d ln|x'| rows
            blk[:, 0] *= pts[i][0]       # d/d ln|x| columns
            rows = slice(i * nb, (i + 1) * nb)
            Jfull[rows, rows] = blk
            nxt = (i + 1) % k
            cols = slice(nxt * nb, (nxt + 1) * nb)
            Jfull[rows, cols] -= np.eye(nb)
        try:
            step = np.linalg.solve(Jfull, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton system: {exc}") from exc

        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            trial = state + lam * step
            Ft, pts_t = residual_vec(trial)
            if Ft is not None and np.all(np.isfinite(Ft)):
                fn_t = np.linalg.norm(Ft)
                if fn_t < fnorm:
                    state, F, pts, fnorm = trial, Ft, pts_t, fn_t
                    break
            lam *= 0.5
        else:
            raise NoConvergence("Newton stalled: no residual decrease after damping")
    else:
        raise NoConvergence(f"Newton did not converge in {max_iter} iterations")

    raw = _raw_residual(packed, pts, branch)
    if raw > residual_tol:
        raise NoConvergence(f"converged residual {raw:.3e} above tolerance {residual_tol:.1e}")
    return pts, raw


def orbit_jacobian_product(params: ReturnMapParams, pts, branch) -> np.ndarray:
    """Product of single-step Jacobians along the orbit, last step first."""
    packed = params.packed
    nb = packed.m + 2
    prod = np.eye(nb)
    for i, pt in enumerate(pts):
        jac = np.empty((nb, nb))
        _map_and_jac(packed, pt[0], pt[1], pt[2:], branch[i], jac)
        prod = jac @ prod
    return prod


def classify_index(multipliers, marginal_tol: float = MARGINAL_TOL) -> int:
    """Count multipliers outside the unit circle.

    Raises :class:`Marginal` when any modulus is within ``marginal_tol``
    of 1: the orbit sits at a bifurcation and has no well-defined index.
    """
    mods = np.abs(np.asarray(multipliers, dtype=np.complex128))
    if np.any(np.abs(mods - 1.0) <= marginal_tol):
        raise Marginal("a multiplier lies on the unit circle within tolerance")
    return int(np.sum(mods > 1.0))


def _record_from_points(params, pts, branch, raw):
    mult = np.linalg.eigvals(orbit_jacobian_product(params, pts, branch))
    mult = mult[np.argsort(-np.abs(mult))]
    idx = classify_index(mult)
    points = tuple(SectionPoint.from_array(pt) for pt in pts)
    return OrbitRecord(points, mult, idx, raw, tuple(branch))


def find_periodic_orbit(params: ReturnMapParams, period: int, seed, branch,
                        residual_tol: float = RESIDUAL_TOL) -> OrbitRecord:
    """Refine a periodic orbit from per-point seeds.

    ``seed`` is a sequence of ``period`` section points (or raw arrays);
    ``branch`` gives the side (+1/-1) of each point.  Raises
    :class:`NoConvergence` or :class:`SignFlip` on failure.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    seed_pts = [p.as_array() if isinstance(p, SectionPoint) else np.asarray(p, float)
                for p in seed]
    if len(seed_pts) != period or len(branch) != period:
        raise ValueError("seed and branch must have length equal to the period")
    pts, raw = _newton_orbit(params, seed_pts, branch, residual_tol)
    return _record_from_points(params, pts, branch, raw)


def scan_fixed_points(params: ReturnMapParams, k_min: int, k_max: int,
                      residual_tol: float = RESIDUAL_TOL):
    """Newton-refine the ladder of upper-branch fixed points for k in
    [k_min, k_max].

    Seeds follow x_k = C exp(-pi k/omega) with y = 1, z = z+.  A root is
    accepted only if it stays inside the seed's own winding (within half
    the ladder spacing in ln x); everything else is reported as a
    failure, which at mu != 0 is how pruned non-survivors show up.
    Returns ``(records, failures)``.
    """
    if k_min > k_max:
        raise ValueError("k_min must not exceed k_max")
    if ladder_seed(params, k_min) >= SECTION_HALF_WIDTH:
        raise ValueError("k_min too small: seed lies outside the section")
    if ladder_seed(params, k_max) < 1e-300:
        raise ValueError("k_max too large: seed underflows")

    records, failures = [], []
    basin = math.pi / (2.0 * params.omega)
    for k in range(k_min, k_max + 1):
        x_seed = ladder_seed(params, k)
        seed = np.concatenate(([x_seed, 1.0], np.asarray(params.z_plus)))
        try:
            pts, raw = _newton_orbit(params, [seed], [1], residual_tol)
        except (NoConvergence, SignFlip) as exc:
            failures.append(FixedPointFailure(k, type(exc).__name__))
            continue
        x_root = pts[0][0]
        if x_root <= 0.0 or abs(math.log(x_root) - math.log(x_seed)) > basin:
            failures.append(FixedPointFailure(k, "left_seed_basin"))
            continue
        try:
            records.append(_record_from_points(params, pts, [1], raw))
        except Marginal:
            failures.append(FixedPointFailure(k, "Marginal"))
    return records, failures


def find_fixed_points_T1(params: ReturnMapParams, k_min: int, k_max: int) -> list:
    """Converged upper-branch fixed points for the given ladder range."""
    records, _ = scan_fixed_points(params, k_min, k_max)
    return records


def index2_boundary_residual(lambda_sum: float, lambda_prod: float, c: float) -> float:
    """Residual of the index-2 boundary relation sum = c * (prod + 1)."""
    if not -1.0 < c < 1.0:
        raise ValueError("c must lie in (-1, 1)")
    return lambda_sum - c * (lambda_prod + 1.0)


def index2_boundary_c(lambda_sum: float, lambda_prod: float) -> float:
    """Boundary coefficient c* = sum / (prod + 1); prod = -1 is excluded."""
    if lambda_prod == -1.0:
        raise ValueError("boundary coefficient undefined at product -1")
    return lambda_sum / (lambda_prod + 1.0)


def index2_region_test(lambda_sum: float, lambda_prod: float) -> bool:
    """True when a real 2x2 block with this trace/determinant has both
    eigenvalues off and outside the unit circle (|prod| > 1 and
    |sum| < |prod + 1|)."""
    return abs(lambda_prod) > 1.0 and abs(lambda_sum) < abs(lambda_prod + 1.0)


def trace_formula_check(orbit: OrbitRecord, params: ReturnMapParams):
    """Compare the Jacobian-product trace with its leading-order model.

    The leading term is A^k (rho^2+omega^2)^(k/2) * prod_i x_i^(rho-1)
    * prod_i cos(xi_i - phi) with phi = arctan(omega/rho).  Returns
    (computed, predicted).
    """
    if any(b <= 0 for b in orbit.branch):
        raise ValueError("trace formula applies to upper-branch orbits only")
    pts = [p.as_array() for p in orbit.points]
    computed = float(np.trace(orbit_jacobian_product(params, pts, orbit.branch)))

    phi = math.atan2(params.omega, params.rho)
    k = orbit.period
    predicted = params.A ** k * (params.rho ** 2 + params.omega ** 2) ** (k / 2.0)
    for p in orbit.points:
        predicted *= p.x ** (params.rho - 1.0)
        predicted *= math.cos(xi_of_x(p.x, params).xi - phi)
    return computed, predicted


# ---------------------------------------------------------------------------
# serialization

def orbit_to_dict(rec: OrbitRecord) -> dict:
    return {
        "period": rec.period,
        "branch": "".join("1" if b > 0 else "2" for b in rec.branch),
        "points": [[p.x, p.y, *p.z.tolist()] for p in rec.points],
        "multipliers": [[z.real, z.imag] for z in rec.multipliers],
        "index": rec.index,
        "residual": rec.residual,
    }


def orbits_to_csv(records, fh) -> None:
    """Write orbit records as CSV.

    Columns: period, branch, then per-point x_i, y_i, z_i_j, then
    multiplier_re_i / multiplier_im_i, then index and residual.  The
    column count follows the largest period in the list; shorter rows
    leave the extra cells empty.
    """
    close = False
    if isinstance(fh, (str, bytes)):
        fh = open(fh, "w", newline="")
        close = True
    try:
        recs = list(records)
        pmax = max((r.period for r in recs), default=1)
        zdim = recs[0].points[0].z.shape[0] if recs else 1
        nmult = max((len(r.multipliers) for r in recs), default=zdim + 2)
        header = ["period", "branch"]
        header += [f"x_{i}" for i in range(pmax)]
        header += [f"y_{i}" for i in range(pmax)]
        header += [f"z_{i}_{j}" for i in range(pmax) for j in range(zdim)]
        header += [f"multiplier_re_{i}" for i in range(nmult)]
        header += [f"multiplier_im_{i}" for i in range(nmult)]
        header += ["index", "residual"]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in recs:
            row = [r.period, "".join("1" if b > 0 else "2" for b in r.branch)]
            row += [repr(p.x) for p in r.points] + [""] * (pmax - r.period)
            row += [repr(p.y) for p in r.points] + [""] * (pmax - r.period)
            zcells = [repr(float(p.z[j])) for p in r.points for j in range(zdim)]
            row += zcells + [""] * ((pmax - r.period) * zdim)
            row += [repr(z.real) for z in r.multipliers] + [""] * (nmult - len(r.multipliers))
            row += [repr(z.imag) for z in r.multipliers] + [""] * (nmult - len(r.multipliers))
            row += [r.index, repr(r.residual)]
            w.writerow(row)
    finally:
        if close:
            fh.close()


def orbits_to_csv_text(records) -> str:
    buf = io.StringIO()
    orbits_to_csv(records, buf)
    return buf.getvalue()


def orbits_to_json(records) -> str:
    return json.dumps([orbit_to_dict(r) for r in records], indent=2)
