"""Model half-maps on the cross-section, their Jacobians, and the
logarithmic phase coordinate.

The upper half-map (x >= 0) sends (x, y, z) to

    x' = mu + A  y x^rho cos(omega ln(1/x) + theta)   + r(x, y, z)
    y' = 1  + A1 y x^rho cos(omega ln(1/x) + theta1)  + r(x, y, z)
    z' = z+ + Az y x^rho cos(omega ln(1/x) + theta_z) + r(x, y, z)

with the continuous extension (x=0) -> (mu, 1, z+).  The lower half-map
(x <= 0) is the mirror image: x' gets a global minus sign and the
z-block is multiplied by the involution S, with (x=0) -> (-mu, 1, S z+).
The remainder r is supplied by the small-term model of the parameter
record.  All operations are pure functions of immutable inputs.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import DomainError
from .params import ReturnMapParams, SectionPoint, XiCoordinate

__all__ = [
    "apply_T1", "apply_T2", "apply_T",
    "jacobian_T1", "jacobian_T2", "jacobian",
    "xi_of_x", "x_of_xi", "check_nondegeneracy",
]

_TWO_PI = 2.0 * math.pi


def _check_point(p: SectionPoint, params: ReturnMapParams) -> None:
    if p.z.shape[0] != params.zdim:
        raise DomainError(
            f"point has z-dimension {p.z.shape[0]}, parameters expect {params.zdim}"
        )


def _finite_or_raise(out: np.ndarray) -> None:
    if not np.all(np.isfinite(out)):
        raise OverflowError("map image is not finite")


def apply_T1(p: SectionPoint, params: ReturnMapParams) -> SectionPoint:
    """Apply the upper half-map; requires p.x >= 0."""
    _check_point(p, params)
    if p.x < 0.0:
        raise DomainError("apply_T1 requires x >= 0")
    out = np.empty(params.n - 1)
    kernels.backend().t1_apply(params.packed, p.x, p.y, p.z, out)
    _finite_or_raise(out)
    return SectionPoint.from_array(out)


def apply_T2(p: SectionPoint, params: ReturnMapParams) -> SectionPoint:
    """Apply the lower half-map; requires p.x <= 0."""
    _check_point(p, params)
    if p.x > 0.0:
        raise DomainError("apply_T2 requires x <= 0")
    out = np.empty(params.n - 1)
    kernels.backend().t2_apply(params.packed, p.x, p.y, p.z, out)
    _finite_or_raise(out)
    return SectionPoint.from_array(out)


def apply_T(p: SectionPoint, params: ReturnMapParams) -> SectionPoint:
    """Full return map: dispatches on the sign of x (x = 0 maps with the
    upper branch)."""
    return apply_T1(p, params) if p.x >= 0.0 else apply_T2(p, params)


def jacobian_T1(p: SectionPoint, params: ReturnMapParams) -> np.ndarray:
    """Analytic Jacobian of the upper half-map; requires p.x > 0.

    The derivative blows up like x^(rho-1) as x -> 0+, so the midline is
    excluded.
    """
    _check_point(p, params)
    if p.x <= 0.0:
        raise DomainError("jacobian_T1 requires x > 0")
    jac = np.empty((params.n - 1, params.n - 1))
    kernels.backend().t1_jacobian(params.packed, p.x, p.y, p.z, jac)
    return jac


def jacobian_T2(p: SectionPoint, params: ReturnMapParams) -> np.ndarray:
    """Analytic Jacobian of the lower half-map; requires p.x < 0."""
    _check_point(p, params)
    if p.x >= 0.0:
        raise DomainError("jacobian_T2 requires x < 0")
    jac = np.empty((params.n - 1, params.n - 1))
    kernels.backend().t2_jacobian(params.packed, p.x, p.y, p.z, jac)
    return jac


def jacobian(p: SectionPoint, params: ReturnMapParams) -> np.ndarray:
    """Jacobian of the full map away from the midline."""
    if p.x == 0.0:
        raise DomainError("Jacobian undefined at x = 0")
    return jacobian_T1(p, params) if p.x > 0.0 else jacobian_T2(p, params)


def xi_of_x(x: float, params: ReturnMapParams) -> XiCoordinate:
    """Split omega*ln(1/x) + theta into 2*pi*j + xi with xi in [0, 2*pi).

    Valid for 0 < x < 1 (and x small enough that the winding number j is
    non-negative when theta < 0).
    """
    if not 0.0 < x < 1.0:
        raise DomainError("xi coordinate requires 0 < x < 1")
    v = params.omega * math.log(1.0 / x) + params.theta
    j = math.floor(v / _TWO_PI)
    xi = v - _TWO_PI * j
    if xi >= _TWO_PI:  # guard the floating roll-over at exact multiples
        xi -= _TWO_PI
        j += 1
    if j < 0:
        raise DomainError("x too close to 1 for this theta: winding would be negative")
    return XiCoordinate(int(j), xi)


def x_of_xi(coord: XiCoordinate, params: ReturnMapParams) -> float:
    """Inverse of :func:`xi_of_x`."""
    if not 0.0 <= coord.xi < _TWO_PI:
        raise DomainError("xi must lie in [0, 2*pi)")
    return math.exp(-(_TWO_PI * coord.j + coord.xi - params.theta) / params.omega)


def check_nondegeneracy(params: ReturnMapParams) -> float:
    """A * A1 * sin(theta1 - theta); callers treat values near zero as a
    degenerate coefficient set."""
    return params.A * params.A1 * math.sin(params.theta1 - params.theta)
