"""Parameter records and section-point types for the model return maps.

The scaled half-maps act on a cross-section with coordinates (x, y, z)
where x is the signed transverse coordinate (x > 0 and x < 0 select the
two halves of the section, x = 0 is the trace of the local stable
manifold), y is close to 1 and z is an (n-3)-vector of strongly
contracted coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import DomainError

#: Half-width of the cross-section in scaled coordinates.  Keeps the
#: leading x**rho corrections well below 1 for rho >= 0.2.
SECTION_HALF_WIDTH = 0.1


class SmallTermKind(Enum):
    ZERO = "zero"
    SCALED_BUMP = "scaled_bump"


@dataclass(frozen=True)
class SmallTermModel:
    """Model for the subleading remainder added to every map component.

    ``ZERO`` evaluates to exactly 0 together with all derivatives, which
    makes the leading-order identities of the maps exactly testable.
    ``SCALED_BUMP`` evaluates to

        amplitude * x**(rho + exponent_margin) * cos(x + 2*y + sum(z)),

    a smooth term whose i-th x-derivative decays like
    x**(rho - i + exponent_margin), i.e. strictly faster than the
    leading x**(rho - i) scale of the maps.
    """

    kind: SmallTermKind = SmallTermKind.ZERO
    amplitude: float = 0.0
    exponent_margin: float = 0.1

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("small-term amplitude must be >= 0")
        if self.exponent_margin <= 0:
            raise ValueError("exponent margin must be > 0")
        if self.kind is SmallTermKind.ZERO and self.amplitude != 0.0:
            object.__setattr__(self, "amplitude", 0.0)

    @classmethod
    def zero(cls) -> "SmallTermModel":
        return cls(SmallTermKind.ZERO)

    @classmethod
    def scaled_bump(cls, amplitude: float, exponent_margin: float = 0.1) -> "SmallTermModel":
        return cls(SmallTermKind.SCALED_BUMP, amplitude, exponent_margin)

    @property
    def is_zero(self) -> bool:
        return self.kind is SmallTermKind.ZERO or self.amplitude == 0.0


def _as_readonly(vec, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(vec, dtype=np.float64)).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ReturnMapParams:
    """Coefficients of the scaled model half-maps.

    ``A``/``theta`` drive the x-image, ``A_side[0]``/``theta_side[0]``
    the y-image and the remaining side coefficients the z-image.  ``mu``
    is the splitting parameter, ``rho`` the saddle-index ratio, ``omega``
    the focal frequency, ``z_plus`` the z-coordinate of the primary
    return point and ``involution`` the sign vector of the symmetry
    acting on z.
    """

    A: float = 1.0
    A_side: tuple = (0.5, 0.25)
    theta: float = 0.0
    theta_side: tuple = (math.pi / 2, 0.3)
    mu: float = 0.0
    rho: float = 0.25
    omega: float = 1.0
    z_plus: tuple = (0.0,)
    involution: tuple = (-1.0,)
    small_terms: SmallTermModel = field(default_factory=SmallTermModel.zero)
    n: int = 4

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("dimension n must be >= 4")
        if not self.A > 0:
            raise ValueError("A must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if abs(self.mu) >= SECTION_HALF_WIDTH:
            raise ValueError("|mu| must be small compared to the section width")
        a_side = _as_readonly(self.A_side, "A_side")
        t_side = _as_readonly(self.theta_side, "theta_side")
        zp = _as_readonly(self.z_plus, "z_plus")
        sv = _as_readonly(self.involution, "involution")
        if a_side.shape[0] != self.n - 2 or t_side.shape[0] != self.n - 2:
            raise ValueError("A_side and theta_side must have length n-2")
        if zp.shape[0] != self.n - 3 or sv.shape[0] != self.n - 3:
            raise ValueError("z_plus and involution must have length n-3")
        if np.any(a_side <= 0):
            raise ValueError("side amplitudes must be positive")
        if not np.all(np.isin(sv, (-1.0, 1.0))):
            raise ValueError("involution entries must be +/-1")
        if not np.any(sv == -1.0):
            raise ValueError("involution must flip at least one z sign")
        object.__setattr__(self, "A_side", a_side)
        object.__setattr__(self, "theta_side", t_side)
        object.__setattr__(self, "z_plus", zp)
        object.__setattr__(self, "involution", sv)

    @property
    def A1(self) -> float:
        return float(self.A_side[0])

    @property
    def theta1(self) -> float:
        return float(self.theta_side[0])

    @property
    def A_z(self) -> np.ndarray:
        return self.A_side[1:]

    @property
    def theta_z(self) -> np.ndarray:
        return self.theta_side[1:]

    @property
    def zdim(self) -> int:
        return self.n - 3

    @cached_property
    def packed(self):
        """Flat numeric record consumed by the evaluation kernels."""
        from . import kernels

        kind = 0 if self.small_terms.is_zero else 1
        return kernels.make_packed(
            self.A, self.theta, self.A1, self.theta1,
            np.asarray(self.A_z), np.asarray(self.theta_z),
            self.mu, self.rho, self.omega,
            np.asarray(self.z_plus), np.asarray(self.involution),
            kind, self.small_terms.amplitude, self.small_terms.exponent_margin,
        )

    def with_(self, **kw) -> "ReturnMapParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class SectionPoint:
    """A point (x, y, z) on the cross-section."""

    x: float
    y: float
    z: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", _as_readonly(self.z, "z"))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("section point coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.x, self.y], self.z))

    @classmethod
    def from_array(cls, arr) -> "SectionPoint":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr[0], arr[1], arr[2:])

    @property
    def side(self) -> int:
        """+1 on the x>0 half, -1 on the x<0 half, 0 on the midline."""
        return 0 if self.x == 0.0 else (1 if self.x > 0 else -1)


@dataclass(frozen=True)
class XiCoordinate:
    """Winding number and phase of the logarithmic coordinate on x."""

    j: int
    xi: float


def small_term_value(params: ReturnMapParams, x: float, y: float, z) -> float:
    """Evaluate the remainder model at |x|, matching the kernels."""
    st = params.small_terms
    if st.is_zero or x == 0.0:
        return 0.0
    s = abs(x)
    b = math.cos(s + 2.0 * y + float(np.sum(z)))
    return st.amplitude * s ** (params.rho + st.exponent_margin) * b


def nondegeneracy_value(params: ReturnMapParams) -> float:
    """A * A1 * sin(theta1 - theta); zero means the map is degenerate."""
    return params.A * params.A1 * math.sin(params.theta1 - params.theta)


def check_map_conditions(params: ReturnMapParams, tol: float = 1e-12) -> dict:
    """Evaluate the standing conditions on the map coefficients.

    Returns a dict with the raw non-degeneracy value and booleans for the
    frequency, volume-expansion and symmetry requirements.
    """
    nd = nondegeneracy_value(params)
    return {
        "nondegeneracy_value": nd,
        "nondegenerate": abs(nd) > tol,
        "omega_nonzero": params.omega != 0.0,
        "volume_expanding": params.rho < 0.5,
        "involution_nontrivial": bool(np.any(np.asarray(params.involution) == -1.0)),
    }


def reflect(p: SectionPoint, params: ReturnMapParams) -> SectionPoint:
    """Apply the section symmetry R(x, y, z) = (-x, y, S z)."""
    if p.z.shape[0] != params.zdim:
        raise DomainError("z dimension mismatch")
    return SectionPoint(-p.x, p.y, np.asarray(params.involution) * p.z)
