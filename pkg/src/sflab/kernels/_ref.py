"""Pure-Python reference kernels for the model return maps.

The compiled extension in ``_speedup.pyx`` mirrors these routines one to
one; the test suite cross-checks the two backends on random inputs.  All
functions work on a flat :class:`PackedParams` record and write into
caller-provided output buffers.

Coordinate layout of a section point is ``(x, y, z_0..z_{m-1})`` with
``m = n - 3``; map images and Jacobians use the same ordering.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

KIND_ZERO = 0
KIND_SCALED_BUMP = 1


class PackedParams:
    __slots__ = ("A", "theta", "A1", "theta1", "Az", "thetaz", "mu", "rho",
                 "omega", "z_plus", "invol", "m", "kind", "amp", "eps0")

    def __init__(self, A, theta, A1, theta1, Az, thetaz, mu, rho, omega,
                 z_plus, invol, kind, amp, eps0):
        self.A = float(A)
        self.theta = float(theta)
        self.A1 = float(A1)
        self.theta1 = float(theta1)
        self.Az = np.ascontiguousarray(Az, dtype=np.float64)
        self.thetaz = np.ascontiguousarray(thetaz, dtype=np.float64)
        self.mu = float(mu)
        self.rho = float(rho)
        self.omega = float(omega)
        self.z_plus = np.ascontiguousarray(z_plus, dtype=np.float64)
        self.invol = np.ascontiguousarray(invol, dtype=np.float64)
        self.m = self.z_plus.shape[0]
        self.kind = int(kind)
        self.amp = float(amp)
        self.eps0 = float(eps0)


def make_packed(A, theta, A1, theta1, Az, thetaz, mu, rho, omega, z_plus,
                invol, kind, amp, eps0):
    return PackedParams(A, theta, A1, theta1, Az, thetaz, mu, rho, omega,
                        z_plus, invol, kind, amp, eps0)


def _small_value(p, s, y, z):
    # s = |x| > 0
    if p.kind == KIND_ZERO or p.amp == 0.0:
        return 0.0
    b = math.cos(s + 2.0 * y + float(np.sum(z)))
    return p.amp * s ** (p.rho + p.eps0) * b


def _small_grad(p, s, y, z):
    # returns (d/ds, d/dy, d/dz_k) of the remainder; the z-derivative is
    # the same for every component
    if p.kind == KIND_ZERO or p.amp == 0.0:
        return 0.0, 0.0, 0.0
    q = p.rho + p.eps0
    arg = s + 2.0 * y + float(np.sum(z))
    cb = math.cos(arg)
    sb = math.sin(arg)
    sq = s ** q
    gs = p.amp * (q * s ** (q - 1.0) * cb - sq * sb)
    gy = -2.0 * p.amp * sq * sb
    gz = -p.amp * sq * sb
    return gs, gy, gz


def t1_apply(p, x, y, z, out):
    """Image of (x, y, z) with x >= 0 under the upper half-map."""
    if x == 0.0:
        out[0] = p.mu
        out[1] = 1.0
        out[2:] = p.z_plus
        return
    c = p.omega * math.log(1.0 / x)
    xr = x ** p.rho
    g = _small_value(p, x, y, z)
    out[0] = p.mu + p.A * y * xr * math.cos(c + p.theta) + g
    out[1] = 1.0 + p.A1 * y * xr * math.cos(c + p.theta1) + g
    for j in range(p.m):
        out[2 + j] = p.z_plus[j] + p.Az[j] * y * xr * math.cos(c + p.thetaz[j]) + g


def t2_apply(p, x, y, z, out):
    """Image of (x, y, z) with x <= 0 under the lower half-map."""
    if x == 0.0:
        out[0] = -p.mu
        out[1] = 1.0
        out[2:] = p.invol * p.z_plus
        return
    s = -x
    c = p.omega * math.log(1.0 / s)
    sr = s ** p.rho
    g = _small_value(p, s, y, z)
    out[0] = -p.mu - p.A * y * sr * math.cos(c + p.theta) + g
    out[1] = 1.0 + p.A1 * y * sr * math.cos(c + p.theta1) + g
    for j in range(p.m):
        out[2 + j] = p.invol[j] * (
            p.z_plus[j] + p.Az[j] * y * sr * math.cos(c + p.thetaz[j]) + g
        )


def t_apply(p, x, y, z, out):
    """Full map: upper half-map for x >= 0, lower for x < 0."""
    if x >= 0.0:
        t1_apply(p, x, y, z, out)
    else:
        t2_apply(p, x, y, z, out)


def t1_jacobian(p, x, y, z, jac):
    """Jacobian of the upper half-map at x > 0, rows = image components."""
    c = p.omega * math.log(1.0 / x)
    xr = x ** p.rho
    xq = x ** (p.rho - 1.0)
    gx, gy, gz = _small_grad(p, x, y, z)
    m = p.m
    for i in range(m + 2):
        if i == 0:
            R, ph = p.A, p.theta
        elif i == 1:
            R, ph = p.A1, p.theta1
        else:
            R, ph = p.Az[i - 2], p.thetaz[i - 2]
        a = c + ph
        ca = math.cos(a)
        sa = math.sin(a)
        jac[i, 0] = R * y * xq * (p.rho * ca + p.omega * sa) + gx
        jac[i, 1] = R * xr * ca + gy
        for k in range(m):
            jac[i, 2 + k] = gz


def t2_jacobian(p, x, y, z, jac):
    """Jacobian of the lower half-map at x < 0."""
    s = -x
    c = p.omega * math.log(1.0 / s)
    sr = s ** p.rho
    sq = s ** (p.rho - 1.0)
    gx, gy, gz = _small_grad(p, s, y, z)
    m = p.m
    for i in range(m + 2):
        if i == 0:
            R, ph, sgn = p.A, p.theta, 1.0
        elif i == 1:
            R, ph, sgn = p.A1, p.theta1, 1.0
        else:
            R, ph, sgn = p.Az[i - 2], p.thetaz[i - 2], p.invol[i - 2]
        a = c + ph
        ca = math.cos(a)
        sa = math.sin(a)
        if i == 0:
            # d/dx = -d/ds of (-mu - A y s^rho cos(.) + g)
            jac[i, 0] = p.A * y * sq * (p.rho * ca + p.omega * sa) - gx
            jac[i, 1] = -p.A * sr * ca + gy
            for k in range(m):
                jac[i, 2 + k] = gz
        else:
            jac[i, 0] = sgn * (-R * y * sq * (p.rho * ca + p.omega * sa) - gx)
            jac[i, 1] = sgn * (R * sr * ca + gy)
            for k in range(m):
                jac[i, 2 + k] = sgn * gz


def t_jacobian(p, x, y, z, jac):
    if x > 0.0:
        t1_jacobian(p, x, y, z, jac)
    elif x < 0.0:
        t2_jacobian(p, x, y, z, jac)
    else:
        raise ValueError("Jacobian undefined at x = 0")


def iterate_t(p, x, y, z, steps, x_cap):
    """Apply the full map up to `steps` times.

    Returns ``(x, y, z, done, status)`` with status 0 when all steps ran,
    1 when |x| exceeded x_cap (iteration stopped early, point escaped the
    tracked region) and 2 when a coordinate became non-finite.
    """
    out = np.empty(p.m + 2)
    zc = np.asarray(z, dtype=np.float64).copy()
    for i in range(steps):
        t_apply(p, x, y, zc, out)
        x = float(out[0])
        y = float(out[1])
        zc[:] = out[2:]
        if not (math.isfinite(x) and math.isfinite(y) and np.all(np.isfinite(zc))):
            return x, y, zc, i + 1, 2
        if abs(x) > x_cap:
            return x, y, zc, i + 1, 1
    return x, y, zc, steps, 0
