"""Named closed-form presets for gap functions and in-plane forcings.

Presets are selected by string key plus a coefficient list; there is no
expression parser.  Every preset returns a vectorized callable evaluated at
arrays of reduced-domain points with shape ``(..., dim)``.

Height presets (scalar valued):
    constant  [c]                     h = c
    affine    [a, b1(, b2)]           h = a + b.z'
    bump      [a, b]                  h = a + b * prod_d sin(pi (z_d-lo_d)/L_d)

Forcing presets (vector valued, one amplitude per component unless noted):
    zero      []
    constant  [c1(, c2)]
    affine    [a1, b11(, b12, a2, b21, b22)]   f_i = a_i + sum_j b_ij z_j
    bump      [c1(, c2)]              f_i = c_i * prod_d sin(pi (z_d-lo_d)/L_d)
    gradient_sine [a]                 f = grad( a * prod_d sin(pi (z_d-lo_d)/L_d) )
    rotational  dim 2: [w]            f = w * (-(z2-m2), (z1-m1)),  m = midpoint
                dim 1: [c0(, c1)]     f = c0 + c1 * cos(2 pi (z1-lo)/L)

The dim-1 "rotational" preset is the ring analog: a mean drive ``c0`` around
a periodic interval (net circulation, not a gradient) plus an optional
harmonic modulation that is absorbed by the pressure.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def _coeffs(coeffs, n_min, n_max, name):
    c = [float(v) for v in (coeffs if coeffs is not None else [])]
    if not (n_min <= len(c) <= n_max):
        raise ConfigError(name, f"expected between {n_min} and {n_max} coefficients, got {len(c)}")
    return c


def make_height(name: str, coeffs, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.size
    length = hi - lo

    if name == "constant":
        (c,) = _coeffs(coeffs, 1, 1, "geometry.height.coeffs")

        def h(pts):
            pts = np.asarray(pts, dtype=float)
            return np.full(pts.shape[:-1], c)

        return h

    if name == "affine":
        c = _coeffs(coeffs, 1 + dim, 1 + dim, "geometry.height.coeffs")
        a, b = c[0], np.array(c[1:])

        def h(pts):
            pts = np.asarray(pts, dtype=float)
            return a + pts @ b

        return h

    if name == "bump":
        a, b = _coeffs(coeffs, 2, 2, "geometry.height.coeffs")

        def h(pts):
            pts = np.asarray(pts, dtype=float)
            prof = np.ones(pts.shape[:-1])
            for d in range(dim):
                prof = prof * np.sin(np.pi * (pts[..., d] - lo[d]) / length[d])
            return a + b * prof

        return h

    raise ConfigError("geometry.height.preset", f"unknown height preset {name!r}")


def make_forcing(name: str, coeffs, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = lo.size
    length = hi - lo
    mid = 0.5 * (lo + hi)

    if name == "zero":
        _coeffs(coeffs, 0, 0, "forcing.coeffs")

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            return np.zeros(pts.shape[:-1] + (dim,))

        return f

    if name == "constant":
        c = np.array(_coeffs(coeffs, dim, dim, "forcing.coeffs"))

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            return np.broadcast_to(c, pts.shape[:-1] + (dim,)).copy()

        return f

    if name == "affine":
        c = _coeffs(coeffs, dim * (1 + dim), dim * (1 + dim), "forcing.coeffs")
        a = np.array([c[i * (1 + dim)] for i in range(dim)])
        b = np.array([c[i * (1 + dim) + 1 : (i + 1) * (1 + dim)] for i in range(dim)])

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            return a + pts @ b.T

        return f

    if name == "bump":
        c = np.array(_coeffs(coeffs, dim, dim, "forcing.coeffs"))

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            prof = np.ones(pts.shape[:-1])
            for d in range(dim):
                prof = prof * np.sin(np.pi * (pts[..., d] - lo[d]) / length[d])
            return prof[..., None] * c

        return f

    if name == "gradient_sine":
        (a,) = _coeffs(coeffs, 1, 1, "forcing.coeffs")

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            out = np.empty(pts.shape[:-1] + (dim,))
            for d in range(dim):
                comp = a * (np.pi / length[d]) * np.cos(np.pi * (pts[..., d] - lo[d]) / length[d])
                for e in range(dim):
                    if e != d:
                        comp = comp * np.sin(np.pi * (pts[..., e] - lo[e]) / length[e])
                out[..., d] = comp
            return out

        return f

    if name == "rotational":
        if dim == 2:
            (w,) = _coeffs(coeffs, 1, 1, "forcing.coeffs")

            def f(pts):
                pts = np.asarray(pts, dtype=float)
                out = np.empty(pts.shape[:-1] + (2,))
                out[..., 0] = -w * (pts[..., 1] - mid[1])
                out[..., 1] = w * (pts[..., 0] - mid[0])
                return out

            return f

        c = _coeffs(coeffs, 1, 2, "forcing.coeffs")
        c0 = c[0]
        c1 = c[1] if len(c) > 1 else 0.0

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            out = np.empty(pts.shape[:-1] + (1,))
            out[..., 0] = c0 + c1 * np.cos(2.0 * np.pi * (pts[..., 0] - lo[0]) / length[0])
            return out

        return f

    raise ConfigError("forcing.preset", f"unknown forcing preset {name!r}")


HEIGHT_PRESETS = ("constant", "affine", "bump")
FORCING_PRESETS = ("zero", "constant", "affine", "bump", "gradient_sine", "rotational")
