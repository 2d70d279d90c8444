"""Pure-Python reference kernels for the hot 2x2 propagation loops.

Every function here has a compiled twin in ``_native.pyx``; the backend is
picked once at import time in ``radialspec._kernels``.  The two
implementations follow the same operation order so that their outputs agree
to a few ulps.
"""

import cmath
import math

# Beyond this many e-foldings the subdominant solution branch is below
# double-precision resolution and the projective state is reset exactly.
_DECAY_RESET = 40.0


def _spectral_norm_sq(a, b, c, d):
    p = math.hypot(a + d, b - c)
    q = math.hypot(a - d, b + c)
    s = 0.5 * (p + q)
    return s * s


def transfer_chain(gaps, jumps, k):
    """Ordered product F(gaps[n])*S(jumps[n-1])*...*S(jumps[0])*F(gaps[0]).

    F(g) is the free whole-interval propagator at wavenumber ``k`` and
    S(s) = diag(s, 1/s).  Returns the four entries (a, b, c, d) of the
    resulting matrix [[a, b], [c, d]].  Entries may overflow for strongly
    evanescent propagation over long ranges; use the projective sweeps for
    those regimes.
    """
    k = complex(k)
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    a, b, c, d = _free_mat(k, gaps[0], a, b, c, d)
    for i in range(len(jumps)):
        s = jumps[i]
        a *= s
        b *= s
        c /= s
        d /= s
        a, b, c, d = _free_mat(k, gaps[i + 1], a, b, c, d)
    return a, b, c, d


def _free_mat(k, dt, a, b, c, d):
    if dt == 0.0:
        return a, b, c, d
    if k == 0:
        return a + dt * c, b + dt * d, c, d
    cc = cmath.cos(k * dt)
    ss = cmath.sin(k * dt) / k
    ms = -k * k * ss
    return cc * a + ss * c, cc * b + ss * d, ms * a + cc * c, ms * b + cc * d


def solution_sweep(pos, codes, vals, k, x0, f0, df0):
    """March a solution pair (f, f') rightward through samples and jumps.

    ``pos`` is ascending, starting at or after ``x0``.  ``codes[i] == 0``
    records the state, ``codes[i] == 1`` applies the jump with factor
    ``vals[i]`` (the square root of the branching number).  Returns the list
    of recorded (f, f') pairs.
    """
    k = complex(k)
    u, v = complex(f0), complex(df0)
    x = float(x0)
    out = []
    for i in range(len(pos)):
        p = pos[i]
        if p != x:
            a, bb, c, d = _free_mat(k, p - x, 1.0 + 0j, 0j, 0j, 1.0 + 0j)
            u, v = a * u + bb * v, c * u + d * v
            x = p
        if codes[i] == 0:
            out.append((u, v))
        else:
            s = vals[i]
            u, v = u * s, v / s
    return out


def simon_stolz_sweep(breaks, sqrtb, k, step):
    """Midpoint quadrature of 1/||T(x,0)||^2 on consecutive intervals.

    ``breaks`` are the interval endpoints (ascending, first one is the base
    point), ``sqrtb`` the jump factors applied at the interior endpoints,
    ``k`` the positive real wavenumber.  Returns per-interval integrals and
    per-interval suprema of the squared spectral norm sampled at midpoints.
    """
    m = len(breaks) - 1
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    integrals = []
    sups = []
    for i in range(m):
        left = breaks[i]
        right = breaks[i + 1]
        nsub = max(1, int(math.ceil((right - left) / step)))
        h = (right - left) / nsub
        ch = math.cos(k * h)
        sh = math.sin(k * h)
        ch2 = math.cos(0.5 * k * h)
        sh2 = math.sin(0.5 * k * h)
        sk = sh / k
        sk2 = sh2 / k
        ks = k * sh
        ks2 = k * sh2
        ma = ch2 * a + sk2 * c
        mb = ch2 * b + sk2 * d
        mc = -ks2 * a + ch2 * c
        md = -ks2 * b + ch2 * d
        acc = 0.0
        sup = 0.0
        for j in range(nsub):
            w = _spectral_norm_sq(ma, mb, mc, md)
            acc += h / w
            if w > sup:
                sup = w
            if j + 1 < nsub:
                ma, mb, mc, md = (
                    ch * ma + sk * mc,
                    ch * mb + sk * md,
                    -ks * ma + ch * mc,
                    -ks * mb + ch * md,
                )
        a = ch2 * ma + sk2 * mc
        b = ch2 * mb + sk2 * md
        c = -ks2 * ma + ch2 * mc
        d = -ks2 * mb + ch2 * md
        if i < len(sqrtb):
            s = sqrtb[i]
            a *= s
            b *= s
            c /= s
            d /= s
        integrals.append(acc)
        sups.append(sup)
    return integrals, sups


def _normalize(u, v):
    scale = max(abs(u), abs(v))
    if scale > 0.0:
        u /= scale
        v /= scale
    return u, v


def riccati_left_sweep(pos, sqrtb, k, x_start, x_target, u0, v0):
    """Propagate a projective state (f, f') leftward from x_start to x_target.

    ``pos`` is descending inside (x_target, x_start]; ``sqrtb[i]`` is the
    jump factor at ``pos[i]`` with 0.0 marking a hard wall (the solution
    value vanishes on its left side).  The state is renormalized after every
    event so that poles of f'/f pass through harmlessly.
    """
    k = complex(k)
    im_k = k.imag
    u, v = complex(u0), complex(v0)
    x = float(x_start)
    for i in range(len(pos)):
        p = pos[i]
        dt = x - p
        if im_k * dt > _DECAY_RESET:
            u, v = 1.0 + 0j, 1j * k
        elif dt > 0.0:
            a, b, c, d = _free_mat(k, -dt, 1.0 + 0j, 0j, 0j, 1.0 + 0j)
            u, v = a * u + b * v, c * u + d * v
        s = sqrtb[i]
        if s == 0.0:
            u, v = 0j, 1.0 + 0j
        else:
            u, v = u / s, v * s
        u, v = _normalize(u, v)
        x = p
    dt = x - x_target
    if im_k * dt > _DECAY_RESET:
        u, v = 1.0 + 0j, 1j * k
    elif dt > 0.0:
        a, b, c, d = _free_mat(k, -dt, 1.0 + 0j, 0j, 0j, 1.0 + 0j)
        u, v = a * u + b * v, c * u + d * v
    return _normalize(u, v)


def riccati_right_sweep(pos, sqrtb, k, x_start, x_target, u0, v0):
    """Rightward twin of :func:`riccati_left_sweep`.

    0.0 in ``sqrtb`` marks a hard wall whose right side carries a vanishing
    derivative.
    """
    k = complex(k)
    im_k = k.imag
    u, v = complex(u0), complex(v0)
    x = float(x_start)
    for i in range(len(pos)):
        p = pos[i]
        dt = p - x
        if im_k * dt > _DECAY_RESET:
            u, v = 1.0 + 0j, -1j * k
        elif dt > 0.0:
            a, b, c, d = _free_mat(k, dt, 1.0 + 0j, 0j, 0j, 1.0 + 0j)
            u, v = a * u + b * v, c * u + d * v
        s = sqrtb[i]
        if s == 0.0:
            u, v = 1.0 + 0j, 0j
        else:
            u, v = u * s, v / s
        u, v = _normalize(u, v)
        x = p
    dt = x_target - x
    if im_k * dt > _DECAY_RESET:
        u, v = 1.0 + 0j, -1j * k
    elif dt > 0.0:
        a, b, c, d = _free_mat(k, dt, 1.0 + 0j, 0j, 0j, 1.0 + 0j)
        u, v = a * u + b * v, c * u + d * v
    return _normalize(u, v)
