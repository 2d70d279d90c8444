# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``radialspec._kernels.pure``."""

from libc.math cimport ceil, cos, hypot, sin

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)

cdef double complex IUNIT = 1j
cdef double DECAY_RESET = 40.0


cdef inline double _spectral_norm_sq(double a, double b, double c, double d) nogil:
    cdef double p = hypot(a + d, b - c)
    cdef double q = hypot(a - d, b + c)
    cdef double s = 0.5 * (p + q)
    return s * s


cdef inline void _free_mat(double complex k, double dt,
                           double complex *a, double complex *b,
                           double complex *c, double complex *d) nogil:
    cdef double complex e, einv, cc, ss, ms, na, nb, nc, nd
    if dt == 0.0:
        return
    if k == 0:
        a[0] = a[0] + dt * c[0]
        b[0] = b[0] + dt * d[0]
        return
    e = cexp(IUNIT * k * dt)
    einv = 1.0 / e
    cc = 0.5 * (e + einv)
    ss = (e - einv) / (2.0 * IUNIT * k)
    ms = -k * k * ss
    na = cc * a[0] + ss * c[0]
    nb = cc * b[0] + ss * d[0]
    nc = ms * a[0] + cc * c[0]
    nd = ms * b[0] + cc * d[0]
    a[0] = na
    b[0] = nb
    c[0] = nc
    d[0] = nd


def transfer_chain(double[::1] gaps, double[::1] jumps, double complex k):
    cdef double complex a = 1.0, b = 0.0, c = 0.0, d = 1.0
    cdef double s
    cdef Py_ssize_t i, n = jumps.shape[0]
    _free_mat(k, gaps[0], &a, &b, &c, &d)
    for i in range(n):
        s = jumps[i]
        a = a * s
        b = b * s
        c = c / s
        d = d / s
        _free_mat(k, gaps[i + 1], &a, &b, &c, &d)
    return complex(a), complex(b), complex(c), complex(d)


def solution_sweep(double[::1] pos, int[::1] codes, double[::1] vals,
                   double complex k, double x0,
                   double complex f0, double complex df0):
    cdef double complex u = f0, v = df0
    cdef double x = x0, p, s
    cdef Py_ssize_t i, n = pos.shape[0]
    out = []
    for i in range(n):
        p = pos[i]
        if p != x:
            _free_state(k, p - x, &u, &v)
            x = p
        if codes[i] == 0:
            out.append((complex(u), complex(v)))
        else:
            s = vals[i]
            u = u * s
            v = v / s
    return out


cdef inline void _free_state(double complex k, double dt,
                             double complex *u, double complex *v) nogil:
    cdef double complex a = 1.0, b = 0.0, c = 0.0, d = 1.0
    cdef double complex nu, nv
    _free_mat(k, dt, &a, &b, &c, &d)
    nu = a * u[0] + b * v[0]
    nv = c * u[0] + d * v[0]
    u[0] = nu
    v[0] = nv


def simon_stolz_sweep(double[::1] breaks, double[::1] sqrtb, double k, double step):
    cdef Py_ssize_t m = breaks.shape[0] - 1
    cdef Py_ssize_t nj = sqrtb.shape[0]
    cdef double a = 1.0, b = 0.0, c = 0.0, d = 1.0
    cdef double left, right, h, ch, sh, ch2, sh2, sk, sk2, ks, ks2
    cdef double ma, mb, mc, md, na, nb, nc, nd, acc, sup, w, s
    cdef Py_ssize_t i, j, nsub
    integrals = []
    sups = []
    for i in range(m):
        left = breaks[i]
        right = breaks[i + 1]
        nsub = <Py_ssize_t> ceil((right - left) / step)
        if nsub < 1:
            nsub = 1
        h = (right - left) / nsub
        ch = cos(k * h)
        sh = sin(k * h)
        ch2 = cos(0.5 * k * h)
        sh2 = sin(0.5 * k * h)
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
        with nogil:
            for j in range(nsub):
                w = _spectral_norm_sq(ma, mb, mc, md)
                acc += h / w
                if w > sup:
                    sup = w
                if j + 1 < nsub:
                    na = ch * ma + sk * mc
                    nb = ch * mb + sk * md
                    nc = -ks * ma + ch * mc
                    nd = -ks * mb + ch * md
                    ma = na
                    mb = nb
                    mc = nc
                    md = nd
        a = ch2 * ma + sk2 * mc
        b = ch2 * mb + sk2 * md
        c = -ks2 * ma + ch2 * mc
        d = -ks2 * mb + ch2 * md
        if i < nj:
            s = sqrtb[i]
            a *= s
            b *= s
            c /= s
            d /= s
        integrals.append(acc)
        sups.append(sup)
    return integrals, sups


cdef inline void _normalize(double complex *u, double complex *v) nogil:
    cdef double au = cabs(u[0])
    cdef double av = cabs(v[0])
    cdef double scale = au if au > av else av
    if scale > 0.0:
        u[0] = u[0] / scale
        v[0] = v[0] / scale


def riccati_left_sweep(double[::1] pos, double[::1] sqrtb, double complex k,
                       double x_start, double x_target,
                       double complex u0, double complex v0):
    cdef double complex u = u0, v = v0
    cdef double im_k = k.imag
    cdef double x = x_start, p, dt, s
    cdef Py_ssize_t i, n = pos.shape[0]
    for i in range(n):
        p = pos[i]
        dt = x - p
        if im_k * dt > DECAY_RESET:
            u = 1.0
            v = IUNIT * k
        elif dt > 0.0:
            _free_state(k, -dt, &u, &v)
        s = sqrtb[i]
        if s == 0.0:
            u = 0.0
            v = 1.0
        else:
            u = u / s
            v = v * s
        _normalize(&u, &v)
        x = p
    dt = x - x_target
    if im_k * dt > DECAY_RESET:
        u = 1.0
        v = IUNIT * k
    elif dt > 0.0:
        _free_state(k, -dt, &u, &v)
    _normalize(&u, &v)
    return complex(u), complex(v)


def riccati_right_sweep(double[::1] pos, double[::1] sqrtb, double complex k,
                        double x_start, double x_target,
                        double complex u0, double complex v0):
    cdef double complex u = u0, v = v0
    cdef double im_k = k.imag
    cdef double x = x_start, p, dt, s
    cdef Py_ssize_t i, n = pos.shape[0]
    for i in range(n):
        p = pos[i]
        dt = p - x
        if im_k * dt > DECAY_RESET:
            u = 1.0
            v = -IUNIT * k
        elif dt > 0.0:
            _free_state(k, dt, &u, &v)
        s = sqrtb[i]
        if s == 0.0:
            u = 1.0
            v = 0.0
        else:
            u = u * s
            v = v / s
        _normalize(&u, &v)
        x = p
    dt = x_target - x
    if im_k * dt > DECAY_RESET:
        u = 1.0
        v = -IUNIT * k
    elif dt > 0.0:
        _free_state(k, dt, &u, &v)
    _normalize(&u, &v)
    return complex(u), complex(v)
