# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) stepper for the Painleve and Riccati flows.

Paths are parametrised by a real s: segments z0 + s (z1 - z0) and circular
arcs c + R exp(i (t0 + s (t1 - t0))).  The loop runs without the GIL so
independent rays can be integrated from several threads.

System kinds
    0  PI            y = (w, w')
    1  PII           y = (w, w')
    2  PIV, 3rd ord  y = (w, w', w'')
    3  Weber-Hermite Riccati  w' = c + s (2 z w + w^2) with c = 2 gamma,
       stored as w or 1/w
    4  Airy Riccati           w' = s (z/2 + w^2), stored as w or 1/w
With aug=1 two quadratures are appended: W and its integral for kinds 0-2,
the integral of w (and a spare slot) for kinds 3-4.
"""
from libc.math cimport sqrt, cos, sin, fabs, pow, isfinite

cdef enum:
    MAXD = 5

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561
cdef double A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline int ndim(int kind) nogil:
    if kind == 2:
        return 3
    if kind >= 3:
        return 1
    return 2


cdef inline void path_eval(int pathkind, double complex* path, double s,
                           double complex* z, double complex* dz) nogil:
    cdef double t, r
    cdef double complex e
    if pathkind == 0:
        dz[0] = path[1] - path[0]
        z[0] = path[0] + s * dz[0]
    else:
        r = path[1].real
        t = path[2].real + s * (path[3].real - path[2].real)
        e = cos(t) + 1j * sin(t)
        z[0] = path[0] + r * e
        dz[0] = 1j * (path[3].real - path[2].real) * r * e


cdef inline void field(int kind, double complex* par, int flag, int aug,
                       double complex z, double complex* y,
                       double complex* f) nogil:
    # f = dy/dz
    cdef double complex w, w1, g, sg, v, ww
    cdef int d = ndim(kind)
    if kind == 0:
        w = y[0]
        f[0] = y[1]
        f[1] = z + 6 * w * w
        ww = w
    elif kind == 1:
        w = y[0]
        f[0] = y[1]
        f[1] = par[0] + z * w + 2 * w * w * w
        ww = w * w
    elif kind == 2:
        w = y[0]
        w1 = y[1]
        f[0] = w1
        f[1] = y[2]
        f[2] = (6 * w * w * w1 + 4 * w * w + 12 * z * w * w1 + 4 * z * w
                + 4 * (z * z - par[0]) * w1)
        ww = w * w + 2 * z * w
    elif kind == 3:
        g = par[0]
        sg = par[1]
        if flag == 0:
            w = y[0]
            f[0] = g + sg * (2 * z * w + w * w)
            ww = w
        else:
            v = y[0]
            f[0] = -(g * v * v + sg * (2 * z * v + 1))
            ww = 1 / v
    else:
        sg = par[1]
        if flag == 0:
            w = y[0]
            f[0] = sg * (z / 2 + w * w)
            ww = w
        else:
            v = y[0]
            f[0] = -sg * (z / 2 * v * v + 1)
            ww = 1 / v
    if aug:
        f[d] = ww
        if kind <= 2:
            f[d + 1] = y[d]
        else:
            f[d + 1] = 0


cdef int _run(int kind, double complex* par, int pathkind, double complex* path,
              double s, double s1, double complex* y, int* flagp, double* hp,
              double tol, double hmax, double trigger, double trig_exp, int aug,
              double* out_s, double complex* out_y, int* out_flag, int cap,
              int* nout, long* stats) nogil:
    cdef int d = ndim(kind)
    cdef int n = d + 2 * aug
    cdef int i, j, flag = flagp[0], status = 0
    cdef double h = hp[0], hs, dirn, err, sc, e, fac, errold = 1e-4, hnew, lim, az
    cdef double complex z, dz, zz
    cdef double complex k1[MAXD]
    cdef double complex k2[MAXD]
    cdef double complex k3[MAXD]
    cdef double complex k4[MAXD]
    cdef double complex k5[MAXD]
    cdef double complex k6[MAXD]
    cdef double complex k7[MAXD]
    cdef double complex yt[MAXD]
    cdef double complex yn[MAXD]
    cdef bint last
    cdef int m = 0

    dirn = 1.0 if s1 >= s else -1.0
    h = fabs(h)
    if h > hmax:
        h = hmax
    # sample 0 is the starting state
    out_s[0] = s
    out_flag[0] = flag
    for j in range(n):
        out_y[j] = y[j]
    m = 1
    while True:
        if dirn * (s1 - s) <= 1e-15 * (1.0 + fabs(s1)):
            status = 0
            break
        if m >= cap:
            status = 2
            break
        last = False
        if h >= dirn * (s1 - s):
            h = dirn * (s1 - s)
            last = True
        if h < 1e-14 * (1.0 + fabs(s)):
            status = 3
            break
        hs = dirn * h

        path_eval(pathkind, path, s, &zz, &dz)
        field(kind, par, flag, aug, zz, y, k1)
        for j in range(n):
            k1[j] = k1[j] * dz
            yt[j] = y[j] + hs * A21 * k1[j]
        path_eval(pathkind, path, s + C2 * hs, &zz, &dz)
        field(kind, par, flag, aug, zz, yt, k2)
        for j in range(n):
            k2[j] = k2[j] * dz
            yt[j] = y[j] + hs * (A31 * k1[j] + A32 * k2[j])
        path_eval(pathkind, path, s + C3 * hs, &zz, &dz)
        field(kind, par, flag, aug, zz, yt, k3)
        for j in range(n):
            k3[j] = k3[j] * dz
            yt[j] = y[j] + hs * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j])
        path_eval(pathkind, path, s + C4 * hs, &zz, &dz)
        field(kind, par, flag, aug, zz, yt, k4)
        for j in range(n):
            k4[j] = k4[j] * dz
            yt[j] = y[j] + hs * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j]
                                 + A54 * k4[j])
        path_eval(pathkind, path, s + C5 * hs, &zz, &dz)
        field(kind, par, flag, aug, zz, yt, k5)
        for j in range(n):
            k5[j] = k5[j] * dz
            yt[j] = y[j] + hs * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j]
                                 + A64 * k4[j] + A65 * k5[j])
        path_eval(pathkind, path, s + hs, &zz, &dz)
        field(kind, par, flag, aug, zz, yt, k6)
        for j in range(n):
            k6[j] = k6[j] * dz
            yn[j] = y[j] + hs * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j]
                                 + B5 * k5[j] + B6 * k6[j])
        field(kind, par, flag, aug, zz, yn, k7)
        err = 0.0
        for j in range(n):
            k7[j] = k7[j] * dz
            sc = tol * (1.0 + max(cabs_(y[j]), cabs_(yn[j])))
            e = cabs_(hs * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j]
                            + E6 * k6[j] + E7 * k7[j])) / sc
            if not isfinite(e):
                e = 1e10
            if e > err:
                err = e
        stats[2] += 1
        if err <= 1.0:
            # accept
            s = s + hs if not last else s1
            for j in range(n):
                y[j] = yn[j]
            stats[0] += 1
            fac = pow(err if err > 1e-10 else 1e-10, 0.17) / pow(errold, 0.04) / 0.9
            if fac < 0.2:
                fac = 0.2
            if fac > 10.0:
                fac = 10.0
            hnew = h / fac
            errold = err if err > 1e-4 else 1e-4
            if kind >= 3:
                if flag == 0 and cabs_(y[0]) > 2.0:
                    y[0] = 1 / y[0]
                    flag = 1
                elif flag == 1 and cabs_(y[0]) > 2.0:
                    y[0] = 1 / y[0]
                    flag = 0
            out_s[m] = s
            out_flag[m] = flag
            for j in range(n):
                out_y[m * n + j] = y[j]
            m += 1
            h = hnew if hnew < hmax else hmax
            for j in range(n):
                if not isfinite(y[j].real) or not isfinite(y[j].imag):
                    status = 4
            if status == 4:
                break
            if kind <= 2 and trigger > 0:
                path_eval(pathkind, path, s, &zz, &dz)
                az = cabs_(zz)
                lim = trigger * pow(az if az > 1.0 else 1.0, trig_exp)
                if cabs_(y[0]) > lim:
                    status = 1
                    break
        else:
            stats[1] += 1
            fac = pow(err, 0.17) / 0.9
            if fac > 5.0:
                fac = 5.0
            h = h / fac
    flagp[0] = flag
    hp[0] = h
    nout[0] = m
    return status


def run(int kind, double complex[::1] par, int pathkind, double complex[::1] path,
        double s0, double s1, double complex[::1] y0, int flag0, double h0,
        double tol, double hmax, double trigger, double trig_exp, int aug,
        double[::1] out_s, double complex[::1] out_y, int[::1] out_flag,
        long[::1] stats):
    """Integrate from s0 towards s1, writing accepted states to the buffers.

    Returns (n_written, status, s_last, h_last, flag_last); the final state
    is the last row written.  Status: 0 reached s1, 1 pole trigger, 2 buffer
    full, 3 step size underflow, 4 non-finite state.
    """
    cdef int n = ndim(kind) + 2 * aug
    cdef double complex y[MAXD]
    cdef int j, flag = flag0, nout = 0, status
    cdef double h = h0
    cdef int cap = out_s.shape[0]
    for j in range(n):
        y[j] = y0[j]
    with nogil:
        status = _run(kind, &par[0], pathkind, &path[0], s0, s1, y, &flag, &h,
                      tol, hmax, trigger, trig_exp, aug, &out_s[0], &out_y[0],
                      &out_flag[0], cap, &nout, &stats[0])
    return nout, status, out_s[nout - 1], h, flag
