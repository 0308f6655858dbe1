"""Pure-Python twin of the compiled stepper (same signature and semantics)."""
import math

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176,
                           -5103 / 18656)
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)


def ndim(kind):
    if kind == 2:
        return 3
    if kind >= 3:
        return 1
    return 2


def _path(pathkind, path, s):
    if pathkind == 0:
        dz = path[1] - path[0]
        return path[0] + s * dz, dz
    r = path[1].real
    dt = path[3].real - path[2].real
    t = path[2].real + s * dt
    e = complex(math.cos(t), math.sin(t))
    return path[0] + r * e, 1j * dt * r * e


def _field(kind, par, flag, aug, z, y):
    if kind == 0:
        w = y[0]
        f = [y[1], z + 6 * w * w]
        ww = w
    elif kind == 1:
        w = y[0]
        f = [y[1], par[0] + z * w + 2 * w * w * w]
        ww = w * w
    elif kind == 2:
        w, w1 = y[0], y[1]
        f = [w1, y[2], (6 * w * w * w1 + 4 * w * w + 12 * z * w * w1 + 4 * z * w
                        + 4 * (z * z - par[0]) * w1)]
        ww = w * w + 2 * z * w
    elif kind == 3:
        g, sg = par[0], par[1]
        if flag == 0:
            w = y[0]
            f = [g + sg * (2 * z * w + w * w)]
            ww = w
        else:
            v = y[0]
            f = [-(g * v * v + sg * (2 * z * v + 1))]
            ww = 1 / v
    else:
        sg = par[1]
        if flag == 0:
            w = y[0]
            f = [sg * (z / 2 + w * w)]
            ww = w
        else:
            v = y[0]
            f = [-sg * (z / 2 * v * v + 1)]
            ww = 1 / v
    if aug:
        d = ndim(kind)
        f.append(ww)
        f.append(y[d] if kind <= 2 else 0j)
    return f


def run(kind, par, pathkind, path, s0, s1, y0, flag0, h0, tol, hmax, trigger,
        trig_exp, aug, out_s, out_y, out_flag, stats):
    par = [complex(p) for p in par]
    path = [complex(p) for p in path]
    n = ndim(kind) + 2 * aug
    y = [complex(y0[j]) for j in range(n)]
    flag = int(flag0)
    s = float(s0)
    cap = out_s.shape[0]
    dirn = 1.0 if s1 >= s else -1.0
    h = min(abs(h0), hmax)
    errold = 1e-4
    out_s[0] = s
    out_flag[0] = flag
    out_y[0:n] = y
    m = 1
    status = 0
    while True:
        if dirn * (s1 - s) <= 1e-15 * (1.0 + abs(s1)):
            status = 0
            break
        if m >= cap:
            status = 2
            break
        last = False
        if h >= dirn * (s1 - s):
            h = dirn * (s1 - s)
            last = True
        if h < 1e-14 * (1.0 + abs(s)):
            status = 3
            break
        hs = dirn * h

        def stage(sv, yv):
            zz, dz = _path(pathkind, path, sv)
            return [fj * dz for fj in _field(kind, par, flag, aug, zz, yv)]

        k1 = stage(s, y)
        k2 = stage(s + C2 * hs, [y[j] + hs * A21 * k1[j] for j in range(n)])
        k3 = stage(s + C3 * hs, [y[j] + hs * (A31 * k1[j] + A32 * k2[j])
                                 for j in range(n)])
        k4 = stage(s + C4 * hs, [y[j] + hs * (A41 * k1[j] + A42 * k2[j]
                                              + A43 * k3[j]) for j in range(n)])
        k5 = stage(s + C5 * hs, [y[j] + hs * (A51 * k1[j] + A52 * k2[j]
                                              + A53 * k3[j] + A54 * k4[j])
                                 for j in range(n)])
        k6 = stage(s + hs, [y[j] + hs * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j]
                                         + A64 * k4[j] + A65 * k5[j])
                            for j in range(n)])
        yn = [y[j] + hs * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j] + B5 * k5[j]
                           + B6 * k6[j]) for j in range(n)]
        try:
            k7 = stage(s + hs, yn)
            err = 0.0
            for j in range(n):
                sc = tol * (1.0 + max(abs(y[j]), abs(yn[j])))
                e = abs(hs * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j]
                              + E6 * k6[j] + E7 * k7[j])) / sc
                if not math.isfinite(e):
                    e = 1e10
                err = max(err, e)
        except (OverflowError, ZeroDivisionError):
            err = 1e10
        stats[2] += 1
        if err <= 1.0:
            s = s1 if last else s + hs
            y = yn
            stats[0] += 1
            fac = max(err, 1e-10) ** 0.17 / errold ** 0.04 / 0.9
            fac = min(10.0, max(0.2, fac))
            hnew = h / fac
            errold = max(err, 1e-4)
            if kind >= 3 and abs(y[0]) > 2.0:
                y[0] = 1 / y[0]
                flag = 1 - flag
            out_s[m] = s
            out_flag[m] = flag
            out_y[m * n:(m + 1) * n] = y
            m += 1
            h = min(hnew, hmax)
            if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in y):
                status = 4
                break
            if kind <= 2 and trigger > 0:
                zz, _ = _path(pathkind, path, s)
                lim = trigger * max(1.0, abs(zz)) ** trig_exp
                if abs(y[0]) > lim:
                    status = 1
                    break
        else:
            stats[1] += 1
            h = h / min(5.0, err ** 0.17 / 0.9)
    return m, status, out_s[m - 1], h, flag
