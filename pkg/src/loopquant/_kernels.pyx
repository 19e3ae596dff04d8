# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse series kernels; same contract as ``_kernels_py``."""

NO_CAP = 1 << 30


cdef inline long _levelsum(tuple mono):
    cdef long s = 0
    cdef object v
    for v in mono:
        s += (<long>v) >> 6
    return s


cdef tuple _merge(tuple x, tuple y):
    cdef Py_ssize_t i = 0, j = 0, nx = len(x), ny = len(y), k = 0
    cdef list out = [None] * (nx + ny)
    cdef long vx, vy
    while i < nx and j < ny:
        vx = <long>x[i]
        vy = <long>y[j]
        if vx <= vy:
            out[k] = x[i]
            i += 1
        else:
            out[k] = y[j]
            j += 1
        k += 1
    while i < nx:
        out[k] = x[i]
        i += 1
        k += 1
    while j < ny:
        out[k] = y[j]
        j += 1
        k += 1
    return tuple(out)


def mul_terms(dict a, dict b, long maxdeg, long maxls, long wcap):
    if len(a) > len(b):
        a, b = b, a
    cdef list bg = [], bm = [], bc = []
    cdef list bd = [], bl = []
    cdef object key, c
    for key, c in b.items():
        bg.append(key[0])
        bm.append(key[1])
        bd.append(len(key[1]))
        bl.append(_levelsum(key[1]))
        bc.append(c)
    cdef Py_ssize_t nb = len(bm), idx
    cdef dict out = {}
    cdef long da, la, ga, d, g
    cdef tuple ma, mb
    cdef object ca, v, prod
    for key, ca in a.items():
        ga = key[0]
        ma = key[1]
        da = len(ma)
        la = _levelsum(ma)
        for idx in range(nb):
            d = da + <long>bd[idx]
            if d > maxdeg or la + <long>bl[idx] > maxls:
                continue
            g = ga + <long>bg[idx]
            if 2 * g + d > wcap:
                continue
            mb = <tuple>bm[idx]
            if da == 0:
                k2 = (g, mb)
            elif d == da:
                k2 = (g, ma)
            else:
                k2 = (g, _merge(ma, mb))
            prod = ca * bc[idx]
            v = out.get(k2)
            out[k2] = prod if v is None else v + prod
    return {k: v for k, v in out.items() if v}


def derive_terms(dict a, var):
    cdef dict out = {}
    cdef tuple m
    cdef Py_ssize_t n, i
    for key, c in a.items():
        m = key[1]
        n = m.count(var)
        if not n:
            continue
        i = m.index(var)
        out[(key[0], m[:i] + m[i + 1:])] = n * c
    return out


def add_into(dict acc, dict terms, coeff):
    for k, c in terms.items():
        v = acc.get(k, 0) + coeff * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)
    return acc
