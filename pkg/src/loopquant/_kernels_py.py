"""Pure-Python sparse series kernels.

Terms are dicts keyed by ``(grade, mono)`` where ``mono`` is a sorted tuple of
encoded variable ids (``level << 6 | (mu - 1)``).  The compiled module
``_kernels`` exposes the same functions with the same semantics.
"""

NO_CAP = 1 << 30


def _levelsum(mono):
    s = 0
    for v in mono:
        s += v >> 6
    return s


def mul_terms(a, b, maxdeg, maxls, wcap):
    """Truncated product of two term dicts.

    A product term survives iff degree <= maxdeg, level-sum <= maxls and
    ``2*grade + degree <= wcap``.
    """
    if len(a) > len(b):
        a, b = b, a
    bl = [(g, m, len(m), _levelsum(m), c) for (g, m), c in b.items()]
    out = {}
    get = out.get
    for (ga, ma), ca in a.items():
        da = len(ma)
        la = _levelsum(ma)
        for gb, mb, db, lb, cb in bl:
            d = da + db
            if d > maxdeg or la + lb > maxls:
                continue
            g = ga + gb
            if 2 * g + d > wcap:
                continue
            key = (g, tuple(sorted(ma + mb)) if ma and mb else (ma or mb))
            v = get(key)
            out[key] = ca * cb if v is None else v + ca * cb
    return {k: v for k, v in out.items() if v}


def derive_terms(a, var):
    """Formal partial derivative with respect to the encoded variable ``var``."""
    out = {}
    for (g, m), c in a.items():
        n = m.count(var)
        if not n:
            continue
        i = m.index(var)
        key = (g, m[:i] + m[i + 1:])
        out[key] = out.get(key, 0) + n * c
    return out


def add_into(acc, terms, coeff):
    """acc += coeff * terms, dropping cancelled entries."""
    for k, c in terms.items():
        v = acc.get(k, 0) + coeff * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)
    return acc
