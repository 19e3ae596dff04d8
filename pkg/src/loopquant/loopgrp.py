"""Loop-algebra elements, the symplectic condition, P(A) and brackets.

An element is a finite Laurent polynomial A(z) = sum_e A_e z^e of N x N
rational matrices written in an orthonormal basis, so the adjoint is the
transpose.  ``upper`` elements r(z) = sum_{l>=1} r_l z^l, ``lower`` elements
s(1/z) = sum_{l>=1} s_l z^{-l}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import InputError
from .series import as_fraction

Matrix = tuple  # tuple of row tuples of Fraction


def mat(rows) -> Matrix:
    return tuple(tuple(as_fraction(x) for x in row) for row in rows)


def zeros(n) -> Matrix:
    return tuple((Fraction(0),) * n for _ in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matadd(a: Matrix, b: Matrix, c=1) -> Matrix:
    return tuple(tuple(x + c * y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


@dataclass(frozen=True)
class LoopElement:
    """Finite Laurent element A(z) = sum_e coeffs[e] z^e."""

    N: int
    coeffs: Mapping[int, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, m in self.coeffs.items():
            m = mat(m)
            if len(m) != self.N or any(len(r) != self.N for r in m):
                raise InputError(f"loop element: matrix at z^{e} is not {self.N}x{self.N}")
            if not is_zero(m):
                clean[int(e)] = m
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def upper(cls, N, matrices: Mapping[int, object]) -> "LoopElement":
        if any(l < 1 for l in matrices):
            raise InputError("upper element: levels l must be >= 1")
        return cls(N, {l: m for l, m in matrices.items()})

    @classmethod
    def lower(cls, N, matrices: Mapping[int, object]) -> "LoopElement":
        if any(l < 1 for l in matrices):
            raise InputError("lower element: levels l must be >= 1")
        return cls(N, {-l: m for l, m in matrices.items()})

    @property
    def kind(self) -> str:
        es = list(self.coeffs)
        if not es:
            return "zero"
        if all(e >= 1 for e in es):
            return "upper"
        if all(e <= -1 for e in es):
            return "lower"
        return "mixed"

    @property
    def l_max(self) -> int:
        return max((abs(e) for e in self.coeffs), default=0)

    def __neg__(self):
        return LoopElement(self.N, {e: matadd(zeros(self.N), m, -1) for e, m in self.coeffs.items()})

    def scale(self, c) -> "LoopElement":
        c = as_fraction(c)
        return LoopElement(self.N, {e: tuple(tuple(c * x for x in r) for r in m) for e, m in self.coeffs.items()})

    def __add__(self, other):
        out = dict(self.coeffs)
        for e, m in other.coeffs.items():
            out[e] = matadd(out.get(e, zeros(self.N)), m)
        return LoopElement(self.N, out)

    def to_json(self) -> dict:
        kind = self.kind
        if kind == "mixed":
            items = [{"e": e, "m": [[str(x) for x in r] for r in m]} for e, m in self.coeffs.items()]
            return {"N": self.N, "kind": "laurent", "matrices": items}
        items = [{"l": abs(e), "m": [[str(x) for x in r] for r in m]} for e, m in self.coeffs.items()]
        return {"N": self.N, "kind": "lower" if kind == "lower" else "upper", "matrices": items}

    @classmethod
    def from_json(cls, d) -> "LoopElement":
        try:
            N = int(d["N"])
            kind = d["kind"]
            items = d["matrices"]
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"element: malformed JSON ({e})") from None
        out = {}
        for it in items:
            if kind == "laurent":
                e = int(it["e"])
            else:
                l = int(it["l"])
                if l < 1:
                    raise InputError(f"element: level l={l} must be >= 1")
                e = l if kind == "upper" else -l
            if kind not in ("upper", "lower", "laurent"):
                raise InputError(f"element: unknown kind {kind!r}")
            m = mat(it["m"])
            out[e] = matadd(out[e], m) if e in out else m
        return cls(N, out)


def validate_symplectic(a: LoopElement):
    """None if A^T(-z) = -A(z); otherwise the first violating (l, i, j).

    Per power z^e this is A_e^T = (-1)^(e+1) A_e.  ``l`` is reported as |e|,
    i and j are 1-based.
    """
    for e, m in sorted(a.coeffs.items(), key=lambda kv: (abs(kv[0]), kv[0])):
        sign = 1 if e % 2 else -1
        for i in range(a.N):
            for j in range(a.N):
                if m[j][i] != sign * m[i][j]:
                    return (abs(e), i + 1, j + 1)
    return None


def require_symplectic(a: LoopElement):
    bad = validate_symplectic(a)
    if bad is not None:
        l, i, j = bad
        raise InputError(f"element is not infinitesimally symplectic: violation at (l={l}, i={i}, j={j})")


def lie_bracket(a: LoopElement, b: LoopElement) -> LoopElement:
    """[a, b]_e = sum_{i+j=e} a_i b_j - b_j a_i."""
    if a.N != b.N:
        raise InputError("lie_bracket: dimension mismatch")
    out = {}
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            c = matadd(matmul(x, y), matmul(y, x), -1)
            out[i + j] = matadd(out.get(i + j, zeros(a.N)), c)
    return LoopElement(a.N, out)


@dataclass
class QuadHamiltonian:
    """P = sum pp[a,b] p_a p_b + sum pq[a,b] p_a q_b + sum qq[a,b] q_a q_b.

    Indices are (mu, k) pairs; pp and qq are stored symmetrically and summed
    over ordered pairs.
    """

    N: int
    kmax: int
    pp: dict = field(default_factory=dict)
    pq: dict = field(default_factory=dict)
    qq: dict = field(default_factory=dict)

    def clean(self) -> "QuadHamiltonian":
        for t in (self.pp, self.pq, self.qq):
            for k in [k for k, v in t.items() if not v]:
                del t[k]
        return self

    def __eq__(self, other):
        return (self.pp, self.pq, self.qq) == (other.pp, other.pq, other.qq)

    def is_zero(self):
        return not (self.pp or self.pq or self.qq)


def _coordinate_image(a: LoopElement, kmax: int):
    """Linear forms of the coordinates of A f in terms of those of f.

    Returns (pimg, qimg): dicts (mu, j) -> {('p'|'q', nu, k): coeff}.
    """
    pimg, qimg = {}, {}

    def put(img, key, src, c):
        d = img.setdefault(key, {})
        d[src] = d.get(src, 0) + c

    for e, m in a.coeffs.items():
        for nu in range(a.N):
            for mu in range(a.N):
                c = m[mu][nu]
                if not c:
                    continue
                for k in range(kmax + 1):
                    # q^nu_k z^k
                    t = k + e
                    if t >= 0:
                        if t <= kmax:
                            put(qimg, (mu + 1, t), ("q", nu + 1, k), c)
                    else:
                        j = -t - 1
                        if j <= kmax:
                            put(pimg, (mu + 1, j), ("q", nu + 1, k), (c if j % 2 else -c))
                    # p^nu_k (-z)^(-k-1) = (-1)^(k+1) z^(-k-1)
                    t = e - k - 1
                    if t >= 0:
                        if t <= kmax:
                            put(qimg, (mu + 1, t), ("p", nu + 1, k), (c if k % 2 else -c))
                    else:
                        j = k - e
                        if j <= kmax:
                            put(pimg, (mu + 1, j), ("p", nu + 1, k), (-c if e % 2 else c))
    return pimg, qimg


def quadratic_hamiltonian(a: LoopElement, kmax: int) -> QuadHamiltonian:
    """P(A)(f) = 1/2 Omega(A f, f), restricted to indices k <= kmax.

    Omega(f, g) = sum_k p^f_k q^g_k - q^f_k p^g_k in Darboux coordinates.
    """
    require_symplectic(a)
    h = QuadHamiltonian(a.N, kmax)
    pimg, qimg = _coordinate_image(a, kmax)
    half = Fraction(1, 2)
    quarter = Fraction(1, 4)
    # 1/2 sum_x p'_x q_x
    for x, form in pimg.items():
        for (kind, nu, k), c in form.items():
            y = (nu, k)
            if kind == "p":
                h.pq[(y, x)] = h.pq.get((y, x), 0) + half * c
            else:
                h.qq[(y, x)] = h.qq.get((y, x), 0) + quarter * c
                h.qq[(x, y)] = h.qq.get((x, y), 0) + quarter * c
    # -1/2 sum_x q'_x p_x
    for x, form in qimg.items():
        for (kind, nu, k), c in form.items():
            y = (nu, k)
            if kind == "p":
                h.pp[(y, x)] = h.pp.get((y, x), 0) - quarter * c
                h.pp[(x, y)] = h.pp.get((x, y), 0) - quarter * c
            else:
                h.pq[(x, y)] = h.pq.get((x, y), 0) - half * c
    return h.clean()


def element_from_hamiltonian(h: QuadHamiltonian, kind: str, l_max: int) -> LoopElement:
    """Recover A from the pq-part of P(A) (upper or lower elements).

    For upper A the pq-part is -sum r_l[mu][nu] p^mu_{k+l} q^nu_k, for lower
    it is -sum s_l[mu][nu] p^mu_k q^nu_{k+l}.
    """
    out = {}
    for l in range(1, l_max + 1):
        m = [[Fraction(0)] * h.N for _ in range(h.N)]
        for mu in range(1, h.N + 1):
            for nu in range(1, h.N + 1):
                if kind == "upper":
                    m[mu - 1][nu - 1] = -h.pq.get(((mu, l), (nu, 0)), 0)
                else:
                    m[mu - 1][nu - 1] = -h.pq.get(((mu, 0), (nu, l)), 0)
        out[l if kind == "upper" else -l] = m
    return LoopElement(h.N, out)
