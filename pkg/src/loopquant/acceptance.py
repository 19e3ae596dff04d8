"""Acceptance suite shared by the test-suite and ``loopquant selfcheck``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .cone import check_cone_axioms
from .errors import CheckFailure
from .flow import act, flow_derivative, operator_derivatives
from .loopgrp import LoopElement, lie_bracket, quadratic_hamiltonian
from .potential import CorrelatorIndex, correlator, _mult_factor
from .quantize import (BRACKET_SIGN, EXPLICIT_SIGN, all_monomials, commutator_defect, quantize_element,
                       quantize_upper_explicit, weyl_quantize)
from .randgen import random_element
from .relations import BUILTINS, RelationSyntaxError, builtin, builtin_text, evaluate_relation, parse_relation
from .series import TruncatedSeries, Window, decode, encode, levelsum
from .vertex import product_vertex

VERTEX_WINDOW = Window(N=1, K=9, D=6, G=2, L=9)


@dataclass
class CriterionResult:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float
    limit: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.ok and self.seconds <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        timing = f"{self.seconds:.1f}s/{self.limit:.0f}s"
        return f"[{status}] {self.number}. {self.title}: {self.detail} ({timing})"


def load_golden(text: str | None = None):
    """Frozen intersection numbers: list of (genus, levels, value, source)."""
    if text is None:
        text = resources.files(__package__).joinpath("data", "intersections.tsv").read_text()
    rows = []
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise CheckFailure(f"golden table line {ln}: expected 4 tab-separated fields")
        g, levels, value, source = parts
        rows.append((int(g), tuple(int(x) for x in levels.split(",")), Fraction(value), source))
    return rows


def _timed(fn):
    t = time.perf_counter()
    ok, detail, extra = fn()
    return ok, detail, extra, time.perf_counter() - t


# ------------------------------------------------------------------ 1

def criterion_vertex(quick=False, seed=0, golden_text=None):
    def run():
        p = product_vertex(VERTEX_WINDOW)
        named = {
            (0, ((1, 0),) * 3): Fraction(1),
            (1, ((1, 1),)): Fraction(1, 24),
            (2, ((1, 4),)): Fraction(1, 1152),
        }
        diffs = []
        for (g, ins), want in named.items():
            got = correlator(p, CorrelatorIndex(g, ins))
            if got != want:
                diffs.append(f"<{ins}>_{g}: got {got}, want {want}")
        w = VERTEX_WINDOW
        checked = 0
        for g, levels, want, source in load_golden(golden_text):
            if g > w.G or len(levels) > w.D or max(levels) > w.K or sum(levels) > w.L:
                continue
            got = correlator(p, CorrelatorIndex(g, tuple((1, k) for k in levels)))
            checked += 1
            if got != want:
                diffs.append(f"golden {source} g={g} levels={levels}: got {got}, want {want}")
        dim_bad = 0
        for g, F in enumerate(p.F):
            for (_, m), c in F.terms.items():
                if levelsum(m) != 3 * g - 3 + len(m):
                    dim_bad += 1
        if dim_bad:
            diffs.append(f"{dim_bad} terms violate the dimension constraint")
        detail = f"3 named values, {checked} golden rows, {sum(len(F) for F in p.F)} terms"
        if diffs:
            detail = "; ".join(diffs[:5])
        return not diffs, detail, {"diff": diffs}

    return "vertex correctness", run, 10.0


# ------------------------------------------------------------------ 2

def criterion_builtins(quick=False, seed=0):
    def run():
        p = product_vertex(VERTEX_WINDOW)
        parts, ok = [], True
        for name in BUILTINS:
            rep = evaluate_relation(builtin(name), p)
            ok &= rep.ok
            parts.append(f"{name}:{'0' if rep.ok else 'NONZERO'}({rep.asserted_coefficients})")
        return ok, " ".join(parts), {}

    return "built-in relations annihilate the vertex", run, 60.0


# ------------------------------------------------------------------ 3, 4

INVARIANCE_WINDOWS = {
    ("upper", 1): Window(N=1, K=8, D=9, G=1, L=8),
    ("upper", 2): Window(N=2, K=7, D=8, G=1, L=7),
    ("lower", 1): Window(N=1, K=7, D=10, G=1, L=7),
    ("lower", 2): Window(N=2, K=6, D=9, G=1, L=6),
}


def _invariance(kind, count, seed):
    rng = random.Random(f"{kind}-{seed}")
    rels = [builtin(n) for n in BUILTINS]
    asserted, failures = 0, []
    p_cache = {}
    for i in range(count):
        el = random_element(rng, kind)
        w = INVARIANCE_WINDOWS[(kind, el.N)]
        if w not in p_cache:
            p_cache[w] = product_vertex(w)
        q, info = act(p_cache[w], el)
        for r in rels:
            rep = evaluate_relation(r, q)
            asserted += rep.asserted_coefficients
            if not rep.ok:
                failures.append({"element": el.to_json(), "relation": r.name, "violation": rep.violations[0]})
    detail = f"{count} elements, {asserted} asserted coefficients, {len(failures)} nonzero residuals"
    return not failures, detail, {"failures": failures[:3]}


def criterion_r_invariance(quick=False, seed=0):
    return "R-invariance of SE/DE/TRR/TRR1", lambda: _invariance("upper", 3 if quick else 20, seed), 600.0


def criterion_s_invariance(quick=False, seed=0):
    return "S-invariance of SE/DE/TRR/TRR1", lambda: _invariance("lower", 3 if quick else 20, seed), 600.0


# ------------------------------------------------------------------ 5

FLOW_BASE = {1: Window(N=1, K=6, D=7, G=2, L=7), 2: Window(N=2, K=5, D=6, G=1, L=6)}


def flow_test_window(base: Window, l_max: int) -> Window:
    """Indices on which the operator-extracted derivative is exact."""
    k = base.K - l_max - 1
    return Window(N=base.N, K=k, D=base.D - 2, G=base.G, L=min(base.L - l_max - 1, base.D - 2 + k))


def flow_equivalence(r: LoopElement, base: Window):
    p = product_vertex(base)
    wt = flow_test_window(base, 2)
    op = quantize_upper_explicit(r, p.unit, base.K)
    dF = operator_derivatives(p, op)
    checked, nonzero, mismatches = 0, 0, []
    monos = all_monomials(wt)
    for g in range(wt.G + 1):
        for m in monos:
            ins = tuple(decode(v) for v in m)
            want = dF[g].coeff(m) * _mult_factor(m)
            got = flow_derivative(p, r, CorrelatorIndex(g, ins))
            checked += 1
            nonzero += bool(want)
            if got != want:
                mismatches.append({"genus": g, "insertions": [list(x) for x in ins], "flow": str(got), "operator": str(want)})
    return checked, nonzero, mismatches


def criterion_flow(quick=False, seed=0):
    def run():
        rng = random.Random(f"flow-{seed}")
        total = nonzero = 0
        bad = []
        for _ in range(3 if quick else 20):
            r = random_element(rng, "upper")
            c, nz, mm = flow_equivalence(r, FLOW_BASE[r.N])
            total, nonzero = total + c, nonzero + nz
            bad.extend(mm)
        detail = f"{total} correlator derivatives compared ({nonzero} nonzero), {len(bad)} mismatches"
        return not bad, detail, {"mismatches": bad[:5]}

    return "flow/operator equivalence", run, 300.0


# ------------------------------------------------------------------ 6

def p_inverse_z_example(kmax: int = 6):
    """Return (hamiltonian ok, operator ok) for A(z) = 1/z, dim H = 1."""
    a = LoopElement.lower(1, {1: [[1]]})
    h = quadratic_hamiltonian(a, kmax)
    want_qq = {((1, 0), (1, 0)): Fraction(-1, 2)}
    want_pq = {((1, m), (1, m + 1)): Fraction(-1) for m in range(kmax)}
    h_ok = not h.pp and dict(h.qq) == want_qq and dict(h.pq) == want_pq
    op = quantize_element(a, [1], kmax)
    t = lambda k: encode(1, k)  # noqa: E731
    want_td = {(t(m + 1), t(m)): Fraction(-1) for m in range(kmax)}
    op_ok = (not op.dd and op.tt == {(t(0), t(0)): Fraction(-1, 2)} and op.td == want_td
             and op.d == {t(0): Fraction(1)} and not op.t and not op.const)
    return h_ok, op_ok


def criterion_quantization(quick=False, seed=0):
    def run():
        rng = random.Random(f"quant-{seed}")
        sigmas = set()
        for _ in range(10):
            r = random_element(rng, "upper")
            kmax = 6
            explicit = quantize_upper_explicit(r, [1] * r.N, kmax)
            weyl = weyl_quantize(quadratic_hamiltonian(r, kmax), [1] * r.N, r.kind)
            if explicit == weyl.scale(1):
                sigmas.add(1)
            elif explicit == weyl.scale(-1):
                sigmas.add(-1)
            else:
                sigmas.add(None)
        h_ok, op_ok = p_inverse_z_example()
        ok = sigmas == {EXPLICIT_SIGN} and h_ok and op_ok
        detail = f"sigma={sorted(sigmas, key=str)} on 10 elements; P(1/z) hamiltonian {'ok' if h_ok else 'WRONG'}, operator {'ok' if op_ok else 'WRONG'}"
        return ok, detail, {}

    return "quantization consistency", run, 60.0


# ------------------------------------------------------------------ 7

def criterion_cocycle(quick=False, seed=0):
    def run():
        rng = random.Random(f"cocycle-{seed}")
        kinds = [("upper", "upper"), ("lower", "lower"), ("upper", "lower"), ("lower", "upper")]
        scalars = []
        for i in range(10):
            ka, kb = kinds[i % 4]
            N = rng.randint(1, 2)
            a = random_element(rng, ka, N=N)
            b = random_element(rng, kb, N=N)
            w = Window(N=N, K=3, D=3, G=1, L=3)
            scalars.append(commutator_defect(a, b, w, bracket_sign=BRACKET_SIGN))
        return True, "central on every test monomial; scalars " + ", ".join(map(str, scalars)), {}

    return "commutator cocycle is central", run, 120.0


# ------------------------------------------------------------------ 8

CONE_WINDOW = Window(N=2, K=6, D=8, G=0, L=6)


def homogeneous_perturbation(window: Window, c=Fraction(1)) -> TruncatedSeries:
    """c * t0^4 / (1 - t1)^2 on direction 1: degree 2 in q, breaks TRR."""
    terms = {}
    for n in range(window.D - 3):
        m = tuple(sorted((encode(1, 0),) * 4 + (encode(1, 1),) * n))
        if window.contains_mono(m):
            terms[(0, m)] = c * (n + 1)
    return TruncatedSeries(window, terms)


def criterion_cone(quick=False, seed=0):
    def run():
        rng = random.Random(f"cone-{seed}")
        J = 3
        p = product_vertex(CONE_WINDOW)
        subjects = [("vertex", p)]
        for i in range(2 if quick else 5):
            q, _ = act(p, random_element(rng, "upper", N=2))
            subjects.append((f"image{i + 1}", q))
        problems = []
        rels = [builtin(n) for n in ("SE", "DE", "TRR")]
        for name, q in subjects:
            rep = check_cone_axioms(q, 2, J, seed=seed)
            rel_ok = all(evaluate_relation(r, q).ok for r in rels)
            if not rep["ok"] or not rel_ok:
                problems.append(f"{name}: axioms {rep['ok']}, relations {rel_ok}")
        quartic = TruncatedSeries(CONE_WINDOW, {(0, (encode(1, 0),) * 4): Fraction(1)})
        bad1 = p.replace(components=[p.F[0] + quartic])
        r1 = check_cone_axioms(bad1, 2, J, seed=seed)
        if r1["axioms"][0]["ok"] or "witness" not in r1["axioms"][0]:
            problems.append("t0^4 perturbation did not fail axiom 1 with a witness")
        bad2 = p.replace(components=[p.F[0] + homogeneous_perturbation(CONE_WINDOW)])
        r2 = check_cone_axioms(bad2, 2, J, seed=seed)
        if not r2["axioms"][0]["ok"] or r2["axioms"][1]["ok"]:
            problems.append("homogeneous perturbation: expected axiom 1 pass and axiom 2 failure")
        rel_bad2 = not evaluate_relation(builtin("TRR"), bad2).ok
        if not rel_bad2:
            problems.append("homogeneous perturbation should violate TRR")
        detail = f"{len(subjects)} cones pass at jet order {J}; counterexamples fail with witnesses"
        return not problems, "; ".join(problems) or detail, {}

    return "cone axioms", run, 120.0


# ------------------------------------------------------------------ 9

def _strip_comments(text: str) -> str:
    return "".join(line + "\n" for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#"))


def mutate(text: str, rng: random.Random) -> str:
    pieces = [";", ":", ",", "(", ")", "*", "+", "-", "/", "sum", "corr", "var", "term", "relation", "u", "0", "7", "\n", " ", "#", "@", "eta"]
    s = list(text)
    for _ in range(rng.randint(1, 4)):
        op = rng.random()
        pos = rng.randrange(len(s) + 1)
        if op < 0.4 and s:
            del s[min(pos, len(s) - 1)]
        elif op < 0.8:
            s[pos:pos] = list(rng.choice(pieces))
        elif s:
            j = rng.randrange(len(s))
            s[pos:pos], s = [], s
            s[j], s[min(pos, len(s) - 1)] = s[min(pos, len(s) - 1)], s[j]
    return "".join(s)


def fuzz_parser(cases: int, seed: int):
    """Returns (accepted, rejected, crashes, missing positions)."""
    rng = random.Random(f"fuzz-{seed}")
    sources = [builtin_text(n) for n in BUILTINS]
    accepted = rejected = 0
    crashes, unpositioned = [], []
    for _ in range(cases):
        text = mutate(rng.choice(sources), rng)
        try:
            rel = parse_relation(text)
            if parse_relation(rel.serialize()) != rel:
                crashes.append(("round-trip", text))
            accepted += 1
        except RelationSyntaxError as e:
            rejected += 1
            if e.line is None:
                unpositioned.append((str(e), text))
        except Exception as e:  # noqa: BLE001 - any other exception is a crash
            crashes.append((repr(e), text))
    return accepted, rejected, crashes, unpositioned


def criterion_parser(quick=False, seed=0):
    def run():
        problems = []
        for name in BUILTINS:
            text = builtin_text(name)
            rel = parse_relation(text)
            if rel.serialize() != _strip_comments(text) or parse_relation(rel.serialize()) != rel:
                problems.append(f"{name} round-trip differs")
        acc, rej, crashes, unpos = fuzz_parser(200 if quick else 1000, seed)
        if crashes:
            problems.append(f"{len(crashes)} crashes, first {crashes[0][0]}")
        if unpos:
            problems.append(f"{len(unpos)} diagnostics without line/column")
        detail = f"{len(BUILTINS)} golden round-trips; fuzz {acc + rej} cases ({rej} rejected with positions, 0 crashes)"
        return not problems, "; ".join(problems) or detail, {}

    return "parser round-trips and fuzz", run, 60.0


CRITERIA = [
    criterion_vertex, criterion_builtins, criterion_r_invariance, criterion_s_invariance,
    criterion_flow, criterion_quantization, criterion_cocycle, criterion_cone, criterion_parser,
]


def run_criterion(number: int, quick=False, seed=0, **kw) -> CriterionResult:
    title, fn, limit = CRITERIA[number - 1](quick=quick, seed=seed, **kw)
    try:
        ok, detail, extra, secs = _timed(fn)
    except CheckFailure as e:
        ok, detail, extra, secs = False, f"check failure: {e}", {}, 0.0
    return CriterionResult(number, title, ok, detail, secs, limit, extra)


def run_all(quick=False, seed=0, numbers=None):
    return [run_criterion(n, quick, seed) for n in (numbers or range(1, len(CRITERIA) + 1))]
