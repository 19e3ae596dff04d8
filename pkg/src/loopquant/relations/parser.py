"""Tokenizer, parser and validator for the relation language.

Grammar (statements end with ``;``, ``#`` starts a comment)::

    file      := relation+
    relation  := "relation" NAME "genus" INT ";" [ "free" slot+ ";" ] term+
    slot      := NAME ":" NAME
    term      := "term" number [ "sum" sumidx ("," sumidx)* ] product ";"
    sumidx    := NAME [ ":" NAME ]
    product   := factor ( "*" factor )*
    factor    := "corr" "(" INT [ ";" insertion ("," insertion)* ] ")"
               | "var" "(" insertion ")"
               | "eta" "(" NAME "," NAME ")"
               | number
    insertion := "one" ":" INT
               | INT ":" INT
               | NAME [ ":" level ] [ ("+" | "-") INT ]
    level     := INT | NAME [ ("+" | "-") INT ]
    number    := [ "+" | "-" ] INT [ "/" INT ]
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import InputError
from .model import Corr, Eta, FreeSlot, Insertion, Level, Relation, SumIndex, Term, Var

KEYWORDS = {"relation", "genus", "free", "term", "sum", "corr", "var", "eta", "one"}
_TOKEN = re.compile(r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[;:,()*+\-/])")


class RelationSyntaxError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column, self.message = line, column, message
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


def tokenize(text: str):
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise RelationSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            val = m.group()
            if kind == "name" and val in KEYWORDS:
                kind = "kw"
            out.append((kind, val, line, m.start() - start + 1))
        pos = m.end()
    out.append(("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        t = tok or self.tok
        return RelationSyntaxError(msg, t[2], t[3])

    def describe(self, t):
        return "end of input" if t[0] == "eof" else repr(t[1])

    def take(self, kind, value=None):
        t = self.tok
        if t[0] != kind or (value is not None and t[1] != value):
            want = repr(value) if value else kind
            raise self.error(f"expected {want}, found {self.describe(t)}")
        self.i += 1
        return t

    def peek(self, kind, value=None):
        t = self.tok
        return t[0] == kind and (value is None or t[1] == value)

    def accept(self, kind, value=None):
        if self.peek(kind, value):
            self.i += 1
            return True
        return False

    def integer(self):
        return int(self.take("int")[1])

    def number(self):
        t = self.tok
        sign = -1 if self.accept("sym", "-") else (self.accept("sym", "+") and 1) or 1
        num = self.integer()
        den = 1
        if self.accept("sym", "/"):
            den = self.integer()
            if den == 0:
                raise self.error("zero denominator", t)
        return sign * Fraction(num, den)

    def offset(self):
        if self.peek("sym", "+") or self.peek("sym", "-"):
            t = self.tok
            sign = 1 if self.take("sym")[1] == "+" else -1
            return sign * self.integer(), t
        return 0, None

    # -------------------------------------------------------------- grammar

    def relations(self):
        out = []
        while not self.peek("eof"):
            out.append(self.relation())
        if not out:
            raise self.error("no relation found")
        return out

    def relation(self):
        self.take("kw", "relation")
        name = self.take("name")[1]
        self.take("kw", "genus")
        genus = self.integer()
        self.take("sym", ";")
        free = []
        if self.accept("kw", "free"):
            while not self.peek("sym", ";"):
                n = self.take("name")[1]
                self.take("sym", ":")
                free.append(FreeSlot(n, self.take("name")[1]))
            self.take("sym", ";")
        self.free = {s.name: s for s in free}
        self.free_levels = {s.level_var: s for s in free}
        terms, positions = [], []
        while self.peek("kw", "term"):
            positions.append(self.tok[2:4])
            terms.append(self.term())
        if not terms:
            raise self.error("no terms")
        rel = Relation(name, genus, tuple(free), tuple(terms))
        validate(rel, positions)
        return rel

    def term(self):
        self.take("kw", "term")
        coeff = self.number()
        sums = []
        if self.accept("kw", "sum"):
            while True:
                n = self.take("name")[1]
                lv = self.take("name")[1] if self.accept("sym", ":") else None
                sums.append(SumIndex(n, lv))
                if not self.accept("sym", ","):
                    break
        self.sums = {s.name: s for s in sums}
        factors = []
        while True:
            f = self.factor()
            if isinstance(f, Fraction):
                coeff *= f
            else:
                factors.append(f)
            if not self.accept("sym", "*"):
                break
        self.take("sym", ";")
        return Term(coeff, tuple(sums), tuple(factors))

    def factor(self):
        t = self.tok
        if self.accept("kw", "corr"):
            self.take("sym", "(")
            g = self.integer()
            ins = []
            if self.accept("sym", ";"):
                ins.append(self.insertion())
                while self.accept("sym", ","):
                    ins.append(self.insertion())
            self.take("sym", ")")
            return Corr(g, tuple(ins))
        if self.accept("kw", "var"):
            self.take("sym", "(")
            i = self.insertion()
            self.take("sym", ")")
            return Var(i)
        if self.accept("kw", "eta"):
            self.take("sym", "(")
            a = self.take("name")[1]
            self.take("sym", ",")
            b = self.take("name")[1]
            self.take("sym", ")")
            return Eta(a, b)
        if t[0] == "int" or (t[0] == "sym" and t[1] in "+-"):
            return self.number()
        raise self.error(f"expected a factor, found {self.describe(t)}")

    def literal_level(self):
        t = self.tok
        v = self.integer()
        return Level(None, v), t

    def insertion(self):
        t = self.tok
        if self.accept("kw", "one"):
            self.take("sym", ":")
            lv, _ = self.literal_level()
            return Insertion("unit", level=lv)
        if t[0] == "int":
            mu = self.integer()
            if mu < 1:
                raise self.error("basis index must be at least 1", t)
            self.take("sym", ":")
            lv, _ = self.literal_level()
            return Insertion("explicit", mu=mu, level=lv)
        name = self.take("name")[1]
        if name in self.free:
            slot = self.free[name]
            if self.accept("sym", ":"):
                lt = self.tok
                lname = self.take("name")[1]
                if lname != slot.level_var:
                    raise self.error(f"free slot {name!r} has level {slot.level_var!r}, not {lname!r}", lt)
            off, ot = self.offset()
            if off < 0:
                raise self.error("negative level expression", ot)
            return Insertion("free", name=name, level=Level(slot.level_var, off))
        if name in self.sums:
            if not self.accept("sym", ":"):
                raise self.error(f"contracted index {name!r} needs a level", t)
            lt = self.tok
            if lt[0] == "int":
                lv, _ = self.literal_level()
            else:
                lname = self.take("name")[1]
                off, ot = self.offset()
                if off < 0:
                    raise self.error("negative level expression", ot)
                lv = Level(lname, off)
                if lname != self.sums[name].level_var:
                    raise self.error(f"level {lname!r} is not bound to contracted index {name!r}", lt)
            return Insertion("contracted", name=name, level=lv)
        raise self.error(f"unbound index {name!r}", t)


def validate(rel: Relation, positions=None):
    """Structural checks shared by the text and JSON front ends."""

    def fail(msg, k=None):
        if positions is not None and k is not None:
            raise RelationSyntaxError(msg, *positions[k])
        raise RelationSyntaxError(msg)

    if not rel.terms:
        fail("no terms")
    if rel.genus < 0:
        fail("negative genus")
    names = [s.name for s in rel.free] + [s.level_var for s in rel.free]
    if len(set(names)) != len(names):
        fail("free slot names and levels must be distinct")
    for k, term in enumerate(rel.terms):
        sums = {}
        for s in term.sums:
            if s.name in sums or s.name in names or s.name in KEYWORDS or (s.level_var and s.level_var in names):
                fail(f"summation index {s.name!r} clashes with another name", k)
            sums[s.name] = s
        uses = {n: 0 for n in sums}
        level_in_var = {s.level_var: False for s in sums.values() if s.level_var}

        def check(ins, in_var):
            if ins.level.offset < 0:
                fail("negative level expression", k)
            if ins.kind == "free":
                if ins.name not in {s.name for s in rel.free}:
                    fail(f"unbound index {ins.name!r}", k)
            elif ins.kind == "contracted":
                if ins.name not in sums:
                    fail(f"unbound index {ins.name!r}", k)
                uses[ins.name] += 1
                lv = sums[ins.name].level_var
                if ins.level.var != lv and ins.level.var is not None:
                    fail(f"level {ins.level.var!r} is not bound to contracted index {ins.name!r}", k)
                if lv is not None and ins.level.var is None:
                    fail(f"contracted index {ins.name!r} must use its summed level {lv!r}", k)
                if lv is not None and in_var:
                    level_in_var[lv] = True
            elif ins.kind == "explicit":
                if not ins.mu or ins.mu < 1:
                    fail("basis index must be at least 1", k)
            elif ins.kind != "unit":
                fail(f"unknown insertion kind {ins.kind!r}", k)

        for f in term.factors:
            if isinstance(f, Corr):
                if f.genus < 0:
                    fail("negative genus label", k)
                for ins in f.insertions:
                    check(ins, False)
            elif isinstance(f, Var):
                check(f.insertion, True)
            elif isinstance(f, Eta):
                for n in (f.left, f.right):
                    if n not in sums or sums[n].level_var is not None:
                        fail(f"eta needs level-free contracted indices, got {n!r}", k)
                    uses[n] += 1
        for n, c in uses.items():
            if c != 2:
                fail(f"contracted index {n!r} used {c} time(s); it must appear exactly twice", k)
        for lv, ok in level_in_var.items():
            if not ok:
                fail(f"summed level {lv!r} must appear inside a var(...) factor", k)
    return rel


def parse_relations(text: str) -> list[Relation]:
    return _Parser(text).relations()


def parse_relation(text: str) -> Relation:
    rels = parse_relations(text)
    if len(rels) != 1:
        raise RelationSyntaxError(f"expected one relation, found {len(rels)}")
    return rels[0]


def serialize(rel: Relation) -> str:
    return rel.serialize()
