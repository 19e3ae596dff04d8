"""Relation objects: a relation is a sum of terms, each a rational times a product of factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class Level:
    """A level expression: ``var + offset`` (var None for a literal level)."""

    var: str | None = None
    offset: int = 0

    def evaluate(self, env) -> int:
        return (env[self.var] if self.var else 0) + self.offset

    def __str__(self):
        if self.var is None:
            return str(self.offset)
        if self.offset == 0:
            return self.var
        return f"{self.var}{self.offset:+d}"


@dataclass(frozen=True)
class Insertion:
    """One insertion spec.

    kind "free":       free slot ``name`` at its declared level plus ``level.offset``
    kind "contracted": summed index ``name`` at ``level``
    kind "unit":       the distinguished vector at literal ``level``
    kind "explicit":   basis direction ``mu`` at literal ``level``
    """

    kind: str
    name: str | None = None
    mu: int | None = None
    level: Level = field(default_factory=Level)

    def __str__(self):
        if self.kind == "free":
            return self.name + (f"{self.level.offset:+d}" if self.level.offset else "")
        if self.kind == "contracted":
            return f"{self.name}:{self.level}"
        if self.kind == "unit":
            return f"one:{self.level}"
        return f"{self.mu}:{self.level}"


@dataclass(frozen=True)
class Corr:
    genus: int
    insertions: tuple = ()

    def __str__(self):
        if not self.insertions:
            return f"corr({self.genus})"
        return f"corr({self.genus}; " + ", ".join(map(str, self.insertions)) + ")"


@dataclass(frozen=True)
class Var:
    insertion: Insertion

    def __str__(self):
        return f"var({self.insertion})"


@dataclass(frozen=True)
class Eta:
    """Metric pairing of two contracted indices (identity matrix in the orthonormal basis)."""

    left: str
    right: str

    def __str__(self):
        return f"eta({self.left}, {self.right})"


@dataclass(frozen=True)
class SumIndex:
    name: str
    level_var: str | None = None

    def __str__(self):
        return self.name if self.level_var is None else f"{self.name}:{self.level_var}"


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    sums: tuple = ()
    factors: tuple = ()

    def __str__(self):
        parts = [f"term {self.coeff}"]
        if self.sums:
            parts.append("sum " + ", ".join(map(str, self.sums)))
        parts.append(" * ".join(map(str, self.factors)) if self.factors else "1")
        return " ".join(parts) + ";"


@dataclass(frozen=True)
class FreeSlot:
    name: str
    level_var: str

    def __str__(self):
        return f"{self.name}:{self.level_var}"


@dataclass(frozen=True)
class Relation:
    name: str
    genus: int
    free: tuple = ()
    terms: tuple = ()

    def serialize(self) -> str:
        lines = [f"relation {self.name} genus {self.genus};"]
        if self.free:
            lines.append("free " + " ".join(map(str, self.free)) + ";")
        lines.extend(str(t) for t in self.terms)
        return "\n".join(lines) + "\n"

    def max_corr_genus(self) -> int:
        return max((f.genus for t in self.terms for f in t.factors if isinstance(f, Corr)), default=0)

    # JSON alternative with the same structure
    def to_json(self) -> dict:
        def ins(i):
            d = {"kind": i.kind}
            if i.name is not None:
                d["name"] = i.name
            if i.mu is not None:
                d["mu"] = i.mu
            if i.kind != "free" or i.level.offset:
                d["level"] = {"var": i.level.var, "offset": i.level.offset}
            return d

        def fac(f):
            if isinstance(f, Corr):
                return {"corr": f.genus, "insertions": [ins(i) for i in f.insertions]}
            if isinstance(f, Var):
                return {"var": ins(f.insertion)}
            return {"eta": [f.left, f.right]}

        return {
            "relation": self.name,
            "genus": self.genus,
            "free": [[s.name, s.level_var] for s in self.free],
            "terms": [
                {
                    "coeff": str(t.coeff),
                    "sum": [[s.name, s.level_var] for s in t.sums],
                    "factors": [fac(f) for f in t.factors],
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_json(cls, d) -> "Relation":
        from .parser import validate

        slots = {a: b for a, b in d.get("free", [])}

        def ins(x):
            lv = x.get("level") or {}
            var = lv.get("var")
            if x["kind"] == "free" and var is None:
                # a free insertion always carries its slot's level
                var = slots.get(x.get("name"))
            return Insertion(x["kind"], x.get("name"), x.get("mu"), Level(var, int(lv.get("offset", 0))))

        def fac(x):
            if "corr" in x:
                return Corr(int(x["corr"]), tuple(ins(i) for i in x.get("insertions", [])))
            if "var" in x:
                return Var(ins(x["var"]))
            return Eta(*x["eta"])

        rel = cls(
            d["relation"],
            int(d["genus"]),
            tuple(FreeSlot(a, b) for a, b in d.get("free", [])),
            tuple(
                Term(Fraction(t["coeff"]), tuple(SumIndex(a, b) for a, b in t.get("sum", [])), tuple(fac(f) for f in t["factors"]))
                for t in d["terms"]
            ),
        )
        validate(rel)
        return rel
