"""Declarative tautological relations: grammar, built-ins and exact evaluation."""

from importlib import resources

from ..errors import InputError
from .model import Corr, Eta, FreeSlot, Insertion, Level, Relation, SumIndex, Term, Var
from .parser import RelationSyntaxError, parse_relation, parse_relations, serialize, tokenize, validate

BUILTINS = ("SE", "DE", "TRR", "TRR1")


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise InputError(f"unknown built-in relation {name!r}; choose from {', '.join(BUILTINS)}")
    return resources.files(__package__).joinpath("data", f"{name}.rel").read_text()


def builtin(name: str) -> Relation:
    return parse_relation(builtin_text(name))


from .evaluate import check_invariance, evaluate_relation, RelationReport  # noqa: E402

__all__ = [
    "BUILTINS", "Corr", "Eta", "FreeSlot", "Insertion", "Level", "Relation", "RelationReport",
    "RelationSyntaxError", "SumIndex", "Term", "Var", "builtin", "builtin_text", "check_invariance",
    "evaluate_relation", "parse_relation", "parse_relations", "serialize", "tokenize", "validate",
]
