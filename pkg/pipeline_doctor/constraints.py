"""Constraint language: atoms, conjunctions and if-then-else trees.

An absent binding makes every value comparison false (Eq, Neq, CmpConst and
CmpParam all require their hyperparameters to be bound), so only
Present/Absent say anything about instances that did not choose an operator.
"""

from dataclasses import dataclass
from typing import Any, FrozenSet, List, Tuple, Union

from .errors import ConstraintParseError
from .search_space import (
    CMP_OPS,
    Key,
    PipelineInstance,
    Value,
    compare,
    format_key,
    format_literal,
    is_literal,
    same_literal,
)

ATOM_KINDS = ('eq', 'neq', 'absent', 'present', 'cmp', 'cmp2')

_FLIP = {'<=': '>', '>': '<=', '<': '>=', '>=': '<'}
_PARAM_CMPS = ('<=', '<')


@dataclass(frozen=True)
class Eq:
    op: str
    hp: str
    value: Value

    kind = 'eq'

    @property
    def key(self) -> Key:
        return (self.op, self.hp)


@dataclass(frozen=True)
class Neq:
    op: str
    hp: str
    value: Value

    kind = 'neq'

    @property
    def key(self) -> Key:
        return (self.op, self.hp)


@dataclass(frozen=True)
class Present:
    op: str
    hp: str

    kind = 'present'

    @property
    def key(self) -> Key:
        return (self.op, self.hp)


@dataclass(frozen=True)
class Absent:
    op: str
    hp: str

    kind = 'absent'

    @property
    def key(self) -> Key:
        return (self.op, self.hp)


@dataclass(frozen=True)
class CmpConst:
    op: str
    hp: str
    cmp: str
    limit: Value

    kind = 'cmp'

    def __post_init__(self):
        if self.cmp not in CMP_OPS:
            raise ConstraintParseError(f"unknown comparison operator {self.cmp!r}")

    @property
    def key(self) -> Key:
        return (self.op, self.hp)


@dataclass(frozen=True)
class CmpParam:
    """``op1.hp1 cmp op2.hp2`` with cmp one of ``<=`` and ``<``."""

    op1: str
    hp1: str
    cmp: str
    op2: str
    hp2: str

    kind = 'cmp2'

    def __post_init__(self):
        if self.cmp not in _PARAM_CMPS:
            raise ConstraintParseError(f"hyperparameter comparison must be <= or <, got {self.cmp!r}")

    @property
    def lhs(self) -> Key:
        return (self.op1, self.hp1)

    @property
    def rhs(self) -> Key:
        return (self.op2, self.hp2)


@dataclass(frozen=True)
class LitTrue:
    kind = 'true'


@dataclass(frozen=True)
class LitFalse:
    kind = 'false'


Atom = Union[Eq, Neq, Present, Absent, CmpConst, CmpParam, LitTrue, LitFalse]
ATOM_TYPES = (Eq, Neq, Present, Absent, CmpConst, CmpParam, LitTrue, LitFalse)


@dataclass(frozen=True)
class And:
    parts: Tuple['Constraint', ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, 'parts', parts)
        if len(parts) < 2:
            raise ConstraintParseError("a conjunction needs at least two parts")
        if any(isinstance(p, (And, LitTrue)) for p in parts):
            raise ConstraintParseError("conjunctions must be flattened and free of true")


@dataclass(frozen=True)
class Ite:
    cond: Atom
    then: 'Constraint'
    else_: 'Constraint'

    def __post_init__(self):
        if not is_atom(self.cond):
            raise ConstraintParseError("if-then-else conditions must be atomic")


Constraint = Union[Atom, And, Ite]


def is_atom(c: Any) -> bool:
    return isinstance(c, ATOM_TYPES)


def conjoin(*parts: Constraint) -> Constraint:
    """Conjunction that flattens, drops true and collapses to a single part."""
    flat: List[Constraint] = []
    for part in parts:
        for p in (part.parts if isinstance(part, And) else (part,)):
            if isinstance(p, LitFalse):
                return LitFalse()
            if not isinstance(p, LitTrue):
                flat.append(p)
    if not flat:
        return LitTrue()
    return flat[0] if len(flat) == 1 else And(tuple(flat))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_constraint(c: Constraint, inst: PipelineInstance) -> bool:
    bindings = inst.bindings
    if isinstance(c, Eq):
        return c.key in bindings and same_literal(bindings[c.key], c.value)
    if isinstance(c, Neq):
        return c.key in bindings and not same_literal(bindings[c.key], c.value)
    if isinstance(c, Present):
        return c.key in bindings
    if isinstance(c, Absent):
        return c.key not in bindings
    if isinstance(c, CmpConst):
        return c.key in bindings and compare(bindings[c.key], c.cmp, c.limit)
    if isinstance(c, CmpParam):
        return c.lhs in bindings and c.rhs in bindings \
            and compare(bindings[c.lhs], c.cmp, bindings[c.rhs])
    if isinstance(c, LitTrue):
        return True
    if isinstance(c, LitFalse):
        return False
    if isinstance(c, And):
        return all(eval_constraint(p, inst) for p in c.parts)
    if isinstance(c, Ite):
        branch = c.then if eval_constraint(c.cond, inst) else c.else_
        return eval_constraint(branch, inst)
    raise TypeError(f"not a constraint: {c!r}")


def negate_atom(a: Atom) -> Atom:
    if isinstance(a, Eq):
        return Neq(a.op, a.hp, a.value)
    if isinstance(a, Neq):
        return Eq(a.op, a.hp, a.value)
    if isinstance(a, Present):
        return Absent(a.op, a.hp)
    if isinstance(a, Absent):
        return Present(a.op, a.hp)
    if isinstance(a, CmpConst):
        return CmpConst(a.op, a.hp, _FLIP[a.cmp], a.limit)
    if isinstance(a, CmpParam):
        swapped = '<' if a.cmp == '<=' else '<='
        return CmpParam(a.op2, a.hp2, swapped, a.op1, a.hp1)
    if isinstance(a, LitTrue):
        return LitFalse()
    if isinstance(a, LitFalse):
        return LitTrue()
    raise TypeError(f"not an atom: {a!r}")


def complement_atom(a: Atom) -> List[Atom]:
    """Disjuncts that together hold exactly where ``a`` does not.

    Unlike ``negate_atom`` this also covers instances where the referenced
    hyperparameters are unbound.
    """
    if isinstance(a, (Eq, Neq, CmpConst)):
        return [negate_atom(a), Absent(a.op, a.hp)]
    if isinstance(a, CmpParam):
        disjuncts: List[Atom] = [negate_atom(a), Absent(a.op1, a.hp1)]
        if a.rhs != a.lhs:
            disjuncts.append(Absent(a.op2, a.hp2))
        return disjuncts
    return [negate_atom(a)]


def referenced_keys(c: Constraint) -> FrozenSet[Key]:
    if isinstance(c, (Eq, Neq, Present, Absent, CmpConst)):
        return frozenset([c.key])
    if isinstance(c, CmpParam):
        return frozenset([c.lhs, c.rhs])
    if isinstance(c, And):
        return frozenset().union(*(referenced_keys(p) for p in c.parts))
    if isinstance(c, Ite):
        return referenced_keys(c.cond) | referenced_keys(c.then) | referenced_keys(c.else_)
    return frozenset()


def depth(c: Constraint) -> int:
    """Nesting depth of if-then-else nodes."""
    if isinstance(c, Ite):
        return 1 + max(depth(c.then), depth(c.else_))
    if isinstance(c, And):
        return max(depth(p) for p in c.parts)
    return 0


def format_constraint(c: Constraint) -> str:
    """Compact one-line rendering for logs and error messages."""
    if isinstance(c, Eq):
        return f"{format_key(c.key)} == {format_literal(c.value)}"
    if isinstance(c, Neq):
        return f"{format_key(c.key)} != {format_literal(c.value)}"
    if isinstance(c, Present):
        return f"present({format_key(c.key)})"
    if isinstance(c, Absent):
        return f"absent({format_key(c.key)})"
    if isinstance(c, CmpConst):
        return f"{format_key(c.key)} {c.cmp} {format_literal(c.limit)}"
    if isinstance(c, CmpParam):
        return f"{format_key(c.lhs)} {c.cmp} {format_key(c.rhs)}"
    if isinstance(c, LitTrue):
        return "true"
    if isinstance(c, LitFalse):
        return "false"
    if isinstance(c, And):
        return " and ".join(
            f"({format_constraint(p)})" if isinstance(p, Ite) else format_constraint(p)
            for p in c.parts)
    return (f"if {format_constraint(c.cond)} then ({format_constraint(c.then)}) "
            f"else ({format_constraint(c.else_)})")


# ---------------------------------------------------------------------------
# JSON codec
# ---------------------------------------------------------------------------

def constraint_to_json(c: Constraint) -> Any:
    if isinstance(c, Eq):
        return {'eq': [c.op, c.hp, c.value]}
    if isinstance(c, Neq):
        return {'neq': [c.op, c.hp, c.value]}
    if isinstance(c, Present):
        return {'present': [c.op, c.hp]}
    if isinstance(c, Absent):
        return {'absent': [c.op, c.hp]}
    if isinstance(c, CmpConst):
        return {'cmp': [c.op, c.hp, c.cmp, c.limit]}
    if isinstance(c, CmpParam):
        return {'cmp2': [c.op1, c.hp1, c.cmp, c.op2, c.hp2]}
    if isinstance(c, LitTrue):
        return True
    if isinstance(c, LitFalse):
        return False
    if isinstance(c, And):
        return {'and': [constraint_to_json(p) for p in c.parts]}
    return {'ite': {
        'if': constraint_to_json(c.cond),
        'then': constraint_to_json(c.then),
        'else': constraint_to_json(c.else_),
    }}


def _args(data: dict, tag: str, types: Tuple[str, ...], path: str) -> list:
    args = data[tag]
    if not isinstance(args, list) or len(args) != len(types):
        raise ConstraintParseError(f"expected {len(types)} arguments", f"{path}.{tag}")
    for i, (arg, t) in enumerate(zip(args, types)):
        where = f"{path}.{tag}[{i}]"
        if t == 'name' and not (isinstance(arg, str) and arg):
            raise ConstraintParseError(f"expected a name, got {arg!r}", where)
        if t == 'literal' and not is_literal(arg):
            raise ConstraintParseError(f"expected a literal, got {arg!r}", where)
        if t == 'cmp' and arg not in CMP_OPS:
            raise ConstraintParseError(f"unknown comparison operator {arg!r}", where)
    return args


def constraint_from_json(data: Any, path: str = '$') -> Constraint:
    if data is True:
        return LitTrue()
    if data is False:
        return LitFalse()
    if not isinstance(data, dict) or len(data) != 1:
        raise ConstraintParseError("expected true, false or an object with one key", path)
    tag = next(iter(data))
    if tag == 'eq':
        return Eq(*_args(data, tag, ('name', 'name', 'literal'), path))
    if tag == 'neq':
        return Neq(*_args(data, tag, ('name', 'name', 'literal'), path))
    if tag == 'present':
        return Present(*_args(data, tag, ('name', 'name'), path))
    if tag == 'absent':
        return Absent(*_args(data, tag, ('name', 'name'), path))
    if tag == 'cmp':
        op, hp, cmp, limit = _args(data, tag, ('name', 'name', 'cmp', 'literal'), path)
        return CmpConst(op, hp, cmp, limit)
    if tag == 'cmp2':
        op1, hp1, cmp, op2, hp2 = _args(data, tag, ('name', 'name', 'cmp', 'name', 'name'), path)
        if cmp not in _PARAM_CMPS:
            raise ConstraintParseError(f"hyperparameter comparison must be <= or <, got {cmp!r}",
                                       f"{path}.cmp2[2]")
        return CmpParam(op1, hp1, cmp, op2, hp2)
    if tag == 'and':
        parts = data['and']
        if not isinstance(parts, list) or len(parts) < 2:
            raise ConstraintParseError("a conjunction needs a list of at least two parts", f"{path}.and")
        conjuncts = tuple(constraint_from_json(p, f"{path}.and[{i}]") for i, p in enumerate(parts))
        if any(isinstance(p, (And, LitTrue)) for p in conjuncts):
            raise ConstraintParseError("conjunction parts must not be conjunctions or true", f"{path}.and")
        return And(conjuncts)
    if tag == 'ite':
        body = data['ite']
        if not isinstance(body, dict) or set(body) != {'if', 'then', 'else'}:
            raise ConstraintParseError("expected an object with if/then/else", f"{path}.ite")
        cond = constraint_from_json(body['if'], f"{path}.ite.if")
        if not is_atom(cond):
            raise ConstraintParseError("condition must be atomic", f"{path}.ite.if")
        return Ite(
            cond,
            constraint_from_json(body['then'], f"{path}.ite.then"),
            constraint_from_json(body['else'], f"{path}.ite.else"),
        )
    raise ConstraintParseError(f"unknown constraint form {tag!r}", path)
