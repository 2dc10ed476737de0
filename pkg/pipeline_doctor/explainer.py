"""Natural-language explanations of constraints.

Walks the constraint the way the remediator does: if-then-else nodes become
alternatives separated by an ``OR`` line and conjunctions become
`` and try ...`` continuation lines.
"""

from dataclasses import dataclass
from typing import List, Tuple

from .constraints import (
    Absent,
    And,
    Atom,
    CmpConst,
    CmpParam,
    Constraint,
    Eq,
    Ite,
    LitFalse,
    LitTrue,
    Neq,
    Present,
    negate_atom,
)

NO_CHANGES = "No changes needed"
NO_FIX = "No configuration of this pipeline can succeed"


@dataclass(frozen=True)
class Explanation:
    text: str
    alternatives: Tuple[Tuple[Atom, ...], ...]

    def __str__(self) -> str:
        return self.text


def _fragment(atom: Atom) -> str:
    if isinstance(atom, Neq) and isinstance(atom.value, bool):
        atom = Eq(atom.op, atom.hp, not atom.value)
    if isinstance(atom, Eq):
        return f"try setting argument '{atom.hp}' in operator {atom.op} to '{atom.value}'"
    if isinstance(atom, Neq):
        return f"try avoiding value '{atom.value}' for argument '{atom.hp}' in operator {atom.op}"
    if isinstance(atom, Present):
        return (f"try ensuring that argument '{atom.hp}' in operator {atom.op} is present "
                f"for all runs (a Choice operator may need to be removed)")
    if isinstance(atom, Absent):
        return (f"try ensuring that argument '{atom.hp}' in operator {atom.op} is absent "
                f"for all runs (operator {atom.op} may need to be removed from its Choice)")
    if isinstance(atom, CmpConst):
        return f"try setting argument '{atom.hp}' in operator {atom.op} to a value {atom.cmp} {atom.limit}"
    if isinstance(atom, CmpParam):
        relation = "less than or equal to" if atom.cmp == '<=' else "less than"
        return (f"try ensuring argument '{atom.hp1}' in operator {atom.op1} is {relation} "
                f"argument '{atom.hp2}' in operator {atom.op2}")
    raise TypeError(f"no explanation template for {atom!r}")


def alternatives(c: Constraint) -> List[List[Atom]]:
    """Atom lists, one per way of satisfying ``c``; empty when nothing does."""
    if isinstance(c, LitTrue):
        return [[]]
    if isinstance(c, LitFalse):
        return []
    if isinstance(c, And):
        acc: List[List[Atom]] = [[]]
        for part in c.parts:
            acc = [a + b for a in acc for b in alternatives(part)]
        return acc
    if isinstance(c, Ite):
        return ([_with(c.cond, a) for a in alternatives(c.then)]
                + [_with(negate_atom(c.cond), a) for a in alternatives(c.else_)])
    return [[c]]


def _with(cond: Atom, rest: List[Atom]) -> List[Atom]:
    return rest if isinstance(cond, LitTrue) else [cond] + rest


def _render(atoms: List[Atom]) -> str:
    if not atoms:
        return NO_CHANGES
    fragments = [_fragment(a) for a in atoms]
    first = fragments[0][0].upper() + fragments[0][1:]
    return "\n and ".join([first] + fragments[1:])


def explain(c: Constraint) -> Explanation:
    alts = [a for a in alternatives(c) if not any(isinstance(x, LitFalse) for x in a)]
    if not alts:
        return Explanation(NO_FIX, ())
    text = "\nOR\n".join(_render(a) for a in alts)
    return Explanation(text, tuple(tuple(a) for a in alts))
