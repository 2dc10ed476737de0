"""Planned pipelines, hyperparameter domains and pipeline instances.

A planned pipeline is a chain of steps; each step is an operator, a choice
among alternatives, or (inside a choice) a sub-chain. Operators declare a
domain per hyperparameter. This module also holds the small schema algebra
the remediator relies on: restricting a domain by an atomic constraint,
splitting numeric ranges, and forcing or removing choice alternatives.
"""

import json
import math
import operator as _operator
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .errors import (
    EmptyDomain,
    NotInChoice,
    NotNumeric,
    SchemaError,
    TypeMismatch,
    UnrepresentableRestriction,
    WouldEmptyChoice,
)

Value = Union[bool, int, float, str]
Key = Tuple[str, str]

# Interior holes in integer ranges are enumerated up to this many values.
MAX_ENUMERATED_RANGE = 256

CMP_OPS: Mapping[str, Callable[[Any, Any], bool]] = MappingProxyType({
    '<=': _operator.le,
    '<': _operator.lt,
    '>=': _operator.ge,
    '>': _operator.gt,
})


# ---------------------------------------------------------------------------
# Literals
# ---------------------------------------------------------------------------

def is_literal(value: Any) -> bool:
    return isinstance(value, (bool, int, float, str))


def is_numeric(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def same_literal(a: Value, b: Value) -> bool:
    """Literal equality that keeps booleans apart from 0 and 1."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if is_numeric(a) and is_numeric(b):
        return a == b
    return type(a) is type(b) and a == b


def compare(left: Value, cmp: str, right: Value) -> bool:
    if cmp not in CMP_OPS:
        raise SchemaError(f"unknown comparison operator {cmp!r}")
    if not (is_numeric(left) and is_numeric(right)):
        raise TypeMismatch(f"cannot compare {left!r} {cmp} {right!r}")
    return CMP_OPS[cmp](left, right)


def literal_key(value: Value) -> Tuple[str, Value]:
    return (type(value).__name__, value)


def format_key(key: Key) -> str:
    return f"{key[0]}.{key[1]}"


def format_literal(value: Value) -> str:
    """Python-style literal: strings double-quoted, booleans as True/False."""
    if isinstance(value, str):
        return json.dumps(value)
    return repr(value)


# ---------------------------------------------------------------------------
# Hyperparameter domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Categorical:
    values: Tuple[Value, ...]

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, 'values', values)
        if not values:
            raise SchemaError("categorical domain must not be empty")
        for i, v in enumerate(values):
            if not is_literal(v):
                raise SchemaError(f"categorical value {v!r} is not a literal")
            if any(same_literal(v, w) for w in values[:i]):
                raise SchemaError(f"duplicate categorical value {v!r}")


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)) \
                or isinstance(self.lo, bool) or isinstance(self.hi, bool):
            raise SchemaError(f"integer range bounds must be integers: {self.lo!r}, {self.hi!r}")
        if self.lo > self.hi:
            raise SchemaError(f"empty integer range {self.lo}..{self.hi}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class FloatRange:
    lo: float
    hi: float
    open_lo: bool = False
    open_hi: bool = False

    def __post_init__(self):
        if not (is_numeric(self.lo) and is_numeric(self.hi)):
            raise SchemaError(f"float range bounds must be numbers: {self.lo!r}, {self.hi!r}")
        object.__setattr__(self, 'lo', float(self.lo))
        object.__setattr__(self, 'hi', float(self.hi))
        if self.lo > self.hi or (self.lo == self.hi and (self.open_lo or self.open_hi)):
            raise SchemaError(f"empty float range {self.lo}..{self.hi}")


@dataclass(frozen=True)
class Constant:
    value: Value

    def __post_init__(self):
        if not is_literal(self.value):
            raise SchemaError(f"constant {self.value!r} is not a literal")


@dataclass(frozen=True)
class Anything:
    """Unconstrained hyperparameter; optional in pipeline instances."""


HyperparamDomain = Union[Categorical, IntRange, FloatRange, Constant, Anything]


def canonical_domain(domain: HyperparamDomain) -> HyperparamDomain:
    """Collapse one-element categoricals and degenerate ranges to Constant."""
    if isinstance(domain, Categorical) and len(domain.values) == 1:
        return Constant(domain.values[0])
    if isinstance(domain, IntRange) and domain.lo == domain.hi:
        return Constant(domain.lo)
    if isinstance(domain, FloatRange) and domain.lo == domain.hi:
        return Constant(domain.lo)
    return domain


def domain_contains(domain: HyperparamDomain, value: Value) -> bool:
    if isinstance(domain, Anything):
        return True
    if isinstance(domain, Constant):
        return same_literal(domain.value, value)
    if isinstance(domain, Categorical):
        return any(same_literal(v, value) for v in domain.values)
    if isinstance(domain, IntRange):
        return isinstance(value, int) and not isinstance(value, bool) \
            and domain.lo <= value <= domain.hi
    if isinstance(domain, FloatRange):
        if not is_numeric(value):
            return False
        above = value > domain.lo if domain.open_lo else value >= domain.lo
        below = value < domain.hi if domain.open_hi else value <= domain.hi
        return above and below
    raise SchemaError(f"unknown domain {domain!r}")


def domain_key(domain: HyperparamDomain) -> tuple:
    """Hashable structural key; distinguishes True from 1 and 1 from 1.0."""
    if isinstance(domain, Categorical):
        return ('cat', tuple(literal_key(v) for v in domain.values))
    if isinstance(domain, IntRange):
        return ('int', domain.lo, domain.hi)
    if isinstance(domain, FloatRange):
        return ('float', domain.lo, domain.hi, domain.open_lo, domain.open_hi)
    if isinstance(domain, Constant):
        return ('const', literal_key(domain.value))
    return ('any',)


def restrict_domain(domain: HyperparamDomain, atom, observed: Iterable[Value] = ()) -> HyperparamDomain:
    """Canonical domain of the values of ``domain`` at which ``atom`` holds.

    ``atom`` is an Eq, Neq or CmpConst constraint. ``observed`` supplies the
    trace values used to bound the open side when an Anything domain is
    restricted by a comparison.
    """
    from .constraints import CmpConst, Eq, Neq

    if isinstance(atom, Eq):
        return _restrict_eq(domain, atom.value)
    if isinstance(atom, Neq):
        return _restrict_neq(domain, atom.value)
    if isinstance(atom, CmpConst):
        return _restrict_cmp(domain, atom.cmp, atom.limit, tuple(observed))
    raise SchemaError(f"cannot restrict a domain by {atom!r}")


def _restrict_eq(domain: HyperparamDomain, value: Value) -> HyperparamDomain:
    if domain_contains(domain, value):
        return Constant(value)
    raise EmptyDomain(f"{value!r} is not in the domain")


def _restrict_neq(domain: HyperparamDomain, value: Value) -> HyperparamDomain:
    if isinstance(domain, Anything):
        raise UnrepresentableRestriction(f"cannot exclude {value!r} from an unconstrained domain")
    if not domain_contains(domain, value):
        return domain
    if isinstance(domain, Constant):
        raise EmptyDomain(f"excluding {value!r} empties the domain")
    if isinstance(domain, Categorical):
        rest = tuple(v for v in domain.values if not same_literal(v, value))
        if not rest:
            raise EmptyDomain(f"excluding {value!r} empties the domain")
        return canonical_domain(Categorical(rest))
    if isinstance(domain, IntRange):
        if value == domain.lo:
            return canonical_domain(IntRange(domain.lo + 1, domain.hi))
        if value == domain.hi:
            return canonical_domain(IntRange(domain.lo, domain.hi - 1))
        if domain.size > MAX_ENUMERATED_RANGE:
            raise UnrepresentableRestriction(
                f"excluding {value!r} from {domain.lo}..{domain.hi} leaves a hole")
        return Categorical(tuple(v for v in range(domain.lo, domain.hi + 1) if v != value))
    # FloatRange
    if value == domain.lo:
        return replace(domain, open_lo=True)
    if value == domain.hi:
        return replace(domain, open_hi=True)
    raise UnrepresentableRestriction(
        f"excluding {value!r} from {domain.lo}..{domain.hi} leaves a hole")


def exclude_value(domain: HyperparamDomain, value: Value,
                  observed: Iterable[Value] = ()) -> List[HyperparamDomain]:
    """Disjoint domains covering ``domain`` without ``value``.

    A hole inside a float range, or inside an integer range too wide to
    enumerate, comes back as the two ranges on either side of it. An
    unconstrained domain is first narrowed to the ``observed`` values.
    """
    if isinstance(domain, Anything):
        domain = _observed_domain(tuple(observed), value)
    if isinstance(domain, FloatRange) and is_numeric(value) and domain.lo < value < domain.hi:
        return [
            FloatRange(domain.lo, value, open_lo=domain.open_lo, open_hi=True),
            FloatRange(value, domain.hi, open_lo=True, open_hi=domain.open_hi),
        ]
    if isinstance(domain, IntRange) and domain.size > MAX_ENUMERATED_RANGE \
            and domain_contains(domain, value) and domain.lo < value < domain.hi:
        return [
            canonical_domain(IntRange(domain.lo, value - 1)),
            canonical_domain(IntRange(value + 1, domain.hi)),
        ]
    return [_restrict_neq(domain, value)]


def _observed_domain(observed: Tuple[Value, ...], value: Value) -> HyperparamDomain:
    """Smallest domain holding every observed value: a numeric hull or a categorical."""
    if not observed:
        raise UnrepresentableRestriction(
            f"cannot exclude {value!r} from an unconstrained domain without observed values")
    if all(is_numeric(v) for v in observed):
        values = list(observed) + ([value] if is_numeric(value) else [])
        lo, hi = min(values), max(values)
        if all(isinstance(v, int) for v in values):
            return canonical_domain(IntRange(lo, hi))
        return canonical_domain(FloatRange(lo, hi))
    distinct: List[Value] = []
    for v in observed:
        if not any(same_literal(v, d) for d in distinct):
            distinct.append(v)
    return canonical_domain(Categorical(tuple(distinct)))


def _restrict_cmp(domain: HyperparamDomain, cmp: str, limit: Value,
                  observed: Tuple[Value, ...]) -> HyperparamDomain:
    if cmp not in CMP_OPS:
        raise SchemaError(f"unknown comparison operator {cmp!r}")
    if not is_numeric(limit):
        raise TypeMismatch(f"comparison limit {limit!r} is not numeric")

    if isinstance(domain, Anything):
        if not any(is_numeric(v) for v in observed):
            raise UnrepresentableRestriction(
                f"bounding an unconstrained domain by {cmp} {limit!r} needs observed values")
        values = [v for v in observed if is_numeric(v)] + [limit]
        integral = all(isinstance(v, int) for v in values)
        lo, hi = (min(values), limit) if cmp in ('<=', '<') else (limit, max(values))
        base = IntRange(lo, hi) if integral else FloatRange(lo, hi)
        return _restrict_cmp(base, cmp, limit, ())

    if isinstance(domain, Constant):
        if compare(domain.value, cmp, limit):
            return domain
        raise EmptyDomain(f"{domain.value!r} does not satisfy {cmp} {limit!r}")

    if isinstance(domain, Categorical):
        kept = tuple(v for v in domain.values if compare(v, cmp, limit))
        if not kept:
            raise EmptyDomain(f"no value satisfies {cmp} {limit!r}")
        return canonical_domain(Categorical(kept))

    if isinstance(domain, IntRange):
        lo, hi = domain.lo, domain.hi
        if cmp == '<=':
            hi = min(hi, math.floor(limit))
        elif cmp == '<':
            hi = min(hi, math.ceil(limit) - 1)
        elif cmp == '>=':
            lo = max(lo, math.ceil(limit))
        else:
            lo = max(lo, math.floor(limit) + 1)
        if lo > hi:
            raise EmptyDomain(f"{domain.lo}..{domain.hi} has no value {cmp} {limit!r}")
        return canonical_domain(IntRange(lo, hi))

    lo, hi = domain.lo, domain.hi
    open_lo, open_hi = domain.open_lo, domain.open_hi
    bound = float(limit)
    if cmp in ('<=', '<'):
        if bound < hi:
            hi, open_hi = bound, cmp == '<'
        elif bound == hi and cmp == '<':
            open_hi = True
    else:
        if bound > lo:
            lo, open_lo = bound, cmp == '>'
        elif bound == lo and cmp == '>':
            open_lo = True
    if lo > hi or (lo == hi and (open_lo or open_hi)):
        raise EmptyDomain(f"{domain.lo}..{domain.hi} has no value {cmp} {limit!r}")
    return canonical_domain(FloatRange(lo, hi, open_lo, open_hi))


def split_range(domain: HyperparamDomain, n: int) -> List[HyperparamDomain]:
    """Split a numeric range into ``n`` contiguous, disjoint pieces.

    Integer remainders go to the earliest pieces, so 5..55 in five pieces is
    5..15, 16..25, 26..35, 36..45, 46..55. Ranges with fewer than ``n``
    integers yield one piece per integer.
    """
    if n < 1:
        raise SchemaError(f"number of pieces must be positive, got {n}")
    if isinstance(domain, Constant) and is_numeric(domain.value):
        return [domain]
    if isinstance(domain, IntRange):
        n = min(n, domain.size)
        base, rem = divmod(domain.size, n)
        pieces: List[HyperparamDomain] = []
        lo = domain.lo
        for i in range(n):
            width = base + (1 if i < rem else 0)
            pieces.append(canonical_domain(IntRange(lo, lo + width - 1)))
            lo += width
        return pieces
    if isinstance(domain, FloatRange):
        width = (domain.hi - domain.lo) / n
        bounds = [domain.lo + i * width for i in range(n)] + [domain.hi]
        return [
            FloatRange(
                bounds[i], bounds[i + 1],
                open_lo=domain.open_lo if i == 0 else False,
                open_hi=domain.open_hi if i == n - 1 else True,
            )
            for i in range(n)
        ]
    raise NotNumeric(f"cannot split non-numeric domain {domain!r}")


# ---------------------------------------------------------------------------
# Operators, steps, pipelines
# ---------------------------------------------------------------------------

def base_name(name: str) -> str:
    """Operator class name without its ``#n`` disambiguation suffix."""
    return name.split('#', 1)[0]


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    hyperparams: Mapping[str, HyperparamDomain] = field(default_factory=dict)
    fixed: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise SchemaError(f"invalid operator name {self.name!r}")
        object.__setattr__(self, 'hyperparams', MappingProxyType({
            hp: canonical_domain(d) for hp, d in self.hyperparams.items()
        }))
        object.__setattr__(self, 'fixed', MappingProxyType(dict(self.fixed)))
        overlap = set(self.hyperparams) & set(self.fixed)
        if overlap:
            raise SchemaError(
                f"operator {self.name}: {', '.join(sorted(overlap))} both fixed and searched")
        for hp, value in self.fixed.items():
            if not is_literal(value):
                raise SchemaError(f"operator {self.name}: fixed {hp}={value!r} is not a literal")

    def domain_of(self, hp: str) -> HyperparamDomain:
        """Declared domain of ``hp``; fixed values read as Constant."""
        if hp in self.fixed:
            return Constant(self.fixed[hp])
        if hp in self.hyperparams:
            return self.hyperparams[hp]
        raise SchemaError(f"operator {self.name} has no hyperparameter {hp!r}")

    def with_domain(self, hp: str, domain: HyperparamDomain) -> 'OperatorSpec':
        return replace(self, hyperparams={**self.hyperparams, hp: domain})


@dataclass(frozen=True)
class Choice:
    alternatives: Tuple['Step', ...]

    def __post_init__(self):
        alternatives = tuple(self.alternatives)
        object.__setattr__(self, 'alternatives', alternatives)
        if len(alternatives) < 2:
            raise SchemaError("a choice needs at least two alternatives")
        shapes = [shape(a) for a in alternatives]
        if len(set(shapes)) != len(shapes):
            raise SchemaError("choice alternatives must be distinct")


@dataclass(frozen=True)
class Seq:
    """A sub-pipeline used as a choice alternative."""

    steps: Tuple['Step', ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, 'steps', steps)
        if len(steps) < 2:
            raise SchemaError("a sequence needs at least two steps")
        if any(isinstance(s, Seq) for s in steps):
            raise SchemaError("sequences must be flattened")


Step = Union[OperatorSpec, Choice, Seq]


@dataclass(frozen=True)
class PlannedPipeline:
    steps: Tuple[Step, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, 'steps', steps)
        if not steps:
            raise SchemaError("a pipeline needs at least one step")
        if any(isinstance(s, Seq) for s in steps):
            raise SchemaError("pipeline steps must be flattened")

    def operators(self) -> Iterator[OperatorSpec]:
        for step in self.steps:
            yield from iter_operators(step)

    def operator_names(self) -> FrozenSet[str]:
        return frozenset(op.name for op in self.operators())

    def find_operators(self, name: str) -> List[OperatorSpec]:
        return [op for op in self.operators() if op.name == name]


@dataclass(frozen=True)
class PipelineInstance:
    id: str
    result: bool
    bindings: Mapping[Key, Value] = field(default_factory=dict)
    loss: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'bindings', MappingProxyType(dict(self.bindings)))

    def get(self, op: str, hp: str) -> Optional[Value]:
        return self.bindings.get((op, hp))

    def has(self, op: str, hp: str) -> bool:
        return (op, hp) in self.bindings


def shape(step: Step) -> tuple:
    """Structural key of a step, ignoring name disambiguation."""
    if isinstance(step, OperatorSpec):
        return (
            'op',
            base_name(step.name),
            tuple((hp, domain_key(d)) for hp, d in step.hyperparams.items()),
            tuple((hp, literal_key(v)) for hp, v in step.fixed.items()),
        )
    if isinstance(step, Choice):
        return ('choice', tuple(shape(a) for a in step.alternatives))
    return ('seq', tuple(shape(s) for s in step.steps))


def iter_operators(step: Step) -> Iterator[OperatorSpec]:
    if isinstance(step, OperatorSpec):
        yield step
    elif isinstance(step, Choice):
        for alt in step.alternatives:
            yield from iter_operators(alt)
    else:
        for s in step.steps:
            yield from iter_operators(s)


def operator_names(step: Step) -> FrozenSet[str]:
    return frozenset(op.name for op in iter_operators(step))


def as_steps(step: Step) -> Tuple[Step, ...]:
    return step.steps if isinstance(step, Seq) else (step,)


def make_seq(steps: Sequence[Step]) -> Step:
    flat: List[Step] = []
    for step in steps:
        flat.extend(as_steps(step))
    if not flat:
        raise SchemaError("a sequence needs at least one step")
    return flat[0] if len(flat) == 1 else Seq(tuple(flat))


def make_choice(alternatives: Sequence[Step]) -> Step:
    """Combine alternatives with ``|``; duplicates merge and one survivor collapses."""
    flat: List[Step] = []
    seen: Set[tuple] = set()
    for alt in alternatives:
        for a in (alt.alternatives if isinstance(alt, Choice) else (alt,)):
            key = shape(a)
            if key not in seen:
                seen.add(key)
                flat.append(a)
    if not flat:
        raise SchemaError("a choice needs at least one alternative")
    return flat[0] if len(flat) == 1 else Choice(tuple(flat))


def _assign_names(step: Step, seen: Dict[str, int]) -> Tuple[Step, Dict[str, int]]:
    if isinstance(step, OperatorSpec):
        base = base_name(step.name)
        count = seen.get(base, 0) + 1
        name = base if count == 1 else f"{base}#{count}"
        return replace(step, name=name), {**seen, base: count}
    if isinstance(step, Seq):
        parts = []
        for s in step.steps:
            s, seen = _assign_names(s, seen)
            parts.append(s)
        return Seq(tuple(parts)), seen
    alternatives = []
    merged = dict(seen)
    for alt in step.alternatives:
        alt, after = _assign_names(alt, seen)
        alternatives.append(alt)
        for base, count in after.items():
            merged[base] = max(merged.get(base, 0), count)
    return Choice(tuple(alternatives)), merged


def build_pipeline(steps: Sequence[Step]) -> PlannedPipeline:
    """Flatten ``steps`` into a pipeline with canonical operator names.

    Operators that can co-occur in one instance are named ``Name``,
    ``Name#2``, ... in declaration order; alternatives of the same choice
    start from the same count, so clones in different branches share names.
    """
    flat: List[Step] = []
    for step in steps:
        flat.extend(as_steps(step))
    seen: Dict[str, int] = {}
    named = []
    for step in flat:
        step, seen = _assign_names(step, seen)
        named.append(step)
    return PlannedPipeline(tuple(named))


def flatten_pipeline(steps: Sequence[Step]) -> PlannedPipeline:
    """Pipeline of ``steps`` with sub-chains spliced in; operator names are kept."""
    flat: List[Step] = []
    for step in steps:
        flat.extend(as_steps(step))
    return PlannedPipeline(tuple(flat))


# ---------------------------------------------------------------------------
# Instance membership
# ---------------------------------------------------------------------------

def _match_operator(op: OperatorSpec, bindings: Mapping[Key, Value]) -> Optional[FrozenSet[Key]]:
    consumed = set()
    for hp, domain in op.hyperparams.items():
        key = (op.name, hp)
        if key in bindings:
            if not domain_contains(domain, bindings[key]):
                return None
            consumed.add(key)
        elif not isinstance(domain, Anything):
            return None
    for hp, value in op.fixed.items():
        key = (op.name, hp)
        if key in bindings:
            if not same_literal(value, bindings[key]):
                return None
            consumed.add(key)
    return frozenset(consumed)


def _resolutions(steps: Sequence[Step], bindings: Mapping[Key, Value]) -> Set[FrozenSet[Key]]:
    """Binding-key sets consumed by each valid resolution of the chain."""
    acc: Set[FrozenSet[Key]] = {frozenset()}
    for step in steps:
        if isinstance(step, OperatorSpec):
            matched = _match_operator(step, bindings)
            options = {matched} if matched is not None else set()
        elif isinstance(step, Seq):
            options = _resolutions(step.steps, bindings)
        else:
            options = set()
            for alt in step.alternatives:
                options |= _resolutions(as_steps(alt), bindings)
        acc = {a | b for a in acc for b in options}
        if not acc:
            break
    return acc


def contains(pipeline: PlannedPipeline, inst: PipelineInstance) -> bool:
    """Whether ``inst`` is one of the instances the planned pipeline denotes."""
    wanted = frozenset(inst.bindings)
    return any(r == wanted for r in _resolutions(pipeline.steps, inst.bindings))


# ---------------------------------------------------------------------------
# Choice and operator rewriting
# ---------------------------------------------------------------------------

def _require_known(pipeline: PlannedPipeline, name: str) -> None:
    if name not in pipeline.operator_names():
        raise SchemaError(f"operator {name} does not occur in the pipeline")


def remove_choice_alternative(pipeline: PlannedPipeline, name: str) -> PlannedPipeline:
    """Delete every choice alternative that uses operator ``name``."""
    _require_known(pipeline, name)

    def drop(step: Step, in_choice: bool) -> Optional[Step]:
        if isinstance(step, OperatorSpec):
            if step.name != name:
                return step
            if not in_choice:
                raise NotInChoice(f"operator {name} is a mandatory step")
            return None
        if isinstance(step, Seq):
            parts = [drop(s, in_choice) for s in step.steps]
            if any(p is None for p in parts):
                return None
            return make_seq(parts)
        kept = [a for a in (drop(alt, True) for alt in step.alternatives) if a is not None]
        if not kept:
            raise WouldEmptyChoice(f"operator {name} is in every alternative of a choice")
        return make_choice(kept)

    return flatten_pipeline([drop(s, False) for s in pipeline.steps])


def require_operator(pipeline: PlannedPipeline, name: str) -> PlannedPipeline:
    """Keep only the choice alternatives that use operator ``name``."""
    _require_known(pipeline, name)

    def keep(step: Step) -> Step:
        if isinstance(step, OperatorSpec):
            return step
        if isinstance(step, Seq):
            return make_seq([keep(s) for s in step.steps])
        having = [a for a in step.alternatives if name in operator_names(a)]
        if not having:
            return step
        return make_choice([keep(a) for a in having])

    return flatten_pipeline([keep(s) for s in pipeline.steps])


def is_mandatory(pipeline: PlannedPipeline, name: str) -> bool:
    """Whether operator ``name`` is on every path through the pipeline."""
    def on_every_path(step: Step) -> bool:
        if isinstance(step, OperatorSpec):
            return step.name == name
        if isinstance(step, Seq):
            return any(on_every_path(s) for s in step.steps)
        return all(on_every_path(a) for a in step.alternatives)

    return any(on_every_path(s) for s in pipeline.steps)


def map_steps(steps: Sequence[Step], name: str,
              fn: Callable[[OperatorSpec], Optional[Step]]) -> Optional[List[Step]]:
    """Rewrite every occurrence of operator ``name`` in a chain of steps.

    ``fn`` returns the replacement step, possibly a choice of copies, or None
    when an occurrence becomes empty; choice alternatives that empty are
    dropped, and None is returned when the whole chain empties. Names are
    left as they are.
    """
    def visit(step: Step) -> Optional[Step]:
        if isinstance(step, OperatorSpec):
            return fn(step) if step.name == name else step
        if isinstance(step, Seq):
            parts = [visit(s) for s in step.steps]
            if any(p is None for p in parts):
                return None
            return make_seq(parts)
        kept = [a for a in (visit(alt) for alt in step.alternatives) if a is not None]
        return make_choice(kept) if kept else None

    mapped = [visit(s) for s in steps]
    if any(s is None for s in mapped):
        return None
    return [s for s in mapped if s is not None]


def map_operator(pipeline: PlannedPipeline, name: str,
                 fn: Callable[[OperatorSpec], Optional[Step]]) -> Optional[PlannedPipeline]:
    """Pipeline-level ``map_steps``; None when the pipeline empties."""
    steps = map_steps(pipeline.steps, name, fn)
    return None if steps is None else flatten_pipeline(steps)


def iter_paths(steps: Sequence[Step]) -> Iterator[List[OperatorSpec]]:
    """Every resolution of the chain's choices, as the operators on that path."""
    if not steps:
        yield []
        return
    head, rest = steps[0], steps[1:]
    if isinstance(head, OperatorSpec):
        heads: Iterable[List[OperatorSpec]] = [[head]]
    elif isinstance(head, Seq):
        heads = iter_paths(head.steps)
    else:
        heads = (p for alt in head.alternatives for p in iter_paths(as_steps(alt)))
    for prefix in heads:
        for suffix in iter_paths(rest):
            yield prefix + suffix


# ---------------------------------------------------------------------------
# JSON codec
# ---------------------------------------------------------------------------

def domain_to_json(domain: HyperparamDomain) -> Dict[str, Any]:
    if isinstance(domain, Categorical):
        return {'cat': list(domain.values)}
    if isinstance(domain, IntRange):
        return {'int': [domain.lo, domain.hi]}
    if isinstance(domain, FloatRange):
        data: Dict[str, Any] = {'float': [domain.lo, domain.hi]}
        if domain.open_lo:
            data['openLo'] = True
        data['openHi'] = domain.open_hi
        return data
    if isinstance(domain, Constant):
        return {'const': domain.value}
    return {'any': True}


def domain_from_json(data: Any, path: str = '$') -> HyperparamDomain:
    if not isinstance(data, dict) or not data:
        raise SchemaError(f"{path}: domain must be a non-empty object")
    try:
        if 'cat' in data:
            if not isinstance(data['cat'], list):
                raise SchemaError(f"{path}.cat: expected a list")
            return canonical_domain(Categorical(tuple(data['cat'])))
        if 'int' in data:
            lo, hi = data['int']
            return canonical_domain(IntRange(lo, hi))
        if 'float' in data:
            lo, hi = data['float']
            return canonical_domain(FloatRange(
                lo, hi,
                open_lo=bool(data.get('openLo', False)),
                open_hi=bool(data.get('openHi', False)),
            ))
        if 'const' in data:
            return Constant(data['const'])
        if data.get('any') is True:
            return Anything()
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{path}: malformed domain {data!r}") from e
    except SchemaError as e:
        raise SchemaError(f"{path}: {e}") from e
    raise SchemaError(f"{path}: unknown domain form {data!r}")


def step_to_json(step: Step) -> Dict[str, Any]:
    if isinstance(step, OperatorSpec):
        return {'op': {
            'name': step.name,
            'hyperparams': {hp: domain_to_json(d) for hp, d in step.hyperparams.items()},
            'fixed': dict(step.fixed),
        }}
    if isinstance(step, Choice):
        return {'choice': [step_to_json(a) for a in step.alternatives]}
    return {'seq': [step_to_json(s) for s in step.steps]}


def step_from_json(data: Any, path: str = '$') -> Step:
    if not isinstance(data, dict) or len(data) != 1:
        raise SchemaError(f"{path}: step must be an object with one of op/choice/seq")
    if 'op' in data:
        spec = data['op']
        if not isinstance(spec, dict) or not isinstance(spec.get('name'), str):
            raise SchemaError(f"{path}.op: operator needs a name")
        hyperparams = spec.get('hyperparams') or {}
        fixed = spec.get('fixed') or {}
        if not isinstance(hyperparams, dict) or not isinstance(fixed, dict):
            raise SchemaError(f"{path}.op: hyperparams and fixed must be objects")
        return OperatorSpec(
            name=spec['name'],
            hyperparams={
                hp: domain_from_json(d, f"{path}.op.hyperparams.{hp}")
                for hp, d in hyperparams.items()
            },
            fixed=fixed,
        )
    if 'choice' in data:
        alts = data['choice']
        if not isinstance(alts, list):
            raise SchemaError(f"{path}.choice: expected a list")
        return Choice(tuple(step_from_json(a, f"{path}.choice[{i}]") for i, a in enumerate(alts)))
    if 'seq' in data:
        parts = data['seq']
        if not isinstance(parts, list):
            raise SchemaError(f"{path}.seq: expected a list")
        return make_seq([step_from_json(s, f"{path}.seq[{i}]") for i, s in enumerate(parts)])
    raise SchemaError(f"{path}: unknown step form {sorted(data)}")


def pipeline_to_json(pipeline: PlannedPipeline) -> Dict[str, Any]:
    return {'steps': [step_to_json(s) for s in pipeline.steps]}


def pipeline_from_json(data: Any) -> PlannedPipeline:
    """Decode a pipeline; names are numbered only where two operators on one path share one."""
    if not isinstance(data, dict) or not isinstance(data.get('steps'), list):
        raise SchemaError("$: pipeline must be an object with a 'steps' list")
    steps = [step_from_json(s, f"$.steps[{i}]") for i, s in enumerate(data['steps'])]
    if all(len({op.name for op in path}) == len(path) for path in iter_paths(steps)):
        return flatten_pipeline(steps)
    return build_pipeline(steps)
