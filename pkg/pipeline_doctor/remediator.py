"""Rewrite a planned pipeline so that every instance it denotes satisfies a constraint.

The rewrite follows the constraint's structure:

* if-then-else: remediate each branch under its condition and offer the
  surviving pipelines as alternatives of one top-level choice
* conjunction: thread the pipeline through each conjunct
* presence atoms: keep or remove choice alternatives
* value atoms: customize the hyperparameter's domain
* hyperparameter comparisons: split the bound side into ranges and pair
  each range with a capped copy of the dependent side
"""

import functools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .constraints import (
    Absent,
    And,
    CmpConst,
    CmpParam,
    Constraint,
    Eq,
    Ite,
    LitFalse,
    LitTrue,
    Neq,
    Present,
    complement_atom,
    conjoin,
    constraint_to_json,
    eval_constraint,
    format_constraint,
    referenced_keys,
)
from .errors import (
    AllBucketsEmpty,
    EmptyDomain,
    LitFalseConstraint,
    NotInChoice,
    NotNumeric,
    RemediationError,
    SchemaError,
    UnsatisfiableBranch,
    WouldEmptyChoice,
)
from .search_space import (
    Anything,
    Categorical,
    Constant,
    FloatRange,
    HyperparamDomain,
    IntRange,
    Key,
    OperatorSpec,
    PipelineInstance,
    PlannedPipeline,
    Seq,
    Step,
    Value,
    as_steps,
    canonical_domain,
    domain_key,
    exclude_value,
    flatten_pipeline,
    format_key,
    is_mandatory,
    is_numeric,
    iter_operators,
    iter_paths,
    make_choice,
    make_seq,
    map_operator,
    map_steps,
    operator_names,
    pipeline_to_json,
    remove_choice_alternative,
    require_operator,
    restrict_domain,
    same_literal,
    split_range,
)

logger = logging.getLogger(__name__)

DEFAULT_SPLITS = 5

# A branch failing with one of these is dropped when a sibling survives.
_BRANCH_EMPTY = (EmptyDomain, RemediationError)


@dataclass(frozen=True)
class RewriteNote:
    rule: str
    target: str
    detail: str

    def to_json(self) -> Dict[str, str]:
        return {'rule': self.rule, 'target': self.target, 'detail': self.detail}


@dataclass(frozen=True)
class Remediation:
    original: PlannedPipeline
    remediated: PlannedPipeline
    constraint: Constraint
    notes: Tuple[RewriteNote, ...] = ()

    def to_json(self) -> Dict[str, Any]:
        return {
            'original': pipeline_to_json(self.original),
            'remediated': pipeline_to_json(self.remediated),
            'constraint': constraint_to_json(self.constraint),
            'notes': [n.to_json() for n in self.notes],
        }


def _bounds(domain: HyperparamDomain) -> Optional[Tuple[float, bool, float, bool]]:
    """(lo, lo_open, hi, hi_open) of a numeric domain, None otherwise."""
    if isinstance(domain, IntRange):
        return (domain.lo, False, domain.hi, False)
    if isinstance(domain, FloatRange):
        return (domain.lo, domain.open_lo, domain.hi, domain.open_hi)
    if isinstance(domain, Constant) and is_numeric(domain.value):
        return (domain.value, False, domain.value, False)
    if isinstance(domain, Categorical) and all(is_numeric(v) for v in domain.values):
        return (min(domain.values), False, max(domain.values), False)
    return None


def _is_integral(domain: HyperparamDomain) -> bool:
    if isinstance(domain, IntRange):
        return True
    if isinstance(domain, Constant):
        return isinstance(domain.value, int)
    if isinstance(domain, Categorical):
        return all(isinstance(v, int) for v in domain.values)
    return False


def _split_basis(domains: Sequence[HyperparamDomain], observed: Sequence[Value]) -> HyperparamDomain:
    """Numeric range covering every occurrence of the bound hyperparameter."""
    distinct: Dict[tuple, HyperparamDomain] = {}
    for d in domains:
        distinct.setdefault(domain_key(d), d)
    ds = list(distinct.values())
    if len(ds) == 1 and isinstance(ds[0], (IntRange, FloatRange)):
        return ds[0]

    los, his, integral = [], [], True
    for d in ds:
        if isinstance(d, Anything):
            values = [v for v in observed if is_numeric(v)]
            if not values:
                raise NotNumeric("cannot split an unconstrained hyperparameter without observed values")
            los.append(min(values))
            his.append(max(values))
            integral = integral and all(isinstance(v, int) for v in values)
            continue
        bounds = _bounds(d)
        if bounds is None:
            raise NotNumeric(f"cannot split non-numeric domain {d!r}")
        los.append(bounds[0])
        his.append(bounds[2])
        integral = integral and _is_integral(d)
    lo, hi = min(los), max(his)
    return canonical_domain(IntRange(lo, hi) if integral else FloatRange(lo, hi))


def _bucket_atoms(op: str, hp: str, bucket: HyperparamDomain) -> List[CmpConst]:
    if isinstance(bucket, Constant):
        return [CmpConst(op, hp, '>=', bucket.value), CmpConst(op, hp, '<=', bucket.value)]
    if isinstance(bucket, IntRange):
        return [CmpConst(op, hp, '>=', bucket.lo), CmpConst(op, hp, '<=', bucket.hi)]
    assert isinstance(bucket, FloatRange)
    return [
        CmpConst(op, hp, '>' if bucket.open_lo else '>=', bucket.lo),
        CmpConst(op, hp, '<' if bucket.open_hi else '<=', bucket.hi),
    ]


def _lower_bound(bucket: HyperparamDomain) -> Value:
    if isinstance(bucket, Constant):
        return bucket.value
    assert isinstance(bucket, (IntRange, FloatRange))
    return bucket.lo


def _restricted(spec: OperatorSpec, hp: str, atoms: Sequence[Constraint],
                observed: Sequence[Value]) -> Optional[OperatorSpec]:
    """``spec`` with ``hp`` restricted by ``atoms``; None when nothing is left."""
    if hp in spec.fixed:
        inst = PipelineInstance('fixed', True, {(spec.name, hp): spec.fixed[hp]})
        return spec if all(eval_constraint(a, inst) for a in atoms) else None
    domain = spec.domain_of(hp)
    try:
        for atom in atoms:
            domain = restrict_domain(domain, atom, observed)
    except EmptyDomain:
        return None
    return spec.with_domain(hp, domain)


def _excluded(spec: OperatorSpec, hp: str, value: Value,
              observed: Sequence[Value]) -> Optional[Step]:
    """``spec`` without ``hp == value``: one copy per remaining piece of the domain."""
    if hp in spec.fixed:
        return None if same_literal(spec.fixed[hp], value) else spec
    try:
        pieces = exclude_value(spec.domain_of(hp), value, observed)
    except EmptyDomain:
        return None
    return make_choice([spec.with_domain(hp, d) for d in pieces])


class Remediator:
    """Single-use rewrite state; collects notes while processing a constraint."""

    def __init__(self, n_splits: int = DEFAULT_SPLITS,
                 observed: Optional[Mapping[Key, Sequence[Value]]] = None):
        if n_splits < 1:
            raise SchemaError(f"number of splits must be positive, got {n_splits}")
        self.n_splits = n_splits
        self.observed: Mapping[Key, Sequence[Value]] = observed or {}
        self.notes: List[RewriteNote] = []

    def _note(self, rule: str, target: str, detail: str, at: Optional[int] = None) -> None:
        note = RewriteNote(rule, target, detail)
        if at is None:
            self.notes.append(note)
        else:
            self.notes.insert(at, note)
        logger.debug("%s %s: %s", rule, target, detail)

    def process(self, pipe: PlannedPipeline, c: Constraint) -> PlannedPipeline:
        if isinstance(c, LitTrue):
            return pipe
        if isinstance(c, LitFalse):
            raise LitFalseConstraint("constraint 'false' admits no pipeline instance")
        if isinstance(c, Ite):
            return self._branches(pipe, c)
        if isinstance(c, And):
            for part in c.parts:
                pipe = self.process(pipe, part)
            return pipe
        if isinstance(c, Present):
            return self._present(pipe, c)
        if isinstance(c, Absent):
            return self._absent(pipe, c)
        if isinstance(c, (Eq, Neq, CmpConst)):
            return self._customize(pipe, c)
        if isinstance(c, CmpParam):
            return self.make_comparison(pipe, c)
        raise SchemaError(f"not a constraint: {c!r}")

    # -- if-then-else -------------------------------------------------------

    def _branches(self, pipe: PlannedPipeline, c: Ite) -> PlannedPipeline:
        branches = [(format_constraint(c.cond), conjoin(c.cond, c.then))]
        for disjunct in complement_atom(c.cond):
            branches.append((format_constraint(disjunct), conjoin(disjunct, c.else_)))

        survivors: List[PlannedPipeline] = []
        for label, branch in branches:
            mark = len(self.notes)
            try:
                result = self.process(pipe, branch)
            except _BRANCH_EMPTY as e:
                del self.notes[mark:]
                self._note('drop-branch', label, str(e))
                continue
            self._note('branch', label, format_constraint(branch), at=mark)
            survivors.append(result)

        if not survivors:
            raise UnsatisfiableBranch(f"no branch of {format_constraint(c)} is satisfiable")
        if len(survivors) == 1:
            return survivors[0]
        return flatten_pipeline([make_choice([make_seq(p.steps) for p in survivors])])

    # -- choices ------------------------------------------------------------

    def _require(self, pipe: PlannedPipeline, op: str) -> PlannedPipeline:
        if op not in pipe.operator_names():
            raise UnsatisfiableBranch(f"operator {op} is not available in this branch")
        if is_mandatory(pipe, op):
            return pipe
        self._note('require', op, "kept only the choice alternatives using it")
        return require_operator(pipe, op)

    def _present(self, pipe: PlannedPipeline, atom: Present) -> PlannedPipeline:
        if atom.op in pipe.operator_names() and is_mandatory(pipe, atom.op):
            self._note('present', format_key(atom.key), "operator is already on every path")
            return pipe
        return self._require(pipe, atom.op)

    def _absent(self, pipe: PlannedPipeline, atom: Absent) -> PlannedPipeline:
        if atom.op not in pipe.operator_names():
            self._note('absent', format_key(atom.key), "operator is already excluded")
            return pipe
        try:
            result = remove_choice_alternative(pipe, atom.op)
        except (NotInChoice, WouldEmptyChoice) as e:
            raise UnsatisfiableBranch(f"cannot make {format_key(atom.key)} absent: {e}") from e
        self._note('exclude', atom.op, "removed the choice alternatives using it")
        return result

    # -- domains ------------------------------------------------------------

    def _customize(self, pipe: PlannedPipeline, atom) -> PlannedPipeline:
        pipe = self._require(pipe, atom.op)
        observed = self.observed.get(atom.key, ())
        if isinstance(atom, Neq):
            rewrite = functools.partial(_excluded, hp=atom.hp, value=atom.value, observed=observed)
        else:
            rewrite = functools.partial(_restricted, hp=atom.hp, atoms=[atom], observed=observed)
        result = map_operator(pipe, atom.op, rewrite)
        if result is None:
            raise EmptyDomain(f"{format_constraint(atom)} leaves no value for {format_key(atom.key)}")
        self._note('customize', format_key(atom.key), format_constraint(atom))
        return result

    # -- comparisons --------------------------------------------------------

    def comparison_holds(self, pipe: PlannedPipeline, atom: CmpParam) -> bool:
        """Whether every path already guarantees ``atom`` by its domains alone."""
        for path in iter_paths(pipe.steps):
            specs = {op.name: op for op in path}
            if atom.op1 not in specs or atom.op2 not in specs:
                return False
            left = _bounds(specs[atom.op1].domain_of(atom.hp1))
            right = _bounds(specs[atom.op2].domain_of(atom.hp2))
            if left is None or right is None:
                return False
            hi, hi_open = left[2], left[3]
            lo, lo_open = right[0], right[1]
            if atom.cmp == '<=':
                holds = hi <= lo
            else:
                holds = hi < lo or (hi == lo and (hi_open or lo_open))
            if not holds:
                return False
        return True

    def make_comparison(self, pipe: PlannedPipeline, atom: CmpParam) -> PlannedPipeline:
        pipe = self._require(pipe, atom.op1)
        pipe = self._require(pipe, atom.op2)
        target = f"{format_key(atom.lhs)} {atom.cmp} {format_key(atom.rhs)}"
        if self.comparison_holds(pipe, atom):
            self._note('compare', target, "already holds on every path")
            return pipe
        return flatten_pipeline(self._compare_chain(pipe.steps, atom))

    def _compare_chain(self, steps: Sequence[Step], atom: CmpParam) -> List[Step]:
        """Apply the comparison to the smallest span of ``steps`` holding both operators."""
        names = {atom.op1, atom.op2}
        idx = [i for i, s in enumerate(steps) if names & operator_names(s)]
        lo, hi = idx[0], idx[-1]
        step = steps[lo]
        if lo == hi and isinstance(step, Seq):
            new = make_seq(self._compare_chain(step.steps, atom))
        elif lo == hi and not isinstance(step, OperatorSpec):
            new = make_choice([
                make_seq(self._compare_chain(as_steps(alt), atom))
                if names <= operator_names(alt) else alt
                for alt in step.alternatives
            ])
        else:
            new = self._split_span(steps[lo:hi + 1], atom)
        return list(steps[:lo]) + [new] + list(steps[hi + 1:])

    def _split_span(self, span: Sequence[Step], atom: CmpParam) -> Step:
        rhs_domains = [
            op.domain_of(atom.hp2)
            for s in span for op in iter_operators(s) if op.name == atom.op2
        ]
        observed_rhs = self.observed.get(atom.rhs, ())
        observed_lhs = self.observed.get(atom.lhs, ())
        buckets = split_range(_split_basis(rhs_domains, observed_rhs), self.n_splits)
        target = f"{format_key(atom.lhs)} {atom.cmp} {format_key(atom.rhs)}"

        clones: List[Step] = []
        for bucket in buckets:
            cap = CmpConst(atom.op1, atom.hp1, atom.cmp, _lower_bound(bucket))
            chain = map_steps(span, atom.op2, functools.partial(
                _restricted, hp=atom.hp2,
                atoms=_bucket_atoms(atom.op2, atom.hp2, bucket), observed=observed_rhs))
            if chain is not None:
                chain = map_steps(chain, atom.op1, functools.partial(
                    _restricted, hp=atom.hp1, atoms=[cap], observed=observed_lhs))
            if chain is None:
                self._note('drop-bucket', target, f"{format_constraint(cap)} leaves no value")
                continue
            clones.append(make_seq(chain))

        if not clones:
            raise AllBucketsEmpty(f"every range of {format_key(atom.rhs)} empties {format_key(atom.lhs)}")
        self._note('compare', target,
                   f"split {format_key(atom.rhs)} into {len(clones)} of {len(buckets)} ranges")
        return make_choice(clones)


def _check_references(pipe: PlannedPipeline, c: Constraint) -> None:
    for op, hp in sorted(referenced_keys(c)):
        specs = pipe.find_operators(op)
        if not specs:
            raise SchemaError(f"constraint references unknown operator {op}")
        if not any(hp in s.hyperparams or hp in s.fixed for s in specs):
            raise SchemaError(f"constraint references unknown hyperparameter {op}.{hp}")


def remediate(orig: PlannedPipeline, c: Constraint, n_splits: int = DEFAULT_SPLITS,
              observed: Optional[Mapping[Key, Sequence[Value]]] = None) -> Remediation:
    """Remediate ``orig`` so that every instance it denotes satisfies ``c``.

    Args:
        orig: The planned pipeline to rewrite.
        c: Constraint, usually produced by the localizer.
        n_splits: Number of ranges used for hyperparameter comparisons.
        observed: Trace values per key, bounding unconstrained domains.

    Raises:
        SchemaError: ``c`` references operators or hyperparameters ``orig`` lacks.
        EmptyDomain, RemediationError: no instance of ``orig`` satisfies ``c``.
    """
    _check_references(orig, c)
    remediator = Remediator(n_splits, observed)
    remediated = remediator.process(orig, c)
    logger.info("remediated %s with %d rewrites", format_constraint(c), len(remediator.notes))
    return Remediation(orig, remediated, c, tuple(remediator.notes))


def make_comparison(pipe: PlannedPipeline, atom: CmpParam, n_splits: int = DEFAULT_SPLITS) -> PlannedPipeline:
    """Proxy ``atom`` by pairing ranges of its bound side with capped copies of the dependent side."""
    _check_references(pipe, atom)
    return Remediator(n_splits).make_comparison(pipe, atom)
