"""Fault localization: find a constraint that exactly separates a trace.

The search is a finite-domain template solver. Candidate atoms are built
from the values observed in the trace; each candidate is evaluated once
into a bitmask over the instances, so deciding whether it separates a
sub-trace is a couple of integer operations. If-then-else trees are found
by iterative deepening, partitioning the trace by a condition atom and
solving each side recursively.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .config import LocalizerConfig
from .constraints import (
    ATOM_KINDS,
    Absent,
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
    eval_constraint,
    format_constraint,
)
from .errors import AllFailed, NoExplanation, TraceError
from .search_space import (
    Key,
    PipelineInstance,
    PlannedPipeline,
    Value,
    contains,
    is_numeric,
    same_literal,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationTrace:
    pipeline: PlannedPipeline
    instances: Tuple[PipelineInstance, ...]

    def __post_init__(self):
        instances = tuple(self.instances)
        object.__setattr__(self, 'instances', instances)
        seen = set()
        for inst in instances:
            if inst.id in seen:
                raise TraceError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
            if not contains(self.pipeline, inst):
                raise TraceError(f"instance {inst.id!r} is not an instance of the planned pipeline")

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def successes(self) -> List[PipelineInstance]:
        return [i for i in self.instances if i.result]

    @property
    def failures(self) -> List[PipelineInstance]:
        return [i for i in self.instances if not i.result]

    def observed_values(self) -> Dict[Key, List[Value]]:
        """Distinct bound values per key, in first-seen order."""
        values: Dict[Key, List[Value]] = {}
        for inst in self.instances:
            for key, value in inst.bindings.items():
                seen = values.setdefault(key, [])
                if not any(same_literal(value, v) for v in seen):
                    seen.append(value)
        return values


def candidate_atoms(trace: EvaluationTrace,
                    template_order: Sequence[str] = ATOM_KINDS) -> List[Atom]:
    """Deterministic candidate list, kind-major in ``template_order``.

    Within a kind, keys are in lexicographic order and values in first-seen
    order; comparison limits are ascending observed values. Neq is only
    offered for keys bound in every instance, since it is false wherever the
    key is unbound.
    """
    values = trace.observed_values()
    keys = sorted(values)
    always = [k for k in keys if all(k in inst.bindings for inst in trace.instances)]
    numeric = [k for k in keys if all(is_numeric(v) for v in values[k])]

    def limits(key: Key) -> List[Value]:
        distinct: List[Value] = []
        for v in sorted(values[key]):
            if not any(same_literal(v, d) for d in distinct):
                distinct.append(v)
        return distinct

    by_kind: Dict[str, List[Atom]] = {
        'eq': [Eq(op, hp, v) for op, hp in keys for v in values[(op, hp)]],
        'neq': [Neq(op, hp, v) for op, hp in always for v in values[(op, hp)]],
        'absent': [Absent(op, hp) for op, hp in keys],
        'present': [Present(op, hp) for op, hp in keys],
        'cmp': [
            CmpConst(op, hp, cmp, limit)
            for op, hp in numeric
            for cmp in ('<=', '>=')
            for limit in limits((op, hp))
        ],
        'cmp2': [
            CmpParam(a[0], a[1], cmp, b[0], b[1])
            for a in numeric
            for b in numeric
            if a != b
            for cmp in ('<=', '<')
        ],
    }
    return [atom for kind in template_order for atom in by_kind[kind]]


def _popcount(mask: int) -> int:
    return bin(mask).count('1')


class _Search:
    """Bitmask search state shared by the recursive solver."""

    def __init__(self, trace: EvaluationTrace, template_order: Sequence[str]):
        self.trace = trace
        self.full = (1 << len(trace)) - 1
        self.target = sum(1 << i for i, inst in enumerate(trace.instances) if inst.result)
        self.atoms = candidate_atoms(trace, template_order)
        self.bits = [
            sum(1 << i for i, inst in enumerate(trace.instances) if eval_constraint(atom, inst))
            for atom in self.atoms
        ]
        self.memo: Dict[Tuple[int, int], Optional[Constraint]] = {}
        logger.debug("%d candidate atoms over %d instances", len(self.atoms), len(trace))

    def atomic(self, mask: int) -> Optional[Constraint]:
        succ = mask & self.target
        if succ == mask:
            return LitTrue()
        if succ == 0:
            return LitFalse()
        for atom, bits in zip(self.atoms, self.bits):
            if bits & mask == succ:
                return atom
        return None

    def solve(self, mask: int, depth: int) -> Optional[Constraint]:
        key = (mask, depth)
        if key not in self.memo:
            self.memo[key] = self._solve(mask, depth)
        return self.memo[key]

    def _solve(self, mask: int, depth: int) -> Optional[Constraint]:
        found = self.atomic(mask)
        if found is not None or depth == 0:
            return found
        tried = set()
        for cond, bits in zip(self.atoms, self.bits):
            inside = mask & bits
            if inside == 0 or inside == mask or inside in tried:
                continue
            tried.add(inside)
            then = self.solve(inside, depth - 1)
            if then is None:
                continue
            else_ = self.solve(mask & ~bits, depth - 1)
            if else_ is None:
                continue
            return Ite(cond, then, else_)
        return None

    def best_separator(self) -> Tuple[Optional[Atom], List[str]]:
        best: Optional[Atom] = None
        wrong = self.full
        for atom, bits in zip(self.atoms, self.bits):
            miss = (bits ^ self.target) & self.full
            if _popcount(miss) < _popcount(wrong):
                best, wrong = atom, miss
        ids = [inst.id for i, inst in enumerate(self.trace.instances) if wrong >> i & 1]
        return best, ids


def solve_atomic(trace: EvaluationTrace,
                 template_order: Sequence[str] = ATOM_KINDS) -> Optional[Constraint]:
    """First candidate atom that exactly separates ``trace``, if any.

    All-success traces give LitTrue and all-fail traces LitFalse.
    """
    if not trace.instances:
        raise TraceError("cannot localize an empty trace")
    search = _Search(trace, template_order)
    return search.atomic(search.full)


def solve(trace: EvaluationTrace, config: Optional[LocalizerConfig] = None) -> Constraint:
    """Shallowest constraint that exactly separates ``trace``.

    Raises:
        AllFailed: every instance in the trace failed.
        NoExplanation: nothing within ``config.max_depth`` separates the trace.
    """
    config = config or LocalizerConfig()
    if not trace.instances:
        raise TraceError("cannot localize an empty trace")
    if not trace.successes:
        raise AllFailed(
            f"all {len(trace)} evaluations failed; sample a broader search space "
            "so that at least one instance succeeds")
    if not trace.failures:
        logger.info("no failures in %d evaluations", len(trace))
        return LitTrue()

    search = _Search(trace, config.template_order)
    for depth in range(config.max_depth + 1):
        found = search.solve(search.full, depth)
        if found is not None:
            logger.info("localized at depth %d: %s", depth, format_constraint(found))
            return found
        logger.debug("no separator at depth %d", depth)

    best, misclassified = search.best_separator()
    if best is None:
        message = f"no constraint of depth <= {config.max_depth} explains the trace"
    else:
        message = (
            f"no constraint of depth <= {config.max_depth} explains the trace; "
            f"best partial separator {format_constraint(best)} misclassifies "
            f"{', '.join(misclassified)}")
    raise NoExplanation(message, best=best, misclassified=misclassified)
