"""Pretty-printer, parser and differ for the pipeline DSL.

The DSL is a small Python-like surface::

    simple_imputer = SimpleImputer.customize_schema(strategy=cat("mean", "median"))
    one_hot_encoder = OneHotEncoder(handle_unknown="ignore")
    logistic_regression = LogisticRegression
    pipeline = simple_imputer >> one_hot_encoder >> logistic_regression

Every distinct step shape gets one variable, defined before its first use;
names are derived from operator class names so that printing two similar
pipelines yields diffs that only touch the lines that really changed.
"""

import difflib
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput

from .errors import DslParseError, SchemaError, UnknownDomainLiteral
from .search_space import (
    Anything,
    Categorical,
    Choice,
    Constant,
    FloatRange,
    HyperparamDomain,
    IntRange,
    OperatorSpec,
    PipelineInstance,
    PlannedPipeline,
    Seq,
    Step,
    Value,
    base_name,
    build_pipeline,
    canonical_domain,
    format_key,
    format_literal,
    is_numeric,
    make_seq,
    pipeline_from_json,
    pipeline_to_json,
    shape,
)

DSL_SUFFIX = '.mpl'

_GRAMMAR = r"""
    start: stmt+

    stmt: NAME "=" rhs

    ?rhs: NAME                               -> name
        | NAME ("|" NAME)+                   -> choice
        | NAME (">>" NAME)+                  -> chain
        | NAME call_args                     -> configured
        | NAME "." NAME call_args            -> customized
        | NAME "." NAME call_args call_args  -> customized

    call_args: "(" [kwarg ("," kwarg)* ","?] ")"
    kwarg: NAME "=" value

    ?value: literal
          | NAME "(" [darg ("," darg)*] ")"  -> domain_call

    ?darg: literal
         | NAME "=" literal                  -> named_arg

    literal: ESCAPED_STRING                  -> string
           | SIGNED_NUMBER                   -> number
           | "True"                          -> true
           | "False"                         -> false

    COMMENT: /#[^\n]*/

    %import common.ESCAPED_STRING
    %import common.SIGNED_NUMBER
    %import common.CNAME -> NAME
    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_parser = Lark(_GRAMMAR, parser='lalr', maybe_placeholders=True)

_SNAKE = re.compile(r'(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])')


@dataclass(frozen=True)
class PipelineSource:
    text: str
    binding_names: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'binding_names', MappingProxyType(dict(self.binding_names)))

    def __str__(self) -> str:
        return self.text


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def snake_case(name: str) -> str:
    return _SNAKE.sub('_', name).lower()


def format_domain(domain: HyperparamDomain) -> str:
    if isinstance(domain, Categorical):
        return f"cat({', '.join(format_literal(v) for v in domain.values)})"
    if isinstance(domain, IntRange):
        return f"int({domain.lo}, {domain.hi})"
    if isinstance(domain, FloatRange):
        flags = ''.join([
            ', open_lo=True' if domain.open_lo else '',
            ', open_hi=True' if domain.open_hi else '',
        ])
        return f"float({domain.lo!r}, {domain.hi!r}{flags})"
    if isinstance(domain, Constant):
        return f"const({format_literal(domain.value)})"
    return "any()"


def _operator_expr(op: OperatorSpec) -> str:
    expr = base_name(op.name)
    if op.hyperparams:
        schema = ', '.join(f"{hp}={format_domain(d)}" for hp, d in op.hyperparams.items())
        expr += f".customize_schema({schema})"
    if op.fixed:
        expr += f"({', '.join(f'{hp}={format_literal(v)}' for hp, v in op.fixed.items())})"
    return expr


def _var_base(step: Step) -> str:
    if isinstance(step, OperatorSpec):
        return snake_case(base_name(step.name))
    return 'choice' if isinstance(step, Choice) else 'branch'


def pretty_print(p: PlannedPipeline) -> PipelineSource:
    """Canonical DSL text of ``p``; ends with exactly one newline."""
    order: List[tuple] = []
    by_shape: Dict[tuple, Step] = {}

    def visit(step: Step) -> None:
        if isinstance(step, Choice):
            for alt in step.alternatives:
                visit(alt)
        elif isinstance(step, Seq):
            for s in step.steps:
                visit(s)
        key = shape(step)
        if key not in by_shape:
            by_shape[key] = step
            order.append(key)

    for step in p.steps:
        visit(step)

    bases = {key: _var_base(by_shape[key]) for key in order}
    counts = Counter(bases.values())
    next_index: Dict[str, int] = defaultdict(int)
    names: Dict[tuple, str] = {}
    for key in order:
        base = bases[key]
        if counts[base] > 1 or base == 'pipeline':
            names[key] = f"{base}_{next_index[base]}"
            next_index[base] += 1
        else:
            names[key] = base

    lines = []
    for key in order:
        step = by_shape[key]
        if isinstance(step, OperatorSpec):
            expr = _operator_expr(step)
        elif isinstance(step, Choice):
            expr = ' | '.join(names[shape(a)] for a in step.alternatives)
        else:
            expr = ' >> '.join(names[shape(s)] for s in step.steps)
        lines.append(f"{names[key]} = {expr}")
    lines.append(f"pipeline = {' >> '.join(names[shape(s)] for s in p.steps)}")

    binding_names: Dict[str, str] = {}
    for op in p.operators():
        binding_names.setdefault(op.name, names[shape(op)])
    return PipelineSource('\n'.join(lines) + '\n', binding_names)


def format_instance(inst: PipelineInstance) -> str:
    """One line per instance, bindings in alphabetical key order."""
    status = 'ok' if inst.result else 'fail'
    params = ', '.join(
        f"{format_key(key)}={format_literal(value)}"
        for key, value in sorted(inst.bindings.items(), key=lambda kv: format_key(kv[0]))
    )
    line = f"{inst.id} {status} {{{params}}}"
    if inst.loss is not None:
        line += f" loss={inst.loss!r}"
    return line


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@dataclass
class _Call:
    name: Token
    args: List[Tuple[Optional[Token], Value]]


@v_args(inline=True)
class _ToStatements(Transformer):
    """Turns the parse tree into plain tuples; validation happens afterwards."""

    def start(self, *stmts):
        return list(stmts)

    def stmt(self, name, rhs):
        return (name, rhs)

    def name(self, tok):
        return ('name', tok)

    def choice(self, *toks):
        return ('choice', list(toks))

    def chain(self, *toks):
        return ('chain', list(toks))

    def configured(self, tok, kwargs):
        return ('configured', tok, None, kwargs)

    def customized(self, tok, attr, schema, fixed=None):
        return ('customized', tok, attr, schema, fixed or [])

    def call_args(self, *kwargs):
        return [kw for kw in kwargs if kw is not None]

    def kwarg(self, key, value):
        return (key, value)

    def domain_call(self, tok, *args):
        return _Call(tok, [a if isinstance(a, tuple) else (None, a) for a in args if a is not None])

    def named_arg(self, key, value):
        return (key, value)

    def string(self, tok):
        return json.loads(tok)

    def number(self, tok):
        text = str(tok)
        return float(text) if any(c in text for c in '.eE') else int(text)

    def true(self):
        return True

    def false(self):
        return False


def _error(message: str, tok: Token, cls=DslParseError) -> DslParseError:
    return cls(message, getattr(tok, 'line', None), getattr(tok, 'column', None))


def _domain(value: Union[_Call, Value], key: Token) -> HyperparamDomain:
    if not isinstance(value, _Call):
        raise _error(f"{key}: expected a domain such as cat(...) or int(lo, hi)", key)
    name, tok = str(value.name), value.name
    positional = [v for k, v in value.args if k is None]
    named = {str(k): v for k, v in value.args if k is not None}
    try:
        if name == 'cat' and positional and not named:
            return canonical_domain(Categorical(tuple(positional)))
        if name == 'int' and len(positional) == 2 and not named:
            return canonical_domain(IntRange(*positional))
        if name == 'float' and len(positional) == 2 and set(named) <= {'open_lo', 'open_hi'} \
                and all(is_numeric(v) for v in positional) \
                and all(isinstance(v, bool) for v in named.values()):
            return canonical_domain(FloatRange(*positional, **named))
        if name == 'const' and len(positional) == 1 and not named:
            return Constant(positional[0])
        if name == 'any' and not value.args:
            return Anything()
    except SchemaError as e:
        raise _error(f"{key}: {e}", tok) from e
    if name in ('cat', 'int', 'float', 'const', 'any'):
        raise _error(f"{key}: bad arguments for {name}()", tok)
    raise _error(f"unknown domain literal {name}()", tok, UnknownDomainLiteral)


def _literals(kwargs, what: str) -> Dict[str, Value]:
    values: Dict[str, Value] = {}
    for key, value in kwargs:
        if isinstance(value, _Call):
            raise _error(f"{key}: {what} must be a literal", key)
        if str(key) in values:
            raise _error(f"{key}: repeated keyword", key)
        values[str(key)] = value
    return values


def _operator(rhs: tuple) -> OperatorSpec:
    kind, tok = rhs[0], rhs[1]
    try:
        if kind == 'configured':
            return OperatorSpec(str(tok), fixed=_literals(rhs[3], 'a fixed value'))
        attr, schema, fixed = rhs[2], rhs[3], rhs[4]
        if str(attr) != 'customize_schema':
            raise _error(f"unknown method {attr}, expected customize_schema", attr)
        domains: Dict[str, HyperparamDomain] = {}
        for key, value in schema:
            if str(key) in domains:
                raise _error(f"{key}: repeated keyword", key)
            domains[str(key)] = _domain(value, key)
        return OperatorSpec(str(tok), hyperparams=domains, fixed=_literals(fixed, 'a fixed value'))
    except SchemaError as e:
        raise _error(str(e), tok) from e


def _resolve(stmts: list) -> PlannedPipeline:
    env: Dict[str, Step] = {}

    def ref(tok: Token) -> Step:
        if str(tok) in env:
            return env[str(tok)]
        # Operator classes are capitalized; anything else must be a variable.
        if not str(tok)[0].isupper():
            raise _error(f"undefined variable {tok}", tok)
        return OperatorSpec(str(tok))

    for i, (name, rhs) in enumerate(stmts):
        last = i == len(stmts) - 1
        if str(name) in env:
            raise _error(f"variable {name} is assigned twice", name)
        if (str(name) == 'pipeline') != last:
            raise _error("the last statement, and only it, must assign 'pipeline'", name)
        kind = rhs[0]
        try:
            if kind == 'name':
                steps: List[Step] = [ref(rhs[1])]
            elif kind == 'choice':
                steps = [Choice(tuple(ref(t) for t in rhs[1]))]
            elif kind == 'chain':
                steps = [ref(t) for t in rhs[1]]
            else:
                steps = [_operator(rhs)]
        except SchemaError as e:
            raise _error(str(e), name) from e
        if last:
            try:
                return build_pipeline(steps)
            except SchemaError as e:
                raise _error(str(e), name) from e
        env[str(name)] = make_seq(steps)
    raise DslParseError("missing final 'pipeline = ...' statement")


def parse_dsl(src: str) -> PlannedPipeline:
    """Parse DSL text back into a planned pipeline."""
    try:
        tree = _parser.parse(src)
    except UnexpectedInput as e:
        message = str(e).strip().splitlines()[0] if str(e).strip() else "syntax error"
        line = e.line if getattr(e, 'line', -1) not in (None, -1) else None
        column = e.column if getattr(e, 'column', -1) not in (None, -1) else None
        raise DslParseError(message, line, column) from e
    return _resolve(_ToStatements().transform(tree))


# ---------------------------------------------------------------------------
# Diffing and files
# ---------------------------------------------------------------------------

def pipeline_diff(a: PlannedPipeline, b: PlannedPipeline) -> str:
    """Unified diff of the printed pipelines as a markdown ``diff`` block."""
    body = list(difflib.unified_diff(
        pretty_print(a).text.splitlines(),
        pretty_print(b).text.splitlines(),
        fromfile='original',
        tofile='remediated',
        lineterm='',
        n=3,
    ))
    if not body:
        return "```diff\n```"
    return "```diff\n" + "\n".join(body) + "\n```"


def load_pipeline(path: Union[str, Path]) -> PlannedPipeline:
    """Read a pipeline: ``.mpl`` files as DSL, anything else as JSON."""
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    if path.suffix == DSL_SUFFIX:
        return parse_dsl(text)
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON: {e}") from e
    return pipeline_from_json(data)


def dump_pipeline(p: PlannedPipeline, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix == DSL_SUFFIX:
        path.write_text(pretty_print(p).text, encoding='utf-8')
    else:
        path.write_text(json.dumps(pipeline_to_json(p), indent=2) + '\n', encoding='utf-8')
