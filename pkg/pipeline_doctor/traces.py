"""JSONL evaluation traces.

One object per line::

    {"id": "p0", "status": "fail", "params": {"SimpleImputer.strategy": "median"}, "loss": 0.31}
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from .errors import TraceError
from .localizer import EvaluationTrace
from .search_space import Key, PipelineInstance, PlannedPipeline, format_key, is_literal, is_numeric

STATUSES = {'ok': True, 'fail': False}


def parse_param_key(text: str) -> Key:
    """``Operator.hyperparam`` (operator possibly ``Name#n``) to a binding key."""
    op, sep, hp = text.rpartition('.')
    if not sep or not op or not hp:
        raise TraceError(f"parameter key {text!r} is not of the form Operator.hyperparam")
    return (op, hp)


def instance_from_json(data: Any, where: str = '$') -> PipelineInstance:
    if not isinstance(data, dict):
        raise TraceError(f"{where}: expected an object")
    inst_id = data.get('id')
    if not isinstance(inst_id, str) or not inst_id:
        raise TraceError(f"{where}: missing instance id")
    status = data.get('status')
    if status not in STATUSES:
        raise TraceError(f"{where}: status must be 'ok' or 'fail', got {status!r}")
    params = data.get('params', {})
    if not isinstance(params, dict):
        raise TraceError(f"{where}: params must be an object")
    bindings = {}
    for key, value in params.items():
        if not is_literal(value):
            raise TraceError(f"{where}: value of {key} must be a JSON scalar")
        bindings[parse_param_key(key)] = value
    loss = data.get('loss')
    if loss is not None and not is_numeric(loss):
        raise TraceError(f"{where}: loss must be a number")
    return PipelineInstance(inst_id, STATUSES[status], bindings, loss)


def instance_to_json(inst: PipelineInstance) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        'id': inst.id,
        'status': 'ok' if inst.result else 'fail',
        'params': {format_key(k): v for k, v in inst.bindings.items()},
    }
    if inst.loss is not None:
        data['loss'] = inst.loss
    return data


def parse_trace(text: str, where: str = '<trace>') -> List[PipelineInstance]:
    instances = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(f"{where}:{n}: invalid JSON: {e.msg}") from e
        instances.append(instance_from_json(data, f"{where}:{n}"))
    return instances


def read_trace(path: Union[str, Path], pipeline: PlannedPipeline) -> EvaluationTrace:
    """Load a JSONL trace and validate it against ``pipeline``."""
    path = Path(path)
    instances = parse_trace(path.read_text(encoding='utf-8'), str(path))
    if not instances:
        raise TraceError(f"{path}: trace is empty")
    return EvaluationTrace(pipeline, tuple(instances))


def dump_trace(instances: Iterable[PipelineInstance]) -> str:
    return ''.join(json.dumps(instance_to_json(i)) + '\n' for i in instances)


def write_trace(path: Union[str, Path], instances: Iterable[PipelineInstance]) -> None:
    Path(path).write_text(dump_trace(instances), encoding='utf-8')
