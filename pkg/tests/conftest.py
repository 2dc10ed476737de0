"""Shared fixtures for pipeline-doctor tests."""

from pathlib import Path
from typing import Callable, Generator

import pytest

from pipeline_doctor.harness import ScenarioRegistry
from pipeline_doctor.localizer import EvaluationTrace
from pipeline_doctor.search_space import (
    Categorical,
    Choice,
    FloatRange,
    OperatorSpec,
    PipelineInstance,
    PlannedPipeline,
    build_pipeline,
)
from pipeline_doctor.traces import parse_param_key

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def temp_config_file(tmp_path: Path) -> Generator[Path, None, None]:
    """Create a temporary config file for testing."""
    config_file = tmp_path / "test_config.yaml"
    config_file.write_text("""
localizer:
  max_depth: 3
  template_order: [cmp, eq, neq, absent, present, cmp2]

remediation:
  n_splits: 7

harness:
  n_evals: 12
  seeds: [11, 12]
  report_format: csv
""")
    yield config_file


@pytest.fixture
def make_instance() -> Callable[..., PipelineInstance]:
    """Build an instance from ``Operator.hyperparam`` keyed bindings."""

    def build(inst_id: str, ok: bool, params: dict, loss=None) -> PipelineInstance:
        return PipelineInstance(
            inst_id, ok, {parse_param_key(k): v for k, v in params.items()}, loss)

    return build


@pytest.fixture
def make_trace(make_instance) -> Callable[..., EvaluationTrace]:
    """Build a trace from ``(id, ok, params)`` rows."""

    def build(pipeline: PlannedPipeline, rows) -> EvaluationTrace:
        return EvaluationTrace(pipeline, tuple(make_instance(*row) for row in rows))

    return build


@pytest.fixture
def imputer_pipeline() -> PlannedPipeline:
    return ScenarioRegistry.create('imputer-categorical').pipeline()


@pytest.fixture
def knn_pipeline() -> PlannedPipeline:
    return ScenarioRegistry.create('knn-small-data').pipeline()


@pytest.fixture
def pca_whiten_pipeline() -> PlannedPipeline:
    return ScenarioRegistry.create('pca-whiten-arpack').pipeline()


@pytest.fixture
def pca_selectkbest_pipeline() -> PlannedPipeline:
    return ScenarioRegistry.create('pca-selectkbest').pipeline()


@pytest.fixture
def scaler_encoder_pipeline() -> PlannedPipeline:
    return ScenarioRegistry.create('scaler-encoder').pipeline()


@pytest.fixture
def encoder_pair_pipeline() -> PlannedPipeline:
    """``(OneHotEncoder | OrdinalEncoder) >> OneHotEncoder#2``."""
    return build_pipeline([
        Choice((
            OperatorSpec('OneHotEncoder', {'handle_unknown': Categorical(('ignore', 'error'))}),
            OperatorSpec('OrdinalEncoder'),
        )),
        OperatorSpec('OneHotEncoder', {'drop': Categorical(('first', 'if_binary'))}),
    ])


@pytest.fixture
def knn_trace(make_trace, knn_pipeline) -> EvaluationTrace:
    return make_trace(knn_pipeline, [
        ('e0', True, {'KNeighborsClassifier.n_neighbors': 3, 'KNeighborsClassifier.weights': 'uniform'}),
        ('e1', True, {'KNeighborsClassifier.n_neighbors': 8, 'KNeighborsClassifier.weights': 'distance'}),
        ('e2', False, {'KNeighborsClassifier.n_neighbors': 20, 'KNeighborsClassifier.weights': 'uniform'}),
        ('e3', False, {'KNeighborsClassifier.n_neighbors': 40, 'KNeighborsClassifier.weights': 'distance'}),
    ])


@pytest.fixture
def pca_whiten_trace(make_trace, pca_whiten_pipeline) -> EvaluationTrace:
    return make_trace(pca_whiten_pipeline, [
        ('f0', True, {'PCA.whiten': True, 'PCA.svd_solver': 'full'}),
        ('f1', False, {'PCA.whiten': True, 'PCA.svd_solver': 'arpack'}),
        ('f2', True, {'PCA.whiten': False, 'PCA.svd_solver': 'full'}),
        ('f3', True, {'PCA.whiten': False, 'PCA.svd_solver': 'arpack'}),
    ])


@pytest.fixture
def pca_selectkbest_trace(make_trace, pca_selectkbest_pipeline) -> EvaluationTrace:
    return make_trace(pca_selectkbest_pipeline, [
        ('g0', True, {'PCA.n_components': 10, 'SelectKBest.k': 20}),
        ('g1', True, {'PCA.n_components': 30, 'SelectKBest.k': 40}),
        ('g2', False, {'PCA.n_components': 20, 'SelectKBest.k': 10}),
        ('g3', False, {'PCA.n_components': 35, 'SelectKBest.k': 30}),
    ])


@pytest.fixture
def scaler_encoder_trace(make_trace, scaler_encoder_pipeline) -> EvaluationTrace:
    return make_trace(scaler_encoder_pipeline, [
        ('k0', False, {'OneHotEncoder.handle_unknown': 'ignore', 'StandardScaler.with_mean': True}),
        ('k1', True, {'OneHotEncoder.handle_unknown': 'ignore', 'StandardScaler.with_mean': False}),
        ('k2', True, {'OrdinalEncoder.handle_unknown': 'ignore', 'StandardScaler.with_mean': True}),
        ('k3', True, {'OrdinalEncoder.handle_unknown': 'ignore', 'StandardScaler.with_mean': False}),
    ])


@pytest.fixture
def logistic_c_pipeline() -> PlannedPipeline:
    return build_pipeline([
        OperatorSpec('LogisticRegression', {
            'C': FloatRange(0.01, 10),
            'solver': Categorical(('lbfgs', 'saga')),
        }),
    ])


@pytest.fixture
def logistic_c_trace(make_trace, logistic_c_pipeline) -> EvaluationTrace:
    """A single failure at an interior float value."""
    return make_trace(logistic_c_pipeline, [
        ('c0', True, {'LogisticRegression.C': 1.0, 'LogisticRegression.solver': 'lbfgs'}),
        ('c1', True, {'LogisticRegression.C': 3.0, 'LogisticRegression.solver': 'saga'}),
        ('c2', False, {'LogisticRegression.C': 7.5, 'LogisticRegression.solver': 'lbfgs'}),
    ])
