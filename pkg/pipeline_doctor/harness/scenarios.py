"""Built-in scenarios.

Each models a failure cause commonly hit when tuning scikit-learn style
pipelines. Hyperparameter domains are invented where the cause itself does
not pin them down.
"""

from ..search_space import (
    Categorical,
    Choice,
    IntRange,
    OperatorSpec,
    PipelineInstance,
    PlannedPipeline,
    build_pipeline,
)
from .base import Scenario, ScenarioRegistry

LOGISTIC_REGRESSION = OperatorSpec('LogisticRegression')


class ImputerCategorical(Scenario):
    name = 'imputer-categorical'
    description = (
        "Mean and median imputation break on string-valued columns; only "
        "most_frequent works before one-hot encoding.")
    tag = 'value'
    example = 'intro'

    def pipeline(self) -> PlannedPipeline:
        return build_pipeline([
            OperatorSpec('SimpleImputer', {
                'strategy': Categorical(('mean', 'median', 'most_frequent')),
            }),
            OperatorSpec('OneHotEncoder', fixed={'handle_unknown': 'ignore'}),
            OperatorSpec('LogisticRegression', {
                'solver': Categorical(('liblinear', 'lbfgs', 'saga')),
            }),
        ])

    def oracle(self, inst: PipelineInstance) -> bool:
        return inst.get('SimpleImputer', 'strategy') == 'most_frequent'


class KnnSmallData(Scenario):
    name = 'knn-small-data'
    description = (
        "A cross-validation fold holds 16 rows, so asking for more neighbours "
        "than that fails.")
    tag = 'threshold'
    example = 'e'

    # Rows per training fold.
    FOLD_SIZE = 16

    def pipeline(self) -> PlannedPipeline:
        return build_pipeline([
            OperatorSpec('KNeighborsClassifier', {
                'n_neighbors': IntRange(1, 50),
                'weights': Categorical(('uniform', 'distance')),
            }),
        ])

    def oracle(self, inst: PipelineInstance) -> bool:
        return inst.get('KNeighborsClassifier', 'n_neighbors') <= self.FOLD_SIZE


class PcaWhitenArpack(Scenario):
    name = 'pca-whiten-arpack'
    description = "Whitening combined with the arpack SVD solver breaks PCA."
    tag = 'stacked'
    example = 'f'

    def pipeline(self) -> PlannedPipeline:
        return build_pipeline([
            OperatorSpec('PCA', {
                'whiten': Categorical((True, False)),
                'svd_solver': Categorical(('full', 'arpack')),
            }),
            LOGISTIC_REGRESSION,
        ])

    def oracle(self, inst: PipelineInstance) -> bool:
        return not (inst.get('PCA', 'whiten') is True and inst.get('PCA', 'svd_solver') == 'arpack')


class PcaSelectKBest(Scenario):
    name = 'pca-selectkbest'
    description = "SelectKBest cannot keep more features than PCA produced."
    tag = 'comparison'
    example = 'g'

    def pipeline(self) -> PlannedPipeline:
        return build_pipeline([
            OperatorSpec('PCA', {'n_components': IntRange(1, 40)}),
            OperatorSpec('SelectKBest', {'k': IntRange(5, 55)}),
            LOGISTIC_REGRESSION,
        ])

    def oracle(self, inst: PipelineInstance) -> bool:
        return inst.get('PCA', 'n_components') <= inst.get('SelectKBest', 'k')


class ScalerEncoder(Scenario):
    name = 'scaler-encoder'
    description = (
        "Centering the sparse output of OneHotEncoder fails; ordinal encoding "
        "or with_mean=False both work.")
    tag = 'stacked-choice'
    example = 'k'

    def pipeline(self) -> PlannedPipeline:
        return build_pipeline([
            Choice((
                OperatorSpec('OneHotEncoder', fixed={'handle_unknown': 'ignore'}),
                OperatorSpec('OrdinalEncoder', fixed={'handle_unknown': 'ignore'}),
            )),
            OperatorSpec('StandardScaler', {'with_mean': Categorical((True, False))}),
            LOGISTIC_REGRESSION,
        ])

    def oracle(self, inst: PipelineInstance) -> bool:
        return not (inst.has('OneHotEncoder', 'handle_unknown')
                    and inst.get('StandardScaler', 'with_mean') is True)


BUILTIN_SCENARIOS = (ImputerCategorical, KnnSmallData, PcaWhitenArpack, PcaSelectKBest, ScalerEncoder)

for _scenario in BUILTIN_SCENARIOS:
    ScenarioRegistry.register(_scenario.name, _scenario)
