"""Tests for pipeline remediation."""

import pytest

from pipeline_doctor.constraints import (
    Absent,
    And,
    CmpConst,
    CmpParam,
    Eq,
    Ite,
    LitFalse,
    LitTrue,
    Neq,
    Present,
    eval_constraint,
)
from pipeline_doctor.errors import (
    AllBucketsEmpty,
    EmptyDomain,
    LitFalseConstraint,
    SchemaError,
    UnrepresentableRestriction,
    UnsatisfiableBranch,
)
from pipeline_doctor.harness import ScenarioRegistry
from pipeline_doctor.harness.runner import label
from pipeline_doctor.harness.sampler import sample
from pipeline_doctor.localizer import EvaluationTrace, solve
from pipeline_doctor.remediator import make_comparison, remediate
from pipeline_doctor.search_space import (
    Anything,
    Categorical,
    Choice,
    Constant,
    FloatRange,
    IntRange,
    OperatorSpec,
    Seq,
    build_pipeline,
    contains,
)

N_LE_K = CmpParam('PCA', 'n_components', '<=', 'SelectKBest', 'k')
N_LT_K = CmpParam('PCA', 'n_components', '<', 'SelectKBest', 'k')


def pairs(pipeline):
    """(n_components domain, k domain) for every alternative of the leading choice."""
    return [
        (alt.steps[0].hyperparams['n_components'], alt.steps[1].hyperparams['k'])
        for alt in pipeline.steps[0].alternatives
    ]


class TestAtoms:
    def test_eq_restricts_domain(self, imputer_pipeline):
        result = remediate(imputer_pipeline, Eq('SimpleImputer', 'strategy', 'most_frequent'))
        imputer = result.remediated.steps[0]

        assert imputer.hyperparams['strategy'] == Constant('most_frequent')
        assert result.remediated.steps[1:] == imputer_pipeline.steps[1:]
        assert [n.rule for n in result.notes] == ['customize']

    def test_true_is_identity(self, imputer_pipeline):
        result = remediate(imputer_pipeline, LitTrue())
        assert result.remediated == imputer_pipeline
        assert result.notes == ()

    def test_false_has_no_remedy(self, imputer_pipeline):
        with pytest.raises(LitFalseConstraint):
            remediate(imputer_pipeline, LitFalse())

    def test_empty_domain(self, knn_pipeline):
        with pytest.raises(EmptyDomain):
            remediate(knn_pipeline, CmpConst('KNeighborsClassifier', 'n_neighbors', '>=', 80))

    def test_threshold(self, knn_pipeline):
        result = remediate(knn_pipeline, CmpConst('KNeighborsClassifier', 'n_neighbors', '<=', 8))
        assert result.remediated.steps[0].hyperparams['n_neighbors'] == IntRange(1, 8)

    def test_present_forces_choice(self, scaler_encoder_pipeline):
        result = remediate(scaler_encoder_pipeline, Present('OrdinalEncoder', 'handle_unknown'))
        assert result.remediated.steps[0].name == 'OrdinalEncoder'

    def test_absent_removes_alternative(self, scaler_encoder_pipeline):
        result = remediate(scaler_encoder_pipeline, Absent('OneHotEncoder', 'handle_unknown'))
        assert result.remediated.steps[0].name == 'OrdinalEncoder'

    def test_absent_of_mandatory_operator(self, imputer_pipeline):
        with pytest.raises(UnsatisfiableBranch):
            remediate(imputer_pipeline, Absent('SimpleImputer', 'strategy'))

    def test_value_atom_forces_its_operator(self, scaler_encoder_pipeline):
        result = remediate(scaler_encoder_pipeline, Eq('OneHotEncoder', 'handle_unknown', 'ignore'))
        assert result.remediated.steps[0].name == 'OneHotEncoder'
        assert [n.rule for n in result.notes] == ['require', 'customize']

    def test_conjunction_threads_pipeline(self, pca_whiten_pipeline):
        c = And((Eq('PCA', 'whiten', True), Neq('PCA', 'svd_solver', 'arpack')))
        pca = remediate(pca_whiten_pipeline, c).remediated.steps[0]
        assert pca.hyperparams == {'whiten': Constant(True), 'svd_solver': Constant('full')}

    def test_unknown_references(self, imputer_pipeline):
        with pytest.raises(SchemaError, match="unknown operator"):
            remediate(imputer_pipeline, Eq('PCA', 'whiten', True))
        with pytest.raises(SchemaError, match="unknown hyperparameter"):
            remediate(imputer_pipeline, Eq('SimpleImputer', 'fill_value', 0))

    def test_observed_values_bound_unconstrained_domains(self):
        pipeline = build_pipeline([OperatorSpec('LogisticRegression', {'max_iter': Anything()})])
        c = CmpConst('LogisticRegression', 'max_iter', '>=', 100)

        with pytest.raises(UnrepresentableRestriction):
            remediate(pipeline, c)
        result = remediate(pipeline, c, observed={('LogisticRegression', 'max_iter'): [10, 100, 1000]})
        assert result.remediated.steps[0].hyperparams['max_iter'] == IntRange(100, 1000)

    def test_neq_inside_float_range_splits_operator(self, logistic_c_pipeline, logistic_c_trace):
        c = solve(logistic_c_trace)
        assert c == Neq('LogisticRegression', 'C', 7.5)

        result = remediate(logistic_c_pipeline, c, observed=logistic_c_trace.observed_values())

        (choice,) = result.remediated.steps
        assert [alt.name for alt in choice.alternatives] == ['LogisticRegression'] * 2
        assert [alt.hyperparams['C'] for alt in choice.alternatives] == [
            FloatRange(0.01, 7.5, open_hi=True), FloatRange(7.5, 10, open_lo=True)]
        assert all(contains(result.remediated, inst) for inst in logistic_c_trace.successes)
        assert not any(contains(result.remediated, inst) for inst in logistic_c_trace.failures)
        for inst in sample(result.remediated, 200, seed=3):
            assert eval_constraint(c, inst)

    def test_neq_on_unconstrained_domain_uses_observed(self):
        pipeline = build_pipeline([OperatorSpec('LogisticRegression', {'max_iter': Anything()})])
        c = Neq('LogisticRegression', 'max_iter', 100)

        result = remediate(pipeline, c, observed={('LogisticRegression', 'max_iter'): [10, 100, 1000]})

        (choice,) = result.remediated.steps
        assert [alt.hyperparams['max_iter'] for alt in choice.alternatives] == [
            IntRange(10, 99), IntRange(101, 1000)]

    def test_later_conjunct_sees_both_pieces(self, logistic_c_pipeline):
        c = And((Neq('LogisticRegression', 'C', 5.0), CmpConst('LogisticRegression', 'C', '<=', 8.0)))
        (choice,) = remediate(logistic_c_pipeline, c).remediated.steps
        assert [alt.hyperparams['C'] for alt in choice.alternatives] == [
            FloatRange(0.01, 5.0, open_hi=True), FloatRange(5.0, 8.0, open_lo=True)]

    def test_numbered_operator_survives_removal(self, encoder_pair_pipeline):
        c = And((Absent('OneHotEncoder', 'handle_unknown'), Eq('OneHotEncoder#2', 'drop', 'first')))

        ordinal, one_hot = remediate(encoder_pair_pipeline, c).remediated.steps

        assert ordinal.name == 'OrdinalEncoder'
        assert one_hot.name == 'OneHotEncoder#2'
        assert one_hot.hyperparams['drop'] == Constant('first')


class TestBranches:
    def test_choice_dependent_tree(self, scaler_encoder_pipeline):
        """The with_mean=False branch keeps both encoders; the other needs OrdinalEncoder."""
        c = Ite(Eq('StandardScaler', 'with_mean', False), LitTrue(),
                Present('OrdinalEncoder', 'handle_unknown'))
        result = remediate(scaler_encoder_pipeline, c)

        (choice,) = result.remediated.steps
        assert isinstance(choice, Choice)
        keep_both, ordinal_only = choice.alternatives
        assert isinstance(keep_both.steps[0], Choice)
        assert keep_both.steps[1].hyperparams['with_mean'] == Constant(False)
        assert ordinal_only.steps[0].name == 'OrdinalEncoder'
        assert ordinal_only.steps[1].hyperparams['with_mean'] == Constant(True)
        assert 'drop-branch' in [n.rule for n in result.notes]

    def test_localized_tree(self, scaler_encoder_pipeline, scaler_encoder_trace):
        c = solve(scaler_encoder_trace)
        result = remediate(scaler_encoder_pipeline, c)

        (choice,) = result.remediated.steps
        one_hot, ordinal = choice.alternatives
        assert one_hot.steps[0].name == 'OneHotEncoder'
        assert one_hot.steps[1].hyperparams['with_mean'] == Constant(False)
        assert ordinal.steps[0].name == 'OrdinalEncoder'
        assert ordinal.steps[1].hyperparams['with_mean'] == Categorical((True, False))
        assert [n.rule for n in result.notes] == [
            'branch', 'require', 'customize', 'customize', 'drop-branch', 'branch', 'exclude']

    def test_every_remediated_instance_satisfies_the_constraint(self, scaler_encoder_pipeline,
                                                                scaler_encoder_trace):
        c = solve(scaler_encoder_trace)
        remediated = remediate(scaler_encoder_pipeline, c).remediated
        for inst in sample(remediated, 40, seed=3):
            assert eval_constraint(c, inst)

    def test_successes_stay_in_the_space(self, scaler_encoder_pipeline, scaler_encoder_trace):
        remediated = remediate(scaler_encoder_pipeline, solve(scaler_encoder_trace)).remediated
        for inst in scaler_encoder_trace.successes:
            assert contains(remediated, inst)
        for inst in scaler_encoder_trace.failures:
            assert not contains(remediated, inst)

    def test_single_surviving_branch_is_unwrapped(self, pca_whiten_pipeline):
        c = Ite(Eq('PCA', 'whiten', True), Eq('PCA', 'svd_solver', 'full'), LitFalse())
        result = remediate(pca_whiten_pipeline, c)
        assert result.remediated.steps[0].hyperparams == {
            'whiten': Constant(True), 'svd_solver': Constant('full')}

    def test_no_branch_survives(self, pca_whiten_pipeline):
        c = Ite(Eq('PCA', 'whiten', True), LitFalse(), LitFalse())
        with pytest.raises(UnsatisfiableBranch):
            remediate(pca_whiten_pipeline, c)

    def test_remediate_is_idempotent_on_a_tree(self, scaler_encoder_pipeline, scaler_encoder_trace):
        c = solve(scaler_encoder_trace)
        assert isinstance(c, Ite)

        once = remediate(scaler_encoder_pipeline, c).remediated
        assert remediate(once, c).remediated == once


class TestSoundness:
    """Every instance of a remediated pipeline satisfies the constraint and was possible before."""

    @pytest.mark.parametrize('name', ScenarioRegistry.list_available())
    def test_localized_remediation_is_sound(self, name):
        scenario = ScenarioRegistry.create(name)
        pipeline = scenario.pipeline()
        trace = EvaluationTrace(pipeline, tuple(label(sample(pipeline, 20, seed=1), scenario.oracle)))
        c = solve(trace)

        remediated = remediate(pipeline, c, observed=trace.observed_values()).remediated

        for inst in sample(remediated, 1000, seed=2):
            assert eval_constraint(c, inst), inst
            assert contains(pipeline, inst), inst


class TestMakeComparison:
    def test_five_way_split(self, pca_selectkbest_pipeline):
        result = make_comparison(pca_selectkbest_pipeline, N_LE_K, n_splits=5)

        assert pairs(result) == [
            (IntRange(1, 5), IntRange(5, 15)),
            (IntRange(1, 16), IntRange(16, 25)),
            (IntRange(1, 26), IntRange(26, 35)),
            (IntRange(1, 36), IntRange(36, 45)),
            (IntRange(1, 40), IntRange(46, 55)),
        ]
        assert result.steps[1] == OperatorSpec('LogisticRegression')

    def test_strict_caps(self, pca_selectkbest_pipeline):
        caps = [n.hi for n, _ in pairs(make_comparison(pca_selectkbest_pipeline, N_LT_K, n_splits=5))]
        assert caps == [4, 15, 25, 35, 40]

    def test_single_split(self, pca_selectkbest_pipeline):
        result = make_comparison(pca_selectkbest_pipeline, N_LE_K, n_splits=1)
        assert result.steps[0].hyperparams['n_components'] == IntRange(1, 5)
        assert result.steps[1].hyperparams['k'] == IntRange(5, 55)

    def test_idempotent(self, pca_selectkbest_pipeline):
        once = make_comparison(pca_selectkbest_pipeline, N_LE_K, n_splits=5)
        assert make_comparison(once, N_LE_K, n_splits=5) == once

    def test_infeasible(self):
        pipeline = build_pipeline([
            OperatorSpec('PCA', {'n_components': IntRange(30, 40)}),
            OperatorSpec('SelectKBest', {'k': IntRange(1, 10)}),
        ])
        with pytest.raises(AllBucketsEmpty):
            make_comparison(pipeline, N_LE_K)

    def test_remediated_instances_satisfy_comparison(self, pca_selectkbest_pipeline):
        remediated = remediate(pca_selectkbest_pipeline, N_LE_K).remediated
        for inst in sample(remediated, 60, seed=7):
            assert eval_constraint(N_LE_K, inst)

    def test_comparison_inside_a_choice(self):
        pca = OperatorSpec('PCA', {'n_components': IntRange(1, 40)})
        select = OperatorSpec('SelectKBest', {'k': IntRange(5, 55)})
        pipeline = build_pipeline([Choice((
            Seq((pca, select, OperatorSpec('Ridge'))),
            Seq((pca, select, OperatorSpec('Lasso'))),
        ))])

        result = make_comparison(pipeline, N_LE_K, n_splits=2)

        (choice,) = result.steps
        for alt, model in zip(choice.alternatives, ['Ridge', 'Lasso']):
            split, last = alt.steps
            assert last.name == model
            assert [(a.steps[0].hyperparams['n_components'], a.steps[1].hyperparams['k'])
                    for a in split.alternatives] == [
                (IntRange(1, 5), IntRange(5, 30)),
                (IntRange(1, 31), IntRange(31, 55)),
            ]

    def test_operator_on_one_branch_is_required_first(self):
        pipeline = build_pipeline([Choice((
            Seq((OperatorSpec('PCA', {'n_components': IntRange(1, 40)}),
                 OperatorSpec('SelectKBest', {'k': IntRange(5, 55)}))),
            OperatorSpec('Nystroem'),
        )), OperatorSpec('LogisticRegression')])

        result = make_comparison(pipeline, N_LE_K, n_splits=2)

        assert 'Nystroem' not in result.operator_names()
        assert len(result.steps[0].alternatives) == 2


class TestRecord:
    def test_remediation_json(self, imputer_pipeline):
        data = remediate(imputer_pipeline, Eq('SimpleImputer', 'strategy', 'most_frequent')).to_json()

        assert data['constraint'] == {'eq': ['SimpleImputer', 'strategy', 'most_frequent']}
        assert data['notes'] == [{
            'rule': 'customize',
            'target': 'SimpleImputer.strategy',
            'detail': 'SimpleImputer.strategy == "most_frequent"',
        }]
        assert data['remediated']['steps'][0]['op']['hyperparams']['strategy'] == {'const': 'most_frequent'}
