"""Tests for the constraint language."""

import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

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
    complement_atom,
    conjoin,
    constraint_from_json,
    constraint_to_json,
    depth,
    eval_constraint,
    format_constraint,
    negate_atom,
    referenced_keys,
)
from pipeline_doctor.errors import ConstraintParseError
from pipeline_doctor.search_space import PipelineInstance

OPS = st.sampled_from(['PCA', 'SelectKBest', 'OneHotEncoder#2'])
HPS = st.sampled_from(['k', 'n_components', 'handle_unknown'])
LITERALS = st.one_of(
    st.booleans(),
    st.integers(-1000, 1000),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(alphabet='abc_ ', max_size=6),
)
NUMBERS = st.one_of(st.integers(-1000, 1000), st.floats(allow_nan=False, allow_infinity=False))

VALUE_ATOMS = st.one_of(
    st.builds(Eq, OPS, HPS, LITERALS),
    st.builds(Neq, OPS, HPS, LITERALS),
    st.builds(Present, OPS, HPS),
    st.builds(Absent, OPS, HPS),
    st.builds(CmpConst, OPS, HPS, st.sampled_from(['<=', '<', '>=', '>']), NUMBERS),
    st.builds(CmpParam, OPS, HPS, st.sampled_from(['<=', '<']), OPS, HPS),
)
ATOMS = st.one_of(VALUE_ATOMS, st.just(LitTrue()), st.just(LitFalse()))


def trees(max_depth: int) -> st.SearchStrategy:
    """Constraints with if-then-else nesting up to ``max_depth``."""
    if max_depth == 0:
        sub = ATOMS
    else:
        sub = st.one_of(ATOMS, st.builds(Ite, ATOMS, trees(max_depth - 1), trees(max_depth - 1)))
    conjunctions = st.lists(sub.filter(lambda c: not isinstance(c, LitTrue)), min_size=2, max_size=3) \
        .map(lambda parts: And(tuple(parts)))
    return st.one_of(sub, conjunctions)


# Localized tree for the encoder/scaler pipeline as printed in reports.
ENCODER_TREE = Ite(
    Eq('StandardScaler', 'with_mean', False),
    LitTrue(),
    Eq('OrdinalEncoder', 'handle_unknown', 'ignore'),
)


def instance(**bindings) -> PipelineInstance:
    return PipelineInstance('i', True, {tuple(k.split('__')): v for k, v in bindings.items()})


class TestEvaluation:
    def test_then_branch(self):
        inst = instance(StandardScaler__with_mean=False, OneHotEncoder__handle_unknown='ignore')
        assert eval_constraint(ENCODER_TREE, inst)

    def test_else_branch_without_ordinal_bindings(self):
        inst = instance(StandardScaler__with_mean=True, OneHotEncoder__handle_unknown='ignore')
        assert not eval_constraint(ENCODER_TREE, inst)

    def test_true_holds_everywhere(self):
        assert eval_constraint(LitTrue(), instance())

    def test_threshold(self):
        atom = CmpConst('KNeighborsClassifier', 'n_neighbors', '<=', 16)
        assert not eval_constraint(atom, instance(KNeighborsClassifier__n_neighbors=20))
        assert eval_constraint(atom, instance(KNeighborsClassifier__n_neighbors=16))

    def test_unbound_value_atoms_are_false(self):
        empty = instance()
        assert not eval_constraint(Eq('A', 'x', 1), empty)
        assert not eval_constraint(Neq('A', 'x', 1), empty)
        assert not eval_constraint(CmpConst('A', 'x', '>=', 0), empty)
        assert eval_constraint(Absent('A', 'x'), empty)

    def test_parameter_comparison(self):
        atom = CmpParam('PCA', 'n_components', '<=', 'SelectKBest', 'k')
        assert eval_constraint(atom, instance(PCA__n_components=10, SelectKBest__k=10))
        assert not eval_constraint(atom, instance(PCA__n_components=11, SelectKBest__k=10))
        assert not eval_constraint(atom, instance(PCA__n_components=11))

    def test_boolean_is_not_one(self):
        assert not eval_constraint(Eq('A', 'x', 1), instance(A__x=True))


class TestNegation:
    @pytest.mark.parametrize('atom, negated', [
        (Eq('StandardScaler', 'with_mean', False), Neq('StandardScaler', 'with_mean', False)),
        (CmpConst('K', 'n', '<=', 16), CmpConst('K', 'n', '>', 16)),
        (CmpConst('K', 'n', '<', 16), CmpConst('K', 'n', '>=', 16)),
        (Absent('OrdinalEncoder', 'handle_unknown'), Present('OrdinalEncoder', 'handle_unknown')),
        (CmpParam('P', 'a', '<=', 'S', 'b'), CmpParam('S', 'b', '<', 'P', 'a')),
        (LitTrue(), LitFalse()),
    ])
    def test_negate_atom(self, atom, negated):
        assert negate_atom(atom) == negated
        assert negate_atom(negated) == atom

    def test_complement_covers_absence(self):
        assert complement_atom(Eq('A', 'x', 1)) == [Neq('A', 'x', 1), Absent('A', 'x')]
        assert complement_atom(CmpParam('P', 'a', '<', 'S', 'b')) == [
            CmpParam('S', 'b', '<=', 'P', 'a'), Absent('P', 'a'), Absent('S', 'b')]
        assert complement_atom(Present('A', 'x')) == [Absent('A', 'x')]

    @given(
        value=st.one_of(st.none(), st.integers(-5, 5)),
        limit=st.integers(-5, 5),
        cmp=st.sampled_from(['<=', '<', '>=', '>']),
    )
    def test_complement_is_exact(self, value, limit, cmp):
        inst = instance() if value is None else instance(A__x=value)
        atom = CmpConst('A', 'x', cmp, limit)
        disjuncts = complement_atom(atom)
        assert eval_constraint(atom, inst) != any(eval_constraint(d, inst) for d in disjuncts)


class TestStructure:
    def test_conjoin_flattens_and_drops_true(self):
        a, b, c = Eq('A', 'x', 1), Eq('B', 'y', 2), Present('C', 'z')
        assert conjoin(a, LitTrue(), And((b, c))) == And((a, b, c))

    def test_conjoin_degenerate(self):
        assert conjoin() == LitTrue()
        assert conjoin(LitTrue(), Eq('A', 'x', 1)) == Eq('A', 'x', 1)
        assert conjoin(Eq('A', 'x', 1), LitFalse()) == LitFalse()

    def test_and_must_be_flat(self):
        with pytest.raises(ConstraintParseError):
            And((Eq('A', 'x', 1), And((Eq('B', 'y', 1), Eq('C', 'z', 1)))))

    def test_ite_condition_must_be_atomic(self):
        with pytest.raises(ConstraintParseError):
            Ite(And((Eq('A', 'x', 1), Eq('B', 'y', 1))), LitTrue(), LitFalse())

    def test_referenced_keys_and_depth(self):
        assert referenced_keys(ENCODER_TREE) == {
            ('StandardScaler', 'with_mean'), ('OrdinalEncoder', 'handle_unknown')}
        assert depth(ENCODER_TREE) == 1
        assert depth(Ite(Eq('A', 'x', 1), ENCODER_TREE, LitTrue())) == 2

    def test_format_constraint(self):
        assert format_constraint(ENCODER_TREE) == (
            'if StandardScaler.with_mean == False then (true) '
            'else (OrdinalEncoder.handle_unknown == "ignore")')
        assert format_constraint(CmpParam('PCA', 'n_components', '<=', 'SelectKBest', 'k')) \
            == 'PCA.n_components <= SelectKBest.k'


class TestConstraintJson:
    def test_atom(self):
        data = {'eq': ['SimpleImputer', 'strategy', 'most_frequent']}
        assert constraint_from_json(data) == Eq('SimpleImputer', 'strategy', 'most_frequent')
        assert constraint_to_json(constraint_from_json(data)) == data

    def test_tree_round_trip(self):
        assert constraint_from_json(constraint_to_json(ENCODER_TREE)) == ENCODER_TREE

    def test_literals(self):
        assert constraint_from_json(True) == LitTrue()
        assert constraint_to_json(LitFalse()) is False

    def test_non_atomic_condition(self):
        data = {'ite': {
            'if': {'and': [{'present': ['A', 'x']}, {'present': ['B', 'y']}]},
            'then': True,
            'else': False,
        }}
        with pytest.raises(ConstraintParseError, match=r"\$\.ite\.if"):
            constraint_from_json(data)

    def test_comparison_operator_for_parameters(self):
        with pytest.raises(ConstraintParseError, match="cmp2"):
            constraint_from_json({'cmp2': ['P', 'a', '>=', 'S', 'b']})

    @pytest.mark.parametrize('data', [
        {'eq': ['A', 'x']},
        {'eq': ['A', '', 1]},
        {'cmp': ['A', 'x', '==', 1]},
        {'eq': ['A', 'x', [1]]},
        {'or': []},
        'true',
    ])
    def test_malformed(self, data):
        with pytest.raises(ConstraintParseError):
            constraint_from_json(data)

    def test_conjunction_with_false_keeps_structure(self):
        c = And((Eq('A', 'x', 1), LitFalse()))
        assert constraint_to_json(c) == {'and': [{'eq': ['A', 'x', 1]}, False]}
        assert constraint_from_json(constraint_to_json(c)) == c

    @pytest.mark.parametrize('parts', [
        [{'present': ['A', 'x']}, True],
        [{'present': ['A', 'x']}, {'and': [{'present': ['B', 'y']}, {'present': ['C', 'z']}]}],
    ])
    def test_conjunction_must_be_flat(self, parts):
        with pytest.raises(ConstraintParseError, match=r"\$\.and"):
            constraint_from_json({'and': parts})

    @settings(max_examples=200)
    @given(c=trees(3))
    def test_generated_trees_round_trip(self, c):
        data = json.loads(json.dumps(constraint_to_json(c)))
        assert constraint_from_json(data) == c
        assert constraint_to_json(constraint_from_json(data)) == data


class TestNegationByEnumeration:
    """With every referenced key bound, negation flips the truth value."""

    NUMBERS = [-1, 0, 1, 2, 2.5]

    @pytest.mark.parametrize('atom', [
        Eq('A', 'x', 1),
        Eq('A', 'x', 'a'),
        Neq('A', 'x', True),
        Present('A', 'x'),
        Absent('B', 'y'),
        CmpConst('A', 'x', '<=', 1),
        CmpConst('A', 'x', '<', 2),
        CmpConst('A', 'x', '>=', 0),
        CmpConst('A', 'x', '>', 2.5),
        CmpParam('A', 'x', '<=', 'B', 'y'),
        CmpParam('A', 'x', '<', 'B', 'y'),
        LitTrue(),
    ])
    def test_negation_flips(self, atom):
        values = list(self.NUMBERS)
        if not isinstance(atom, (CmpConst, CmpParam)):
            values += [True, False, 'a']
        for x, y in itertools.product(values, repeat=2):
            inst = instance(A__x=x, B__y=y)
            assert eval_constraint(negate_atom(atom), inst) != eval_constraint(atom, inst)
