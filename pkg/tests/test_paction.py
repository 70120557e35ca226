"""Tests for abelian p-groups and automorphism actions."""
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from cartankit.core.errors import PreconditionError, ValidationError
from cartankit.core.exactlin import IntMatrix
from cartankit.core.paction import (AbelianPGroup, ActionGroup, ActionMatrix, Subgroup, commutator_part,
                                    companion_matrix, coprime_split_check, field_model, fixed_points, frattini,
                                    frobenius_matrix, general_linear_generators, has_free_action,
                                    invariant_transversal, omega, orbits, regorb_hypothesis,
                                    regular_orbit_search, regular_orbit_via_transversal, stabilizer)


def test_group_basics():
    group = AbelianPGroup(2, (3, 1))
    assert group.order == 16
    assert group.moduli == (8, 2)
    assert str(group) == "Z8 ⊕ Z2"
    assert group.element_order((2, 0)) == 4
    assert group.element_order((0, 1)) == 2
    assert [group.element(i) for i in range(3)] == [(0, 0), (1, 0), (2, 0)]
    assert group.element(8) == (0, 1)
    assert all(group.index(x) == i for i, x in enumerate(group.elements()))


@pytest.mark.parametrize("p, exponents", [(4, (1,)), (2, (1, 2)), (3, (0,))])
def test_invalid_groups(p, exponents):
    with pytest.raises(ValidationError):
        AbelianPGroup(p, exponents)


def test_action_matrix_validation():
    with pytest.raises(ValidationError):
        ActionMatrix.from_matrix(AbelianPGroup.elementary(3, 2), [[0, 0], [0, 1]])
    with pytest.raises(ValidationError):
        ActionMatrix.from_matrix(AbelianPGroup(2, (2, 1)), [[1, 1], [0, 1]])
    with pytest.raises(ValidationError):
        ActionMatrix.from_matrix(AbelianPGroup.elementary(2, 2), [[1, 0, 0], [0, 1, 0]])


@pytest.mark.parametrize("matrices", [
    3, None, [5], [[1, 0]], [[[1, "a"], [0, 1]]], [[[1.5, 0], [0, 1]]], {"action": []},
])
def test_action_shape_is_checked(matrices):
    with pytest.raises(ValidationError):
        ActionGroup.from_matrices(AbelianPGroup.elementary(2, 2), matrices)


def test_element_shape_is_checked():
    group = AbelianPGroup.elementary(2, 2)
    assert group.reduce([3, -1]) == (1, 1)
    for x in (5, [1], [1, 0, 0], "10"):
        with pytest.raises(ValidationError):
            group.reduce(x)


def test_action_words_reproduce_elements(z2sq_gl):
    group, action = z2sq_gl
    assert action.order == 6
    for element, word in zip(action.elements, action.words):
        built = ActionMatrix.identity(group)
        for k in reversed(word):
            built = action.generators[k].compose(built)
        assert built == element


def test_general_linear_group_orders():
    for p, order in [(2, 6), (3, 48)]:
        group = AbelianPGroup.elementary(p, 2)
        assert ActionGroup.from_matrices(group, general_linear_generators(p)).order == order


def test_orbits_of_order_three_on_z4_squared(z4sq_z3):
    group, action = z4sq_z3
    found = orbits(group, action)
    assert len(found) == 6
    assert [o.size for o in found] == [1, 3, 3, 3, 3, 3]
    assert regular_orbit_search(group, action) == (1, 0)
    assert has_free_action(group, action)


def test_full_automorphism_group_of_klein_four(z2sq_gl):
    group, action = z2sq_gl
    found = orbits(group, action)
    assert [(o.representative, o.size, o.stabilizer_order) for o in found] == [((0, 0), 1, 6), ((1, 0), 3, 2)]
    assert regular_orbit_search(group, action) is None
    assert not has_free_action(group, action)
    assert stabilizer(group, action, (1, 0)).order == 2


def test_fixed_points_and_commutator_split():
    group = AbelianPGroup.elementary(3, 2)
    action = ActionGroup.from_matrices(group, [[[1, 0], [0, -1]]])
    assert fixed_points(group, action).sorted_elements() == [(0, 0), (1, 0), (2, 0)]
    assert commutator_part(group, action).sorted_elements() == [(0, 0), (0, 1), (0, 2)]
    split = coprime_split_check(group, action)
    assert split.holds
    assert (split.fixed_order, split.commutator_order, split.intersection_order) == (3, 3, 1)
    assert not has_free_action(group, action)


def test_split_check_needs_coprime_action(z2sq_gl):
    with pytest.raises(PreconditionError):
        coprime_split_check(*z2sq_gl)


def test_omega_and_frattini():
    group = AbelianPGroup(2, (3, 1))
    assert omega(group, 1).order == 4
    assert omega(group, 2).order == 8
    assert frattini(group).order == 4
    assert not regorb_hypothesis(group)
    assert regorb_hypothesis(AbelianPGroup.homocyclic(2, 2, 2))


def test_subgroup_generation():
    group = AbelianPGroup.homocyclic(2, 2, 2)
    sub = Subgroup.generated_by(group, [(1, 0), (2, 0), (0, 2)])
    assert sub.order == 8
    assert sub.generators == ((1, 0), (0, 2))
    assert (3, 2) in sub
    assert sub.intersection(omega(group, 1)).order == 4


def test_invariant_transversal(z4sq_z3):
    group, action = z4sq_z3
    bijection = invariant_transversal(group, action)
    assert len(bijection.inverse()) == group.order
    for a in action.elements:
        for x in group.elements():
            u, v = bijection(x)
            assert bijection(a.apply(x)) == (a.apply(u), a.apply(v))
    x = regular_orbit_via_transversal(group, action)
    assert stabilizer(group, action, x).order == 1


def test_transversal_preconditions(z2sq_z3):
    with pytest.raises(PreconditionError):
        invariant_transversal(*z2sq_z3)
    group = AbelianPGroup.homocyclic(2, 2, 2)
    swap = ActionGroup.from_matrices(group, [[[0, 1], [1, 0]]])
    with pytest.raises(PreconditionError):
        invariant_transversal(group, swap)


def test_companion_and_frobenius_matrices():
    assert companion_matrix([1, 1, 1], 2) == IntMatrix.from_rows([[0, 1], [1, 1]])
    assert frobenius_matrix([1, 1, 1], 2) == IntMatrix.from_rows([[1, 1], [0, 1]])


def test_field_model_of_gf8(f21):
    group, action = field_model([1, 1, 0, 1], 2)
    assert action.order == 21
    assert [o.size for o in orbits(group, action)] == [1, 7]
    assert regular_orbit_search(group, action) is None
    assert f21[1].order == 21


def test_field_model_of_gf128_matches_fixture(library):
    data = library.load("f128")
    group = AbelianPGroup.from_dict(data['defect'])
    _, model = field_model([1, 1, 0, 0, 0, 0, 0, 1], 2)
    assert companion_matrix([1, 1, 0, 0, 0, 0, 0, 1], 2).tolist() == data['action'][0]
    assert frobenius_matrix([1, 1, 0, 0, 0, 0, 0, 1], 2).tolist() == data['action'][1]
    assert model.group == group


@pytest.mark.parametrize("coefficients", [[1, 0, 1], [0, 1], [1]])
def test_field_model_rejects_bad_moduli(coefficients):
    with pytest.raises(ValidationError):
        field_model(coefficients, 2)


@st.composite
def invertible_actions(draw):
    p = draw(st.sampled_from([2, 3, 5]))
    rows = draw(st.lists(st.lists(st.integers(0, p - 1), min_size=2, max_size=2), min_size=2, max_size=2)
                .filter(lambda m: (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % p))
    group = AbelianPGroup.elementary(p, 2)
    return group, ActionGroup.from_matrices(group, [rows])


@hsettings(max_examples=60, deadline=None)
@given(invertible_actions())
def test_orbit_sizes_partition_the_group(case):
    group, action = case
    found = orbits(group, action)
    assert sum(o.size for o in found) == group.order
    assert all(o.size * o.stabilizer_order == action.order for o in found)
    assert found[0].representative == group.zero
