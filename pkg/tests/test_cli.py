"""Tests for the command-line surface."""
import io
import json

import pytest
from hypothesis import HealthCheck, assume, given, settings as hsettings, strategies as st

from cartankit.app import main
from cartankit.ui.commands import EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, EXIT_VERDICT_FAILED, run


def invoke(settings, *argv):
    stream = io.StringIO()
    report, code = run(list(argv), settings, stream)
    return report, code, stream.getvalue()


def invoke_json(settings, *argv):
    report, code, output = invoke(settings, *argv, '--json')
    return json.loads(output), code


def test_snf_of_fixture(settings):
    data, code = invoke_json(settings, 'exactlin', 'snf', '--matrix', 'ones3')
    assert code == EXIT_OK
    assert data['results']['diagonal'] == [1, 1, 4]
    assert data['verdicts'] == [{'claim': 'snf-transforms-valid', 'outcome': 'pass'}]


def test_inline_matrix(settings):
    data, code = invoke_json(settings, 'exactlin', 'det', '--matrix', '[[1, 2], [3, 4]]')
    assert code == EXIT_OK
    assert data['results']['det'] == -2


def test_dual_minimum_of_e6_type_cartan(settings):
    data, code = invoke_json(settings, 'qform', 'min', '--form', 'e6_modified', '--dual', '343')
    assert code == EXIT_OK
    assert data['results']['value'] == 4


def test_failed_expectation_exits_one(settings):
    data, code = invoke_json(settings, 'qform', 'min', '--form', 'e6_modified', '--dual', '343', '--expect', '6')
    assert code == EXIT_VERDICT_FAILED
    assert data['verdicts'] == [{'claim': 'minimum-equals-6', 'outcome': 'fail'}]


def test_weighted_bound_with_expectation(settings):
    _, code, _ = invoke(settings, 'qform', 'bound', '--weights', 'e21_weight', '--cartan', 'e21_cartan',
                        '--expect', '8')
    assert code == EXIT_OK


def test_theta_prefix(settings):
    data, _ = invoke_json(settings, 'qform', 'theta', '--form', '[[2, 1], [1, 2]]', '--bound', '6')
    assert data['results']['theta'] == [{'norm': 2, 'count': 6}, {'norm': 6, 'count': 6}]


def test_embeddings_carry_decomposition_labels(settings):
    data, code = invoke_json(settings, 'embed', '--target', 'ones3')
    assert code == EXIT_OK
    assert data['results']['count'] == 2
    assert [e['rows'] for e in data['results']['embeddings']] == [3, 4]
    assert all(e['decomposition'] for e in data['results']['embeddings'])


def test_kb_check_on_e6_type_cartan_fails(settings):
    data, code = invoke_json(settings, 'block', 'kbcheck', '--cartan', 'e6_modified', '--d-order', '343')
    assert code == EXIT_VERDICT_FAILED
    assert data['results']['holds'] is False


def test_enumeration_from_scenario_file(settings):
    data, code = invoke_json(settings, 'block', 'enumerate', '--scenario', 'z2cubed_f21.json')
    assert code == EXIT_OK
    assert data['results']['classes'] == 1
    assert data['results']['candidates'][0]['det'] == 32


def test_k_from_scenario(settings):
    data, _ = invoke_json(settings, 'block', 'k', '--scenario', 'z2cubed_f21')
    assert data['results'] == {'k': 8, 'center_order': 1}


def test_mod8(settings):
    data, code = invoke_json(settings, 'block', 'mod8', '--d-order', '16', '--e', '15')
    assert code == EXIT_OK
    assert data['results'] == {'candidates': [7, 15], 'l': 15}


def test_ibr_failure_exits_one(settings):
    _, code, _ = invoke(settings, 'block', 'ibr', '--d-order', '16', '--e', '3', '--l', '5')
    assert code == EXIT_VERDICT_FAILED


def test_regular_orbit_on_z4_squared(settings):
    data, _ = invoke_json(settings, 'paction', 'regular', '--group', '{"p": 2, "exponents": [2, 2]}',
                          '--action', '[[[0, 3], [1, 3]]]')
    assert data['results']['regular_point'] == [1, 0]
    assert data['inputs']['action_order'] == 3


def test_no_regular_orbit_under_gl2(settings):
    data, _ = invoke_json(settings, 'paction', 'regular', '--group', '{"p": 2, "exponents": [1, 1]}',
                          '--action', 'gl2')
    assert data['results']['regular_point'] is None


def test_transversal_point_is_regular(settings):
    _, code, _ = invoke(settings, 'paction', 'transversal', '--group', '{"p": 2, "exponents": [2, 2]}',
                        '--action', '[[[0, 3], [1, 3]]]')
    assert code == EXIT_OK


def test_good_element_in_field_model(settings):
    data, code = invoke_json(settings, 'block', 'goodelem', '--field', '2:1,1,0,0,0,0,0,1', '--threshold', '64')
    assert code == EXIT_OK
    assert data['results']['good_element'] == {'element': [1, 0, 0, 0, 0, 0, 0], 'commutator_order': 64,
                                               'free': True}


def test_main_check(settings):
    data, code = invoke_json(settings, 'block', 'mainchk', '--group', '{"p": 3, "exponents": [1, 1]}',
                             '--action', '[[[1, 0], [0, -1]]]')
    assert code == EXIT_VERDICT_FAILED
    assert data['results']['determinants'] == [2]


@pytest.mark.parametrize("argv", [
    ['exactlin', 'snf', '--matrix', '[[1, 2], [3]]'],
    ['exactlin', 'snf', '--matrix', '[[1, 2], [3'],
    ['exactlin', 'snf'],
    ['bogus'],
    ['qform', 'min', '--form', 'no_such_fixture'],
    ['qform', 'min', '--form', 'ones3', '--dual', 'x/y'],
    ['block', 'mod8', '--d-order', '12', '--e', '3'],
    ['verify', '--only', 'no-such-check'],
])
def test_usage_and_input_errors_exit_two(settings, argv):
    report, code, _ = invoke(settings, *argv)
    assert code == EXIT_USAGE
    assert report.error


def test_malformed_json_reports_position(settings):
    report, code, _ = invoke(settings, 'exactlin', 'snf', '--matrix', '[[1, 2],\n [3')
    assert code == EXIT_USAGE
    assert "line 2 column" in report.error


def test_budget_exhaustion_exits_three(settings):
    report, code, _ = invoke(settings, 'qform', 'min', '--form', 'e6_modified', '--dual', '343', '--budget', '1')
    assert code == EXIT_RESOURCE
    assert report.error.startswith("ResourceLimitError")


def test_invalid_budget_is_a_usage_error(settings):
    _, code, _ = invoke(settings, 'exactlin', 'det', '--matrix', 'ones3', '--budget', '0')
    assert code == EXIT_USAGE


def test_text_report(settings):
    _, code, output = invoke(settings, 'exactlin', 'snf', '--matrix', 'ones3')
    assert code == EXIT_OK
    assert output.startswith("cartankit exactlin snf")
    assert "snf-transforms-valid  PASS" in output


def test_json_reports_are_deterministic(settings):
    argv = ['embed', '--target', '[[4, 2, 2], [2, 4, 2], [2, 2, 4]]', '--rows', '8']
    first, _, _ = invoke(settings, *argv)
    second, _, _ = invoke(settings, *argv)
    assert first.render_json(include_timing=False) == second.render_json(include_timing=False)


def test_verify_list(settings):
    data, code = invoke_json(settings, 'verify', '--list')
    assert code == EXIT_OK
    assert 'e6-dual-minimum-is-4' in data['results']['checks']


def test_verify_single_check(settings):
    data, code = invoke_json(settings, 'verify', '--only', 'mod8-table')
    assert code == EXIT_OK
    assert data['verdicts'] == [{'claim': 'mod8-table', 'outcome': 'pass'}]


def test_pdf_export(settings, tmp_path):
    target = tmp_path / "report.pdf"
    _, code, _ = invoke(settings, 'block', 'freecartan', '--z', '2', '--m', '4', '--e', '3', '--pdf', str(target))
    assert code == EXIT_OK
    assert target.read_bytes().startswith(b"%PDF")


@hsettings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.text(max_size=20))
def test_malformed_inline_json_never_crashes(settings, text):
    literal = "[" + text
    try:
        json.loads(literal)
    except ValueError:
        pass
    else:
        assume(False)
    _, code, _ = invoke(settings, 'exactlin', 'det', f'--matrix={literal}')
    assert code == EXIT_USAGE


klein_four = {'p': 2, 'exponents': [1, 1]}
KLEIN_FOUR = json.dumps(klein_four)


@pytest.mark.parametrize("argv", [
    ['paction', 'orbits', '--group', '{"p": 2, "exponents": [1]}', '--action', '[[1]]'],
    ['paction', 'orbits', '--group', '{"p": 2, "exponents": [1]}', '--action', '[5]'],
    ['paction', 'orbits', '--group', '{"p": 2, "exponents": 1}'],
    ['paction', 'orbits', '--group', '[2, 1]'],
    ['block', 'inventory', '--scenario', '{"defect": ' + KLEIN_FOUR + ', "subsections": [5]}'],
    ['block', 'inventory', '--scenario', '{"defect": ' + KLEIN_FOUR + ', "action": 3}'],
    ['block', 'goodelem', '--scenario', '{"defect": ' + KLEIN_FOUR + ', "action": 3}', '--threshold', '2'],
    ['exactlin', 'det', '--matrix', '{"matrix": [[2]], "scale": [1]}'],
    ['qform', 'min', '--form', '{"matrix": 5}'],
    ['qform', 'min', '--form', '[[2, 0.5], [0.5, 2]]'],
])
def test_wrong_shape_json_exits_two(monkeypatch, tmp_path, argv):
    monkeypatch.setenv('CARTANKIT_HOME', str(tmp_path))
    assert main(argv) == EXIT_USAGE


scalars = st.one_of(st.integers(), st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=5),
                    st.booleans(), st.none())
non_integers = st.one_of(st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=5), st.none())
wrong_matrices = st.one_of(
    scalars,
    st.lists(st.integers(), min_size=1, max_size=4),
    st.lists(st.lists(non_integers, min_size=1, max_size=3), min_size=1, max_size=3),
    st.dictionaries(st.sampled_from(['scale', 'name', 'rows']), st.integers(), max_size=2),
)
wrong_reps = st.one_of(
    st.integers(), st.text(max_size=5),
    st.lists(st.integers(), max_size=1),
    st.lists(st.integers(), min_size=3, max_size=4),
    st.lists(st.text(min_size=1, max_size=3), min_size=2, max_size=2),
)
wrong_subsections = st.one_of(
    scalars,
    st.lists(st.integers(), max_size=3),
    st.dictionaries(st.sampled_from(['l', 'z_part', 'cartan']), st.integers(), max_size=2),
    st.builds(lambda rep: {'rep': rep}, wrong_reps),
    st.builds(lambda l: {'rep': [1, 0], 'l': l}, st.one_of(non_integers.filter(lambda x: x is not None),
                                                          st.lists(st.integers()))),
)
wrong_scenarios = st.one_of(
    st.lists(st.integers(), max_size=3),
    st.builds(lambda s: {'defect': klein_four, 'subsections': s}, st.lists(wrong_subsections, min_size=1, max_size=3)),
    st.builds(lambda a: {'defect': klein_four, 'action': a},
              st.one_of(scalars, st.lists(wrong_matrices, min_size=1, max_size=2))),
    st.builds(lambda g: {'defect': g}, st.one_of(scalars, st.fixed_dictionaries({'p': st.integers(2, 7)}),
                                                st.fixed_dictionaries({'p': st.just(2), 'exponents': scalars}))),
)
lenient = hsettings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])


def assert_usage_error(settings, *argv):
    report, code, _ = invoke(settings, *argv)
    assert code == EXIT_USAGE, report.error
    assert report.error


@lenient
@given(wrong_matrices)
def test_wrong_shape_matrix_exits_two(settings, payload):
    assert_usage_error(settings, 'exactlin', 'det', f'--matrix={json.dumps(payload)}')


@lenient
@given(wrong_matrices)
def test_wrong_shape_form_exits_two(settings, payload):
    assert_usage_error(settings, 'qform', 'min', f'--form={json.dumps(payload)}')


@lenient
@given(wrong_matrices)
def test_wrong_shape_action_exits_two(settings, payload):
    assert_usage_error(settings, 'paction', 'orbits', f'--group={json.dumps(klein_four)}',
                       f'--action={json.dumps([payload])}')


@lenient
@given(wrong_scenarios)
def test_wrong_shape_scenario_exits_two(settings, payload):
    assert_usage_error(settings, 'block', 'inventory', f'--scenario={json.dumps(payload)}')
