"""Tests for the claim-check suite."""
import io
import json
import os
import shutil

import pytest

from cartankit.core.config import PACKAGE_FIXTURES
from cartankit.core.errors import ValidationError
from cartankit.core.paction import regular_orbit_search, stabilizer
from cartankit.core.verify import CHECKS, claim_ids, regular_orbit_corpus, verify_claim_suite
from cartankit.ui.commands import EXIT_VERDICT_FAILED, run
from cartankit.ui.report import FAIL, PASS, SKIP

STANDARD = [c.claim for c in CHECKS if not c.extended]


def test_claims_are_unique_and_ordered():
    ids = claim_ids()
    assert len(ids) == len(set(ids))
    assert ids[0] == 'e6-dual-minimum-is-4'
    assert 'z2-4-enumeration' in ids


@pytest.mark.parametrize("claim", STANDARD)
def test_standard_checks_pass(settings, claim):
    report = verify_claim_suite(settings, only=claim)
    assert report.verdicts == [(claim, PASS)], report.results[claim]


def test_seedless_oracles_pass(settings):
    for claim in ('snf-oracle', 'minimum-oracle'):
        report = verify_claim_suite(settings, only=claim, seedless=True)
        assert report.verdicts == [(claim, PASS)]
        assert report.inputs['seedless']


def test_extended_check_is_skipped_at_default_budget(settings):
    report = verify_claim_suite(settings, only='z2-4-enumeration')
    assert report.verdicts == [('z2-4-enumeration', SKIP)]
    assert report.passed


def test_unknown_check(settings):
    with pytest.raises(ValidationError):
        verify_claim_suite(settings, only='no-such-check')


def test_regular_orbit_corpus_is_broad():
    corpus = regular_orbit_corpus()
    assert len(corpus) >= 20
    assert any(group.rank >= 4 for group, _ in corpus)
    assert any(action.order > 3 for _, action in corpus)


def test_small_corpus_points_are_regular():
    for group, action in regular_orbit_corpus(max_log_order=6):
        x = regular_orbit_search(group, action)
        assert x is not None
        assert stabilizer(group, action, x).order == 1


@pytest.fixture
def tampered_fixtures(tmp_path):
    target = tmp_path / "fixtures"
    shutil.copytree(PACKAGE_FIXTURES, target)
    path = target / "e6_modified.json"
    data = json.loads(path.read_text())
    data['matrix'][0][2] = 2
    path.write_text(json.dumps(data))
    return target


def test_tampered_fixture_fails_its_check(settings, tampered_fixtures):
    stream = io.StringIO()
    report, code = run(['verify', '--only', 'e6-dual-minimum-is-4', '--fixtures', str(tampered_fixtures),
                        '--json'], settings, stream)
    assert code == EXIT_VERDICT_FAILED
    assert report.verdicts == [('e6-dual-minimum-is-4', FAIL)]
    assert 'ValidationError' in report.results['e6-dual-minimum-is-4']['error']


@pytest.mark.extended
@pytest.mark.skipif(os.environ.get('CARTANKIT_EXTENDED') != '1', reason="set CARTANKIT_EXTENDED=1")
def test_extended_enumeration(settings):
    report = verify_claim_suite(settings.with_budget(None), only='z2-4-enumeration')
    assert report.verdicts == [('z2-4-enumeration', PASS)]
