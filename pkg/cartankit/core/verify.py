"""Named checks of the printed computational claims, run as one suite."""
import logging
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import isqrt, lcm
from typing import Callable, Dict, List, Optional, Tuple

from .config import Settings
from .errors import CartanKitError, ResourceLimitError, ValidationError
from .exactlin import IntMatrix, kronecker, ones_plus_identity, rational_inverse, snf
from .qform import GramForm, congruent, minimum, tensor_expansion, weighted_bound
from .embed import canonical_form, orthogonal_embeddings
from .paction import (AbelianPGroup, ActionGroup, commutator_part, field_model, general_linear_generators,
                      invariant_transversal, regular_orbit_search, regular_orbit_via_transversal, stabilizer)
from .blockcalc import (decomposition_enumerate, find_good_element, free_case_cartan, l_from_mod8)
from .fixtures import FixtureLibrary
from ..ui.report import RunReport, PASS, FAIL, SKIP

logger = logging.getLogger(__name__)


@dataclass
class SuiteContext:
    settings: Settings
    library: FixtureLibrary
    seedless: bool = False


@dataclass(frozen=True)
class Check:
    claim: str
    run: Callable[[SuiteContext], Tuple[object, Dict]]
    extended: bool = False


CHECKS: List[Check] = []


def check(claim: str, extended: bool = False):
    """Register a check; it returns (True/False/"skip", details)."""
    def register(func):
        CHECKS.append(Check(claim, func, extended))
        return func
    return register


def _ones(n: int) -> IntMatrix:
    return ones_plus_identity(n)


# -- forms and lattices --------------------------------------------------------

@check("e6-dual-minimum-is-4")
def _e6_minimum(ctx: SuiteContext):
    cartan = ctx.library.load_matrix("e6_modified")
    result = minimum(GramForm.scaled_inverse(cartan, 7 ** 3), ctx.settings.node_budget)
    return result.value == 4, {'minimum': result.value, 'l': cartan.rows}


@check("e6-has-no-factorization")
def _e6_no_factorization(ctx: SuiteContext):
    base = ctx.library.load_matrix("e6_modified").divide_exact(49)
    found = orthogonal_embeddings(base, max_nodes=ctx.settings.node_budget)
    return not found, {'embeddings': len(found)}


@check("tensor-minimum-is-3")
def _tensor_minimum_3(ctx: SuiteContext):
    result = minimum(GramForm.scaled_inverse(_ones(3), 4))
    return result.value == 3, {'minimum': result.value}


@check("tensor-minimum-is-9")
def _tensor_minimum_9(ctx: SuiteContext):
    result = minimum(GramForm.scaled_inverse(kronecker(_ones(3), _ones(3)), 16), ctx.settings.node_budget)
    return result.value == 9, {'minimum': result.value, 'vectors': len(result.vectors)}


@check("tensor-expansion-identity")
def _tensor_expansion(ctx: SuiteContext):
    form = GramForm.scaled_inverse(kronecker(_ones(3), _ones(3)), 16)
    vectors = [tuple(1 if i == j else 0 for i in range(9)) for j in range(9)]
    vectors += [tuple(x) for x in _sample_vectors(ctx, 9, 40)]
    mismatched = [list(x) for x in vectors if tensor_expansion(x) != form.value(x)]
    return not mismatched, {'vectors': len(vectors), 'mismatched': mismatched}


def _weighted(ctx: SuiteContext, weight: str, cartan: str, expected: int):
    value = weighted_bound(ctx.library.load_form(weight), ctx.library.load_matrix(cartan))
    return value == expected, {'bound': value, 'd_order': expected}


@check("weighted-bound-e21")
def _weighted_e21(ctx: SuiteContext):
    return _weighted(ctx, "e21_weight", "e21_cartan", 8)


@check("weighted-bound-p3-d8")
def _weighted_d8(ctx: SuiteContext):
    return _weighted(ctx, "p3_weight_d8", "p3_cartan_d8", 9)


@check("weighted-bound-p3-sd16")
def _weighted_sd16(ctx: SuiteContext):
    return _weighted(ctx, "p3_weight_sd16", "p3_cartan_sd16", 9)


# -- block scenarios -----------------------------------------------------------

@check("e21-inventory")
def _e21_inventory(ctx: SuiteContext):
    scenario = ctx.library.load_scenario("z2cubed_f21")
    nontrivial = [s for s in scenario.subsections if not s.is_trivial]
    details = {'subsections': [s.to_dict() for s in nontrivial]}
    if len(nontrivial) != 1:
        return False, details
    s = nontrivial[0]
    holds = (s.orbit_size == 7 and s.centralizer_order == 3
             and s.cartan is not None and s.cartan == free_case_cartan(2, 4, 3))
    return holds, details


@check("e21-enumeration")
def _e21_enumeration(ctx: SuiteContext):
    scenario = ctx.library.load_scenario("z2cubed_f21")
    printed_block = ctx.library.load_matrix("e21_qx")
    printed_cartan = ctx.library.load_matrix("e21_cartan")
    classes = decomposition_enumerate(scenario, max_nodes=ctx.settings.node_budget)
    details = {'classes': len(classes)}
    if len(classes) != 1:
        return False, details
    found = classes[0]
    block_matches = canonical_form(found.blocks[0]) == canonical_form(printed_block)
    outcome = congruent(GramForm.from_matrix(found.cartan), GramForm.from_matrix(printed_cartan),
                        ctx.settings.node_budget)
    details.update({
        'block_matches': block_matches,
        'gamma_rank': found.gamma_basis.rows,
        'cartan': found.cartan,
        'congruent_to_printed': outcome.is_congruent
    })
    return block_matches and found.gamma_basis.rows == 5 and outcome.is_congruent, details


@check("free-case-cartan-snf")
def _free_case_snf(ctx: SuiteContext):
    cartan = free_case_cartan(2, 4, 3)
    diagonal = snf(cartan).diagonal
    return cartan == _ones(3).scale(2) and diagonal == (2, 2, 8), {'diagonal': list(diagonal)}


@check("mod8-table")
def _mod8(ctx: SuiteContext):
    table = {(4, 3): 3, (16, 5): 5, (8, 7): 7, (16, 15): 15}
    values = {f"{d},{e}": l_from_mod8(d, e) for (d, e) in table}
    return all(values[f"{d},{e}"] == l for (d, e), l in table.items()), {'l': values}


# -- group actions -------------------------------------------------------------

def _partitions(total: int, largest: int, smallest: int = 2):
    if total == 0:
        yield ()
        return
    for part in range(min(total, largest), smallest - 1, -1):
        for rest in _partitions(total - part, part, smallest):
            yield (part,) + rest


def _embed_block(rank: int, start: int, block: List[List[int]]) -> List[List[int]]:
    rows = [[1 if i == j else 0 for j in range(rank)] for i in range(rank)]
    size = len(block)
    for i in range(size):
        for j in range(size):
            rows[start + i][start + j] = block[i][j]
    return rows


ORDER_THREE = [[0, -1], [1, -1]]
CYCLE_THREE = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
ORDER_FIVE = [[0, 0, 0, -1], [1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1]]


def _equal_runs(exponents: Tuple[int, ...]) -> List[Tuple[int, int]]:
    """(start, length) of maximal runs of equal exponents."""
    runs, start = [], 0
    for i in range(1, len(exponents) + 1):
        if i == len(exponents) or exponents[i] != exponents[start]:
            runs.append((start, i - start))
            start = i
    return runs


def regular_orbit_corpus(max_log_order: int = 10) -> List[Tuple[AbelianPGroup, ActionGroup]]:
    """Odd-order actions on every abelian 2-group with all exponents ≥ 2 up to the given order.

    The actions are integral matrices of finite order (an order-3 rotation,
    a 3-cycle, the companion matrix of the fifth cyclotomic polynomial)
    placed on runs of coordinates with equal exponents.
    """
    corpus = []
    for log_order in range(2, max_log_order + 1):
        for exponents in _partitions(log_order, log_order):
            group = AbelianPGroup(2, exponents)
            r = group.rank
            corpus.append((group, ActionGroup.trivial(group)))
            pairs = [start + 2 * k for start, length in _equal_runs(exponents) for k in range(length // 2)]
            for start in pairs:
                corpus.append((group, ActionGroup.from_matrices(group, [_embed_block(r, start, ORDER_THREE)])))
            if len(pairs) >= 2:
                a, b = pairs[0], pairs[1]
                first = _embed_block(r, a, ORDER_THREE)
                second = _embed_block(r, b, ORDER_THREE)
                corpus.append((group, ActionGroup.from_matrices(group, [first, second])))
                both = [[first[i][j] if i < b else second[i][j] for j in range(r)] for i in range(r)]
                corpus.append((group, ActionGroup.from_matrices(group, [both])))
            for start, length in _equal_runs(exponents):
                if length >= 3:
                    corpus.append((group, ActionGroup.from_matrices(group, [_embed_block(r, start, CYCLE_THREE)])))
                if length >= 4:
                    corpus.append((group, ActionGroup.from_matrices(group, [_embed_block(r, start, ORDER_FIVE)])))
    return corpus


@check("regular-orbit-corpus")
def _regular_orbits(ctx: SuiteContext):
    corpus = regular_orbit_corpus()
    failures = []
    transversals = 0
    for group, action in corpus:
        x = regular_orbit_search(group, action)
        if x is None or stabilizer(group, action, x).order != 1:
            failures.append({'group': group.to_dict(), 'action': action.to_list()})
            continue
        if group.is_homocyclic and group.exponents[0] == 2:
            invariant_transversal(group, action)
            y = regular_orbit_via_transversal(group, action)
            transversals += 1
            if y is None or stabilizer(group, action, y).order != 1:
                failures.append({'group': group.to_dict(), 'action': action.to_list(), 'via': 'transversal'})
    return not failures and len(corpus) >= 20, {
        'cases': len(corpus), 'transversals': transversals, 'failures': failures}


@check("regular-orbit-negative-control")
def _regular_orbit_negative(ctx: SuiteContext):
    group = AbelianPGroup.elementary(2, 2)
    action = ActionGroup.from_matrices(group, general_linear_generators(2))
    x = regular_orbit_search(group, action)
    return action.order == 6 and x is None, {'action_order': action.order, 'regular_point': x}


@check("f128-good-element")
def _f128(ctx: SuiteContext):
    data = ctx.library.load("f128")
    group = AbelianPGroup.from_dict(data['defect'])
    action = ActionGroup.from_matrices(group, data['action'])
    _, model = field_model([1, 1, 0, 0, 0, 0, 0, 1], 2)
    same_group = set(model.elements) == set(action.elements)

    good = find_good_element(group, action, 64)
    details = {'action_order': action.order, 'matches_field_model': same_group,
               'good_element': good}
    if good is None:
        return False, details

    # exhaustive oracle: scan every element of A for the centralizer
    u = good.element
    centralizer = [a for a in action.elements if a.apply(u) == u]
    commutator = commutator_part(group, stabilizer(group, action, u))
    free = all(a.apply(x) != x for a in centralizer if not a.is_identity
               for x in commutator.elements if any(x))
    details.update({'centralizer_order': len(centralizer), 'commutator_order': commutator.order})
    holds = (same_group and action.order == 889 and good.commutator_order == 64 == commutator.order
             and len(centralizer) == 7 and good.free and free)
    return holds, details


@check("z2-4-enumeration", extended=True)
def _z2_4_enumeration(ctx: SuiteContext):
    if not ctx.settings.runs_extended():
        return SKIP, {'reason': f"node budget below {ctx.settings.extended_budget}"}
    scenario = ctx.library.load_scenario("z2_4_z3sq")
    try:
        classes = decomposition_enumerate(scenario, max_nodes=ctx.settings.node_budget)
    except ResourceLimitError as e:
        logger.warning(f"Extended enumeration stopped: {e}")
        return SKIP, {'reason': str(e)}
    expected = GramForm.from_matrix(kronecker(_ones(3), _ones(3)))
    minima = [minimum(GramForm.from_matrix(c.cartan)).value for c in classes]
    congruences = [congruent(GramForm.from_matrix(c.cartan), expected, ctx.settings.node_budget).is_congruent
                   for c in classes]
    holds = bool(classes) and all(m == 4 for m in minima) and all(congruences)
    return holds, {'classes': len(classes), 'raw_solutions': sum(c.multiplicity for c in classes),
                   'minima': minima}


# -- oracle comparisons --------------------------------------------------------

def _generator(ctx: SuiteContext):
    return None if ctx.seedless else random.Random(20240229)


def _sample_vectors(ctx: SuiteContext, length: int, count: int) -> List[List[int]]:
    rng = _generator(ctx)
    if rng is None:
        return [[(k * 7 + i * i * 3 + i * k) % 5 - 2 for i in range(length)] for k in range(count)]
    return [[rng.randint(-2, 2) for _ in range(length)] for _ in range(count)]


def _sample_matrices(ctx: SuiteContext, count: int) -> List[IntMatrix]:
    rng = _generator(ctx)
    matrices = []
    for k in range(count):
        if rng is None:
            rows, cols = k % 4 + 1, (k // 4) % 4 + 1
            entries = [[(k * 31 + i * 7 + j * 13 + i * j * k) % 13 - 6 for j in range(cols)] for i in range(rows)]
        else:
            rows, cols = rng.randint(1, 4), rng.randint(1, 4)
            entries = [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(rows)]
        matrices.append(IntMatrix.from_rows(entries, cols=cols))
    return matrices


@check("snf-oracle")
def _snf_oracle(ctx: SuiteContext):
    bad = [m.to_list() for m in _sample_matrices(ctx, 500) if not snf(m).verify(m)]
    return not bad, {'matrices': 500, 'failures': bad[:5]}


MINIMUM_CORPUS = [
    [[1]], [[2]], [[2, 1], [1, 2]], [[2, 1], [1, 3]], [[3, 1], [1, 5]], [[2, -1], [-1, 2]],
    [[2, 1, 1], [1, 2, 1], [1, 1, 2]], [[2, -1, 0], [-1, 2, -1], [0, -1, 2]], [[3, 1, 0], [1, 3, 1], [0, 1, 3]],
    [[2, 1, 1, 1], [1, 2, 1, 1], [1, 1, 2, 1], [1, 1, 1, 2]],
    [[2, 0, -1, 0], [0, 2, -1, 0], [-1, -1, 2, -1], [0, 0, -1, 2]],
    [[4, 1, 1, 0], [1, 4, 0, 1], [1, 0, 4, 1], [0, 1, 1, 4]],
]


def brute_force_minimum(form: GramForm) -> Tuple[Fraction, List[Tuple[int, ...]]]:
    """Minimum over a box that provably holds every minimal vector.

    |x_i|² ≤ q(x)·(G⁻¹)_ii bounds each coordinate of a minimal vector.
    """
    n = form.dim
    bound = min(form[i, i] for i in range(n))
    den = lcm(*(form[i, j].denominator for i in range(n) for j in range(n)))
    inverse = rational_inverse(form.scale(den).to_int_matrix())
    radii = [isqrt(int(bound * den * inverse[i][i])) for i in range(n)]
    best, vectors = None, []
    for x in product(*[range(-r, r + 1) for r in radii]):
        if not any(x) or next(a for a in x if a) < 0:
            continue
        value = form.value(x)
        if best is None or value < best:
            best, vectors = value, [x]
        elif value == best:
            vectors.append(x)
    return best, sorted(vectors)


@check("minimum-oracle")
def _minimum_oracle(ctx: SuiteContext):
    forms = [GramForm.from_rows(rows) for rows in MINIMUM_CORPUS]
    forms.append(GramForm.scaled_inverse(_ones(3), 4))
    forms.append(GramForm.scaled_inverse(_ones(4), 5))
    mismatched = []
    for form in forms:
        found = minimum(form)
        value, vectors = brute_force_minimum(form)
        if found.value != value or list(found.vectors) != vectors:
            mismatched.append(form.to_list())
    return not mismatched, {'forms': len(forms), 'mismatched': mismatched}


EMBED_CORPUS = [
    [[1]], [[2]], [[4]], [[6]], [[2, 1], [1, 2]], [[2, 0], [0, 2]], [[2, -1], [-1, 2]], [[3, 1], [1, 3]],
    [[4, 2], [2, 4]], [[3, 2], [2, 3]], [[2, 1, 1], [1, 2, 1], [1, 1, 2]], [[2, 1, 0], [1, 2, 1], [0, 1, 2]],
    [[3, 1, 1], [1, 3, 1], [1, 1, 3]], [[2, 0, 1], [0, 2, 1], [1, 1, 3]],
]


def brute_force_embeddings(target: IntMatrix) -> List[IntMatrix]:
    """All factorizations by plain multiset search over rows bounded by the diagonal."""
    n = target.rows
    radii = [isqrt(target[i, i]) for i in range(n)]
    rows = [v for v in product(*[range(-r, r + 1) for r in radii]) if any(v) and next(a for a in v if a) > 0]
    solutions = set()
    residual = target.tolist()

    def search(start: int, chosen: List[Tuple[int, ...]]):
        if all(residual[i][j] == 0 for i in range(n) for j in range(n)):
            solutions.add(canonical_form(IntMatrix.from_rows(chosen, cols=n)))
            return
        for k in range(start, len(rows)):
            v = rows[k]
            for i in range(n):
                for j in range(n):
                    residual[i][j] -= v[i] * v[j]
            if all(residual[i][i] >= 0 for i in range(n)):
                chosen.append(v)
                search(k, chosen)
                chosen.pop()
            for i in range(n):
                for j in range(n):
                    residual[i][j] += v[i] * v[j]

    search(0, [])
    return sorted(solutions, key=lambda q: (q.rows, q.entries))


@check("embed-oracle")
def _embed_oracle(ctx: SuiteContext):
    mismatched = []
    for rows in EMBED_CORPUS:
        target = IntMatrix.from_rows(rows)
        found = [e.matrix for e in orthogonal_embeddings(target)]
        if found != brute_force_embeddings(target):
            mismatched.append(rows)
    return not mismatched, {'targets': len(EMBED_CORPUS), 'mismatched': mismatched}


# -- runner --------------------------------------------------------------------

def claim_ids() -> List[str]:
    return [c.claim for c in CHECKS]


def verify_claim_suite(settings: Settings, only: Optional[str] = None, seedless: bool = False):
    """Run every registered check (or the one named by only) into a RunReport."""
    selected = [c for c in CHECKS if only is None or c.claim == only]
    if not selected:
        raise ValidationError(f"unknown check '{only}'; known checks: {', '.join(claim_ids())}")

    context = SuiteContext(settings, FixtureLibrary(str(settings.fixtures_dir)), seedless)
    report = RunReport('verify', inputs={
        'budget': settings.node_budget if settings.node_budget is not None else 'max',
        'only': only,
        'seedless': seedless
    })
    started = time.perf_counter()
    for item in selected:
        logger.info(f"Running check {item.claim}")
        try:
            outcome, details = item.run(context)
        except CartanKitError as e:
            logger.error(f"Check {item.claim} raised {type(e).__name__}: {e}")
            outcome, details = False, {'error': f"{type(e).__name__}: {e}"}
        if outcome == SKIP:
            logger.warning(f"Check {item.claim} skipped: {details.get('reason')}")
            report.add_verdict(item.claim, SKIP)
        else:
            report.add_verdict(item.claim, PASS if outcome else FAIL)
        report.results[item.claim] = details
    report.timing_ms = int((time.perf_counter() - started) * 1000)
    logger.info(f"Suite finished: {sum(1 for _, o in report.verdicts if o == FAIL)} failures")
    return report
