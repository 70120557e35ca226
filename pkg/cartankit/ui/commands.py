"""Command-line surface: argument parsing, input loading and dispatch."""
import argparse
import dataclasses
import json
import logging
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

from ..core.config import Settings, parse_budget
from ..core.errors import CartanKitError, ValidationError
from ..core.exactlin import (IntMatrix, adjugate, as_int, det, hnf, kernel_basis, kronecker,
                             parse_rational, snf)
from ..core.qform import GramForm, congruent, minimum, theta_prefix, weighted_bound
from ..core.embed import is_decomposable, orthogonal_embeddings
from ..core.paction import (AbelianPGroup, ActionGroup, coprime_split_check, field_model,
                            general_linear_generators, has_free_action, invariant_transversal, orbits,
                            regular_orbit_search, regular_orbit_via_transversal, stabilizer)
from ..core.blockcalc import (BlockScenario, decomposition_enumerate, find_good_element, free_case_cartan,
                              ibr_bound_check, k_from_subsections, kb_check_min, l_from_mod8,
                              mod8_candidates, subsection_inventory, theorem_main_check)
from ..core.fixtures import FixtureLibrary, read_json
from ..core.verify import claim_ids, verify_claim_suite
from .report import RunReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class UsageError(CartanKitError):
    """The command line does not match any documented form."""


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- input loading -------------------------------------------------------------

@contextmanager
def decoding(source: str):
    """Report a payload of the wrong shape as a ValidationError naming its source."""
    try:
        yield
    except CartanKitError:
        raise
    except (TypeError, KeyError, IndexError, ValueError) as e:
        raise ValidationError(f"'{source}' has the wrong shape: {type(e).__name__}: {e}") from None


def read_input(library: FixtureLibrary, text: str):
    """An inline JSON literal, a fixture name, or a path to a JSON file."""
    stripped = text.strip()
    if stripped.startswith(('[', '{')):
        try:
            return json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ValidationError(f"inline JSON: line {e.lineno} column {e.colno}: {e.msg}") from None
    return read_json(library.path_for(text))


def matrix_input(library: FixtureLibrary, text: str) -> IntMatrix:
    data = read_input(library, text)
    with decoding(text):
        if isinstance(data, dict):
            if 'matrix' not in data:
                raise ValidationError(f"'{text}' has no 'matrix' entry")
            return IntMatrix.from_list(data['matrix']).scale(as_int(data.get('scale', 1)))
        return IntMatrix.from_list(data)


def form_input(library: FixtureLibrary, text: str) -> GramForm:
    data = read_input(library, text)
    with decoding(text):
        if isinstance(data, dict):
            if 'matrix' not in data:
                raise ValidationError(f"'{text}' has no 'matrix' entry")
            return GramForm.from_list(data['matrix']).scale(parse_rational(data.get('scale', 1)))
        return GramForm.from_list(data)


def scenario_input(library: FixtureLibrary, text: str) -> BlockScenario:
    data = read_input(library, text)
    with decoding(text):
        return BlockScenario.from_dict(data)


def _parse_field(text: str) -> Tuple[int, List[int]]:
    """'p:c0,c1,...,cn' with the modulus coefficients from the constant term up."""
    try:
        prime, coefficients = text.split(':', 1)
        return int(prime), [int(c) for c in coefficients.split(',')]
    except ValueError:
        raise ValidationError(f"field spec '{text}' is not of the form p:c0,c1,...") from None


def action_input(library: FixtureLibrary, args) -> Tuple[AbelianPGroup, ActionGroup]:
    """Group and action from --scenario, --field, or --group with --action."""
    if getattr(args, 'scenario', None):
        data = read_input(library, args.scenario)
        if not isinstance(data, dict) or 'defect' not in data:
            raise ValidationError(f"'{args.scenario}' is not a scenario")
        with decoding(args.scenario):
            group = AbelianPGroup.from_dict(data['defect'])
            return group, ActionGroup.from_matrices(group, data.get('action', []))
    if getattr(args, 'field', None):
        p, coefficients = _parse_field(args.field)
        return field_model(coefficients, p)
    if not getattr(args, 'group', None):
        raise UsageError("give --scenario, --field, or --group with --action")
    group_data = read_input(library, args.group)
    with decoding(args.group):
        group = AbelianPGroup.from_dict(group_data)
    spec = (args.action or 'trivial').strip()
    if spec == 'trivial':
        return group, ActionGroup.trivial(group)
    if spec == 'gl2':
        if group.exponents != (1, 1):
            raise ValidationError("'gl2' needs the group Z_p^2")
        return group, ActionGroup.from_matrices(group, general_linear_generators(group.p))
    data = read_input(library, spec)
    if isinstance(data, dict):
        data = data.get('action', [])
    if not isinstance(data, list):
        raise ValidationError("action must be a list of matrices")
    with decoding(spec):
        return group, ActionGroup.from_matrices(group, data)


# -- commands ------------------------------------------------------------------

def cmd_exactlin(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    if args.op == 'kron':
        left, right = matrix_input(library, args.left), matrix_input(library, args.right)
        report.inputs.update({'left': left, 'right': right})
        report.results['kronecker'] = kronecker(left, right)
        return

    a = matrix_input(library, args.matrix)
    report.inputs['matrix'] = a
    if args.op == 'snf':
        form = snf(a)
        report.results.update({
            'diagonal': list(form.diagonal),
            'rank': form.rank,
            'left': form.left,
            'right': form.right
        })
        report.add_verdict('snf-transforms-valid', form.verify(a))
    elif args.op == 'kernel':
        basis = kernel_basis(a)
        report.results.update({'rank': basis.rows, 'basis': basis.to_list()})
    elif args.op == 'det':
        report.results['det'] = det(a)
    elif args.op == 'hnf':
        report.results['hnf'] = hnf(a)
    elif args.op == 'adj':
        report.results['adjugate'] = adjugate(a)


def _rational_option(flag: str, text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag} expects an integer or a fraction a/b, got '{text}'") from None


def _form_or_dual(library: FixtureLibrary, args) -> GramForm:
    if args.dual is not None:
        return GramForm.scaled_inverse(matrix_input(library, args.form), _rational_option("--dual", args.dual))
    return form_input(library, args.form)


def cmd_qform(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    budget = settings.node_budget
    if args.op == 'min':
        form = _form_or_dual(library, args)
        report.inputs.update({'form': form.to_list()})
        result = minimum(form, budget)
        report.results.update(result.to_dict())
        if args.expect is not None:
            expected = _rational_option("--expect", args.expect)
            report.add_verdict(f"minimum-equals-{args.expect}", result.value == expected)
    elif args.op == 'congruent':
        first, second = form_input(library, args.first), form_input(library, args.second)
        report.inputs.update({'first': first.to_list(), 'second': second.to_list()})
        report.results.update(congruent(first, second, budget).to_dict())
    elif args.op == 'bound':
        weights, cartan = form_input(library, args.weights), matrix_input(library, args.cartan)
        report.inputs.update({'weights': weights.to_list(), 'cartan': cartan})
        value = weighted_bound(weights, cartan)
        report.results['bound'] = value
        if args.expect is not None:
            report.add_verdict(f"bound-equals-{args.expect}", value == _rational_option("--expect", args.expect))
    elif args.op == 'theta':
        form = _form_or_dual(library, args)
        report.inputs.update({'form': form.to_list(), 'bound': args.bound})
        report.results['theta'] = [{'norm': n, 'count': c} for n, c in theta_prefix(form, args.bound)]


def cmd_embed(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    target = matrix_input(library, args.target)
    report.inputs.update({'target': target, 'rows': args.rows, 'allow_zero_rows': args.allow_zero_rows})
    found = orthogonal_embeddings(target, args.rows, allow_zero_rows=args.allow_zero_rows,
                                  max_nodes=settings.node_budget)
    entries = []
    for e in found:
        entry = e.to_dict()
        entry['decomposition'] = is_decomposable(e.matrix).label()
        entries.append(entry)
    report.results.update({'count': len(found), 'embeddings': entries})


def cmd_paction(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    group, action = action_input(library, args)
    report.inputs.update({'group': group.to_dict(), 'action': action.to_list(), 'action_order': action.order})
    if args.op == 'orbits':
        found = orbits(group, action)
        report.results.update({'count': len(found), 'orbits': [o.to_dict() for o in found]})
    elif args.op == 'free':
        report.results['free'] = has_free_action(group, action)
    elif args.op == 'regular':
        x = regular_orbit_search(group, action)
        report.results['regular_point'] = list(x) if x is not None else None
    elif args.op == 'transversal':
        bijection = invariant_transversal(group, action)
        x = regular_orbit_via_transversal(group, action)
        report.results.update(bijection.to_dict())
        report.results['regular_point'] = list(x) if x is not None else None
        if x is not None:
            report.add_verdict('transversal-point-is-regular', stabilizer(group, action, x).order == 1)
    elif args.op == 'split':
        result = coprime_split_check(group, action)
        report.results.update(result.to_dict())
        report.add_verdict('coprime-split', result.holds)


def cmd_block(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    budget = settings.node_budget
    op = args.op
    if op == 'freecartan':
        report.inputs.update({'z': args.z, 'm': args.m, 'e': args.e})
        report.results['cartan'] = free_case_cartan(args.z, args.m, args.e)
    elif op == 'mod8':
        report.inputs.update({'d_order': args.d_order, 'e': args.e})
        report.results['candidates'] = mod8_candidates(args.d_order, args.e)
        report.results['l'] = l_from_mod8(args.d_order, args.e)
    elif op == 'ibr':
        report.inputs.update({'d_order': args.d_order, 'e': args.e, 'l': args.l})
        result = ibr_bound_check(args.d_order, args.e, args.l)
        report.results.update(result.to_dict())
        report.add_verdict('ibr-bound', result.holds)
    elif op == 'kbcheck':
        cartan = matrix_input(library, args.cartan)
        l = args.l if args.l is not None else cartan.rows
        report.inputs.update({'cartan': cartan, 'd_order': args.d_order, 'l': l})
        result = kb_check_min(cartan, args.d_order, l, budget)
        report.results.update(result.to_dict())
        report.add_verdict('minimum-at-least-l', result.holds)
    elif op in ('goodelem', 'mainchk'):
        group, action = action_input(library, args)
        report.inputs.update({'group': group.to_dict(), 'action': action.to_list()})
        if op == 'goodelem':
            report.inputs['threshold'] = args.threshold
            good = find_good_element(group, action, args.threshold)
            report.results['good_element'] = good.to_dict() if good is not None else None
        else:
            result = theorem_main_check(group, action)
            report.results.update(result.to_dict())
            report.add_verdict('special-linear-on-omega', result.sl_holds)
            report.add_verdict('free-action', result.free_holds)
    else:
        if args.scenario:
            scenario = scenario_input(library, args.scenario)
        else:
            group, action = action_input(library, args)
            scenario = subsection_inventory(group, action)
        report.inputs['scenario'] = scenario.name or args.scenario or 'inline'
        if op == 'inventory':
            report.results.update(scenario.to_dict())
        elif op == 'k':
            report.results.update({'k': k_from_subsections(scenario), 'center_order': scenario.center_order})
        elif op == 'enumerate':
            classes = decomposition_enumerate(scenario, dedupe=not args.no_dedupe, k=args.k, max_nodes=budget)
            report.results.update({'classes': len(classes), 'candidates': [c.to_dict() for c in classes]})


def cmd_verify(args, settings: Settings, library: FixtureLibrary, report: RunReport):
    if args.list:
        report.results['checks'] = claim_ids()
        return
    suite = verify_claim_suite(settings, only=args.only, seedless=getattr(args, 'seedless', False))
    report.inputs.update(suite.inputs)
    report.results.update(suite.results)
    report.verdicts.extend(suite.verdicts)


# -- parser --------------------------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand."""
    common = ArgumentParser(add_help=False)
    common.add_argument('--json', action='store_true', default=argparse.SUPPRESS,
                        help="write the report as JSON")
    common.add_argument('--budget', default=argparse.SUPPRESS,
                        help="backtracking node budget, or 'max' for unbounded")
    common.add_argument('--seedless', action='store_true', default=argparse.SUPPRESS,
                        help="use only systematic (non-random) samples")
    common.add_argument('--pdf', default=argparse.SUPPRESS, metavar='PATH',
                        help="also export the report to a PDF file")
    common.add_argument('--log-level', default=argparse.SUPPRESS,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--fixtures', default=argparse.SUPPRESS, metavar='DIR',
                        help="fixture directory (overrides CARTANKIT_FIXTURES)")
    return common


def _add_action_options(parser: argparse.ArgumentParser):
    parser.add_argument('--group', help="group spec, e.g. '{\"p\": 2, \"exponents\": [2, 2]}'")
    parser.add_argument('--action', help="list of matrices, 'gl2' or 'trivial'")
    parser.add_argument('--field', help="GF(p^n) with Singer cycle and Frobenius, as p:c0,...,cn")
    parser.add_argument('--scenario', help="take the group and action from a scenario")


def build_parser() -> ArgumentParser:
    common = _common_options()
    parser = ArgumentParser(prog='cartankit', parents=[common],
                            description="Exact computations for Cartan matrices of blocks")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    exact = commands.add_parser('exactlin', parents=[common], help="integer matrix normal forms")
    exact.add_argument('op', choices=['snf', 'kernel', 'det', 'hnf', 'adj', 'kron'])
    exact.add_argument('--matrix')
    exact.add_argument('--left')
    exact.add_argument('--right')
    exact.set_defaults(handler=cmd_exactlin)

    forms = commands.add_parser('qform', parents=[common], help="positive-definite forms")
    forms.add_argument('op', choices=['min', 'congruent', 'bound', 'theta'])
    forms.add_argument('--form')
    forms.add_argument('--dual', help="use DUAL·C⁻¹ of the matrix given by --form")
    forms.add_argument('--first')
    forms.add_argument('--second')
    forms.add_argument('--weights')
    forms.add_argument('--cartan')
    forms.add_argument('--bound', type=int, default=4)
    forms.add_argument('--expect')
    forms.set_defaults(handler=cmd_qform)

    embed = commands.add_parser('embed', parents=[common], help="orthogonal embeddings QᵀQ = C")
    embed.add_argument('--target', required=True)
    embed.add_argument('--rows', type=int)
    zero_rows = embed.add_mutually_exclusive_group()
    zero_rows.add_argument('--allow-zero-rows', dest='allow_zero_rows', action='store_true')
    zero_rows.add_argument('--no-zero-rows', dest='allow_zero_rows', action='store_false')
    embed.set_defaults(handler=cmd_embed, allow_zero_rows=False)

    actions = commands.add_parser('paction', parents=[common], help="p-group actions")
    actions.add_argument('op', choices=['orbits', 'free', 'regular', 'transversal', 'split'])
    _add_action_options(actions)
    actions.set_defaults(handler=cmd_paction)

    block = commands.add_parser('block', parents=[common], help="block scenarios")
    block.add_argument('op', choices=['inventory', 'k', 'enumerate', 'kbcheck', 'goodelem', 'mainchk',
                                      'freecartan', 'mod8', 'ibr'])
    _add_action_options(block)
    block.add_argument('--k', type=int)
    block.add_argument('--no-dedupe', action='store_true')
    block.add_argument('--cartan')
    block.add_argument('--d-order', type=int)
    block.add_argument('--l', type=int)
    block.add_argument('--e', type=int)
    block.add_argument('--z', type=int)
    block.add_argument('--m', type=int)
    block.add_argument('--threshold', type=int)
    block.set_defaults(handler=cmd_block)

    verify = commands.add_parser('verify', parents=[common], help="run the bundled claim checks")
    verify.add_argument('--only', metavar='CLAIM')
    verify.add_argument('--list', action='store_true')
    verify.set_defaults(handler=cmd_verify)
    return parser


REQUIRED = {
    ('exactlin', 'kron'): ['left', 'right'],
    ('qform', 'min'): ['form'],
    ('qform', 'theta'): ['form'],
    ('qform', 'congruent'): ['first', 'second'],
    ('qform', 'bound'): ['weights', 'cartan'],
    ('block', 'kbcheck'): ['cartan', 'd_order'],
    ('block', 'goodelem'): ['threshold'],
    ('block', 'freecartan'): ['z', 'm', 'e'],
    ('block', 'mod8'): ['d_order', 'e'],
    ('block', 'ibr'): ['d_order', 'e', 'l'],
}


def _check_required(args):
    op = getattr(args, 'op', None)
    if args.command == 'exactlin' and op != 'kron':
        needed = ['matrix']
    else:
        needed = REQUIRED.get((args.command, op), [])
    missing = [f"--{name.replace('_', '-')}" for name in needed if getattr(args, name, None) is None]
    if missing:
        raise UsageError(f"{args.command} {op} needs {', '.join(missing)}")


def _apply_log_level(level: Optional[str]):
    if level is None:
        return
    for handler in logging.getLogger().handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


def _emit(report: RunReport, as_json: bool, pdf: Optional[str], stream):
    stream.write((report.render_json() if as_json else report.render_text()) + "\n")
    if pdf:
        report.export_pdf(pdf)


def run(argv: Optional[List[str]] = None, settings: Optional[Settings] = None,
        stream=None) -> Tuple[RunReport, int]:
    """Parse argv, run the command, write its report; returns (report, exit code)."""
    stream = stream if stream is not None else sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    settings = settings if settings is not None else Settings.from_env()
    parser = build_parser()
    started = time.perf_counter()

    as_json = '--json' in argv
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        report = RunReport(' '.join(a for a in argv[:2] if not a.startswith('-')) or 'cartankit', error=str(e))
        logger.error(str(e))
        _emit(report, as_json, None, stream)
        return report, EXIT_USAGE

    as_json = getattr(args, 'json', False)
    pdf = getattr(args, 'pdf', None)
    _apply_log_level(getattr(args, 'log_level', None))
    name = f"{args.command} {args.op}" if getattr(args, 'op', None) else args.command
    report = RunReport(name)

    try:
        if getattr(args, 'budget', None) is not None:
            try:
                settings = settings.with_budget(parse_budget(args.budget))
            except ValueError as e:
                raise UsageError(f"invalid --budget: {e}") from None
        if getattr(args, 'fixtures', None):
            settings = dataclasses.replace(settings, fixtures_dir=Path(args.fixtures))
        _check_required(args)
        library = FixtureLibrary(str(settings.fixtures_dir))
        args.handler(args, settings, library, report)
        code = EXIT_OK if report.passed else EXIT_VERDICT_FAILED
    except CartanKitError as e:
        logger.error(f"{name}: {e}")
        report.error = f"{type(e).__name__}: {e}"
        code = e.exit_code
    report.timing_ms = int((time.perf_counter() - started) * 1000)
    _emit(report, as_json, pdf, stream)
    logger.info(f"{name} finished with exit code {code} in {report.timing_ms} ms")
    return report, code
