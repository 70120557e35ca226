"""Block scenarios: subsection inventories, k(B) arithmetic and Cartan matrix enumeration."""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import DEFAULT_NODE_BUDGET
from .errors import (ValidationError, PreconditionError, IncompleteScenarioError,
                     InconsistencyError, FixtureError)
from .exactlin import IntMatrix, as_int, det, elementary_divisors, kernel_basis, ones_plus_identity
from .embed import block_diagonal_embeddings
from .qform import GramForm, FormMinimum, congruent, minimum
from .paction import (AbelianPGroup, ActionGroup, Element, commutator_part, fixed_points,
                      has_free_action, orbits, stabilizer)

logger = logging.getLogger(__name__)

FREE_ACTION_RULE = "free-action rule"
SUPPLIED = "supplied"


@dataclass
class LRule:
    """Assignment of l-values and Cartan matrices to subsections.

    Per-orbit values and matrices are keyed by the orbit representative.
    With free_action set, a subsection whose centralizer C_A(u) acts freely
    on [D, C_A(u)] gets l = |C_A(u)|, and with free_cartan also the Cartan
    matrix free_case_cartan(z_part, |[D, C_A(u)]|, |C_A(u)|).
    """
    free_action: bool = True
    free_cartan: bool = True
    values: Dict[Element, int] = field(default_factory=dict)
    cartans: Dict[Element, IntMatrix] = field(default_factory=dict)


@dataclass
class SubsectionDatum:
    """One orbit of subsections (u, b_u)."""
    rep: Element
    orbit_size: int
    u_order: int
    centralizer_order: int
    z_part: int
    commutator_order: int
    free: bool
    l_value: Optional[int] = None
    cartan: Optional[IntMatrix] = None
    l_source: str = ""

    def __post_init__(self):
        if self.cartan is None:
            return
        if not self.cartan.is_symmetric():
            raise ValidationError(f"Cartan matrix at {list(self.rep)} is not symmetric")
        GramForm.from_matrix(self.cartan)
        if self.l_value is not None and self.cartan.rows != self.l_value:
            raise ValidationError(
                f"Cartan matrix at {list(self.rep)} has {self.cartan.rows} rows but l = {self.l_value}")
        if any(x % self.z_part for x in self.cartan.entries):
            raise ValidationError(f"Cartan matrix at {list(self.rep)} is not divisible by {self.z_part}")

    @property
    def is_trivial(self) -> bool:
        return not any(self.rep)

    def to_dict(self):
        return {
            'rep': list(self.rep),
            'orbit_size': self.orbit_size,
            'u_order': self.u_order,
            'centralizer_order': self.centralizer_order,
            'z_part': self.z_part,
            'commutator_order': self.commutator_order,
            'free': self.free,
            'l': self.l_value,
            'cartan': self.cartan.to_list() if self.cartan is not None else None,
            'l_source': self.l_source
        }


@dataclass
class BlockScenario:
    """Defect group, inertial action and the subsection inventory."""
    defect: AbelianPGroup
    action: ActionGroup
    subsections: List[SubsectionDatum]
    assumptions: List[str] = field(default_factory=list)
    k_bar: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        total = sum(s.orbit_size for s in self.subsections)
        if total != self.defect.order:
            raise ValidationError(f"orbit sizes sum to {total}, not |D| = {self.defect.order}")
        if not self.action.is_coprime:
            raise PreconditionError(f"e(B) = {self.action.order} is not coprime to p = {self.defect.p}")

    @property
    def inertial_index(self) -> int:
        return self.action.order

    @property
    def center_order(self) -> int:
        """|C_D(I(B))|."""
        return fixed_points(self.defect, self.action).order

    def commutator_subsections(self, include_trivial: bool = True) -> List[SubsectionDatum]:
        """Subsections whose representative lies in [D, I(B)]."""
        commutator = commutator_part(self.defect, self.action)
        return [s for s in self.subsections
                if s.rep in commutator and (include_trivial or not s.is_trivial)]

    def to_dict(self):
        return {
            'name': self.name,
            'defect': self.defect.to_dict(),
            'action': self.action.to_list(),
            'subsections': [s.to_dict() for s in self.subsections],
            'assumptions': list(self.assumptions),
            'k_bar': self.k_bar
        }

    @staticmethod
    def from_dict(data) -> 'BlockScenario':
        """Build a scenario from its JSON form; the inventory is recomputed."""
        if not isinstance(data, dict) or 'defect' not in data:
            raise ValidationError("scenario needs a 'defect' group spec")
        defect = AbelianPGroup.from_dict(data['defect'])
        action = ActionGroup.from_matrices(defect, data.get('action', []))
        rule = LRule(free_action=data.get('l_rule', 'free') == 'free')

        reps = {}
        for orbit in orbits(defect, action):
            for x in _orbit_elements(action, orbit.representative):
                reps[x] = orbit.representative
        given_z = {}
        entries = data.get('subsections', [])
        if not isinstance(entries, list):
            raise ValidationError("scenario 'subsections' must be a list")
        for entry in entries:
            if not isinstance(entry, dict) or 'rep' not in entry:
                raise ValidationError(f"subsection entry needs a 'rep', got {entry!r}")
            rep = reps[defect.reduce(entry['rep'])]
            if 'l' in entry and entry['l'] is not None:
                rule.values[rep] = as_int(entry['l'])
            if entry.get('cartan') is not None:
                rule.cartans[rep] = IntMatrix.from_list(entry['cartan'])
            if 'z_part' in entry:
                given_z[rep] = as_int(entry['z_part'])

        scenario = subsection_inventory(defect, action, rule)
        for s in scenario.subsections:
            if s.rep in given_z and given_z[s.rep] != s.z_part:
                raise ValidationError(f"subsection {list(s.rep)} has z_part {s.z_part}, not {given_z[s.rep]}")
        assumptions = data.get('assumptions', [])
        if not isinstance(assumptions, list) or not all(isinstance(a, str) for a in assumptions):
            raise ValidationError("scenario 'assumptions' must be a list of strings")
        scenario.assumptions.extend(assumptions)
        scenario.k_bar = as_int(data['k_bar']) if data.get('k_bar') is not None else None
        scenario.name = str(data.get('name', ''))
        return scenario


def _orbit_elements(action: ActionGroup, x: Element) -> List[Element]:
    return sorted({a.apply(x) for a in action.elements})


def load_scenario(path) -> BlockScenario:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise FixtureError(f"scenario file {path} not found") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return BlockScenario.from_dict(data)


def subsection_inventory(defect: AbelianPGroup, action: ActionGroup, rule: Optional[LRule] = None) -> BlockScenario:
    """Orbits of I(B) on D with centralizer data, l-values and Cartan matrices."""
    if not action.is_coprime:
        raise PreconditionError(f"e(B) = {action.order} is not coprime to p = {defect.p}")
    rule = rule or LRule()
    subsections = []
    assumptions = []
    for orbit in orbits(defect, action):
        u = orbit.representative
        centralizer = stabilizer(defect, action, u)
        commutator = commutator_part(defect, centralizer)
        z_part = fixed_points(defect, centralizer).order
        free = has_free_action(defect, centralizer, support=commutator)

        l_value, cartan, source = None, None, ""
        if u in rule.values:
            l_value, source = rule.values[u], SUPPLIED
        elif rule.free_action and free:
            l_value, source = centralizer.order, FREE_ACTION_RULE
        if u in rule.cartans:
            cartan = rule.cartans[u]
            if l_value is None:
                l_value, source = cartan.rows, SUPPLIED
        elif rule.free_cartan and free and l_value == centralizer.order:
            cartan = free_case_cartan(z_part, commutator.order, centralizer.order)
        if source:
            assumptions.append(f"l at {list(u)}: {source}")

        subsections.append(SubsectionDatum(
            rep=u,
            orbit_size=orbit.size,
            u_order=defect.element_order(u),
            centralizer_order=centralizer.order,
            z_part=z_part,
            commutator_order=commutator.order,
            free=free,
            l_value=l_value,
            cartan=cartan,
            l_source=source
        ))
    logger.info(f"Inventory of {defect} under a group of order {action.order}: {len(subsections)} subsections")
    return BlockScenario(defect, action, subsections, assumptions)


def k_from_subsections(scenario: BlockScenario) -> int:
    """k(B) = |C_D(I(B))|·Σ l(b_u) over representatives u in [D, I(B)]."""
    chosen = scenario.commutator_subsections()
    missing = [list(s.rep) for s in chosen if s.l_value is None]
    if missing:
        raise IncompleteScenarioError(f"no l-value for subsections {missing}")
    k = scenario.center_order * sum(s.l_value for s in chosen)
    logger.info(f"k(B) = {k} from {len(chosen)} subsections")
    return k


def free_case_cartan(z_part: int, m: int, e: int) -> IntMatrix:
    """The e×e matrix z_part·((m−1)/e + δij)."""
    if e < 1 or (m - 1) % e:
        raise PreconditionError(f"e = {e} does not divide m - 1 = {m - 1}")
    return ones_plus_identity(e, (m - 1) // e).scale(z_part)


@dataclass(frozen=True)
class KbVerdict:
    """min{x·|D|C⁻¹·xᵀ} compared with l; holds licenses k(B) ≤ |D|."""
    minimum: FormMinimum
    l: int
    holds: bool

    def to_dict(self):
        return {'minimum': self.minimum.to_dict(), 'l': self.l, 'holds': self.holds}


def kb_check_min(cartan: IntMatrix, d_order: int, l: int, max_nodes: Optional[int] = None) -> KbVerdict:
    if cartan.rows != l:
        raise PreconditionError(f"Cartan matrix has {cartan.rows} rows but l = {l}")
    result = minimum(GramForm.scaled_inverse(cartan, d_order), max_nodes)
    verdict = KbVerdict(result, l, result.value >= l)
    logger.info(f"kb check: min {result.value} vs l = {l}: {'holds' if verdict.holds else 'fails'}")
    return verdict


def _require_two_power(d_order: int):
    if d_order < 2 or d_order & (d_order - 1):
        raise PreconditionError(f"|D| = {d_order} is not a power of 2")


def mod8_candidates(d_order: int, e: int) -> List[int]:
    """All l in 1..e with (|D|−1)/e + l ≡ |D| (mod 8)."""
    _require_two_power(d_order)
    if e < 1 or e % 2 == 0 or (d_order - 1) % e:
        raise PreconditionError(f"e = {e} must be odd and divide |D| - 1 = {d_order - 1}")
    return [l for l in range(1, e + 1) if ((d_order - 1) // e + l - d_order) % 8 == 0]


def l_from_mod8(d_order: int, e: int) -> int:
    """l(B) from the mod-8 congruence on k(B), which must give l = e."""
    candidates = mod8_candidates(d_order, e)
    if e not in candidates:
        raise InconsistencyError(f"mod-8 congruence for |D| = {d_order}, e = {e} admits {candidates}, not e")
    if len(candidates) > 1:
        logger.debug(f"mod-8 congruence admits {candidates}; taking l = e = {e}")
    return e


@dataclass(frozen=True)
class IbrVerdict:
    """(|D|−1)/e + l ≤ (|D|−1)/l + l, i.e. l ≤ e."""
    k_value: Fraction
    upper: Fraction
    holds: bool

    def to_dict(self):
        return {'k': str(self.k_value), 'upper': str(self.upper), 'holds': self.holds}


def ibr_bound_check(d_order: int, e: int, l: int) -> IbrVerdict:
    if e < 1 or (d_order - 1) % e:
        raise PreconditionError(f"e = {e} does not divide |D| - 1 = {d_order - 1}")
    if l < 1:
        raise PreconditionError(f"l must be positive, got {l}")
    k_value = Fraction(d_order - 1, e) + l
    upper = Fraction(d_order - 1, l) + l
    return IbrVerdict(k_value, upper, k_value <= upper)


@dataclass
class DecompositionSet:
    """One class of joint solutions {Q̃_x} with the Cartan candidate it yields."""
    k: int
    blocks: List[IntMatrix]
    gamma_basis: IntMatrix
    candidate_cartan: IntMatrix
    cartan: IntMatrix
    multiplicity: int = 1
    certificate: Optional[Tuple[str, object, object]] = None

    def to_dict(self):
        data = {
            'k': self.k,
            'blocks': [b.to_list() for b in self.blocks],
            'gamma_rank': self.gamma_basis.rows,
            'gamma_basis': self.gamma_basis.to_list(),
            'candidate_cartan': self.candidate_cartan.to_list(),
            'cartan': self.cartan.to_list(),
            'det': det(self.cartan),
            'multiplicity': self.multiplicity
        }
        if self.certificate is not None:
            kind, left, right = self.certificate
            data['certificate'] = {'kind': kind, 'left': _plain(left), 'right': _plain(right)}
        return data


def _plain(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def decomposition_enumerate(scenario: BlockScenario, dedupe: bool = True, k: Optional[int] = None,
                            max_nodes: Optional[int] = DEFAULT_NODE_BUDGET) -> List[DecompositionSet]:
    """Enumerate the joint matrices Q̃_x and the Cartan candidates Q̃₁ᵀQ̃₁.

    Uses the nontrivial subsections in [D, I(B)], each with C̃_x = C_x/|Z|;
    Γ is the left kernel of the joint matrix and its basis gives Q̃₁.
    With dedupe, candidates are merged up to unimodular congruence.
    """
    chosen = scenario.commutator_subsections(include_trivial=False)
    if not chosen:
        raise PreconditionError("scenario has no nontrivial subsections in [D, I(B)]")
    for s in chosen:
        if s.u_order > 2:
            raise PreconditionError(f"subsection {list(s.rep)} has order {s.u_order} > 2")
        if s.cartan is None:
            raise IncompleteScenarioError(f"no Cartan matrix for subsection {list(s.rep)}")

    z = scenario.center_order
    if k is None:
        k = scenario.k_bar if scenario.k_bar is not None else k_from_subsections(scenario) // z
    blocks = [s.cartan.divide_exact(z) for s in chosen]
    logger.info(f"Enumerating {len(blocks)} blocks of sizes {[b.rows for b in blocks]} with k = {k}")

    results: List[DecompositionSet] = []
    for solution in block_diagonal_embeddings(blocks, k, max_nodes):
        joint = IntMatrix.from_rows([sum((b.row(i) for b in solution), ()) for i in range(k)])
        gamma = kernel_basis(joint)
        if any(d != 1 for d in elementary_divisors(gamma)) or not (gamma @ joint).is_zero():
            raise InconsistencyError("kernel basis is not a saturated annihilator")
        candidate = gamma @ gamma.transpose()
        current = DecompositionSet(k, solution, gamma, candidate, candidate.scale(z))

        if dedupe:
            merged = False
            certificate = None
            for existing in results:
                outcome = congruent(GramForm.from_matrix(existing.candidate_cartan),
                                    GramForm.from_matrix(candidate), max_nodes)
                if outcome.is_congruent:
                    existing.multiplicity += 1
                    merged = True
                    break
                certificate = outcome.certificate
            if merged:
                continue
            current.certificate = certificate
        results.append(current)

    logger.info(f"{len(results)} decomposition classes")
    return results


@dataclass(frozen=True)
class GoodElement:
    element: Element
    commutator_order: int
    free: bool

    def to_dict(self):
        return {'element': list(self.element), 'commutator_order': self.commutator_order, 'free': self.free}


def find_good_element(defect: AbelianPGroup, action: ActionGroup, threshold: int) -> Optional[GoodElement]:
    """First u in canonical order with |[D, C_A(u)]| ≤ threshold.

    Orbit representatives are the least elements of their orbits and the
    commutator order is constant on an orbit, so scanning representatives
    gives the first element overall.
    """
    if not action.is_coprime:
        raise PreconditionError(f"action of order {action.order} is not coprime to p = {defect.p}")
    for orbit in orbits(defect, action):
        u = orbit.representative
        centralizer = stabilizer(defect, action, u)
        commutator = commutator_part(defect, centralizer)
        if commutator.order <= threshold:
            free = has_free_action(defect, centralizer, support=commutator)
            logger.info(f"Good element {list(u)}: |[D, C_A(u)]| = {commutator.order}, free = {free}")
            return GoodElement(u, commutator.order, free)
    return None


@dataclass(frozen=True)
class MainCheck:
    """Determinant and freeness verdicts for an action on a rank ≤ 2 group."""
    sl_holds: bool
    free_holds: bool
    determinants: Tuple[int, ...]

    def to_dict(self):
        return {'sl_holds': self.sl_holds, 'free_holds': self.free_holds,
                'determinants': list(self.determinants)}


def omega_matrix(group: AbelianPGroup, rows) -> IntMatrix:
    """The matrix induced on Ω(P) in the basis p^{e_j−1}·g_j, entries mod p."""
    p, e = group.p, group.exponents
    r = group.rank
    entries = []
    for i in range(r):
        row = []
        for j in range(r):
            if e[j] >= e[i]:
                row.append(rows[i][j] * p ** (e[j] - e[i]) % p)
            else:
                row.append(rows[i][j] // p ** (e[i] - e[j]) % p)
        entries.append(row)
    return IntMatrix.from_rows(entries)


def theorem_main_check(group: AbelianPGroup, action: ActionGroup) -> MainCheck:
    """Whether every generator induces an element of SL(Ω(P)) and the action is free."""
    if group.rank > 2:
        raise PreconditionError(f"group rank {group.rank} exceeds 2")
    if not action.is_coprime:
        raise PreconditionError(f"action of order {action.order} is not coprime to p = {group.p}")
    determinants = tuple(det(omega_matrix(group, g.rows)) % group.p for g in action.generators)
    sl_holds = all(d == 1 % group.p for d in determinants)
    free_holds = has_free_action(group, action)
    return MainCheck(sl_holds, free_holds, determinants)
