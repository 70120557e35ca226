"""Finite abelian p-groups with automorphism actions: orbits, fixed points, regular orbits."""
import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from sympy import Poly, isprime, primitive_root, symbols

from .errors import ValidationError, PreconditionError, ResourceLimitError, InconsistencyError
from .exactlin import IntMatrix, as_int

logger = logging.getLogger(__name__)

MAX_GROUP_ORDER = 2 ** 20
MAX_ACTION_ORDER = 100_000

Element = Tuple[int, ...]


@dataclass(frozen=True)
class AbelianPGroup:
    """The group Z_{p^e1} ⊕ ... ⊕ Z_{p^er} with e1 ≥ ... ≥ er ≥ 1.

    Elements are coordinate tuples. The canonical element order is the
    mixed-radix index with the first coordinate least significant.
    """
    p: int
    exponents: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'exponents', tuple(as_int(e) for e in self.exponents))
        if not isprime(self.p):
            raise ValidationError(f"{self.p} is not a prime")
        if any(e < 1 for e in self.exponents):
            raise ValidationError(f"exponents must be at least 1, got {list(self.exponents)}")
        if list(self.exponents) != sorted(self.exponents, reverse=True):
            raise ValidationError(f"exponents must be non-increasing, got {list(self.exponents)}")
        if self.order > MAX_GROUP_ORDER:
            raise ResourceLimitError(f"group order {self.order} exceeds the cap {MAX_GROUP_ORDER}")

    @staticmethod
    def elementary(p: int, rank: int) -> 'AbelianPGroup':
        return AbelianPGroup(p, (1,) * rank)

    @staticmethod
    def homocyclic(p: int, exponent: int, rank: int) -> 'AbelianPGroup':
        return AbelianPGroup(p, (exponent,) * rank)

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def moduli(self) -> Tuple[int, ...]:
        return tuple(self.p ** e for e in self.exponents)

    @property
    def order(self) -> int:
        return self.p ** sum(self.exponents)

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    @property
    def is_homocyclic(self) -> bool:
        return len(set(self.exponents)) <= 1

    def basis(self) -> List[Element]:
        return [tuple(1 if i == j else 0 for i in range(self.rank)) for j in range(self.rank)]

    def reduce(self, x: Sequence[int]) -> Element:
        if not isinstance(x, (list, tuple)) or len(x) != self.rank:
            raise ValidationError(f"element {x!r} does not have {self.rank} coordinates")
        return tuple(as_int(a) % m for a, m in zip(x, self.moduli))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def sub(self, x: Element, y: Element) -> Element:
        return tuple((a - b) % m for a, b, m in zip(x, y, self.moduli))

    def multiply(self, k: int, x: Element) -> Element:
        return tuple((k * a) % m for a, m in zip(x, self.moduli))

    def element_order(self, x: Element) -> int:
        order = 1
        while any(x):
            x = self.multiply(self.p, x)
            order *= self.p
        return order

    def index(self, x: Element) -> int:
        result, weight = 0, 1
        for a, m in zip(x, self.moduli):
            result += a * weight
            weight *= m
        return result

    def element(self, index: int) -> Element:
        coords = []
        for m in self.moduli:
            index, a = divmod(index, m)
            coords.append(a)
        return tuple(coords)

    def elements(self) -> Iterator[Element]:
        """All elements in canonical order."""
        for index in range(self.order):
            yield self.element(index)

    def to_dict(self):
        return {'p': self.p, 'exponents': list(self.exponents)}

    @staticmethod
    def from_dict(data) -> 'AbelianPGroup':
        if not isinstance(data, dict) or 'p' not in data or 'exponents' not in data:
            raise ValidationError("group spec needs 'p' and 'exponents'")
        exponents = data['exponents']
        if not isinstance(exponents, list) or not exponents:
            raise ValidationError("group exponents must be a non-empty list")
        return AbelianPGroup(as_int(data['p']), tuple(exponents))

    def __str__(self):
        return " ⊕ ".join(f"Z{m}" for m in self.moduli) or "1"


@dataclass(frozen=True)
class ActionMatrix:
    """An automorphism of P acting by x ↦ A·x on coordinate columns.

    Column j holds the image of the j-th generator; row i is reduced
    modulo p^{e_i}.
    """
    group: AbelianPGroup
    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        r = self.group.rank
        rows = tuple(tuple(as_int(x) for x in row) for row in self.rows)
        if len(rows) != r or any(len(row) != r for row in rows):
            raise ValidationError(f"action matrix must be {r}x{r}")
        rows = tuple(tuple(x % m for x in row) for row, m in zip(rows, self.group.moduli))
        object.__setattr__(self, 'rows', rows)
        p, e = self.group.p, self.group.exponents
        for i in range(r):
            for j in range(r):
                if e[i] > e[j] and rows[i][j] % p ** (e[i] - e[j]):
                    raise ValidationError(
                        f"entry ({i},{j}) = {rows[i][j]} does not define a homomorphism "
                        f"(must be divisible by {p ** (e[i] - e[j])})")

    @staticmethod
    def from_matrix(group: AbelianPGroup, matrix) -> 'ActionMatrix':
        """Build and verify an automorphism from an IntMatrix or nested list."""
        rows = matrix.tolist() if isinstance(matrix, IntMatrix) else matrix
        if not isinstance(rows, (list, tuple)) or not all(isinstance(row, (list, tuple)) for row in rows):
            raise ValidationError(f"action matrix must be an array of rows, got {matrix!r}")
        action = ActionMatrix(group, tuple(tuple(row) for row in rows))
        images = {action.apply(x) for x in group.elements()}
        if len(images) != group.order:
            raise ValidationError(f"action matrix {action.to_list()} is not bijective on {group}")
        return action

    @staticmethod
    def identity(group: AbelianPGroup) -> 'ActionMatrix':
        return ActionMatrix(group, tuple(group.basis()))

    def apply(self, x: Element) -> Element:
        return tuple(sum(a * b for a, b in zip(row, x)) % m
                     for row, m in zip(self.rows, self.group.moduli))

    def compose(self, other: 'ActionMatrix') -> 'ActionMatrix':
        """The automorphism x ↦ self(other(x))."""
        r = self.group.rank
        return ActionMatrix(self.group, tuple(
            tuple(sum(self.rows[i][k] * other.rows[k][j] for k in range(r)) for j in range(r))
            for i in range(r)))

    @property
    def is_identity(self) -> bool:
        return self == ActionMatrix.identity(self.group)

    def to_int_matrix(self) -> IntMatrix:
        return IntMatrix.from_rows(self.rows, cols=self.group.rank)

    def to_list(self):
        return [list(row) for row in self.rows]


@dataclass(frozen=True)
class ActionGroup:
    """The group of automorphisms generated by a list of action matrices.

    The closure is computed breadth first; each element keeps the word in
    the generators (indices) by which it was first reached.
    """
    group: AbelianPGroup
    generators: Tuple[ActionMatrix, ...]
    elements: Tuple[ActionMatrix, ...] = field(init=False, compare=False, repr=False)
    words: Tuple[Tuple[int, ...], ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if any(g.group != self.group for g in self.generators):
            raise ValidationError("generators act on a different group")
        identity = ActionMatrix.identity(self.group)
        names: Dict[ActionMatrix, Tuple[int, ...]] = {identity: ()}
        boundary = [identity]
        while boundary:
            frontier = []
            for element in boundary:
                for k, g in enumerate(self.generators):
                    product = g.compose(element)
                    if product not in names:
                        names[product] = (k,) + names[element]
                        frontier.append(product)
                        if len(names) > MAX_ACTION_ORDER:
                            raise ResourceLimitError(f"action group exceeds {MAX_ACTION_ORDER} elements")
            boundary = frontier
        object.__setattr__(self, 'elements', tuple(names))
        object.__setattr__(self, 'words', tuple(names.values()))
        logger.debug(f"Action group on {self.group} closed at order {len(names)}")

    @staticmethod
    def from_matrices(group: AbelianPGroup, matrices: Iterable) -> 'ActionGroup':
        if not isinstance(matrices, (list, tuple)):
            raise ValidationError(f"action must be a list of matrices, got {matrices!r}")
        return ActionGroup(group, tuple(ActionMatrix.from_matrix(group, m) for m in matrices))

    @staticmethod
    def trivial(group: AbelianPGroup) -> 'ActionGroup':
        return ActionGroup(group, ())

    @staticmethod
    def from_elements(group: AbelianPGroup, elements: Sequence[ActionMatrix]) -> 'ActionGroup':
        """The subgroup formed by a closed set of elements, with greedy generators."""
        generators: List[ActionMatrix] = []
        span = {ActionMatrix.identity(group)}
        for element in elements:
            if element not in span:
                generators.append(element)
                span = set(ActionGroup(group, tuple(generators)).elements)
        return ActionGroup(group, tuple(generators))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_coprime(self) -> bool:
        return gcd(self.order, self.group.p) == 1

    def word(self, element: ActionMatrix) -> Tuple[int, ...]:
        return self.words[self.elements.index(element)]

    def to_list(self):
        return [g.to_list() for g in self.generators]


@dataclass(frozen=True)
class Subgroup:
    """A subgroup of P: its elements and a generating set."""
    group: AbelianPGroup
    elements: FrozenSet[Element]
    generators: Tuple[Element, ...]

    @staticmethod
    def generated_by(group: AbelianPGroup, generators: Iterable[Element]) -> 'Subgroup':
        """Span of the given elements; generators that add nothing are dropped."""
        span = {group.zero}
        kept = []
        for g in generators:
            g = group.reduce(g)
            if g in span:
                continue
            kept.append(g)
            multiples = [group.multiply(k, g) for k in range(group.element_order(g))]
            span = {group.add(x, m) for x in span for m in multiples}
        return Subgroup(group, frozenset(span), tuple(kept))

    @staticmethod
    def from_elements(group: AbelianPGroup, elements: Iterable[Element]) -> 'Subgroup':
        return Subgroup.generated_by(group, sorted(elements, key=group.index))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.elements

    def sorted_elements(self) -> List[Element]:
        return sorted(self.elements, key=self.group.index)

    def intersection(self, other: 'Subgroup') -> 'Subgroup':
        return Subgroup.from_elements(self.group, self.elements & other.elements)

    def issubset(self, other: 'Subgroup') -> bool:
        return self.elements <= other.elements

    def to_dict(self):
        return {'order': self.order, 'generators': [list(g) for g in self.generators]}


@dataclass(frozen=True)
class Orbit:
    representative: Element
    size: int
    stabilizer_order: int

    def to_dict(self):
        return {
            'representative': list(self.representative),
            'size': self.size,
            'stabilizer_order': self.stabilizer_order
        }


@dataclass(frozen=True)
class SplitCheck:
    """C_P(A) ∩ [P,A] = 1 and |C_P(A)|·|[P,A]| = |P|."""
    holds: bool
    fixed_order: int
    commutator_order: int
    intersection_order: int

    def to_dict(self):
        return {
            'holds': self.holds,
            'fixed_order': self.fixed_order,
            'commutator_order': self.commutator_order,
            'intersection_order': self.intersection_order
        }


def _orbit_of(action: ActionGroup, x: Element) -> List[Element]:
    orbit = [x]
    seen = {x}
    for y in orbit:
        for g in action.generators:
            z = g.apply(y)
            if z not in seen:
                seen.add(z)
                orbit.append(z)
    return orbit


def _require_same_group(group: AbelianPGroup, action: ActionGroup):
    if action.group != group:
        raise ValidationError(f"action is defined on {action.group}, not on {group}")


def orbits(group: AbelianPGroup, action: ActionGroup) -> List[Orbit]:
    """Orbits of A on P, each with its least element as representative."""
    _require_same_group(group, action)
    seen = set()
    result = []
    for x in group.elements():
        if x in seen:
            continue
        orbit = _orbit_of(action, x)
        seen.update(orbit)
        result.append(Orbit(x, len(orbit), action.order // len(orbit)))
    logger.info(f"{len(result)} orbits of a group of order {action.order} on {group}")
    return result


def stabilizer(group: AbelianPGroup, action: ActionGroup, x: Element) -> ActionGroup:
    """The centralizer C_A(x) as an action group."""
    _require_same_group(group, action)
    x = group.reduce(x)
    return ActionGroup.from_elements(group, [a for a in action.elements if a.apply(x) == x])


def fixed_points(group: AbelianPGroup, action: ActionGroup) -> Subgroup:
    """C_P(A)."""
    _require_same_group(group, action)
    return Subgroup.from_elements(group, (x for x in group.elements()
                                          if all(g.apply(x) == x for g in action.generators)))


def commutator_part(group: AbelianPGroup, action: ActionGroup) -> Subgroup:
    """[P, A], generated by a(g) − g over generators a of A and basis elements g of P."""
    _require_same_group(group, action)
    return Subgroup.generated_by(group, (group.sub(a.apply(g), g)
                                         for a in action.generators for g in group.basis()))


def coprime_split_check(group: AbelianPGroup, action: ActionGroup) -> SplitCheck:
    if not action.is_coprime:
        raise PreconditionError(f"action of order {action.order} is not coprime to p = {group.p}")
    fixed = fixed_points(group, action)
    commutator = commutator_part(group, action)
    meet = fixed.intersection(commutator)
    holds = meet.order == 1 and fixed.order * commutator.order == group.order
    return SplitCheck(holds, fixed.order, commutator.order, meet.order)


def has_free_action(group: AbelianPGroup, action: ActionGroup, support: Optional[Subgroup] = None) -> bool:
    """Whether every nonzero element (of support, if given) has trivial stabilizer."""
    _require_same_group(group, action)
    points = support.sorted_elements() if support is not None else group.elements()
    seen = set()
    for x in points:
        if not any(x) or x in seen:
            continue
        orbit = _orbit_of(action, x)
        if len(orbit) != action.order:
            return False
        seen.update(orbit)
    return True


def regular_orbit_search(group: AbelianPGroup, action: ActionGroup) -> Optional[Element]:
    """First element in canonical order whose stabilizer is trivial."""
    _require_same_group(group, action)
    seen = set()
    for x in group.elements():
        if x in seen:
            continue
        orbit = _orbit_of(action, x)
        if len(orbit) == action.order:
            return x
        seen.update(orbit)
    return None


def omega(group: AbelianPGroup, i: int = 1) -> Subgroup:
    """Ω_i(P), the elements killed by p^i."""
    return Subgroup.generated_by(group, (
        tuple(group.p ** max(e - i, 0) if k == j else 0 for k in range(group.rank))
        for j, e in enumerate(group.exponents) if i > 0))


def frattini(group: AbelianPGroup) -> Subgroup:
    """Φ(P) = pP."""
    return Subgroup.generated_by(group, (group.multiply(group.p, g) for g in group.basis()))


def regorb_hypothesis(group: AbelianPGroup) -> bool:
    """Whether Ω(P) ⊆ Φ(P); for abelian P this means every exponent is at least 2."""
    return omega(group, 1).issubset(frattini(group))


@dataclass(frozen=True)
class EquivariantBijection:
    """An A-equivariant bijection P → Ω(P) × Ω(P), x = r + y ↦ (p·r, y).

    The transversal maps each coset of Ω(P) (keyed by x mod p) to its
    representative r.
    """
    group: AbelianPGroup
    transversal: Dict[Element, Element]
    table: Dict[Element, Tuple[Element, Element]]

    def __call__(self, x: Element) -> Tuple[Element, Element]:
        return self.table[x]

    def inverse(self) -> Dict[Tuple[Element, Element], Element]:
        return {image: x for x, image in self.table.items()}

    def to_dict(self):
        order = self.group.index
        return {
            'transversal': [list(self.transversal[c]) for c in sorted(self.transversal, key=order)],
            'table': [{'x': list(x), 'image': [list(u), list(v)]}
                      for x, (u, v) in sorted(self.table.items(), key=lambda item: order(item[0]))]
        }


def _coset_key(group: AbelianPGroup, x: Element) -> Element:
    return tuple(a % group.p for a in x)


def _fixed_representative(group: AbelianPGroup, coset: Element, stabilizing: List[ActionMatrix]) -> Element:
    """A point of the coset fixed by every element of the coset stabilizer."""
    modulus = group.p ** 2
    total = group.zero
    for a in stabilizing:
        total = group.add(total, a.apply(coset))
    candidate = group.multiply(pow(len(stabilizing), -1, modulus), total)
    if _coset_key(group, candidate) == coset and all(a.apply(candidate) == candidate for a in stabilizing):
        return candidate
    logger.warning(f"Averaging failed for coset {list(coset)}, searching the coset")
    for y in omega(group, 1).sorted_elements():
        candidate = group.add(coset, y)
        if all(a.apply(candidate) == candidate for a in stabilizing):
            return candidate
    raise InconsistencyError(f"no fixed representative in coset {list(coset)}")


def invariant_transversal(group: AbelianPGroup, action: ActionGroup) -> EquivariantBijection:
    """Equivariant bijection P → Ω(P) × Ω(P) for P homocyclic of exponent p².

    For each orbit of A on P/Ω(P) a representative fixed by the coset
    stabilizer is chosen and moved along the orbit. The table is verified
    for bijectivity and equivariance before it is returned.
    """
    _require_same_group(group, action)
    if not group.is_homocyclic or group.exponents[0] != 2:
        raise PreconditionError(f"{group} is not homocyclic of exponent p^2")
    if not action.is_coprime:
        raise PreconditionError(f"action of order {action.order} is not coprime to p = {group.p}")

    cosets = sorted({_coset_key(group, x) for x in group.elements()}, key=group.index)
    transversal: Dict[Element, Element] = {}
    for coset in cosets:
        if coset in transversal:
            continue
        stabilizing = [a for a in action.elements if _coset_key(group, a.apply(coset)) == coset]
        representative = _fixed_representative(group, coset, stabilizing)
        for a in action.elements:
            image = a.apply(representative)
            transversal.setdefault(_coset_key(group, image), image)

    table = {}
    for x in group.elements():
        r = transversal[_coset_key(group, x)]
        table[x] = (group.multiply(group.p, r), group.sub(x, r))

    if len(set(table.values())) != group.order:
        raise InconsistencyError("transversal map is not bijective")
    for a in action.generators:
        for x, (u, v) in table.items():
            if table[a.apply(x)] != (a.apply(u), a.apply(v)):
                raise InconsistencyError(f"transversal map is not equivariant at {list(x)}")
    logger.info(f"Verified equivariant transversal on {group} for a group of order {action.order}")
    return EquivariantBijection(group, transversal, table)


def regular_orbit_via_transversal(group: AbelianPGroup, action: ActionGroup) -> Optional[Element]:
    """A regular point built from a base (b1, b2) of A on Ω(P).

    C_A(b1) ∩ C_A(b2) = 1 makes the preimage of (b1, b2) under the
    equivariant bijection a point with trivial stabilizer.
    """
    bijection = invariant_transversal(group, action)
    inverse = bijection.inverse()
    points = omega(group, 1).sorted_elements()
    for b1 in points:
        fixing = [a for a in action.elements if a.apply(b1) == b1 and not a.is_identity]
        for b2 in points:
            if all(a.apply(b2) != b2 for a in fixing):
                x = inverse[(b1, b2)]
                logger.debug(f"Base ({list(b1)}, {list(b2)}) gives regular point {list(x)}")
                return x
    return None


_x = symbols('x')


def _field_modulus(coefficients: Sequence[int], p: int) -> Poly:
    """Monic polynomial from coefficients listed from the constant term up."""
    modulus = Poly(list(reversed(coefficients)), _x, modulus=p)
    if modulus.degree() < 1 or int(modulus.LC()) % p != 1:
        raise ValidationError(f"field modulus {list(coefficients)} must be monic of positive degree")
    if not modulus.is_irreducible:
        raise ValidationError(f"field modulus {list(coefficients)} is reducible mod {p}")
    return modulus


def _coefficient_column(poly: Poly, p: int, n: int) -> List[int]:
    coeffs = [int(c) % p for c in reversed(poly.all_coeffs())]
    return (coeffs + [0] * n)[:n]


def _columns_to_matrix(columns: List[List[int]]) -> IntMatrix:
    n = len(columns)
    return IntMatrix.from_rows([[columns[j][i] for j in range(n)] for i in range(n)])


def companion_matrix(coefficients: Sequence[int], p: int) -> IntMatrix:
    """Multiplication by the class of x on GF(p^n), in the basis 1, x, ..., x^{n-1}."""
    modulus = _field_modulus(coefficients, p)
    n = modulus.degree()
    return _columns_to_matrix([_coefficient_column(Poly(_x ** (j + 1), _x, modulus=p).rem(modulus), p, n)
                               for j in range(n)])


def frobenius_matrix(coefficients: Sequence[int], p: int) -> IntMatrix:
    """The p-th power map on GF(p^n), in the basis 1, x, ..., x^{n-1}."""
    modulus = _field_modulus(coefficients, p)
    n = modulus.degree()
    return _columns_to_matrix([_coefficient_column(Poly(_x ** (j * p), _x, modulus=p).rem(modulus), p, n)
                               for j in range(n)])


def field_model(coefficients: Sequence[int], p: int) -> Tuple[AbelianPGroup, ActionGroup]:
    """GF(p^n) as an elementary abelian group with the Singer cycle and Frobenius acting."""
    n = len(coefficients) - 1
    group = AbelianPGroup.elementary(p, n)
    action = ActionGroup.from_matrices(group, [companion_matrix(coefficients, p),
                                               frobenius_matrix(coefficients, p)])
    return group, action


def general_linear_generators(p: int) -> List[IntMatrix]:
    """Generators of GL(2, p)."""
    generators = [IntMatrix.from_rows([[1, 1], [0, 1]]), IntMatrix.from_rows([[1, 0], [1, 1]])]
    if p > 2:
        generators.append(IntMatrix.from_rows([[primitive_root(p), 0], [0, 1]]))
    return generators
