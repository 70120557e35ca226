"""Positive-definite quadratic forms with exact minima and congruence testing."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import floor, ceil, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ShapeError, ValidationError, ResourceLimitError, InconsistencyError
from .exactlin import (IntMatrix, as_int, parse_rational, rational_to_json, rational_inverse,
                       det, elementary_divisors, inverse_unimodular, ones_plus_identity)

logger = logging.getLogger(__name__)

MAX_MINIMUM_DIM = 12
MAX_CONGRUENCE_DIM = 9

Vector = Tuple[int, ...]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValidationError(f"floating point entry {value!r} in an exact form")
    return Fraction(as_int(value))


def _ldl(rows) -> Tuple[List[List[Fraction]], List[Fraction]]:
    """Exact LDLᵀ decomposition; raises if a pivot is not positive."""
    n = len(rows)
    lower = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for i in range(n):
        lower[i][i] = Fraction(1)
        for j in range(i):
            s = rows[i][j] - sum(lower[i][k] * lower[j][k] * d[k] for k in range(j))
            lower[i][j] = s / d[j]
        d[i] = rows[i][i] - sum(lower[i][k] ** 2 * d[k] for k in range(i))
        if d[i] <= 0:
            raise ValidationError(f"form is not positive definite (pivot {i} is {d[i]})")
    return lower, d


@dataclass(frozen=True)
class GramForm:
    """Symmetric positive-definite matrix with exact rational entries.

    The value of an integer row vector x is x·G·xᵀ.
    """
    dim: int
    entries: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(_as_fraction(x) for x in row) for row in self.entries)
        if self.dim < 1:
            raise ShapeError("a form needs dimension at least 1")
        if len(entries) != self.dim or any(len(row) != self.dim for row in entries):
            raise ShapeError(f"form entries do not make a {self.dim}x{self.dim} matrix")
        object.__setattr__(self, 'entries', entries)
        if any(entries[i][j] != entries[j][i] for i in range(self.dim) for j in range(i)):
            raise ValidationError("form is not symmetric")
        _ = self.decomposition

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> 'GramForm':
        return GramForm(len(rows), tuple(tuple(r) for r in rows))

    @staticmethod
    def from_matrix(matrix: IntMatrix) -> 'GramForm':
        if not matrix.is_square:
            raise ShapeError(f"a form needs a square matrix, got {matrix.rows}x{matrix.cols}")
        return GramForm.from_rows(matrix.tolist())

    @staticmethod
    def scaled_inverse(matrix: IntMatrix, scale=1) -> 'GramForm':
        """The form scale·C⁻¹, e.g. the dual |D|·C⁻¹ of a Cartan matrix."""
        scale = _as_fraction(scale)
        return GramForm.from_rows([[scale * x for x in row] for row in rational_inverse(matrix)])

    @staticmethod
    def from_list(data) -> 'GramForm':
        """Parse a JSON symmetric matrix literal (rationals as {"num","den"})."""
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise ValidationError("form literal must be a non-empty array of arrays")
        return GramForm.from_rows([[parse_rational(x) for x in row] for row in data])

    def to_list(self):
        return [[rational_to_json(x) for x in row] for row in self.entries]

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i][j]

    @cached_property
    def decomposition(self) -> Tuple[List[List[Fraction]], List[Fraction]]:
        """(L, d) with G = L·diag(d)·Lᵀ, L unit lower triangular."""
        return _ldl(self.entries)

    @property
    def determinant(self) -> Fraction:
        result = Fraction(1)
        for d in self.decomposition[1]:
            result *= d
        return result

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.entries for x in row)

    def to_int_matrix(self) -> IntMatrix:
        if not self.is_integral:
            raise ValidationError("form has non-integral entries")
        return IntMatrix.from_rows([[x.numerator for x in row] for row in self.entries])

    def inner(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        return sum((x[i] * self.entries[i][j] * y[j]
                    for i in range(self.dim) if x[i] for j in range(self.dim) if y[j]), Fraction(0))

    def value(self, x: Sequence[int]) -> Fraction:
        if len(x) != self.dim:
            raise ShapeError(f"vector of length {len(x)} for a form of dimension {self.dim}")
        return self.inner(x, x)

    def transform(self, s: IntMatrix) -> 'GramForm':
        """The form S·G·Sᵀ."""
        if s.cols != self.dim:
            raise ShapeError(f"cannot transform a {self.dim}-dim form by a {s.rows}x{s.cols} matrix")
        return GramForm.from_rows([[self.inner(s.row(i), s.row(j)) for j in range(s.rows)]
                                   for i in range(s.rows)])

    def scale(self, factor) -> 'GramForm':
        factor = _as_fraction(factor)
        return GramForm.from_rows([[factor * x for x in row] for row in self.entries])

    def __str__(self):
        cells = [[str(x) for x in row] for row in self.entries]
        width = max(len(c) for row in cells for c in row)
        return "\n".join("[" + " ".join(c.rjust(width) for c in row) + "]" for row in cells)


@dataclass(frozen=True)
class FormMinimum:
    """Minimum of a form with all minimal vectors (one per ± pair)."""
    value: Fraction
    vectors: Tuple[Vector, ...]

    def to_dict(self):
        return {
            'value': rational_to_json(self.value),
            'vectors': [list(v) for v in self.vectors],
            'count': len(self.vectors)
        }


@dataclass(frozen=True)
class Congruence:
    """Outcome of a congruence test: a witness S, or a certificate of distinction.

    Certificates are (kind, left, right) with kind one of 'dimension',
    'determinant', 'elementary_divisors', 'minimum', 'theta' or 'exhausted'.
    """
    witness: Optional[IntMatrix] = None
    certificate: Optional[Tuple[str, object, object]] = None

    @property
    def is_congruent(self) -> bool:
        return self.witness is not None

    def __bool__(self):
        return self.is_congruent

    def to_dict(self):
        if self.witness is not None:
            return {'congruent': True, 'witness': self.witness.to_list()}
        kind, left, right = self.certificate
        return {'congruent': False, 'certificate': {'kind': kind, 'left': _jsonable(left), 'right': _jsonable(right)}}


def _jsonable(value):
    if isinstance(value, Fraction):
        return rational_to_json(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def lll_reduce(form: GramForm, delta: Fraction = Fraction(3, 4)) -> Tuple[GramForm, IntMatrix]:
    """Exact LLL reduction of a Gram matrix.

    Returns (R, T) with T unimodular and R = T·G·Tᵀ.
    """
    n = form.dim
    g = [list(row) for row in form.entries]
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def orthogonalize():
        mu = [[Fraction(0)] * n for _ in range(n)]
        b = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                mu[i][j] = (g[i][j] - sum(mu[j][k] * mu[i][k] * b[k] for k in range(j))) / b[j]
            b[i] = g[i][i] - sum(mu[i][k] ** 2 * b[k] for k in range(i))
        return mu, b

    k = 1
    while k < n:
        mu, b = orthogonalize()
        for j in reversed(range(k)):
            q = round(mu[k][j])
            if q:
                g[k] = [x - q * y for x, y in zip(g[k], g[j])]
                for row in g:
                    row[k] -= q * row[j]
                t[k] = [x - q * y for x, y in zip(t[k], t[j])]
                mu[k][j] -= q
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
        if b[k] >= (delta - mu[k][k - 1] ** 2) * b[k - 1]:
            k += 1
        else:
            g[k], g[k - 1] = g[k - 1], g[k]
            for row in g:
                row[k], row[k - 1] = row[k - 1], row[k]
            t[k], t[k - 1] = t[k - 1], t[k]
            k = max(k - 1, 1)

    return GramForm.from_rows(g), IntMatrix.from_rows(t, cols=n)


def _normalize_sign(v: Sequence[int]) -> Vector:
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def _enumerate(form: GramForm, bound: Fraction, max_nodes: Optional[int]) -> List[Tuple[Fraction, Vector]]:
    """Fincke–Pohst enumeration of nonzero x (one per ± pair) with q(x) ≤ bound."""
    n = form.dim
    lower, d = form.decomposition
    found = []
    x = [0] * n
    nodes = 0

    def descend(i: int, remaining: Fraction, leading_zero: bool):
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise ResourceLimitError(f"short vector enumeration exceeded {max_nodes} nodes", nodes)
        center = -sum((lower[j][i] * x[j] for j in range(i + 1, n) if x[j]), Fraction(0))
        radius = isqrt(floor(remaining / d[i])) + 1
        low, high = floor(center) - radius, ceil(center) + radius
        if leading_zero:
            low = max(low, 0)
        for value in range(low, high + 1):
            step = d[i] * (value - center) ** 2
            if step > remaining:
                continue
            if i == 0 and leading_zero and value == 0:
                continue
            x[i] = value
            if i == 0:
                found.append((bound - remaining + step, tuple(x)))
            else:
                descend(i - 1, remaining - step, leading_zero and value == 0)
        x[i] = 0

    if bound > 0:
        descend(n - 1, Fraction(bound), True)
    logger.debug(f"Enumerated {len(found)} vectors of norm <= {bound} in dimension {n} ({nodes} nodes)")
    return found


def short_vectors(form: GramForm, bound, max_nodes: Optional[int] = None) -> List[Tuple[Fraction, Vector]]:
    """All nonzero integer vectors with q(x) ≤ bound, one per ± pair.

    Vectors have their first nonzero entry positive and are returned
    sorted by (value, vector).
    """
    bound = _as_fraction(bound)
    if form.dim > MAX_MINIMUM_DIM:
        raise ResourceLimitError(f"dimension {form.dim} exceeds the enumeration cap {MAX_MINIMUM_DIM}")
    reduced, t = lll_reduce(form)
    result = []
    for value, y in _enumerate(reduced, bound, max_nodes):
        v = tuple(sum(y[k] * t[k, j] for k in range(form.dim)) for j in range(form.dim))
        result.append((value, _normalize_sign(v)))
    result.sort()
    return result


def minimum(form: GramForm, max_nodes: Optional[int] = None) -> FormMinimum:
    """Exact minimum over nonzero integer vectors, with all minimal vectors."""
    if form.dim > MAX_MINIMUM_DIM:
        raise ResourceLimitError(f"dimension {form.dim} exceeds the minimum cap {MAX_MINIMUM_DIM}")
    reduced, _ = lll_reduce(form)
    bound = min(reduced[i, i] for i in range(form.dim))
    vectors = short_vectors(form, bound, max_nodes)
    value = vectors[0][0]
    result = FormMinimum(value, tuple(v for q, v in vectors if q == value))
    logger.info(f"Minimum of {form.dim}-dim form is {value} ({len(result.vectors)} vector pairs)")
    return result


def theta_prefix(form: GramForm, bound) -> List[Tuple[int, int]]:
    """Representation numbers of an integral form up to bound.

    ±x count as two vectors; norms with no vectors are left out.
    """
    if not form.is_integral:
        raise ValidationError("theta prefix needs an integral form")
    bound = as_int(bound)
    if bound < 1:
        return []
    counts: Dict[int, int] = {}
    for value, _ in short_vectors(form, bound):
        counts[value.numerator] = counts.get(value.numerator, 0) + 2
    return sorted(counts.items())


def congruent(first: GramForm, second: GramForm, max_nodes: Optional[int] = None) -> Congruence:
    """Decide whether S·G1·Sᵀ = G2 for some unimodular S.

    Cheap invariants are compared first; a mismatch is returned as the
    certificate. Otherwise both forms are LLL-reduced and the rows of S are
    matched against vectors of the required norms by backtracking.
    """
    if first.dim != second.dim:
        return Congruence(certificate=('dimension', first.dim, second.dim))
    n = first.dim
    if n > MAX_CONGRUENCE_DIM:
        raise ResourceLimitError(f"dimension {n} exceeds the congruence cap {MAX_CONGRUENCE_DIM}")
    if not (first.is_integral and second.is_integral):
        raise ValidationError("congruence testing needs integral forms")

    d1, d2 = first.determinant, second.determinant
    if d1 != d2:
        return Congruence(certificate=('determinant', d1, d2))
    e1 = elementary_divisors(first.to_int_matrix())
    e2 = elementary_divisors(second.to_int_matrix())
    if e1 != e2:
        return Congruence(certificate=('elementary_divisors', list(e1), list(e2)))
    m1, m2 = minimum(first, max_nodes).value, minimum(second, max_nodes).value
    if m1 != m2:
        return Congruence(certificate=('minimum', m1, m2))

    r1, t1 = lll_reduce(first)
    r2, t2 = lll_reduce(second)
    top = max(max(r1[i, i] for i in range(n)), max(r2[i, i] for i in range(n)))
    theta1, theta2 = theta_prefix(first, top.numerator), theta_prefix(second, top.numerator)
    if theta1 != theta2:
        return Congruence(certificate=('theta', theta1, theta2))

    by_norm: Dict[Fraction, List[Vector]] = {}
    for value, v in short_vectors(r1, max(r2[i, i] for i in range(n)), max_nodes):
        by_norm.setdefault(value, []).extend([v, tuple(-x for x in v)])

    rows: List[Vector] = []
    nodes = 0

    def extend(i: int) -> bool:
        nonlocal nodes
        if i == n:
            return True
        candidates = by_norm.get(r2[i, i], [])
        if i == 0:
            candidates = candidates[::2]
        for v in candidates:
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                raise ResourceLimitError(f"congruence search exceeded {max_nodes} nodes", nodes)
            if all(r1.inner(v, rows[j]) == r2[i, j] for j in range(i)):
                rows.append(v)
                if extend(i + 1):
                    return True
                rows.pop()
        return False

    if not extend(0):
        logger.info(f"No congruence found in dimension {n} after {nodes} nodes")
        return Congruence(certificate=('exhausted', nodes, None))

    witness = inverse_unimodular(t2) @ IntMatrix.from_rows(rows) @ t1
    if first.transform(witness) != second or abs(det(witness)) != 1:
        raise InconsistencyError("congruence witness failed verification")
    logger.debug(f"Congruence found in dimension {n} after {nodes} nodes")
    return Congruence(witness=witness)


def weighted_bound(weights: GramForm, cartan: IntMatrix) -> Fraction:
    """The entrywise inner product Σ Wij·Cij of a weight form and a Cartan matrix.

    The weight matrix must have an integral diagonal and 2W integral.
    """
    if not cartan.is_symmetric():
        raise ValidationError("Cartan matrix is not symmetric")
    if weights.dim != cartan.rows:
        raise ShapeError(f"weight form has dimension {weights.dim}, Cartan matrix {cartan.rows}")
    GramForm.from_matrix(cartan)
    n = weights.dim
    if any(weights[i, i].denominator != 1 for i in range(n)):
        raise ValidationError("weight form has a non-integral diagonal entry")
    if any((2 * weights[i, j]).denominator != 1 for i in range(n) for j in range(n)):
        raise ValidationError("weight form has an entry outside ½Z")
    total = sum((weights[i, j] * cartan[i, j] for i in range(n) for j in range(n)), Fraction(0))
    logger.info(f"Weighted bound of {n}-dim Cartan matrix: {total}")
    return total


def tensor_expansion(x: Sequence[int]) -> Fraction:
    """Σ 4·xᵢM⁻¹xᵢᵀ + Σ_{i<j} 4·(xᵢ−xⱼ)M⁻¹(xᵢ−xⱼ)ᵀ for x ∈ Z⁹ split in three blocks.

    Here M = (1+δ)₃; the result equals 16·x(M⊗M)⁻¹xᵀ.
    """
    if len(x) != 9:
        raise ShapeError(f"expected a vector of length 9, got {len(x)}")
    dual = GramForm.scaled_inverse(ones_plus_identity(3), 4)
    blocks = [tuple(x[3 * i:3 * i + 3]) for i in range(3)]
    total = sum((dual.value(b) for b in blocks), Fraction(0))
    for i in range(3):
        for j in range(i + 1, 3):
            total += dual.value(tuple(a - b for a, b in zip(blocks[i], blocks[j])))
    return total
