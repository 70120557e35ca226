"""Exact integer matrices: normal forms, kernels, determinants."""
import logging
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.polys.domains import ZZ, QQ
from sympy.polys.matrices import DomainMatrix

from .errors import ShapeError, ValidationError

logger = logging.getLogger(__name__)


def as_int(value) -> int:
    """Coerce an exact integer-valued object to int, refusing anything lossy."""
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise ValidationError(f"expected an integer, got {value}")
        return value.numerator
    try:
        return operator.index(value)
    except TypeError:
        raise ValidationError(f"expected an integer, got {value!r}") from None


def parse_rational(data) -> Fraction:
    """Read a rational literal: a plain int or {"num": int, "den": int}."""
    if isinstance(data, dict):
        try:
            num, den = data['num'], data['den']
        except KeyError as e:
            raise ValidationError(f"rational literal is missing {e}") from None
        if isinstance(num, bool) or isinstance(den, bool) or not isinstance(num, int) or not isinstance(den, int):
            raise ValidationError(f"rational literal needs integer num/den, got {data!r}")
        if den == 0:
            raise ValidationError("rational literal has zero denominator")
        return Fraction(num, den)
    if isinstance(data, bool) or not isinstance(data, int):
        raise ValidationError(f"expected int or {{'num','den'}}, got {data!r}")
    return Fraction(data)


def rational_to_json(value: Fraction):
    """Inverse of parse_rational; integers stay plain ints."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return {'num': value.numerator, 'den': value.denominator}


@dataclass(frozen=True)
class IntMatrix:
    """Dense matrix of Python integers, stored row-major.

    Zero-row matrices are allowed so that empty kernel bases have a value;
    parsed user input is required to be non-empty.
    """
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ShapeError(f"negative shape {self.rows}x{self.cols}")
        entries = tuple(as_int(x) for x in self.entries)
        if len(entries) != self.rows * self.cols:
            raise ShapeError(f"{len(entries)} entries do not fill a {self.rows}x{self.cols} matrix")
        object.__setattr__(self, 'entries', entries)

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> 'IntMatrix':
        rows = [list(r) for r in rows]
        if not rows:
            if cols is None:
                raise ShapeError("cannot infer the column count of an empty matrix")
            return IntMatrix(0, cols, ())
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ShapeError("rows have different lengths")
        if cols is not None and cols != width:
            raise ShapeError(f"expected {cols} columns, got {width}")
        return IntMatrix(len(rows), width, tuple(x for r in rows for x in r))

    @staticmethod
    def identity(n: int) -> 'IntMatrix':
        return IntMatrix(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @staticmethod
    def zeros(rows: int, cols: int) -> 'IntMatrix':
        return IntMatrix(rows, cols, (0,) * (rows * cols))

    @staticmethod
    def diagonal(values: Sequence[int]) -> 'IntMatrix':
        n = len(values)
        return IntMatrix(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def tolist(self) -> List[List[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> 'IntMatrix':
        return IntMatrix(self.cols, self.rows,
                         tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    @property
    def T(self) -> 'IntMatrix':
        return self.transpose()

    def __matmul__(self, other: 'IntMatrix') -> 'IntMatrix':
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        columns = [other.column(j) for j in range(other.cols)]
        return IntMatrix(self.rows, other.cols, tuple(
            sum(a * b for a, b in zip(self.row(i), col))
            for i in range(self.rows) for col in columns))

    def __add__(self, other: 'IntMatrix') -> 'IntMatrix':
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: 'IntMatrix') -> 'IntMatrix':
        return self + other.scale(-1)

    def __neg__(self) -> 'IntMatrix':
        return self.scale(-1)

    def scale(self, factor: int) -> 'IntMatrix':
        factor = as_int(factor)
        return IntMatrix(self.rows, self.cols, tuple(factor * x for x in self.entries))

    def divide_exact(self, divisor: int) -> 'IntMatrix':
        """Entrywise division that must leave no remainder."""
        if any(x % divisor for x in self.entries):
            raise ValidationError(f"matrix entries are not all divisible by {divisor}")
        return IntMatrix(self.rows, self.cols, tuple(x // divisor for x in self.entries))

    def is_symmetric(self) -> bool:
        return self.is_square and all(self[i, j] == self[j, i]
                                      for i in range(self.rows) for j in range(i))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_domain(self, domain=ZZ) -> DomainMatrix:
        """Convert to a sympy DomainMatrix over ZZ (or QQ)."""
        return DomainMatrix([[domain(x) for x in self.row(i)] for i in range(self.rows)],
                            (self.rows, self.cols), domain)

    def to_sympy(self) -> Matrix:
        return Matrix(self.tolist())

    def to_list(self) -> List[List[int]]:
        """JSON literal (array of arrays)."""
        return self.tolist()

    @staticmethod
    def from_list(data) -> 'IntMatrix':
        """Parse a JSON matrix literal; rational entries must be integral."""
        if not isinstance(data, list) or not data or not all(isinstance(r, list) and r for r in data):
            raise ValidationError("matrix literal must be a non-empty array of non-empty arrays")
        return IntMatrix.from_rows([[as_int(parse_rational(x)) for x in r] for r in data])

    def __str__(self):
        if self.rows == 0:
            return f"<empty {self.rows}x{self.cols}>"
        width = max(len(str(x)) for x in self.entries)
        return "\n".join("[" + " ".join(str(x).rjust(width) for x in self.row(i)) + "]"
                         for i in range(self.rows))


@dataclass(frozen=True)
class SmithForm:
    """Smith normal form with transforms: left @ A @ right is diagonal."""
    diagonal: Tuple[int, ...]
    left: IntMatrix
    right: IntMatrix

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def divisors(self) -> Tuple[int, ...]:
        """The nonzero elementary divisors."""
        return tuple(d for d in self.diagonal if d != 0)

    def diagonal_matrix(self, rows: int, cols: int) -> IntMatrix:
        return IntMatrix(rows, cols, tuple(
            self.diagonal[i] if i == j and i < len(self.diagonal) else 0
            for i in range(rows) for j in range(cols)))

    def verify(self, a: IntMatrix) -> bool:
        """Check U·A·V = S, unimodularity and the divisibility chain."""
        if self.left @ a @ self.right != self.diagonal_matrix(a.rows, a.cols):
            return False
        if not (is_unimodular(self.left) and is_unimodular(self.right)):
            return False
        if any(d < 0 for d in self.diagonal):
            return False
        return all(self.diagonal[i + 1] % self.diagonal[i] == 0 if self.diagonal[i] else self.diagonal[i + 1] == 0
                   for i in range(len(self.diagonal) - 1))


def _identity_rows(n: int) -> List[List[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _add_row(s, u, target: int, source: int, k: int):
    s[target] = [x + k * y for x, y in zip(s[target], s[source])]
    u[target] = [x + k * y for x, y in zip(u[target], u[source])]


def _add_col(s, v, target: int, source: int, k: int):
    for r in s:
        r[target] += k * r[source]
    for r in v:
        r[target] += k * r[source]


def _swap_rows(s, u, i: int, j: int):
    if i != j:
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]


def _swap_cols(s, v, i: int, j: int):
    if i != j:
        for r in s:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]


def _smallest(s, cells) -> Optional[Tuple[int, int]]:
    """Smallest nonzero |entry| among cells; ties go to the lowest row, then column."""
    best = None
    for i, j in cells:
        x = s[i][j]
        if x and (best is None or (abs(x), i, j) < best):
            best = (abs(x), i, j)
    return None if best is None else best[1:]


def snf(a: IntMatrix) -> SmithForm:
    """Smith normal form with unimodular transforms.

    Pivots are always the smallest nonzero entry of the active block
    (lowest row, then lowest column on ties), so the result is reproducible.
    """
    m, n = a.rows, a.cols
    s = a.tolist()
    u = _identity_rows(m)
    v = _identity_rows(n)

    t = 0
    while t < min(m, n):
        pivot = _smallest(s, ((i, j) for i in range(t, m) for j in range(t, n)))
        if pivot is None:
            break
        _swap_rows(s, u, t, pivot[0])
        _swap_cols(s, v, t, pivot[1])

        while True:
            p = s[t][t]
            for i in range(t + 1, m):
                q = s[i][t] // p
                if q:
                    _add_row(s, u, i, t, -q)
            for j in range(t + 1, n):
                q = s[t][j] // p
                if q:
                    _add_col(s, v, j, t, -q)

            cross = [(i, t) for i in range(t + 1, m)] + [(t, j) for j in range(t + 1, n)]
            remainder = _smallest(s, cross)
            if remainder is not None:
                _swap_rows(s, u, t, remainder[0])
                _swap_cols(s, v, t, remainder[1])
                continue

            blocker = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if s[i][j] % p), None)
            if blocker is not None:
                _add_row(s, u, t, blocker[0], 1)
                continue
            break

        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    diagonal = tuple(s[i][i] for i in range(min(m, n)))
    logger.debug(f"SNF of {m}x{n} matrix: {diagonal}")
    return SmithForm(diagonal,
                     IntMatrix.from_rows(u, cols=m),
                     IntMatrix.from_rows(v, cols=n))


def hnf(a: IntMatrix) -> IntMatrix:
    """Row-style Hermite normal form, zero rows dropped.

    Pivots are positive and every entry above a pivot lies in [0, pivot).
    """
    h = a.tolist()
    m, n = a.rows, a.cols
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nonzero = [i for i in range(r, m) if h[i][c]]
            if not nonzero:
                break
            i = min(nonzero, key=lambda k: (abs(h[k][c]), k))
            h[r], h[i] = h[i], h[r]
            cleared = True
            for k in range(r + 1, m):
                if h[k][c]:
                    q = h[k][c] // h[r][c]
                    h[k] = [x - q * y for x, y in zip(h[k], h[r])]
                    if h[k][c]:
                        cleared = False
            if cleared:
                break
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
        for k in range(r):
            q = h[k][c] // h[r][c]
            if q:
                h[k] = [x - q * y for x, y in zip(h[k], h[r])]
        r += 1
    return IntMatrix.from_rows(h[:r], cols=n)


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Saturated basis of the left kernel {v : v·A = 0}, in Hermite normal form."""
    form = snf(a)
    rows = form.left.tolist()[form.rank:]
    if not rows:
        return IntMatrix.zeros(0, a.rows)
    basis = hnf(IntMatrix.from_rows(rows, cols=a.rows))
    logger.debug(f"Left kernel of {a.rows}x{a.cols} matrix has rank {basis.rows}")
    return basis


def _require_square(a: IntMatrix, what: str):
    if not a.is_square:
        raise ShapeError(f"{what} needs a square matrix, got {a.rows}x{a.cols}")


def det(a: IntMatrix) -> int:
    _require_square(a, "det")
    if a.rows == 0:
        return 1
    return int(a.to_domain().det())


def adjugate(a: IntMatrix) -> IntMatrix:
    """Classical adjoint: A·adj(A) = det(A)·I."""
    _require_square(a, "adjugate")
    if a.rows == 1:
        return IntMatrix.identity(1)
    return IntMatrix.from_rows([[int(x) for x in row] for row in a.to_sympy().adjugate().tolist()])


def rank(a: IntMatrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return int(a.to_domain(ZZ).convert_to(QQ).rank())


def rational_inverse(a: IntMatrix) -> List[List[Fraction]]:
    """Exact inverse over the rationals."""
    _require_square(a, "inverse")
    if det(a) == 0:
        raise ValidationError("matrix is singular")
    inverse = a.to_domain(ZZ).convert_to(QQ).inv().to_Matrix()
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in inverse.tolist()]


def kronecker(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Kronecker product with the block convention (a[i,j]·B)."""
    return IntMatrix(a.rows * b.rows, a.cols * b.cols, tuple(
        a[i, j] * b[k, l]
        for i in range(a.rows) for k in range(b.rows)
        for j in range(a.cols) for l in range(b.cols)))


def block_diag(*blocks: IntMatrix) -> IntMatrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r = c = 0
    for b in blocks:
        for i in range(b.rows):
            out[r + i][c:c + b.cols] = b.row(i)
        r += b.rows
        c += b.cols
    return IntMatrix.from_rows(out, cols=cols)


def elementary_divisors(a: IntMatrix) -> Tuple[int, ...]:
    return snf(a).divisors


def is_unimodular(a: IntMatrix) -> bool:
    return a.is_square and abs(det(a)) == 1


def inverse_unimodular(a: IntMatrix) -> IntMatrix:
    """Integral inverse of a unimodular matrix."""
    d = det(a)
    if abs(d) != 1:
        raise ValidationError(f"matrix is not unimodular (det {d})")
    return adjugate(a).scale(d)


def ones_plus_identity(n: int, offset: int = 1) -> IntMatrix:
    """The matrix (offset + δij) of size n."""
    return IntMatrix(n, n, tuple(offset + (1 if i == j else 0) for i in range(n) for j in range(n)))
