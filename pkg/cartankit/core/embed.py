"""Orthogonal embeddings: integral factorizations C = QᵀQ."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .config import DEFAULT_NODE_BUDGET
from .errors import ValidationError, ResourceLimitError
from .exactlin import IntMatrix, block_diag
from .qform import GramForm, short_vectors

logger = logging.getLogger(__name__)

MAX_EMBED_DIM = 9

Vector = Tuple[int, ...]
RowFilter = Callable[[Vector], bool]


def _gram(q: IntMatrix) -> IntMatrix:
    return q.transpose() @ q


def _sign(v: Sequence[int]) -> Vector:
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def _row_key(v: Vector):
    return (-sum(x * x for x in v), tuple(-x for x in v))


def canonical_form(q: IntMatrix) -> IntMatrix:
    """Representative of Q up to row permutation and per-row sign.

    Rows get a positive first nonzero entry and are sorted by descending
    squared norm, then in descending lexicographic order.
    """
    rows = sorted((_sign(q.row(i)) for i in range(q.rows)), key=_row_key)
    return IntMatrix.from_rows(rows, cols=q.cols)


@dataclass(frozen=True)
class Embedding:
    """A factorization QᵀQ = C, held in canonical form."""
    matrix: IntMatrix
    target: IntMatrix

    def __post_init__(self):
        if _gram(self.matrix) != self.target:
            raise ValidationError("embedding does not reproduce its target")

    @property
    def nonzero_rows(self) -> int:
        return sum(1 for i in range(self.matrix.rows) if any(self.matrix.row(i)))

    def columns(self, start: int, stop: int) -> IntMatrix:
        """The column slice Q[:, start:stop]."""
        return IntMatrix.from_rows([self.matrix.row(i)[start:stop] for i in range(self.matrix.rows)],
                                   cols=stop - start)

    def to_dict(self):
        return {
            'matrix': self.matrix.to_list(),
            'rows': self.matrix.rows,
            'nonzero_rows': self.nonzero_rows
        }


@dataclass(frozen=True)
class Decomposability:
    """Connected components of the bipartite row/column graph of Q."""
    decomposable: bool
    parts: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]

    def label(self) -> str:
        """Partition written as r1,c1|r2,c2 (1-based)."""
        return "|".join(",".join([f"r{i + 1}" for i in rows] + [f"c{j + 1}" for j in cols])
                        for rows, cols in self.parts)

    def to_dict(self):
        return {
            'decomposable': self.decomposable,
            'parts': [{'rows': list(rows), 'cols': list(cols)} for rows, cols in self.parts],
            'label': self.label()
        }


class _Search:
    """Backtracking over multisets of candidate rows against the residual Gram target."""

    def __init__(self, target: IntMatrix, candidates: List[Tuple[Vector, int, Fraction]],
                 row_count: Optional[int], allow_zero_rows: bool, max_nodes: Optional[int]):
        self.n = target.rows
        self.candidates = candidates
        self.row_count = row_count
        self.allow_zero_rows = allow_zero_rows
        self.max_nodes = max_nodes
        self.nodes = 0
        self.solutions: List[List[Vector]] = []
        self.smallest_dual = min((c[2] for c in candidates), default=Fraction(1))
        self.residual = target.tolist()

    def run(self):
        self._extend(0, Fraction(self.n), [])
        return self.solutions

    def _feasible(self, r) -> bool:
        n = self.n
        for i in range(n):
            if r[i][i] < 0:
                return False
            if r[i][i] == 0 and any(r[i][j] for j in range(n)):
                return False
        for i in range(n):
            for j in range(i + 1, n):
                if r[i][j] * r[i][j] > r[i][i] * r[j][j]:
                    return False
        return True

    def _extend(self, start: int, budget: Fraction, chosen: List[Vector]):
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise ResourceLimitError(f"embedding search exceeded {self.max_nodes} nodes", self.nodes)

        r = self.residual
        if all(r[i][i] == 0 for i in range(self.n)):
            if self.row_count is None or len(chosen) == self.row_count or (
                    self.allow_zero_rows and len(chosen) < self.row_count):
                self.solutions.append(list(chosen))
            return

        if self.row_count is not None:
            remaining = self.row_count - len(chosen)
            if remaining <= 0 or budget > remaining:
                return
            if not self.allow_zero_rows and budget < remaining * self.smallest_dual:
                return

        for index in range(start, len(self.candidates)):
            v, lead, dual = self.candidates[index]
            if any(r[i][i] for i in range(lead)):
                break
            if dual > budget:
                continue
            support = [i for i in range(self.n) if v[i]]
            for i in support:
                for j in support:
                    r[i][j] -= v[i] * v[j]
            if self._feasible(r):
                chosen.append(v)
                self._extend(index, budget - dual, chosen)
                chosen.pop()
            for i in support:
                for j in support:
                    r[i][j] += v[i] * v[j]


def orthogonal_embeddings(target: IntMatrix, row_count: Optional[int] = None,
                          allow_zero_rows: bool = False, row_filter: Optional[RowFilter] = None,
                          max_nodes: Optional[int] = DEFAULT_NODE_BUDGET) -> List[Embedding]:
    """All integral Q with QᵀQ = C, up to row permutation and row signs.

    Args:
        target: symmetric positive-definite integral C.
        row_count: fixes the number of rows k of Q.
        allow_zero_rows: with row_count, also return solutions with fewer
            nonzero rows, padded with zero rows.
        row_filter: predicate every row of Q must satisfy.
        max_nodes: backtracking node budget (None for unbounded).

    Returns:
        Embeddings in canonical form, canonically sorted.
    """
    if not target.is_symmetric():
        raise ValidationError("embedding target is not symmetric")
    n = target.rows
    if n > MAX_EMBED_DIM:
        raise ResourceLimitError(f"dimension {n} exceeds the embedding cap {MAX_EMBED_DIM}")
    if row_count is not None and row_count < 0:
        raise ValidationError(f"row count must be non-negative, got {row_count}")
    dual = GramForm.scaled_inverse(target)
    GramForm.from_matrix(target)

    candidates = []
    for value, v in short_vectors(dual, 1, max_nodes):
        if any(v[i] * v[i] > target[i, i] for i in range(n)):
            continue
        if row_filter is not None and not row_filter(v):
            continue
        lead = next(i for i in range(n) if v[i])
        candidates.append((v, lead, value))
    candidates.sort(key=lambda c: (c[1], _row_key(c[0])))
    logger.debug(f"{len(candidates)} candidate rows for a {n}-dim target")

    search = _Search(target, candidates, row_count, allow_zero_rows, max_nodes)
    embeddings = []
    for rows in search.run():
        if row_count is not None:
            rows = rows + [(0,) * n] * (row_count - len(rows))
        embeddings.append(Embedding(canonical_form(IntMatrix.from_rows(rows, cols=n)), target))
    embeddings.sort(key=lambda e: (e.matrix.rows, e.matrix.entries))
    logger.info(f"Found {len(embeddings)} embedding classes of a {n}-dim target ({search.nodes} nodes)")
    return embeddings


def block_diagonal_embeddings(blocks: Sequence[IntMatrix], row_count: int,
                              max_nodes: Optional[int] = DEFAULT_NODE_BUDGET) -> List[List[IntMatrix]]:
    """Joint embeddings Q_x of several targets with Q_xᵀQ_y = 0 for x ≠ y.

    Every row must be nonzero on every block. Solutions are returned up to
    simultaneous row permutation and row sign change, each as the list of
    per-block matrices.
    """
    bounds = []
    start = 0
    for b in blocks:
        bounds.append((start, start + b.cols))
        start += b.cols

    def nonzero_on_every_block(v: Vector) -> bool:
        return all(any(v[a:b]) for a, b in bounds)

    solutions = orthogonal_embeddings(block_diag(*blocks), row_count,
                                      row_filter=nonzero_on_every_block, max_nodes=max_nodes)
    return [[e.columns(a, b) for a, b in bounds] for e in solutions]


def is_decomposable(q: IntMatrix) -> Decomposability:
    """Whether simultaneous row and column permutations make Q block diagonal.

    Rows and columns are joined when the entry between them is nonzero; the
    components of that graph are the blocks.
    """
    parent = list(range(q.rows + q.cols))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(q.rows):
        for j in range(q.cols):
            if q[i, j]:
                a, b = find(i), find(q.rows + j)
                if a != b:
                    parent[max(a, b)] = min(a, b)

    groups = {}
    for node in range(q.rows + q.cols):
        groups.setdefault(find(node), []).append(node)
    parts = []
    for members in groups.values():
        rows = tuple(m for m in members if m < q.rows)
        cols = tuple(m - q.rows for m in members if m >= q.rows)
        parts.append((rows, cols))
    parts.sort(key=lambda p: (p[0][0] if p[0] else q.rows, p[1][0] if p[1] else q.cols))
    return Decomposability(len(parts) > 1, tuple(parts))
