"""
Matrices over GF(q), permutations and the standard generators of SL(d, q).

Matrices are 2-D ``galois.FieldArray`` instances acting on row vectors, so that
``e_i @ m`` is row ``i`` of ``m``. All public indices are 1-based.
"""
from __future__ import annotations

import enum
import logging

from dataclasses import dataclass
from typing import Iterable, Sequence

import galois
import numpy as np

from . import constants
from .exceptions import DeterminantError, DimensionError, FieldError, ParseError, SingularMatrixError
from .gf import FieldParams, field_for_order


logger = logging.getLogger(__name__)

Matrix = galois.FieldArray


class MatrixKind(enum.Enum):
    MONOMIAL = 'monomial'
    DIAGONAL = 'diagonal'
    LOWER_UNITRIANGULAR = 'lower_unitriangular'
    GENERAL = 'general'


class Permutation:
    """
    Permutation of the points 1..d.

    Products compose left to right, ``(a * b)(i) == b(a(i))``, which makes ``psi``
    a homomorphism for the row-vector action.
    """

    __slots__ = ('images',)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"{images} is not a permutation of 1..{len(images)}")
        self.images = images

    @classmethod
    def identity(cls, d: int) -> Permutation:
        return cls(range(1, d + 1))

    @classmethod
    def from_cycles(cls, d: int, *cycles: Sequence[int]) -> Permutation:
        images = list(range(1, d + 1))
        for cycle in cycles:
            for k, point in enumerate(cycle):
                images[point - 1] = cycle[(k + 1) % len(cycle)]
        return cls(images)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        if self.degree != other.degree:
            raise ValueError("permutations of different degree")
        return Permutation(other(i) for i in self.images)

    def __pow__(self, exponent: int) -> Permutation:
        base = self if exponent >= 0 else self.inverse()
        result = Permutation.identity(self.degree)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def inverse(self) -> Permutation:
        images = [0] * self.degree
        for i, image in enumerate(self.images, start=1):
            images[image - 1] = i
        return Permutation(images)

    def is_identity(self) -> bool:
        return all(image == i for i, image in enumerate(self.images, start=1))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        cycles = []
        for start in range(1, self.degree + 1):
            if start in seen or self(start) == start:
                continue
            cycle = [start]
            seen.add(start)
            point = self(start)
            while point != start:
                cycle.append(point)
                seen.add(point)
                point = self(point)
            cycles.append(tuple(cycle))
        return cycles

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __str__(self):
        cycles = self.cycles()
        if not cycles:
            return '()'
        return ''.join('(' + ' '.join(str(p) for p in cycle) + ')' for cycle in cycles)

    def __repr__(self):
        return f"Permutation({list(self.images)})"


def identity(field: FieldParams, d: int) -> Matrix:
    return field.GF.Identity(d)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return a @ b


def det(m: Matrix):
    return np.linalg.det(m)


def mat_inv(m: Matrix) -> Matrix:
    try:
        return np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("matrix is singular") from exc


def _nonzero_pattern(m: Matrix) -> np.ndarray:
    return m.view(np.ndarray) != 0


def is_monomial(m: Matrix) -> bool:
    pattern = _nonzero_pattern(m)
    return bool(np.all(pattern.sum(axis=0) == 1) and np.all(pattern.sum(axis=1) == 1))


def is_diagonal(m: Matrix) -> bool:
    return is_monomial(m) and bool(np.all(np.diagonal(_nonzero_pattern(m))))


def is_lower_unitriangular(m: Matrix) -> bool:
    values = m.view(np.ndarray)
    return bool(np.all(np.diagonal(values) == 1) and not np.any(np.triu(values, k=1)))


def classify(m: Matrix) -> MatrixKind:
    if is_monomial(m):
        return MatrixKind.DIAGONAL if is_diagonal(m) else MatrixKind.MONOMIAL
    if is_lower_unitriangular(m):
        return MatrixKind.LOWER_UNITRIANGULAR
    return MatrixKind.GENERAL


def psi(m: Matrix) -> Permutation:
    """Permutation pi with e_i @ m a multiple of e_pi(i)."""
    if not is_monomial(m):
        raise ValueError("psi is only defined on monomial matrices")
    columns = np.argmax(_nonzero_pattern(m), axis=1)
    return Permutation(int(c) + 1 for c in columns)


def transvection(field: FieldParams, d: int, i: int, j: int, alpha) -> Matrix:
    """Literal t_ij(alpha) = I + alpha * E_ij for 1 <= j < i <= d."""
    if not 1 <= j < i <= d:
        raise ValueError(f"transvection t_{i}{j} must lie strictly below the diagonal of a {d}x{d} matrix")
    m = identity(field, d)
    m[i - 1, j - 1] = field.GF(alpha)
    return m


def permutation_matrix(field: FieldParams, perm: Permutation) -> Matrix:
    m = field.GF.Zeros((perm.degree, perm.degree))
    for i, image in enumerate(perm.images):
        m[i, image - 1] = 1
    return m


def check_dimension(d: int, needs_x: bool = True) -> None:
    if d < constants.min_dimension:
        raise DimensionError(f"dimension {d} is not supported, d must be at least {constants.min_dimension}")
    if needs_x and d % 2 == 0 and d < 4:
        raise DimensionError(f"even dimension {d} is too small for the generator x")


@dataclass(frozen=True, eq=False)
class StandardGenerators:
    """The ten matrices s, t, delta, v, x and their inverses for SL(d, q)."""

    d: int
    field: FieldParams
    s: Matrix
    s_inv: Matrix
    t: Matrix
    t_inv: Matrix
    delta: Matrix
    delta_inv: Matrix
    v: Matrix
    v_inv: Matrix
    x: Matrix
    x_inv: Matrix

    @property
    def odd(self) -> bool:
        return self.d % 2 == 1

    def as_list(self) -> list[Matrix]:
        """Generators in the order of the first ten memory slots."""
        return [getattr(self, name) for name in constants.generator_slots]

    def memory_layout(self, w: Matrix | None = None, u1: Matrix | None = None, u2: Matrix | None = None) -> list[Matrix]:
        """The 13-slot list Y(w, u1, u2); missing payload defaults to the identity."""
        one = identity(self.field, self.d)
        payload = [one if m is None else m for m in (w, u1, u2)]
        return self.as_list() + payload


def standard_generators(d: int, field: FieldParams) -> StandardGenerators:
    """
    Build s, t, delta, v and x for SL(d, q) and their inverses.

    :raises: DimensionError for d < 3.
    """
    check_dimension(d)
    GF = field.GF
    omega = field.primitive
    minus_one = -field.one

    s = identity(field, d)
    s[0, 0] = 0
    s[1, 1] = 0
    s[0, 1] = 1
    s[1, 0] = minus_one

    t = identity(field, d)
    t[0, 1] = 1

    delta = identity(field, d)
    delta[0, 0] = omega
    delta[1, 1] = field.inv(omega)

    v = GF.Zeros((d, d))
    if d % 2 == 1:
        v[0, d - 1] = 1
        for i in range(1, d):
            v[i, i - 1] = minus_one
    else:
        for i in range(d - 2):
            v[i, i + 2] = 1
        v[d - 2, 0] = 1
        v[d - 1, 1] = 1

    x = identity(field, d)
    if d % 2 == 0:
        x[:4, :4] = 0
        for i in range(3):
            x[i, i + 1] = 1
        x[3, 0] = minus_one

    gens = StandardGenerators(
        d=d, field=field,
        s=s, s_inv=mat_inv(s),
        t=t, t_inv=mat_inv(t),
        delta=delta, delta_inv=mat_inv(delta),
        v=v, v_inv=mat_inv(v),
        x=x, x_inv=mat_inv(x),
    )
    for name, m in zip(constants.generator_slots, gens.as_list()):
        if det(m) != 1:
            raise DeterminantError(f"internal error: generator {name} does not have determinant 1")
    return gens


def check_special(m: Matrix) -> None:
    """:raises: DeterminantError unless m lies in SL(d, q)."""
    value = det(m)
    if value != 1:
        raise DeterminantError(f"matrix has determinant {int(value)}, expected 1")


def random_special(d: int, field: FieldParams, rng: np.random.Generator) -> Matrix:
    """
    Sample an element of SL(d, q).

    Draws uniform matrices until one is invertible, then rescales the first row by
    the inverse determinant.
    """
    while True:
        m = field.GF(rng.integers(0, field.q, size=(d, d)))
        value = det(m)
        if value != 0:
            m[0, :] = m[0, :] * field.inv(value)
            return m


def read_matrix(text: str, source: str | None = None) -> tuple[FieldParams, Matrix]:
    """
    Parse the matrix text format: a ``d q`` header line followed by d rows of packed integers.

    :raises: ParseError for malformed input, reporting the 1-based line number.
    """
    lines = [(n, line.split()) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise ParseError("empty matrix file", source=source)

    header_line, header = lines[0]
    if len(header) != 2:
        raise ParseError("header must be 'd q'", line=header_line, source=source)
    try:
        d, q = (int(token) for token in header)
    except ValueError as exc:
        raise ParseError("header must contain two integers", line=header_line, source=source) from exc
    if d < 1:
        raise ParseError(f"invalid dimension {d}", line=header_line, source=source)
    try:
        field = field_for_order(q)
    except FieldError as exc:
        raise ParseError(exc.msg, line=header_line, source=source) from exc

    rows = lines[1:]
    if len(rows) != d:
        raise ParseError(f"expected {d} rows, found {len(rows)}", line=header_line, source=source)

    values = []
    for number, tokens in rows:
        if len(tokens) != d:
            raise ParseError(f"expected {d} entries, found {len(tokens)}", line=number, source=source)
        try:
            row = [int(token) for token in tokens]
        except ValueError as exc:
            raise ParseError("entries must be integers", line=number, source=source) from exc
        for value in row:
            if not 0 <= value < q:
                raise ParseError(f"entry {value} is outside [0, {q})", line=number, source=source)
        values.append(row)

    return field, field.GF(values)


def format_matrix(m: Matrix, field: FieldParams) -> list[str]:
    d = m.shape[0]
    lines = [f"{d} {field.q}"]
    lines.extend(' '.join(str(int(value)) for value in row) for row in m.view(np.ndarray))
    return lines


class MonomialMatrix:
    """
    Monomial matrix stored as a permutation and one nonzero scalar per row.

    Row i holds ``scalars[i - 1]`` in column ``perm(i)``. Products and inverses
    cost O(d), which keeps evaluating permutation words cheap at large d.
    """

    __slots__ = ('field', 'perm', 'scalars')

    def __init__(self, field: FieldParams, perm: Permutation, scalars):
        self.field = field
        self.perm = perm
        self.scalars = field.GF(scalars)

    @classmethod
    def identity(cls, field: FieldParams, d: int) -> MonomialMatrix:
        return cls(field, Permutation.identity(d), field.GF.Ones(d))

    @classmethod
    def from_matrix(cls, field: FieldParams, m: Matrix) -> MonomialMatrix:
        perm = psi(m)
        columns = np.array(perm.images) - 1
        return cls(field, perm, m[np.arange(m.shape[0]), columns])

    def to_matrix(self) -> Matrix:
        d = self.perm.degree
        m = self.field.GF.Zeros((d, d))
        m[np.arange(d), np.array(self.perm.images) - 1] = self.scalars
        return m

    def __mul__(self, other: MonomialMatrix) -> MonomialMatrix:
        columns = np.array(self.perm.images) - 1
        return MonomialMatrix(self.field, self.perm * other.perm, self.scalars * other.scalars[columns])

    def inverse(self) -> MonomialMatrix:
        columns = np.array(self.perm.images) - 1
        scalars = self.field.GF.Zeros(self.perm.degree)
        scalars[columns] = self.scalars ** -1
        return MonomialMatrix(self.field, self.perm.inverse(), scalars)

    def __eq__(self, other):
        if not isinstance(other, MonomialMatrix):
            return NotImplemented
        return self.perm == other.perm and bool(np.array_equal(self.scalars, other.scalars))

    def __hash__(self):
        return hash((self.perm, tuple(int(c) for c in self.scalars)))
