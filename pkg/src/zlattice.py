"""Exact integer-lattice algebra.

Matrices are sympy ``ImmutableMatrix`` objects with integer entries; nothing
on the cohomology path touches a float. Smith forms come from sympy. The
column Hermite form is reduced here because sympy's does not return the
unimodular transform.
"""
import json
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy import ImmutableMatrix, primerange
from sympy.core.intfunc import igcdex
from sympy.matrices.normalforms import invariant_factors, smith_normal_decomp
from sympy.polys.domains import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import BasisFormatError, BlockFormViolation, InternalInvariantError, NotPrimitiveSystemError

logger = logging.getLogger(__name__)

IntMatrix = ImmutableMatrix
Rows = List[List[int]]
Vector = Tuple[int, ...]


@dataclass(frozen=True)
class BasisChange:
    w_vectors: Tuple[Vector, ...]
    P: IntMatrix
    conjugate: IntMatrix
    E: IntMatrix
    F: IntMatrix
    A1: IntMatrix


@dataclass(frozen=True)
class DirectLimitDescriptor:
    n: int
    rank: int
    lattice_basis: Tuple[Vector, ...]
    B: IntMatrix
    det: int
    charpoly: Tuple[int, ...]
    divisible_primes: Tuple[int, ...]
    pretty: str


def int_matrix(rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> IntMatrix:
    rows = [[int(x) for x in row] for row in rows]
    if cols is None:
        cols = len(rows[0]) if rows else 0
    return ImmutableMatrix(len(rows), cols, [x for row in rows for x in row])


def identity(n: int) -> IntMatrix:
    return ImmutableMatrix.eye(n) if n else int_matrix([], 0)


def to_rows(M: IntMatrix) -> Rows:
    return [[int(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]


def columns(M: IntMatrix) -> Tuple[Vector, ...]:
    return tuple(tuple(int(M[i, j]) for i in range(M.rows)) for j in range(M.cols))


def from_columns(vectors: Sequence[Sequence[int]], n: int) -> IntMatrix:
    return int_matrix([[int(v[i]) for v in vectors] for i in range(n)], len(vectors))


def _identity_rows(n: int) -> Rows:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _combine_columns(A: Rows, k: int, j: int, x: int, y: int, p: int, q: int):
    """(col_k, col_j) <- (x col_k + y col_j, p col_k + q col_j)"""
    for row in A:
        a, b = row[k], row[j]
        row[k] = x * a + y * b
        row[j] = p * a + q * b


def hnf(M: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """Column-style Hermite normal form H = M U with U unimodular"""
    A = to_rows(M)
    m, n = M.shape
    U = _identity_rows(n)
    k = 0
    for i in range(m):
        if k == n:
            break
        for j in range(k + 1, n):
            b = A[i][j]
            if b == 0:
                continue
            a = A[i][k]
            x, y, g = (int(v) for v in igcdex(a, b))
            _combine_columns(A, k, j, x, y, -b // g, a // g)
            _combine_columns(U, k, j, x, y, -b // g, a // g)
        pivot = A[i][k]
        if pivot == 0:
            continue
        if pivot < 0:
            _combine_columns(A, k, k, -1, 0, -1, 0)
            _combine_columns(U, k, k, -1, 0, -1, 0)
            pivot = -pivot
        for j in range(k):
            q = A[i][j] // pivot
            if q:
                for R in (A, U):
                    for row in R:
                        row[j] -= q * row[k]
        k += 1
    return int_matrix(A, n), int_matrix(U, n)


def _smith(M: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """U M V = D with a non-negative diagonal"""
    D, U, V = smith_normal_decomp(M, domain=ZZ)
    D, U = D.as_mutable(), U.as_mutable()
    for i in range(min(D.shape)):
        if D[i, i] < 0:
            D[i, :] = -D[i, :]
            U[i, :] = -U[i, :]
    return ImmutableMatrix(D), ImmutableMatrix(U), ImmutableMatrix(V)


def snf(M: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: U M V = D diagonal, d_i | d_(i+1), U and V unimodular"""
    if 0 in M.shape:
        return M, identity(M.rows), identity(M.cols)
    return _smith(M)


def elementary_divisors(M: IntMatrix) -> List[int]:
    size = min(M.shape)
    factors = [abs(int(x)) for x in invariant_factors(M, domain=ZZ)] if size else []
    return factors + [0] * (size - len(factors))


def saturation(M: IntMatrix) -> IntMatrix:
    """Columns spanning (column space of M over Q) intersected with Z^m"""
    m, n = M.shape
    r = _rank(M) if m and n else 0
    if r == 0:
        return int_matrix([[] for _ in range(m)], 0)
    _, U, _ = _smith(M)
    return _inverse(U)[:, :r]


def _rational(M: IntMatrix) -> DomainMatrix:
    return DomainMatrix.from_Matrix(M).to_field()


def _rank(M: IntMatrix) -> int:
    return _rational(M).rank()


def _inverse(U: IntMatrix) -> IntMatrix:
    return ImmutableMatrix(_rational(U).inv().to_Matrix())


def is_unimodular(P: IntMatrix) -> bool:
    return P.is_square and abs(int(P.det())) == 1


def complete_basis(W: Sequence[Sequence[int]], d: int) -> IntMatrix:
    """Unimodular d x d matrix whose first columns are the vectors of W, in order"""
    m = len(W)
    if m == 0:
        return identity(d)
    stack = from_columns(W, d)
    D, U, _ = _smith(stack)
    divisors = [int(D[i, i]) for i in range(min(d, m))]
    if len(divisors) < m or any(x != 1 for x in divisors):
        raise NotPrimitiveSystemError(divisors)
    return stack.row_join(_inverse(U)[:, m:])


def conjugate_and_extract(At: IntMatrix, P: IntMatrix, p: int) -> BasisChange:
    """P^-1 At P = [[E, F], [0, A1]] with the zero block p-1 columns wide"""
    if not is_unimodular(P):
        raise InternalInvariantError(f"basis matrix has determinant {P.det()}, expected +-1")
    conjugate = _rational(P).inv().to_Matrix() * At * P
    if not all(x.is_integer for x in conjugate):
        raise BlockFormViolation("conjugated matrix is not integral")
    conjugate = ImmutableMatrix(conjugate)

    m = p - 1
    lower_left = conjugate[m:, :m]
    if not lower_left.is_zero_matrix:
        raise BlockFormViolation(
            f"lower-left block is not zero: {to_rows(lower_left)}")

    w_vectors = columns(P[:, :m])
    return BasisChange(
        w_vectors=w_vectors,
        P=P,
        conjugate=conjugate,
        E=conjugate[:m, :m],
        F=conjugate[:m, m:],
        A1=conjugate[m:, m:],
    )


def _mod_p(M: IntMatrix, p: int) -> DomainMatrix:
    field = GF(p)
    n, c = M.shape
    return DomainMatrix([[field(int(M[i, j]) % p) for j in range(c)] for i in range(n)], (n, c), field)


def eventual_mod_p_rank(M: IntMatrix, p: int) -> int:
    """Rank over GF(p) of M^k once the ranks stop dropping"""
    if M.rows == 0:
        return 0
    X = _mod_p(M, p)
    current, rank = X, X.rank()
    while True:
        following = current * X
        following_rank = following.rank()
        if following_rank == rank:
            return rank
        current, rank = following, following_rank


def _nilpotent_mod(B: IntMatrix, p: int) -> bool:
    return (_mod_p(B, p) ** B.rows).is_zero_matrix


def free_group(r: int) -> str:
    if r == 0:
        return "0"
    return "Z" if r == 1 else f"Z^{r}"


def format_matrix(M: IntMatrix) -> str:
    return "[" + ",".join("[" + ",".join(str(x) for x in row) + "]" for row in to_rows(M)) + "]"


def _pretty(rank: int, B: IntMatrix, det: int) -> str:
    if rank == 0:
        return "0"
    if abs(det) == 1:
        return free_group(rank)
    if rank == 1:
        return f"Z[1/{abs(int(B[0, 0]))}]"
    return f"lim→ of {format_matrix(B)} (rank {rank}, det {det})"


def direct_limit_invariants(M: IntMatrix, max_prime: int = 97) -> DirectLimitDescriptor:
    """Describe lim Z^n -> Z^n -> ... under M through its action on the eventual image"""
    n = M.rows
    if n == 0:
        return DirectLimitDescriptor(0, 0, (), int_matrix([], 0), 1, (1,), (), "0")

    image, rank = identity(n), n
    while True:
        following = image * M
        following_rank = _rank(following)
        if following_rank == rank:
            break
        image, rank = following, following_rank

    if rank == n:
        lattice = identity(n)
        B = ImmutableMatrix(M)
    elif rank == 0:
        lattice = int_matrix([[] for _ in range(n)], 0)
        B = int_matrix([], 0)
    else:
        lattice = saturation(image)
        L = _rational(lattice)
        coordinates = ((L.transpose() * L).inv() * L.transpose() * _rational(M * lattice)).to_Matrix()
        if not all(x.is_integer for x in coordinates) or lattice * coordinates != M * lattice:
            raise InternalInvariantError("eventual image lattice is not invariant")
        B = ImmutableMatrix(coordinates)

    if rank == 0:
        det, charpoly, divisible = 1, (1,), ()
    else:
        det = int(B.det())
        charpoly = tuple(int(c) for c in B.charpoly().all_coeffs())
        if (-1) ** rank * charpoly[-1] != det:
            raise InternalInvariantError("determinant disagrees with the characteristic polynomial")
        divisible = tuple(p for p in primerange(2, max_prime + 1) if _nilpotent_mod(B, p))

    logger.debug(f"Direct limit of {n}x{n} matrix: rank {rank}, det {det}")
    return DirectLimitDescriptor(
        n=n,
        rank=rank,
        lattice_basis=columns(lattice),
        B=B,
        det=det,
        charpoly=charpoly,
        divisible_primes=divisible,
        pretty=_pretty(rank, B, det),
    )


def matrix_to_json(M: IntMatrix) -> List[List[str]]:
    return [[str(x) for x in row] for row in to_rows(M)]


def matrix_from_json(data) -> IntMatrix:
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise BasisFormatError("matrix must be a list of rows")
    try:
        rows = [[int(x) for x in row] for row in data]
    except (TypeError, ValueError) as e:
        raise BasisFormatError(f"matrix entries must be integers: {e}")
    if len({len(row) for row in rows}) > 1:
        raise BasisFormatError("matrix rows have different lengths")
    return int_matrix(rows)


def parse_basis(text: str) -> IntMatrix:
    """Row-major basis matrix, as JSON (decimal strings or numbers) or whitespace-separated rows"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [line.split('#', 1)[0].split() for line in text.splitlines() if line.split('#', 1)[0].strip()]
    P = matrix_from_json(data)
    if not P.is_square or P.rows == 0:
        raise BasisFormatError(f"basis matrix must be square, got {P.rows}x{P.cols}")
    return P
