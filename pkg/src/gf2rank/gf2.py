"""Dense linear algebra over GF(2) on bit-packed rows.

A matrix is a tuple of row words; bit ``j`` of row ``i`` is entry ``(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_DIM = 64


class SingularMatrix(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        if not (1 <= len(self.rows) <= MAX_DIM and 1 <= self.ncols <= MAX_DIM):
            raise ValueError(f"shape {len(self.rows)}x{self.ncols} out of range")
        mask = (1 << self.ncols) - 1
        for r in self.rows:
            if r < 0 or r & ~mask:
                raise ValueError("row has bits beyond the column count")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]]) -> BitMatrix:
        ncols = len(entries[0])
        rows = tuple(sum((v & 1) << j for j, v in enumerate(row)) for row in entries)
        return cls(rows, ncols)

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return mul(self, other)

    def __add__(self, other: BitMatrix) -> BitMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    @property
    def T(self) -> BitMatrix:
        return transpose(self)

    def __str__(self) -> str:
        return "\n".join(
            "".join(str((r >> j) & 1) for j in range(self.ncols)) for r in self.rows
        )


def identity(n: int) -> BitMatrix:
    return BitMatrix(tuple(1 << i for i in range(n)), n)


def zeros(rows: int, cols: int) -> BitMatrix:
    return BitMatrix((0,) * rows, cols)


def shift(n: int) -> BitMatrix:
    """Nilpotent shift N with ones on the superdiagonal."""
    return BitMatrix(tuple((1 << (i + 1)) if i + 1 < n else 0 for i in range(n)), n)


def mul_rows(a_rows: Iterable[int], b_rows: Sequence[int]) -> tuple[int, ...]:
    out = []
    for r in a_rows:
        acc = 0
        k = 0
        while r:
            if r & 1:
                acc ^= b_rows[k]
            r >>= 1
            k += 1
        out.append(acc)
    return tuple(out)


def mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.ncols != b.nrows:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return BitMatrix(mul_rows(a.rows, b.rows), b.ncols)


def transpose_rows(rows: Sequence[int], ncols: int) -> tuple[int, ...]:
    out = [0] * ncols
    for i, r in enumerate(rows):
        j = 0
        while r:
            if r & 1:
                out[j] |= 1 << i
            r >>= 1
            j += 1
    return tuple(out)


def transpose(m: BitMatrix) -> BitMatrix:
    return BitMatrix(transpose_rows(m.rows, m.ncols), m.nrows)


def power(m: BitMatrix, e: int) -> BitMatrix:
    if m.nrows != m.ncols:
        raise ValueError("power of a non-square matrix")
    result = identity(m.nrows)
    base = m
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


def matvec(m: BitMatrix, x: int) -> int:
    """Product M·x for a column vector x packed as an int (bit i = x_i)."""
    out = 0
    for i, r in enumerate(m.rows):
        if (r & x).bit_count() & 1:
            out |= 1 << i
    return out


def rank_of_rows(rows: Iterable[int]) -> int:
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def rank(m: BitMatrix) -> int:
    return rank_of_rows(m.rows)


def _rref_with_ops(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Row-reduce, tracking the row operations applied (E·A = RREF(A))."""
    a = list(rows)
    ops = [1 << i for i in range(len(a))]
    r = 0
    for c in range(ncols):
        bit = 1 << c
        piv = next((i for i in range(r, len(a)) if a[i] & bit), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        ops[r], ops[piv] = ops[piv], ops[r]
        for i in range(len(a)):
            if i != r and a[i] & bit:
                a[i] ^= a[r]
                ops[i] ^= ops[r]
        r += 1
        if r == len(a):
            break
    return a, ops


def rcef(m: BitMatrix) -> tuple[BitMatrix, BitMatrix]:
    """Reduced column echelon form R and invertible colops with R = M·colops."""
    t_rows = transpose_rows(m.rows, m.ncols)
    red, ops = _rref_with_ops(t_rows, m.nrows)
    r_mat = BitMatrix(transpose_rows(red, m.nrows), m.ncols)
    colops = BitMatrix(transpose_rows(ops, m.ncols), m.ncols)
    return r_mat, colops


def invert(m: BitMatrix) -> BitMatrix:
    n = m.nrows
    if m.ncols != n:
        raise SingularMatrix("non-square matrix")
    red, ops = _rref_with_ops(m.rows, n)
    if any(red[i] != 1 << i for i in range(n)):
        raise SingularMatrix("matrix is not invertible")
    return BitMatrix(tuple(ops), n)


def is_invertible(m: BitMatrix) -> bool:
    return m.nrows == m.ncols and rank(m) == m.nrows


def is_nilpotent_max_index(m: BitMatrix, e: int) -> bool:
    if m.nrows != m.ncols or e != m.nrows:
        raise ValueError("expected a square matrix with e = rows")
    below = power(m, e - 1)
    return not any(mul(below, m).rows) and any(below.rows)


def nilpotent_conjugator(m: BitMatrix) -> BitMatrix:
    """P with columns (M^{l-1}v, ..., Mv, v) such that P^{-1} M P = N."""
    ell = m.nrows
    if m.ncols != ell or not is_nilpotent_max_index(m, ell):
        raise PreconditionViolated("matrix is not nilpotent of maximal index")
    top = power(m, ell - 1)
    seeds = [ell - 1] + [i for i in range(ell - 1)]
    for s in seeds:
        v = 1 << s
        if matvec(top, v) == 0:
            continue
        cols = [0] * ell
        cols[ell - 1] = v
        for j in range(ell - 2, -1, -1):
            cols[j] = matvec(m, cols[j + 1])
        p = BitMatrix(transpose_rows(cols, ell), ell)
        if rank(p) == ell:
            return p
    raise PreconditionViolated("no seed vector gives an invertible conjugator")


def solve(a: BitMatrix, b: int) -> int | None:
    """Return x with A·x = b (bit i of b is b_i), or None if b is not in the column space."""
    n = a.ncols
    aug = [r | (((b >> i) & 1) << n) for i, r in enumerate(a.rows)]
    red, _ = _rref_with_ops(aug, n + 1)
    x = 0
    mask = (1 << n) - 1
    for r in red:
        coeffs = r & mask
        rhs = (r >> n) & 1
        if coeffs == 0:
            if rhs:
                return None
            continue
        piv = (coeffs & -coeffs).bit_length() - 1
        if rhs:
            x |= 1 << piv
    return x


def kron(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Kronecker product, entry (i*q+h, j*q'+k) = a[i,j]·b[h,k]."""
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            acc = 0
            j = 0
            x = ra
            while x:
                if x & 1:
                    acc |= rb << (j * b.ncols)
                x >>= 1
                j += 1
            rows.append(acc)
    return BitMatrix(tuple(rows), a.ncols * b.ncols)


def gl_generators(n: int) -> list[BitMatrix]:
    """Two generators of GL_n(F_2): a transvection and the cyclic permutation."""
    if n == 1:
        return [identity(1)]
    e = [1 << i for i in range(n)]
    t = list(e)
    t[0] = e[0] | e[1]
    cyc = [e[(i + 1) % n] for i in range(n)]
    return [BitMatrix(tuple(t), n), BitMatrix(tuple(cyc), n)]
