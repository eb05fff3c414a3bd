"""Pure-Python reference versions of the hot loops in ``_ckernels``.

Vectors are ints. An echelon is a tuple of rows in fully reduced form, sorted
by decreasing pivot, the pivot of a row being its highest set bit.
"""

from __future__ import annotations

from typing import Sequence


def reduce_vec(x: int, rows: Sequence[int]) -> int:
    for r in rows:
        y = x ^ r
        if y < x:
            x = y
    return x


def insert_row(rows: Sequence[int], x: int) -> tuple[int, ...]:
    """Echelon of span(rows, x); rows must already be an echelon."""
    x = reduce_vec(x, rows)
    if not x:
        return tuple(rows)
    top = 1 << (x.bit_length() - 1)
    out = [r ^ x if r & top else r for r in rows]
    out.append(x)
    out.sort(reverse=True)
    return tuple(out)


def echelon_of(vectors: Sequence[int]) -> tuple[int, ...]:
    rows: tuple[int, ...] = ()
    for v in vectors:
        rows = insert_row(rows, v)
    return rows


def has_rank_one_basis(echelon: Sequence[int], flats: Sequence[int]) -> bool:
    dim = len(echelon)
    if dim == 0:
        return True
    span: list[int] = []
    for g in flats:
        if reduce_vec(g, echelon):
            continue
        g = reduce_vec(g, span)
        if g:
            top = 1 << (g.bit_length() - 1)
            span = [r ^ g if r & top else r for r in span]
            span.append(g)
            span.sort(reverse=True)
            if len(span) == dim:
                return True
    return False


def reduce_all(h: Sequence[int], echelon: Sequence[int]) -> list[int]:
    """Reduce each vector mod the echelon, dropping zeros and repeats (order kept)."""
    seen: set[int] = set()
    out = []
    for x in h:
        y = reduce_vec(x, echelon)
        if y and y not in seen:
            seen.add(y)
            out.append(y)
    return out


def bdez_tree(
    echelon: Sequence[int],
    h: Sequence[int],
    depth: int,
    flats: Sequence[int],
) -> tuple[list[tuple[int, ...]], int, list[int]]:
    """Plain exhaustive extension by ``depth`` rank-one forms.

    ``h`` holds candidates already reduced mod the echelon. Returns the
    accepted leaf echelons (may repeat), the number of leaf tests and the
    number of nodes per depth (index 0 is the root).
    """
    per_depth = [0] * (depth + 1)
    found: list[tuple[int, ...]] = []
    tests = 0

    def rec(rows: tuple[int, ...], cand: list[int], left: int, level: int) -> None:
        nonlocal tests
        per_depth[level] += 1
        if left == 0:
            tests += 1
            if has_rank_one_basis(rows, flats):
                found.append(rows)
            return
        for i, phi in enumerate(cand):
            child = insert_row(rows, phi)
            if left == 1:
                per_depth[level + 1] += 1
                tests += 1
                if has_rank_one_basis(child, flats):
                    found.append(child)
                continue
            rest = reduce_all(cand[i + 1:], (phi,))
            rec(child, _reduce_list(rest, child), left - 1, level + 1)

    rec(tuple(echelon), list(h), depth, 0)
    return found, tests, per_depth


def _reduce_list(cand: list[int], rows: tuple[int, ...]) -> list[int]:
    return [reduce_vec(x, rows) for x in cand]


def apply_table(table: Sequence[int], x: int) -> int:
    """Image of x under the linear map sending bit b to table[b]."""
    out = 0
    b = 0
    while x:
        if x & 1:
            out ^= table[b]
        x >>= 1
        b += 1
    return out
