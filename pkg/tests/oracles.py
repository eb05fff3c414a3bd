"""Brute-force references written against plain lists of 0/1 entries.

Nothing here imports gf2rank, so the checks that use these functions do not
share code with the implementation under test.
"""

from __future__ import annotations

from itertools import combinations, product


def mat_from_flat(flat: int, m: int, n: int) -> list[list[int]]:
    return [[(flat >> (i * n + j)) & 1 for j in range(n)] for i in range(m)]


def flat_from_mat(a: list[list[int]]) -> int:
    n = len(a[0])
    return sum(a[i][j] << (i * n + j) for i in range(len(a)) for j in range(n))


def rank(a: list[list[int]]) -> int:
    a = [row[:] for row in a]
    rows, cols = len(a), len(a[0]) if a else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(rows):
            if i != r and a[i][c]:
                a[i] = [x ^ y for x, y in zip(a[i], a[r])]
        r += 1
    return r


def matmul(a, b):
    return [[sum(a[i][k] & b[k][j] for k in range(len(b))) & 1 for j in range(len(b[0]))] for i in range(len(a))]


def transpose(a):
    return [list(col) for col in zip(*a)]


def span_key(vectors: list[int]) -> frozenset[int]:
    """The span as an explicit set of integers (usable as a dict key)."""
    out = {0}
    for v in vectors:
        if v not in out:
            out |= {x ^ v for x in out}
    return frozenset(out)


def vec_rank(vectors: list[int]) -> int:
    return len(span_key(vectors)).bit_length() - 1


def rank_one_flats(m: int, n: int) -> list[int]:
    out = []
    for a in range(1, 1 << m):
        for b in range(1, 1 << n):
            out.append(sum(1 << (i * n + j) for i in range(m) if (a >> i) & 1 for j in range(n) if (b >> j) & 1))
    return out


def invertible_matrices(k: int) -> list[list[list[int]]]:
    out = []
    for bits in product((0, 1), repeat=k * k):
        a = [list(bits[i * k:(i + 1) * k]) for i in range(k)]
        if rank(a) == k:
            out.append(a)
    return out


def spaces_spanned_by_rank_ones(m: int, n: int, d: int) -> set[frozenset[int]]:
    """Every d-dimensional subspace of Bl(m, n) with a basis of rank-one forms."""
    found = set()
    for combo in combinations(rank_one_flats(m, n), d):
        s = span_key(list(combo))
        if len(s) == 1 << d:
            found.add(s)
    return found


def covering_spaces(target: list[int], m: int, n: int, r: int) -> set[frozenset[int]]:
    """All r-dimensional spans of rank-one forms containing every target form."""
    found = set()
    for combo in combinations(rank_one_flats(m, n), r):
        s = span_key(list(combo))
        if len(s) == 1 << r and all(t in s for t in target):
            found.add(s)
    return found


def poly_product_forms(k: int) -> list[int]:
    """Forms of (sum a_i x^i)(sum b_j x^j): coefficient h collects a_i b_j with i+j=h."""
    return [sum(1 << (i * k + (h - i)) for i in range(k) if 0 <= h - i < k) for h in range(2 * k - 1)]


def short_product_forms(ell: int) -> list[int]:
    """Low half of the product with b read in reverse order, top coefficient first.

    In that layout coefficient ell-1-h pairs a_i with b'_{i+h}.
    """
    return [sum(1 << (i * ell + i + h) for i in range(ell - h)) for h in range(ell)]


def circulant_forms(ell: int) -> list[int]:
    return [sum(1 << (i * ell + ((h - i) % ell)) for i in range(ell)) for h in range(ell)]


def matprod_forms(p: int, q: int, r: int) -> list[int]:
    """c_ij = sum_h a_ih b_hj, with a_ih at index i*q+h and b_hj at index j*q+h."""
    n = q * r
    out = []
    for i in range(p):
        for j in range(r):
            out.append(sum(1 << ((i * q + h) * n + (j * q + h)) for h in range(q)))
    return out
