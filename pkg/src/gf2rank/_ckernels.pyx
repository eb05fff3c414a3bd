# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same API and results as ``_pykernels``.

Vectors are limited to 64 bits, which covers every shape with m*n <= 64.
Inside the tree search a space is kept as rows indexed by pivot, fully
reduced, so that reduction of x is one xor per pivot bit present in x.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free, calloc
from libc.string cimport memcpy, memset


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int top_bit(uint64_t x) noexcept nogil:
    return 63 - __builtin_clzll(x)


cdef struct Space:
    uint64_t rows[64]
    uint64_t pivmask
    int dim


cdef inline uint64_t sp_reduce(const Space* s, uint64_t x) noexcept nogil:
    cdef uint64_t m = x & s.pivmask
    cdef int b
    while m:
        b = __builtin_ctzll(m)
        x ^= s.rows[b]
        m &= m - 1
    return x


cdef inline int sp_insert(Space* s, uint64_t x) noexcept nogil:
    """Insert x (any vector); returns 1 if the dimension grew."""
    x = sp_reduce(s, x)
    if x == 0:
        return 0
    cdef int p = top_bit(x)
    cdef uint64_t bit = (<uint64_t>1) << p
    cdef uint64_t m = s.pivmask
    cdef int b
    while m:
        b = __builtin_ctzll(m)
        if s.rows[b] & bit:
            s.rows[b] ^= x
        m &= m - 1
    s.rows[p] = x
    s.pivmask |= bit
    s.dim += 1
    return 1


cdef inline void sp_init(Space* s) noexcept nogil:
    s.pivmask = 0
    s.dim = 0


cdef int sp_from_echelon(Space* s, echelon) except -1:
    sp_init(s)
    for r in echelon:
        sp_insert(s, <uint64_t>r)
    return 0


cdef tuple sp_to_tuple(const Space* s):
    cdef list out = []
    cdef uint64_t m = s.pivmask
    cdef int b
    while m:
        b = top_bit(m)
        out.append(s.rows[b])
        m &= ~((<uint64_t>1) << b)
    return tuple(out)


cdef int hrob(const Space* v, const uint64_t* flats, int nf) noexcept nogil:
    """Rank-one members of V span V (leading-bit table, no full reduction needed)."""
    cdef uint64_t tab[64]
    cdef uint64_t have = 0
    cdef int count = 0
    cdef int i, p
    cdef uint64_t g
    if v.dim == 0:
        return 1
    for i in range(nf):
        g = flats[i]
        if sp_reduce(v, g) != 0:
            continue
        while g:
            p = top_bit(g)
            if have & ((<uint64_t>1) << p):
                g ^= tab[p]
            else:
                tab[p] = g
                have |= (<uint64_t>1) << p
                count += 1
                if count == v.dim:
                    return 1
                break
    return 0


cdef uint64_t* to_array(seq, int* n) except NULL:
    cdef int k = len(seq)
    cdef uint64_t* a = <uint64_t*>malloc((k + 1) * sizeof(uint64_t))
    if a == NULL:
        raise MemoryError()
    cdef int i = 0
    for x in seq:
        if x < 0 or x >= (1 << 64):
            free(a)
            raise OverflowError("vectors limited to 64 bits")
        a[i] = <uint64_t>x
        i += 1
    n[0] = k
    return a


def reduce_vec(x, rows):
    cdef uint64_t v = x
    cdef uint64_t y, r
    for rr in rows:
        r = rr
        y = v ^ r
        if y < v:
            v = y
    return v


def insert_row(rows, x):
    cdef uint64_t v = reduce_vec(x, rows)
    if v == 0:
        return tuple(rows)
    cdef uint64_t top = (<uint64_t>1) << top_bit(v)
    cdef list out = []
    cdef uint64_t r
    for rr in rows:
        r = rr
        if r & top:
            r ^= v
        out.append(r)
    out.append(v)
    out.sort(reverse=True)
    return tuple(out)


def echelon_of(vectors):
    cdef Space s
    sp_init(&s)
    for v in vectors:
        sp_insert(&s, <uint64_t>v)
    return sp_to_tuple(&s)


def has_rank_one_basis(echelon, flats):
    cdef Space s
    sp_from_echelon(&s, echelon)
    cdef int nf
    cdef uint64_t* a = to_array(flats, &nf)
    cdef int res = hrob(&s, a, nf)
    free(a)
    return bool(res)


def reduce_all(h, echelon):
    cdef Space s
    sp_from_echelon(&s, echelon)
    cdef set seen = set()
    cdef list out = []
    cdef uint64_t y
    for x in h:
        y = sp_reduce(&s, <uint64_t>x)
        if y and y not in seen:
            seen.add(y)
            out.append(y)
    return out


def apply_table(table, x):
    cdef uint64_t v = x
    cdef uint64_t out = 0
    cdef int b
    while v:
        b = __builtin_ctzll(v)
        out ^= <uint64_t>table[b]
        v &= v - 1
    return out


# tree search -------------------------------------------------------------------

cdef struct Dedup:
    uint64_t* keys
    unsigned int* stamps
    unsigned int stamp
    uint64_t mask


cdef inline int dd_add(Dedup* d, uint64_t x) noexcept nogil:
    """1 if x was new in the current generation."""
    cdef uint64_t h = (x * <uint64_t>0x9E3779B97F4A7C15ULL) >> 20
    cdef uint64_t i = h & d.mask
    while d.stamps[i] == d.stamp:
        if d.keys[i] == x:
            return 0
        i = (i + 1) & d.mask
    d.stamps[i] = d.stamp
    d.keys[i] = x
    return 1


cdef struct Ctx:
    const uint64_t* flats
    int nf
    long long tests
    long long* per_depth
    Dedup dd
    uint64_t* pool      # candidate storage, one slab per level
    int slab


cdef int rec(Ctx* c, const Space* v, const uint64_t* cand, int nc, int left, int level, list found) except -1:
    cdef Space child
    cdef int i, j, k
    cdef uint64_t phi, x, y
    cdef uint64_t* nxt
    c.per_depth[level] += 1
    if left == 0:
        c.tests += 1
        if hrob(v, c.flats, c.nf):
            found.append(sp_to_tuple(v))
        return 0
    nxt = c.pool + <long long>(level + 1) * c.slab
    for i in range(nc):
        phi = cand[i]
        memcpy(&child, v, sizeof(Space))
        sp_insert(&child, phi)
        if left == 1:
            c.per_depth[level + 1] += 1
            c.tests += 1
            if hrob(&child, c.flats, c.nf):
                found.append(sp_to_tuple(&child))
            continue
        c.dd.stamp += 1
        if c.dd.stamp == 0:
            memset(c.dd.stamps, 0, (c.dd.mask + 1) * sizeof(unsigned int))
            c.dd.stamp = 1
        k = 0
        for j in range(i + 1, nc):
            x = cand[j]
            y = x ^ phi
            if y < x:
                x = y
            if x == 0 or not dd_add(&c.dd, x):
                continue
            nxt[k] = sp_reduce(&child, x)
            k += 1
        rec(c, &child, nxt, k, left - 1, level + 1, found)
    return 0


def bdez_tree(echelon, h, int depth, flats):
    cdef Ctx c
    cdef Space root
    cdef int nc, nf, i
    cdef uint64_t* cand = to_array(h, &nc)
    cdef uint64_t* fl
    try:
        fl = to_array(flats, &nf)
    except BaseException:
        free(cand)
        raise
    sp_from_echelon(&root, echelon)
    c.flats = fl
    c.nf = nf
    c.tests = 0
    c.per_depth = <long long*>calloc(depth + 2, sizeof(long long))
    c.slab = nc + 1
    c.pool = <uint64_t*>malloc(<long long>(depth + 2) * c.slab * sizeof(uint64_t))
    cdef uint64_t size = 1
    while size < <uint64_t>(4 * nc + 16):
        size <<= 1
    c.dd.keys = <uint64_t*>malloc(size * sizeof(uint64_t))
    c.dd.stamps = <unsigned int*>calloc(size, sizeof(unsigned int))
    c.dd.stamp = 0
    c.dd.mask = size - 1
    cdef list found = []
    try:
        if c.per_depth == NULL or c.pool == NULL or c.dd.keys == NULL or c.dd.stamps == NULL:
            raise MemoryError()
        rec(&c, &root, cand, nc, depth, 0, found)
        per = [c.per_depth[i] for i in range(depth + 1)]
        return found, c.tests, per
    finally:
        free(cand)
        free(fl)
        free(c.per_depth)
        free(c.pool)
        free(c.dd.keys)
        free(c.dd.stamps)
