# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: layer-0 graph search, neighbor selection, CRC32C.

Contracts mirror guiscout.index._pykern; dot products accumulate
sequentially in float64 over float32 components.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, uint8_t, uint32_t
from libc.stdlib cimport free, malloc
from libc.string cimport memset

cnp.import_array()

BACKEND_NAME = "compiled"


# ---------------------------------------------------------------- CRC32C

cdef uint32_t[256] _CRC_TABLE

cdef void _init_crc_table() noexcept:
    cdef uint32_t c
    cdef int i, j
    for i in range(256):
        c = <uint32_t> i
        for j in range(8):
            if c & 1u:
                c = 0x82F63B78u ^ (c >> 1)
            else:
                c = c >> 1
        _CRC_TABLE[i] = c

_init_crc_table()


def crc32c(data, crc=0):
    """CRC32C (Castagnoli) of `data`, continuing from `crc`."""
    cdef const uint8_t[::1] buf = data
    cdef Py_ssize_t i, n = buf.shape[0]
    cdef uint32_t c = (<uint32_t> crc) ^ 0xFFFFFFFFu
    with nogil:
        for i in range(n):
            c = _CRC_TABLE[(c ^ buf[i]) & 0xFFu] ^ (c >> 8)
    return c ^ 0xFFFFFFFFu


# ------------------------------------------------------ distance helper

cdef inline double _neg_dot(const float[:, ::1] vecs, Py_ssize_t row,
                            const double* q, Py_ssize_t dim) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t j
    for j in range(dim):
        acc += (<double> vecs[row, j]) * q[j]
    return -acc


# ----------------------------------------------------------- heap utils
# Binary heaps over parallel (dist, ord) arrays; ordering is the tuple
# order (dist, ord) so ties resolve identically to the Python backend.

cdef inline bint _lt(double d1, int32_t o1, double d2, int32_t o2) noexcept nogil:
    return d1 < d2 or (d1 == d2 and o1 < o2)


cdef void _heap_push_min(double* hd, int32_t* ho, Py_ssize_t* size,
                         double d, int32_t o) noexcept nogil:
    cdef Py_ssize_t i = size[0], p
    hd[i] = d
    ho[i] = o
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _lt(hd[i], ho[i], hd[p], ho[p]):
            hd[i], hd[p] = hd[p], hd[i]
            ho[i], ho[p] = ho[p], ho[i]
            i = p
        else:
            break


cdef void _heap_pop_min(double* hd, int32_t* ho, Py_ssize_t* size) noexcept nogil:
    cdef Py_ssize_t i = 0, l, r, sm
    size[0] -= 1
    hd[0] = hd[size[0]]
    ho[0] = ho[size[0]]
    while True:
        l = 2 * i + 1
        r = l + 1
        sm = i
        if l < size[0] and _lt(hd[l], ho[l], hd[sm], ho[sm]):
            sm = l
        if r < size[0] and _lt(hd[r], ho[r], hd[sm], ho[sm]):
            sm = r
        if sm == i:
            break
        hd[i], hd[sm] = hd[sm], hd[i]
        ho[i], ho[sm] = ho[sm], ho[i]
        i = sm


# max-heap on (dist, ord): root is the largest tuple.

cdef void _heap_push_max(double* hd, int32_t* ho, Py_ssize_t* size,
                         double d, int32_t o) noexcept nogil:
    cdef Py_ssize_t i = size[0], p
    hd[i] = d
    ho[i] = o
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _lt(hd[p], ho[p], hd[i], ho[i]):
            hd[i], hd[p] = hd[p], hd[i]
            ho[i], ho[p] = ho[p], ho[i]
            i = p
        else:
            break


cdef void _heap_replace_max(double* hd, int32_t* ho, Py_ssize_t size,
                            double d, int32_t o) noexcept nogil:
    cdef Py_ssize_t i = 0, l, r, lg
    hd[0] = d
    ho[0] = o
    while True:
        l = 2 * i + 1
        r = l + 1
        lg = i
        if l < size and _lt(hd[lg], ho[lg], hd[l], ho[l]):
            lg = l
        if r < size and _lt(hd[lg], ho[lg], hd[r], ho[r]):
            lg = r
        if lg == i:
            break
        hd[i], hd[lg] = hd[lg], hd[i]
        ho[i], ho[lg] = ho[lg], ho[i]
        i = lg


# -------------------------------------------------------- layer0 search

def search_layer0(const float[:, ::1] vecs, const int32_t[:, ::1] adj0,
                  const int32_t[::1] deg0, Py_ssize_t n,
                  const float[::1] query, entries, Py_ssize_t ef):
    """Best-first search over the layer-0 graph; see _pykern.search_layer0."""
    eps = np.unique(np.asarray(entries, dtype=np.int32))
    cdef Py_ssize_t n_eps = eps.shape[0]
    if n == 0 or n_eps == 0 or ef <= 0:
        return np.empty(0, dtype=np.int32), np.empty(0, dtype=np.float64)

    cdef const int32_t[::1] eps_view = eps
    cdef Py_ssize_t dim = vecs.shape[1]
    cdef double* q = <double*> malloc(dim * sizeof(double))
    cdef uint8_t* visited = <uint8_t*> malloc(n)
    # candidate heap can hold every node once; best heap holds ef items
    cdef double* cd = <double*> malloc(n * sizeof(double))
    cdef int32_t* co = <int32_t*> malloc(n * sizeof(int32_t))
    cdef double* bd = <double*> malloc(ef * sizeof(double))
    cdef int32_t* bo = <int32_t*> malloc(ef * sizeof(int32_t))
    if q == NULL or visited == NULL or cd == NULL or co == NULL \
            or bd == NULL or bo == NULL:
        free(q); free(visited); free(cd); free(co); free(bd); free(bo)
        raise MemoryError()

    cdef Py_ssize_t c_size = 0, b_size = 0
    cdef Py_ssize_t i, j, deg
    cdef int32_t o, c, nb
    cdef double d, d_c
    cdef int32_t[::1] vo
    cdef double[::1] vd

    try:
        with nogil:
            for j in range(dim):
                q[j] = <double> query[j]
            memset(visited, 0, n)

            for i in range(n_eps):
                o = eps_view[i]
                visited[o] = 1
                d = _neg_dot(vecs, o, q, dim)
                _heap_push_min(cd, co, &c_size, d, o)
                if b_size < ef:
                    _heap_push_max(bd, bo, &b_size, d, o)
                elif _lt(d, o, bd[0], bo[0]):
                    _heap_replace_max(bd, bo, b_size, d, o)

            while c_size > 0:
                d_c = cd[0]
                c = co[0]
                _heap_pop_min(cd, co, &c_size)
                if b_size >= ef and d_c > bd[0]:
                    break
                deg = deg0[c]
                for i in range(deg):
                    nb = adj0[c, i]
                    if visited[nb]:
                        continue
                    visited[nb] = 1
                    d = _neg_dot(vecs, nb, q, dim)
                    if b_size < ef:
                        _heap_push_min(cd, co, &c_size, d, nb)
                        _heap_push_max(bd, bo, &b_size, d, nb)
                    elif _lt(d, nb, bd[0], bo[0]):
                        _heap_push_min(cd, co, &c_size, d, nb)
                        _heap_replace_max(bd, bo, b_size, d, nb)

        out_o = np.empty(b_size, dtype=np.int32)
        out_d = np.empty(b_size, dtype=np.float64)
        vo = out_o
        vd = out_d
        # drain the max-heap back-to-front to get ascending (dist, ord)
        i = b_size - 1
        while b_size > 0:
            vd[i] = bd[0]
            vo[i] = bo[0]
            b_size -= 1
            if b_size > 0:
                d = bd[b_size]
                o = bo[b_size]
                _heap_replace_max(bd, bo, b_size, d, o)
            i -= 1
        return out_o, out_d
    finally:
        free(q); free(visited); free(cd); free(co); free(bd); free(bo)


# ---------------------------------------------------- neighbor selection

def select_heuristic(const float[:, ::1] vecs, cand_ords, cand_dists,
                     Py_ssize_t m):
    """Diversity-aware neighbor selection; see _pykern.select_heuristic."""
    ords = np.ascontiguousarray(cand_ords, dtype=np.int32)
    dists = np.ascontiguousarray(cand_dists, dtype=np.float64)
    cdef Py_ssize_t nc = ords.shape[0]
    if nc <= m:
        return ords.copy()

    cdef Py_ssize_t dim = vecs.shape[1]
    cdef const int32_t[::1] ov = ords
    cdef const double[::1] dv = dists
    sel = np.empty(m, dtype=np.int32)
    cdef int32_t[::1] sv = sel
    cdef int32_t* disc = <int32_t*> malloc(nc * sizeof(int32_t))
    cdef double* q = <double*> malloc(dim * sizeof(double))
    if disc == NULL or q == NULL:
        free(disc); free(q)
        raise MemoryError()

    cdef Py_ssize_t n_sel = 0, n_disc = 0
    cdef Py_ssize_t i, j, s
    cdef double d, dr, min_dr
    cdef int32_t o

    try:
        with nogil:
            for i in range(nc):
                if n_sel >= m:
                    break
                o = ov[i]
                d = dv[i]
                if n_sel == 0:
                    sv[0] = o
                    n_sel = 1
                    continue
                for j in range(dim):
                    q[j] = <double> vecs[o, j]
                min_dr = 1e300
                for s in range(n_sel):
                    dr = _neg_dot(vecs, sv[s], q, dim)
                    if dr < min_dr:
                        min_dr = dr
                if d < min_dr:
                    sv[n_sel] = o
                    n_sel += 1
                else:
                    disc[n_disc] = o
                    n_disc += 1
            i = 0
            while n_sel < m and i < n_disc:
                sv[n_sel] = disc[i]
                n_sel += 1
                i += 1
        return sel[:n_sel].copy()
    finally:
        free(disc); free(q)
