# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused dot-product/argmax scan over normalized embedding matrices.

For each query row, return the index of the target row with the highest
dot product plus that similarity. Ties keep the earliest target index
(strict greater-than update), matching the numpy fallback exactly.
"""


def argmax_dot(double[:, ::1] queries, double[:, ::1] targets,
               long long[::1] out_idx, double[::1] out_sim):
    cdef Py_ssize_t n = queries.shape[0]
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t d = queries.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, best
    cdef Py_ssize_t best_j

    if targets.shape[1] != d:
        raise ValueError("query/target dimensionality mismatch")
    if m == 0:
        raise ValueError("empty target matrix")

    with nogil:
        for i in range(n):
            best = -2.0
            best_j = 0
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    acc += queries[i, k] * targets[j, k]
                if acc > best:
                    best = acc
                    best_j = j
            out_idx[i] = best_j
            out_sim[i] = best
