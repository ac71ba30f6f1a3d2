# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: BPR minibatch epoch and greedy calibrated selection.

Mirrors the numpy fallbacks in poicalib.kernels: same batch boundaries, same
accumulation order, same first-maximizer tie rule.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log2

cnp.import_array()


def bpr_epoch(double[:, ::1] user_factors, double[:, ::1] item_factors,
              cnp.int64_t[::1] users, cnp.int64_t[::1] pos, cnp.int64_t[::1] neg,
              double lr, double reg, Py_ssize_t batch_size):
    cdef Py_ssize_t n = users.shape[0]
    cdef Py_ssize_t d = user_factors.shape[1]
    cdef double[:, ::1] grad_u = np.zeros((user_factors.shape[0], d))
    cdef double[:, ::1] grad_i = np.zeros((item_factors.shape[0], d))
    cdef unsigned char[::1] u_hit = np.zeros(user_factors.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] i_hit = np.zeros(item_factors.shape[0], dtype=np.uint8)
    cdef Py_ssize_t[::1] u_rows = np.empty(batch_size, dtype=np.intp)
    cdef Py_ssize_t[::1] i_rows = np.empty(2 * batch_size, dtype=np.intp)
    cdef Py_ssize_t start = 0, stop, t, k, b, nu, ni, row
    cdef cnp.int64_t u, i, j
    cdef double x, e, scale

    while start < n:
        stop = start + batch_size
        if stop > n:
            stop = n
        nu = 0
        ni = 0
        for t in range(start, stop):
            u = users[t]
            i = pos[t]
            j = neg[t]
            x = 0.0
            for k in range(d):
                x += user_factors[u, k] * (item_factors[i, k] - item_factors[j, k])
            e = 1.0 / (1.0 + exp(x))  # sigma(-x); overflow saturates to 0
            for k in range(d):
                grad_u[u, k] += e * (item_factors[i, k] - item_factors[j, k]) - reg * user_factors[u, k]
                grad_i[i, k] += e * user_factors[u, k] - reg * item_factors[i, k]
                grad_i[j, k] += -e * user_factors[u, k] - reg * item_factors[j, k]
            if not u_hit[u]:
                u_hit[u] = 1
                u_rows[nu] = u
                nu += 1
            if not i_hit[i]:
                i_hit[i] = 1
                i_rows[ni] = i
                ni += 1
            if not i_hit[j]:
                i_hit[j] = 1
                i_rows[ni] = j
                ni += 1
        scale = lr / (stop - start)
        for b in range(nu):
            row = u_rows[b]
            for k in range(d):
                user_factors[row, k] += scale * grad_u[row, k]
                grad_u[row, k] = 0.0
            u_hit[row] = 0
        for b in range(ni):
            row = i_rows[b]
            for k in range(d):
                item_factors[row, k] += scale * grad_i[row, k]
                grad_i[row, k] = 0.0
            i_hit[row] = 0
        start = stop


cdef inline double _kl_term(double x, double mid) noexcept nogil:
    if x <= 0.0:
        return 0.0
    return x * log2(x / mid)


cdef inline double _jsd3(double p0, double p1, double p2,
                         double q0, double q1, double q2) noexcept nogil:
    cdef double m0 = 0.5 * (p0 + q0)
    cdef double m1 = 0.5 * (p1 + q1)
    cdef double m2 = 0.5 * (p2 + q2)
    return 0.5 * (_kl_term(p0, m0) + _kl_term(p1, m1) + _kl_term(p2, m2)
                  + _kl_term(q0, m0) + _kl_term(q1, m1) + _kl_term(q2, m2))


def greedy_select(double[::1] scores, signed char[::1] classes,
                  double[::1] target, double lam, Py_ssize_t n):
    cdef Py_ssize_t m = scores.shape[0]
    out_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    cdef unsigned char[::1] taken = np.zeros(m, dtype=np.uint8)
    cdef double p0 = target[0], p1 = target[1], p2 = target[2]
    cdef double c0 = 0.0, c1 = 0.0, c2 = 0.0, relsum = 0.0
    cdef Py_ssize_t k, i, best
    cdef double size, q0, q1, q2, obj, best_obj

    for k in range(n):
        size = k + 1.0
        best = -1
        best_obj = 0.0
        for i in range(m):
            if taken[i]:
                continue
            q0 = c0
            q1 = c1
            q2 = c2
            if classes[i] == 0:
                q0 += 1.0
            elif classes[i] == 1:
                q1 += 1.0
            else:
                q2 += 1.0
            obj = ((1.0 - lam) * (relsum + scores[i]) / size
                   - lam * _jsd3(p0, p1, p2, q0 / size, q1 / size, q2 / size))
            if best < 0 or obj > best_obj:
                best_obj = obj
                best = i
        out[k] = best
        taken[best] = 1
        relsum += scores[best]
        if classes[best] == 0:
            c0 += 1.0
        elif classes[best] == 1:
            c1 += 1.0
        else:
            c2 += 1.0
    return out_arr
