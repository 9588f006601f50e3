# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled granular-ball evolution kernel.

Bit-for-bit twin of gbpc._evolve_py.evolve_arrays: every floating-point
expression matches the NumPy fallback operand-for-operand so the two
backends are interchangeable.  See _evolve_py for the algorithm notes.
"""

from libc.math cimport floor

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int LABEL_BND = 0
cdef int LABEL_POS = 1
# Per-residual action codes used in the scratch buffer.
cdef unsigned char ACT_STAY = 0
cdef unsigned char ACT_BND = 1
cdef unsigned char ACT_POS = 2


def evolve_arrays(lo_in, hi_in, double delta_d, int k, trace=None):
    """See gbpc._evolve_py.evolve_arrays; same contract, same results."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo_arr = \
        np.ascontiguousarray(lo_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hi_arr = \
        np.ascontiguousarray(hi_in, dtype=np.float64)
    cdef Py_ssize_t n = lo_arr.shape[0]

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] labels_arr = np.full(n, 255, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mu_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] dom_arr = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] idx_arr = np.arange(n, dtype=np.intp)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] act_arr = np.zeros(n, dtype=np.uint8)

    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    cdef unsigned char[::1] labels = labels_arr
    cdef double[::1] out_mu = mu_arr
    cdef double[::1] out_r = r_arr
    cdef int[::1] domain = dom_arr
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef unsigned char[::1] act = act_arr

    cdef long long[256] counts
    cdef int ci
    for ci in range(256):
        counts[ci] = 0
    cdef Py_ssize_t i
    for i in range(n):
        counts[<int>lo[i]] += 1
        counts[<int>hi[i]] += 1

    cdef double mu = 0.0
    cdef double r = 0.0
    cdef double split_at = k * delta_d
    cdef int n_domains = 0
    cdef Py_ssize_t m = n          # residual count
    cdef Py_ssize_t t = 0

    cdef double b_right, left, v, half, p_left, p_right, x, y
    cdef double bnd_mu = 0.0, bnd_r = 0.0, pos_mu = 0.0, pos_r = 0.0
    cdef double exp_mu = 0.0, exp_r = 0.0
    cdef int first, vi, have_v
    cdef int event          # 0 none, 1 terminal flush, 2 slide, 3 split
    cdef Py_ssize_t nb, npos, w, ball
    cdef int bnd_id, pos_id
    cdef bint in_lo, in_hi, in_l_lo, in_l_hi, in_r_lo, in_r_hi
    cdef bint expanded

    while m > 0:
        b_right = mu + r
        event = 0
        expanded = False

        if b_right >= 255.0:
            left = mu - r
            for i in range(m):
                ball = idx[i]
                x = lo[ball]
                y = hi[ball]
                in_lo = x >= left and x <= b_right
                in_hi = y >= left and y <= b_right
                act[i] = ACT_BND if (in_lo and in_hi) else ACT_POS
            bnd_mu = mu
            bnd_r = r
            pos_mu = mu
            pos_r = r
            event = 1
        else:
            first = <int>floor(b_right) + 1
            have_v = 0
            v = 0.0
            if first < 256:
                for vi in range(first, 256):
                    if counts[vi] > 0:
                        v = vi
                        have_v = 1
                        break
            if have_v and v > b_right + delta_d:
                left = mu - r
                for i in range(m):
                    ball = idx[i]
                    x = lo[ball]
                    y = hi[ball]
                    in_lo = x >= left and x <= b_right
                    in_hi = y >= left and y <= b_right
                    if in_lo and in_hi:
                        act[i] = ACT_BND
                    elif in_lo and (not in_hi) and y > b_right:
                        act[i] = ACT_POS
                    elif in_hi and (not in_lo) and x > b_right:
                        act[i] = ACT_POS
                    else:
                        act[i] = ACT_STAY
                bnd_mu = mu
                bnd_r = r
                pos_mu = mu
                pos_r = r
                mu = mu + (v - b_right)
                event = 2
            else:
                r = r + delta_d
                expanded = True
                exp_mu = mu
                exp_r = r
                if r >= split_at:
                    p_left = mu - r
                    p_right = mu + r
                    for i in range(m):
                        ball = idx[i]
                        x = lo[ball]
                        y = hi[ball]
                        in_l_lo = x >= p_left and x <= mu
                        in_l_hi = y >= p_left and y <= mu
                        in_r_lo = x > mu and x <= p_right
                        in_r_hi = y > mu and y <= p_right
                        if in_l_lo and in_l_hi:
                            act[i] = ACT_BND
                        elif in_r_lo and in_r_hi:
                            act[i] = ACT_STAY
                        elif in_l_lo or in_r_lo or in_l_hi or in_r_hi:
                            act[i] = ACT_POS
                        else:
                            act[i] = ACT_STAY
                    half = r / 2.0
                    bnd_mu = mu - half
                    bnd_r = half
                    pos_mu = mu
                    pos_r = r
                    mu = mu + half
                    r = half
                    event = 3

        if event != 0:
            nb = 0
            npos = 0
            for i in range(m):
                if act[i] == ACT_BND:
                    nb += 1
                elif act[i] == ACT_POS:
                    npos += 1
            bnd_id = n_domains
            pos_id = n_domains + (1 if nb > 0 else 0)
            if nb > 0:
                n_domains += 1
            if npos > 0:
                n_domains += 1
            w = 0
            for i in range(m):
                ball = idx[i]
                if act[i] == ACT_BND:
                    labels[ball] = LABEL_BND
                    out_mu[ball] = bnd_mu
                    out_r[ball] = bnd_r
                    domain[ball] = bnd_id
                    counts[<int>lo[ball]] -= 1
                    counts[<int>hi[ball]] -= 1
                elif act[i] == ACT_POS:
                    labels[ball] = LABEL_POS
                    out_mu[ball] = pos_mu
                    out_r[ball] = pos_r
                    domain[ball] = pos_id
                    counts[<int>lo[ball]] -= 1
                    counts[<int>hi[ball]] -= 1
                else:
                    idx[w] = ball
                    w += 1
            m = w
            if trace is not None:
                if expanded:
                    # Parent state saved before the split updated
                    # (mu, r) to the right child.
                    trace.append({"t": t, "event": "expand", "mu": exp_mu,
                                  "r": exp_r, "bnd": 0, "pos": 0})
                name = "flush" if event == 1 else ("slide" if event == 2 else "split")
                trace.append({"t": t, "event": name, "mu": mu, "r": r,
                              "bnd": nb, "pos": npos})
            if event == 1:
                break
        elif trace is not None and expanded:
            trace.append({"t": t, "event": "expand", "mu": mu, "r": r,
                          "bnd": 0, "pos": 0})
        t += 1

    return labels_arr, mu_arr, r_arr, dom_arr, n_domains
