"""NumPy implementation of the granular-ball evolution kernel.

This is the fallback used when the compiled extension is unavailable.
Both kernels must agree bit-for-bit: every floating-point expression
here has a literal twin in _evolve_cy.pyx, same operands, same order.

The kernel walks one ball (mu, r) along the 0..255 luminance axis over
a set of two-element meta balls given as (lo, hi) value pairs.  Each
iteration, with b_right = mu + r:

  1. b_right >= 255: terminal flush.  Residual balls with both elements
     inside [mu - r, mu + r] become BND, anything else POS, and the
     walk stops.
  2. Otherwise find v, the smallest residual element value > b_right.
     If v exists and v > b_right + delta_d the ball slides: first flush
     at the current scale (both elements inside -> BND; exactly one
     inside with the partner beyond b_right -> POS; others stay), then
     mu moves so the right boundary lands exactly on v, r unchanged.
  3. Else the ball expands, r += delta_d.  When r reaches k * delta_d
     it splits into (mu - r/2, r/2) over [mu - r, mu] and
     (mu + r/2, r/2) over (mu, mu + r]; an element exactly at mu
     belongs to the left child.  Both elements in the left child ->
     BND recorded at the left child's scale; both in the right child ->
     carried into the next iteration; one element in each child, or one
     inside the parent with the partner outside it -> POS recorded at
     the parent scale; both outside the parent -> untouched.

Each flush emits its BND batch, then its POS batch; every non-empty
batch takes the next decision-domain index, so a domain is always
label-homogeneous.
"""

from __future__ import annotations

import math

import numpy as np

BND = 0
POS = 1


def evolve_arrays(lo, hi, delta_d, k, trace=None):
    """Evolve over meta balls (lo[i], hi[i]), lo <= hi, values in 0..255.

    Parameters
    ----------
    lo, hi : float64 arrays, one entry per distinct meta ball.
    delta_d : float, expansion step (> 0).
    k : int, split threshold multiplier (>= 1).
    trace : optional list; when given, one record per evolution event is
        appended (iteration t, event name, ball state, batch sizes).

    Returns
    -------
    labels : uint8 array, BND (0) or POS (1) per ball.
    out_mu, out_r : float64 arrays, the ball scale each assignment was
        recorded at.
    domain : int32 array, decision-domain index per ball.
    n_domains : int, total number of decision domains.
    """
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    n = lo.shape[0]
    labels = np.full(n, 255, dtype=np.uint8)
    out_mu = np.zeros(n, dtype=np.float64)
    out_r = np.zeros(n, dtype=np.float64)
    domain = np.full(n, -1, dtype=np.int32)

    # Residual set, kept compacted in the original ball order.
    idx = np.arange(n, dtype=np.intp)
    rlo = lo.copy()
    rhi = hi.copy()
    # Residual element multiplicity per integer value, for the nearest-
    # value scan.  Values are integral by construction (8-bit luminance).
    counts = np.bincount(np.concatenate([lo, hi]).astype(np.intp), minlength=256)

    mu = 0.0
    r = 0.0
    split_at = k * delta_d
    n_domains = 0
    t = 0

    def flush(bnd_mask, pos_mask, bnd_mu, bnd_r, pos_mu, pos_r):
        nonlocal idx, rlo, rhi, n_domains
        nb = 0
        np_ = 0
        sel = idx[bnd_mask]
        if sel.size:
            labels[sel] = BND
            out_mu[sel] = bnd_mu
            out_r[sel] = bnd_r
            domain[sel] = n_domains
            n_domains += 1
            nb = sel.size
        sel = idx[pos_mask]
        if sel.size:
            labels[sel] = POS
            out_mu[sel] = pos_mu
            out_r[sel] = pos_r
            domain[sel] = n_domains
            n_domains += 1
            np_ = sel.size
        gone = bnd_mask | pos_mask
        if gone.any():
            removed = np.concatenate([rlo[gone], rhi[gone]]).astype(np.intp)
            np.subtract.at(counts, removed, 1)
            keep = ~gone
            idx = idx[keep]
            rlo = rlo[keep]
            rhi = rhi[keep]
        return nb, np_

    while idx.size:
        b_right = mu + r
        if b_right >= 255.0:
            left = mu - r
            in_lo = (rlo >= left) & (rlo <= b_right)
            in_hi = (rhi >= left) & (rhi <= b_right)
            bnd = in_lo & in_hi
            nb, np_ = flush(bnd, ~bnd, mu, r, mu, r)
            if trace is not None:
                trace.append({"t": t, "event": "flush", "mu": mu, "r": r,
                              "bnd": nb, "pos": np_})
            break

        # Smallest residual element value strictly beyond the right edge.
        first = int(math.floor(b_right)) + 1
        v = math.inf
        if first < 256:
            beyond = np.nonzero(counts[first:])[0]
            if beyond.size:
                v = float(first + beyond[0])

        if v != math.inf and v > b_right + delta_d:
            left = mu - r
            in_lo = (rlo >= left) & (rlo <= b_right)
            in_hi = (rhi >= left) & (rhi <= b_right)
            bnd = in_lo & in_hi
            pos = ((in_lo & ~in_hi & (rhi > b_right))
                   | (in_hi & ~in_lo & (rlo > b_right)))
            nb, np_ = flush(bnd, pos, mu, r, mu, r)
            mu = mu + (v - b_right)
            if trace is not None:
                trace.append({"t": t, "event": "slide", "mu": mu, "r": r,
                              "bnd": nb, "pos": np_})
        else:
            r = r + delta_d
            if trace is not None:
                trace.append({"t": t, "event": "expand", "mu": mu, "r": r,
                              "bnd": 0, "pos": 0})
            if r >= split_at:
                p_left = mu - r
                p_right = mu + r
                in_l_lo = (rlo >= p_left) & (rlo <= mu)
                in_l_hi = (rhi >= p_left) & (rhi <= mu)
                in_r_lo = (rlo > mu) & (rlo <= p_right)
                in_r_hi = (rhi > mu) & (rhi <= p_right)
                bnd = in_l_lo & in_l_hi
                carried = in_r_lo & in_r_hi
                pos = ((in_l_lo | in_r_lo | in_l_hi | in_r_hi)
                       & ~bnd & ~carried)
                half = r / 2.0
                nb, np_ = flush(bnd, pos, mu - half, half, mu, r)
                mu = mu + half
                r = half
                if trace is not None:
                    trace.append({"t": t, "event": "split", "mu": mu, "r": r,
                                  "bnd": nb, "pos": np_})
        t += 1

    return labels, out_mu, out_r, domain, n_domains
