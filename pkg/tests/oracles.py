"""Independent reference implementations used only by the tests.

Everything here is written straight-line from first principles: per
pixel, per window, per histogram cell, with plain Python loops and
dicts wherever possible.  None of it shares code paths with the
package, so agreement is meaningful evidence.
"""

from __future__ import annotations

import math

BND = 0
POS = 1


def evolve_reference(la, lb, delta_d, k):
    """Per-pixel granular-ball evolution, no deduplication, no arrays.

    la, lb are flat sequences of 0..255 values, one meta ball per
    position.  Returns (labels, mus, rs, domains, n_domains) as lists.
    """
    n = len(la)
    la = [float(v) for v in la]
    lb = [float(v) for v in lb]
    labels = [None] * n
    mus = [0.0] * n
    rs = [0.0] * n
    domains = [-1] * n
    residual = list(range(n))
    mu = 0.0
    r = 0.0
    n_domains = 0

    def assign(batch, label, bmu, br):
        nonlocal n_domains
        if not batch:
            return
        for i in batch:
            labels[i] = label
            mus[i] = bmu
            rs[i] = br
            domains[i] = n_domains
        n_domains += 1

    while residual:
        right = mu + r
        if right >= 255.0:
            left = mu - r
            bnd = [i for i in residual
                   if left <= la[i] <= right and left <= lb[i] <= right]
            pos = [i for i in residual if i not in bnd]
            assign(bnd, BND, mu, r)
            assign(pos, POS, mu, r)
            break

        beyond = [x for i in residual for x in (la[i], lb[i]) if x > right]
        v = min(beyond) if beyond else None

        if v is not None and v > right + delta_d:
            left = mu - r
            bnd, pos, keep = [], [], []
            for i in residual:
                a_in = left <= la[i] <= right
                b_in = left <= lb[i] <= right
                if a_in and b_in:
                    bnd.append(i)
                elif a_in and not b_in and lb[i] > right:
                    pos.append(i)
                elif b_in and not a_in and la[i] > right:
                    pos.append(i)
                else:
                    keep.append(i)
            assign(bnd, BND, mu, r)
            assign(pos, POS, mu, r)
            residual = keep
            mu = mu + (v - right)
        else:
            r = r + delta_d
            if r >= k * delta_d:
                p_left = mu - r
                p_right = mu + r
                half = r / 2.0
                bnd, pos, keep = [], [], []
                for i in residual:
                    a_left = p_left <= la[i] <= mu
                    b_left = p_left <= lb[i] <= mu
                    a_right = mu < la[i] <= p_right
                    b_right = mu < lb[i] <= p_right
                    if a_left and b_left:
                        bnd.append(i)
                    elif a_right and b_right:
                        keep.append(i)
                    elif a_left or a_right or b_left or b_right:
                        pos.append(i)
                    else:
                        keep.append(i)
                assign(bnd, BND, mu - half, half)
                assign(pos, POS, mu, r)
                residual = keep
                mu = mu + half
                r = half

    return labels, mus, rs, domains, n_domains


def entropy_reference(values) -> float:
    """Histogram entropy from a plain dict of counts."""
    counts = {}
    for v in values:
        counts[int(v)] = counts.get(int(v), 0) + 1
    total = sum(counts.values())
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return h


def mutual_information_reference(xs, ys) -> float:
    """MI from dict-based joint and marginal histograms."""
    joint = {}
    mx = {}
    my = {}
    n = 0
    for x, y in zip(xs, ys):
        x, y = int(x), int(y)
        joint[(x, y)] = joint.get((x, y), 0) + 1
        mx[x] = mx.get(x, 0) + 1
        my[y] = my.get(y, 0) + 1
        n += 1
    mi = 0.0
    for (x, y), c in joint.items():
        pxy = c / n
        mi += pxy * math.log2(pxy / ((mx[x] / n) * (my[y] / n)))
    return mi


def pad_replicate(img, margin):
    """Replicate-pad a 2-D list-of-lists by `margin` on every side."""
    h = len(img)
    w = len(img[0])
    out = []
    for y in range(-margin, h + margin):
        yy = min(max(y, 0), h - 1)
        row = []
        for x in range(-margin, w + margin):
            xx = min(max(x, 0), w - 1)
            row.append(img[yy][xx])
        out.append(row)
    return out


def convolve3_reference(img, kernel):
    """True 3x3 convolution (kernel flipped) with replicate padding."""
    h = len(img)
    w = len(img[0])
    padded = pad_replicate(img, 1)
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for ky in range(3):
                for kx in range(3):
                    acc += kernel[ky][kx] * padded[y + 1 + (1 - ky)][x + 1 + (1 - kx)]
            out[y][x] = acc
    return out


def sobel_reference(img):
    """Sobel magnitude via explicit loops."""
    gx_k = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]
    gy_k = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]
    gx = convolve3_reference(img, gx_k)
    gy = convolve3_reference(img, gy_k)
    h = len(img)
    w = len(img[0])
    return [[math.sqrt(gx[y][x] ** 2 + gy[y][x] ** 2) for x in range(w)]
            for y in range(h)]


def laplacian_reference(img):
    """4-neighbour Laplacian via explicit loops."""
    kern = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]
    return convolve3_reference(img, kern)


def ssim_reference(x, y, window=11, sigma=1.5, k1=0.01, k2=0.03):
    """Windowed SSIM via explicit per-window sums."""
    h = len(x)
    w = len(x[0])
    half = (window - 1) / 2.0
    g1 = [math.exp(-((i - half) ** 2) / (2.0 * sigma ** 2)) for i in range(window)]
    norm = sum(g1)
    g1 = [v / norm for v in g1]
    weights = [[g1[i] * g1[j] for j in range(window)] for i in range(window)]
    c1 = k1 ** 2
    c2 = k2 ** 2
    vals = []
    for oy in range(h - window + 1):
        for ox in range(w - window + 1):
            mx = my = 0.0
            for i in range(window):
                for j in range(window):
                    mx += weights[i][j] * x[oy + i][ox + j]
                    my += weights[i][j] * y[oy + i][ox + j]
            vxx = vyy = vxy = 0.0
            for i in range(window):
                for j in range(window):
                    vxx += weights[i][j] * x[oy + i][ox + j] ** 2
                    vyy += weights[i][j] * y[oy + i][ox + j] ** 2
                    vxy += weights[i][j] * x[oy + i][ox + j] * y[oy + i][ox + j]
            vxx -= mx * mx
            vyy -= my * my
            vxy -= mx * my
            num = (2.0 * mx * my + c1) * (2.0 * vxy + c2)
            den = (mx * mx + my * my + c1) * (vxx + vyy + c2)
            vals.append(num / den)
    return sum(vals) / len(vals)


def average_gradient_reference(img):
    """Forward-difference mean gradient over the interior."""
    h = len(img)
    w = len(img[0])
    total = 0.0
    count = 0
    for y in range(h - 1):
        for x in range(w - 1):
            dx = img[y][x + 1] - img[y][x]
            dy = img[y + 1][x] - img[y][x]
            total += math.sqrt(dx * dx + dy * dy) / math.sqrt(2.0)
            count += 1
    return total / count


def pearson_reference(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    return sxy / math.sqrt(sxx * syy)


def edge_preservation_reference(f, a, b):
    """Qabf with scalar loops: Sobel parts, sigmoid agreements, pooling."""
    def parts(img):
        g = sobel_reference(img)
        gx_k = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]
        gy_k = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]
        gx = convolve3_reference(img, gx_k)
        gy = convolve3_reference(img, gy_k)
        h = len(img)
        w = len(img[0])
        alpha = [[math.atan(gy[y][x] / (gx[y][x] if gx[y][x] != 0.0 else 1e-10))
                  for x in range(w)] for y in range(h)]
        return g, alpha

    def agreement(gs, als, gf, alf):
        if gs > gf:
            ratio = gf / gs if gs != 0.0 else 0.0
        else:
            ratio = gs / gf if gf != 0.0 else 0.0
        angle = 1.0 - abs(als - alf) * (2.0 / math.pi)
        qg = 0.9994 / (1.0 + math.exp(-15.0 * (ratio - 0.5)))
        qa = 0.9879 / (1.0 + math.exp(-22.0 * (angle - 0.8)))
        return qg * qa

    g_f, a_f = parts(f)
    g_a, al_a = parts(a)
    g_b, al_b = parts(b)
    h = len(f)
    w = len(f[0])
    num = 0.0
    den = 0.0
    for y in range(h):
        for x in range(w):
            num += (agreement(g_a[y][x], al_a[y][x], g_f[y][x], a_f[y][x]) * g_a[y][x]
                    + agreement(g_b[y][x], al_b[y][x], g_f[y][x], a_f[y][x]) * g_b[y][x])
            den += g_a[y][x] + g_b[y][x]
    if den == 0.0:
        return 0.0
    return num / den
