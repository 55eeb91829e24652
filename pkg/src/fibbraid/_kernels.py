"""Compiled inner loops for braid evaluation and scoring.

Every matrix product in the package goes through :func:`mul_gen`, so a word
evaluated by a left fold from the identity and the same word reached by
incremental depth-first extension produce bit-identical matrices. Scoring is
per-matrix and independent of batch layout, which keeps search results
identical across partitioning and worker counts.

numba's default (no fastmath) keeps IEEE semantics: no reassociation and no
FMA contraction.
"""
import numpy as np
from numba import njit

OBJ_GATE = 0
OBJ_CLASS = 1
OBJ_SURVEY = 2

# Absolute slack added to the |M11|-based pre-screen. For a unitary 5x5
# matrix d^U(A) = 1 - |M11|^2 exactly; rounding moves it by ~1e-15 * length.
SCREEN_MARGIN = 1e-9

DET_FLOOR = 1e-6

_SQ = 1.0 / np.sqrt(2.0)
MAGIC = _SQ * np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]], dtype=np.complex128)


@njit(cache=True, nogil=True)
def mul_gen(a, g, out):
    """out = a @ g for 5x5 complex, skipping exact zeros of g."""
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            acc = 0j
            for k in range(n):
                gk = g[k, j]
                if gk.real != 0.0 or gk.imag != 0.0:
                    acc += a[i, k] * gk
            out[i, j] = acc


@njit(cache=True, nogil=True)
def fold_word(table, digits):
    """Left fold I5 @ G[d0] @ G[d1] @ ... over a digit sequence."""
    cur = np.eye(5, dtype=np.complex128)
    nxt = np.empty((5, 5), dtype=np.complex128)
    for t in range(digits.shape[0]):
        mul_gen(cur, table[digits[t]], nxt)
        cur, nxt = nxt, cur
    return cur


@njit(cache=True, nogil=True)
def fold_batch(table, words, out):
    """Evaluate each row of a (N, L) digit array into out[N, 5, 5]."""
    nw = words.shape[0]
    length = words.shape[1]
    cur = np.empty((5, 5), dtype=np.complex128)
    nxt = np.empty((5, 5), dtype=np.complex128)
    for w in range(nw):
        for i in range(5):
            for j in range(5):
                cur[i, j] = 1.0 if i == j else 0.0
        for t in range(length):
            mul_gen(cur, table[words[w, t]], nxt)
            for i in range(5):
                for j in range(5):
                    cur[i, j] = nxt[i, j]
        for i in range(5):
            for j in range(5):
                out[w, i, j] = cur[i, j]


@njit(cache=True, nogil=True)
def dfs_leaves(prefix, prefix_code, last_token, table, depth, allowed,
               m11_floor, out_codes, out_mats):
    """Depth-first extension of ``prefix`` by every word of ``depth`` tokens.

    One 5x5 product per visited node. ``allowed[p, q]`` gates token q
    following token p (used to drop token/inverse adjacencies). Leaves with
    |M11|^2 >= m11_floor are written out together with their lexicographic
    integer code. Returns (emitted, visited_leaves).
    """
    ng = table.shape[0]
    stack = np.empty((depth + 1, 5, 5), dtype=np.complex128)
    for i in range(5):
        for j in range(5):
            stack[0, i, j] = prefix[i, j]
    idx = np.empty(depth, dtype=np.int64)
    codes = np.empty(depth + 1, dtype=np.int64)
    codes[0] = prefix_code
    emitted = 0
    leaves = 0
    level = 0
    idx[0] = -1
    while level >= 0:
        idx[level] += 1
        tok = idx[level]
        if tok >= ng:
            level -= 1
            continue
        prev = idx[level - 1] if level > 0 else last_token
        if prev >= 0 and not allowed[prev, tok]:
            continue
        mul_gen(stack[level], table[tok], stack[level + 1])
        codes[level + 1] = codes[level] * ng + tok
        if level == depth - 1:
            leaves += 1
            m = stack[depth]
            v = m[0, 0].real * m[0, 0].real + m[0, 0].imag * m[0, 0].imag
            if v >= m11_floor:
                out_codes[emitted] = codes[depth]
                for i in range(5):
                    for j in range(5):
                        out_mats[emitted, i, j] = m[i, j]
                emitted += 1
        else:
            level += 1
            idx[level] = -1
    return emitted, leaves


@njit(cache=True, nogil=True)
def _det4(a):
    # Gaussian elimination with partial pivoting on a private copy.
    m = a.copy()
    det = 1.0 + 0j
    for c in range(4):
        p = c
        best = abs(m[c, c])
        for r in range(c + 1, 4):
            v = abs(m[r, c])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            return 0j
        if p != c:
            for k in range(4):
                tmp = m[c, k]
                m[c, k] = m[p, k]
                m[p, k] = tmp
            det = -det
        piv = m[c, c]
        det *= piv
        for r in range(c + 1, 4):
            f = m[r, c] / piv
            for k in range(c + 1, 4):
                m[r, k] -= f * m[c, k]
    return det


@njit(cache=True, nogil=True)
def _invariants(a, magic, out):
    """Makhlin invariants of a 4x4 block; returns False on a singular block."""
    tmp = np.zeros((4, 4), dtype=np.complex128)
    ub = np.zeros((4, 4), dtype=np.complex128)
    # ub = Q^dagger a Q
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += a[i, k] * magic[k, j]
            tmp[i, j] = acc
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += magic[k, i].conjugate() * tmp[k, j]
            ub[i, j] = acc
    mu = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += ub[k, i] * ub[k, j]
            mu[i, j] = acc
    tr = 0j
    for i in range(4):
        tr += mu[i, i]
    tr_sq = 0j
    for i in range(4):
        for j in range(4):
            tr_sq += mu[i, j] * mu[j, i]
    det = _det4(a)
    if abs(det) <= DET_FLOOR:
        return False
    t2 = tr * tr
    z = t2 / (16.0 * det)
    g3 = (t2 - tr_sq) / (4.0 * det)
    out[0] = z.real
    out[1] = z.imag
    out[2] = g3.real
    out[3] = g3.imag
    return True


@njit(cache=True, nogil=True)
def score_batch(mats, kind, target, class_g, catalog, unitarity_threshold,
                leakage_threshold, strict_leakage, want_invariants,
                accepted, m11_norm, d_unitary, objective, inv, closest):
    """Score 5x5 braid matrices against an objective.

    ``target`` must already be divided by its Hilbert-Schmidt norm. Entries of
    rejected matrices are left as NaN / -1 except m11_norm.
    """
    n = mats.shape[0]
    a = np.empty((4, 4), dtype=np.complex128)
    h = np.empty((4, 4), dtype=np.complex128)
    g = np.empty(4, dtype=np.float64)
    ncls = catalog.shape[0]
    for w in range(n):
        accepted[w] = False
        d_unitary[w] = np.nan
        objective[w] = np.nan
        closest[w] = -1
        for q in range(4):
            inv[w, q] = np.nan
        m11 = mats[w, 0, 0]
        nm = abs(m11)
        m11_norm[w] = nm
        if 1.0 - nm * nm >= unitarity_threshold + SCREEN_MARGIN:
            continue
        if strict_leakage and abs(1.0 - nm) >= leakage_threshold:
            continue
        for i in range(4):
            for j in range(4):
                a[i, j] = mats[w, i + 1, j + 1]
        for i in range(4):
            for j in range(4):
                acc = 0j
                for k in range(4):
                    acc += a[k, i].conjugate() * a[k, j]
                if i == j:
                    acc -= 1.0
                h[i, j] = acc
        ev = np.linalg.eigvalsh(h)
        du = 0.0
        for q in range(4):
            du += abs(ev[q])
        d_unitary[w] = du
        if not du < unitarity_threshold:
            continue
        has_inv = False
        if want_invariants or kind != OBJ_GATE:
            if not _invariants(a, MAGIC, g):
                continue
            has_inv = True
            for q in range(4):
                inv[w, q] = g[q]
        if kind == OBJ_GATE:
            nrm = 0.0
            for i in range(4):
                for j in range(4):
                    nrm += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
            nrm = np.sqrt(nrm)
            if nrm == 0.0:
                continue
            acc2 = 0.0
            for i in range(4):
                for j in range(4):
                    dz = a[i, j] / nrm - target[i, j]
                    acc2 += dz.real * dz.real + dz.imag * dz.imag
            objective[w] = np.sqrt(acc2)
        elif kind == OBJ_CLASS:
            objective[w] = ((class_g[0] - g[0]) ** 2 + (class_g[1] - g[1]) ** 2
                            + (class_g[2] - g[2]) ** 2)
        if has_inv:
            best = np.inf
            bi = -1
            for c in range(ncls):
                dc = ((catalog[c, 0] - g[0]) ** 2 + (catalog[c, 1] - g[1]) ** 2
                      + (catalog[c, 2] - g[2]) ** 2)
                if dc < best:
                    best = dc
                    bi = c
            closest[w] = bi
            if kind == OBJ_SURVEY:
                objective[w] = best
        accepted[w] = True
