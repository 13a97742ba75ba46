"""Bitset branch-and-bound kernels compiled with numba.

Adjacency rows are packed little-endian into uint64 words: vertex ``v`` is bit
``v & 63`` of word ``v >> 6``.
"""

import numba as nb
import numpy as np

_ONE = np.uint64(1)


def pack_rows(A: np.ndarray) -> np.ndarray:
    """Pack a boolean matrix into uint64 bitset rows."""
    A = np.asarray(A, dtype=bool)
    rows, cols = A.shape
    words = max(1, (cols + 63) // 64)
    buf = np.zeros((rows, words * 64), dtype=np.uint8)
    buf[:, :cols] = A
    packed = np.packbits(buf.reshape(rows, words, 64), axis=2, bitorder="little")
    return packed.reshape(rows, words * 8).view("<u8").astype(np.uint64).reshape(rows, words)


@nb.njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@nb.njit(cache=True, inline="always")
def _lowbit(x):
    return _popcount((x & (~x + np.uint64(1))) - np.uint64(1))


@nb.njit(cache=True)
def clique_bb(adj, n, budget, init_best):
    """Maximum clique by branch and bound with a greedy-colouring bound.

    Vertices are coloured in index order into independent classes; only
    vertices whose class number could still beat the incumbent are branched
    on, from the highest colour down. A vertex that would open such a class
    is instead absorbed when it has exactly one neighbour ``u`` in an earlier
    class ``i`` and some later low class ``j`` misses ``N(v) & N(u)``: then
    classes i and j together cover v, so the colour bound still holds.

    Returns ``(size, vertices, nodes, complete)``.
    """
    W = adj.shape[1]
    P = np.zeros((n + 2, W), dtype=np.uint64)
    order = np.zeros((n + 2, n + 1), dtype=np.int32)
    color = np.zeros((n + 2, n + 1), dtype=np.int32)
    pos = np.zeros(n + 2, dtype=np.int64)
    U = np.zeros(W, dtype=np.uint64)
    Q = np.zeros(W, dtype=np.uint64)
    T = np.zeros(W, dtype=np.uint64)
    C = np.zeros((n + 2, W), dtype=np.uint64)
    used = np.zeros(n + 2, dtype=np.bool_)
    cur = np.zeros(n + 1, dtype=np.int32)
    best = np.zeros(n + 1, dtype=np.int32)
    nbest = init_best
    nodes = 0
    complete = True
    for v in range(n):
        P[0, v >> 6] |= _ONE << np.uint64(v & 63)
    depth = 0
    need_color = True
    while depth >= 0:
        if need_color:
            nodes += 1
            if nodes > budget:
                complete = False
                break
            left = 0
            for w in range(W):
                U[w] = P[depth, w]
                left += _popcount(U[w])
            kmin = nbest - depth + 1
            if kmin < 1:
                kmin = 1
            for i in range(kmin + 1):
                used[i] = False
            k = 0
            c = 0
            # stop once the remaining vertices cannot open a class >= kmin
            while left > 0 and k + left >= kmin:
                k += 1
                for w in range(W):
                    Q[w] = U[w]
                    C[k, w] = np.uint64(0)
                for w in range(W):
                    while Q[w] != np.uint64(0):
                        b = _lowbit(Q[w])
                        v = (w << 6) + b
                        bit = _ONE << np.uint64(b)
                        U[w] &= ~bit
                        Q[w] &= ~bit
                        left -= 1
                        if k >= kmin:
                            absorbed = False
                            for i in range(1, kmin - 1):
                                if used[i]:
                                    continue
                                cnt = 0
                                u = -1
                                for w2 in range(W):
                                    x = C[i, w2] & adj[v, w2]
                                    if x != np.uint64(0):
                                        cnt += _popcount(x)
                                        if cnt > 1:
                                            break
                                        u = (w2 << 6) + _lowbit(x)
                                if cnt != 1:
                                    continue
                                for w2 in range(W):
                                    T[w2] = adj[v, w2] & adj[u, w2]
                                for j in range(i + 1, kmin):
                                    if used[j]:
                                        continue
                                    clash = False
                                    for w2 in range(W):
                                        if C[j, w2] & T[w2]:
                                            clash = True
                                            break
                                    if not clash:
                                        used[i] = True
                                        used[j] = True
                                        absorbed = True
                                        break
                                if absorbed:
                                    break
                            if absorbed:
                                continue
                            order[depth, c] = v
                            color[depth, c] = k
                            c += 1
                        C[k, w] |= bit
                        for w2 in range(w, W):
                            Q[w2] &= ~adj[v, w2]
            pos[depth] = c
            need_color = False
        p = pos[depth] - 1
        if p < 0 or depth + color[depth, p] <= nbest:
            depth -= 1
            if depth >= 0:
                v = cur[depth]
                P[depth, v >> 6] &= ~(_ONE << np.uint64(v & 63))
            continue
        pos[depth] = p
        v = order[depth, p]
        cur[depth] = v
        empty = True
        for w in range(W):
            x = P[depth, w] & adj[v, w]
            P[depth + 1, w] = x
            if x != np.uint64(0):
                empty = False
        if empty:
            if depth + 1 > nbest:
                nbest = depth + 1
                for i in range(depth + 1):
                    best[i] = cur[i]
            P[depth, v >> 6] &= ~(_ONE << np.uint64(v & 63))
        else:
            depth += 1
            need_color = True
    return nbest, best[:nbest].copy(), nodes, complete


@nb.njit(cache=True)
def biclique_bb(adj, adjT, nL, nR, budget, init_best):
    """Maximum balanced biclique, branching on left vertices.

    A node holds the chosen left set X and its common right neighbourhood R;
    its value is ``min(|X|, |R|)``. To beat the incumbent with l = best + 1,
    t = l - |X| more candidates are needed, so right vertices seeing fewer
    than t candidates and candidates seeing fewer than l right vertices are
    peeled off until both sides are stable. Children are tried in decreasing
    order of ``|N(u) & R|`` and removed from the sibling list once tried.

    Returns ``(size, left, right_bits, nodes, complete)``.
    """
    WR = adj.shape[1]
    WL = adjT.shape[1]
    R = np.zeros((nL + 2, WR), dtype=np.uint64)
    cand = np.zeros((nL + 2, nL + 1), dtype=np.int32)
    key = np.zeros((nL + 2, nL + 1), dtype=np.int64)
    ncand = np.zeros(nL + 2, dtype=np.int64)
    pos = np.zeros(nL + 2, dtype=np.int64)
    X = np.zeros(nL + 1, dtype=np.int32)
    bestX = np.zeros(nL + 1, dtype=np.int32)
    bestR = np.zeros(WR, dtype=np.uint64)
    cbits = np.zeros(WL, dtype=np.uint64)
    best = init_best
    nodes = 0
    complete = True
    for v in range(nR):
        R[0, v >> 6] |= _ONE << np.uint64(v & 63)
    for u in range(nL):
        cnt = 0
        for w in range(WR):
            cnt += _popcount(adj[u, w])
        cand[0, u] = u
        key[0, u] = cnt
    ncand[0] = nL
    depth = 0
    need_setup = True
    while depth >= 0:
        if need_setup:
            nodes += 1
            if nodes > budget:
                complete = False
                break
            need_setup = False
            r = 0
            for w in range(WR):
                r += _popcount(R[depth, w])
            val = depth if depth < r else r
            if val > best:
                best = val
                for i in range(depth):
                    bestX[i] = X[i]
                for w in range(WR):
                    bestR[w] = R[depth, w]
            ell = best + 1
            t = ell - depth
            m = ncand[depth]
            if r < ell or m < t:
                depth -= 1
                continue
            # peel both sides against the target size
            dead = False
            while True:
                for w in range(WL):
                    cbits[w] = np.uint64(0)
                for a in range(m):
                    x = cand[depth, a]
                    cbits[x >> 6] |= _ONE << np.uint64(x & 63)
                changed = False
                r = 0
                for w in range(WR):
                    word = R[depth, w]
                    keep = word
                    while word != np.uint64(0):
                        b = _lowbit(word)
                        bit = _ONE << np.uint64(b)
                        word &= ~bit
                        v = (w << 6) + b
                        cnt = 0
                        for w2 in range(WL):
                            cnt += _popcount(adjT[v, w2] & cbits[w2])
                            if cnt >= t:
                                break
                        if cnt < t:
                            keep &= ~bit
                            changed = True
                    R[depth, w] = keep
                    r += _popcount(keep)
                if r < ell:
                    dead = True
                    break
                c = 0
                for a in range(m):
                    x = cand[depth, a]
                    cnt = 0
                    for w in range(WR):
                        cnt += _popcount(R[depth, w] & adj[x, w])
                    if cnt >= ell:
                        cand[depth, c] = x
                        key[depth, c] = cnt
                        c += 1
                    else:
                        changed = True
                m = c
                if m < t:
                    dead = True
                    break
                if not changed:
                    break
            if dead:
                depth -= 1
                continue
            ncand[depth] = m
            # insertion sort by key, descending (stable)
            for a in range(1, m):
                cv = cand[depth, a]
                kv = key[depth, a]
                b = a - 1
                while b >= 0 and key[depth, b] < kv:
                    cand[depth, b + 1] = cand[depth, b]
                    key[depth, b + 1] = key[depth, b]
                    b -= 1
                cand[depth, b + 1] = cv
                key[depth, b + 1] = kv
            pos[depth] = 0
        p = pos[depth]
        m = ncand[depth]
        if p >= m or depth + (m - p) <= best or key[depth, p] <= best:
            depth -= 1
            continue
        pos[depth] = p + 1
        u = cand[depth, p]
        X[depth] = u
        for w in range(WR):
            R[depth + 1, w] = R[depth, w] & adj[u, w]
        c = 0
        for q in range(p + 1, m):
            x = cand[depth, q]
            cnt = 0
            for w in range(WR):
                cnt += _popcount(R[depth + 1, w] & adj[x, w])
            if cnt > best:
                cand[depth + 1, c] = x
                key[depth + 1, c] = cnt
                c += 1
        ncand[depth + 1] = c
        depth += 1
        need_setup = True
    return best, bestX[:best].copy(), bestR, nodes, complete
