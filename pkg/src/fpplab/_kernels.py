"""Compiled inner loops: the edge hash and windowed Dijkstra.

These mirror the pure-Python definitions in ``weights`` bit for bit; the
test-suite checks the two routes against each other.
"""
import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def fmix64(z):
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def mix_start(seed):
    return fmix64(seed + _GOLDEN)


@njit(cache=True, nogil=True)
def mix_word(h, w):
    return fmix64((h ^ np.uint64(w)) + _GOLDEN)


@njit(cache=True, nogil=True)
def to_unit(h):
    return np.float64(h >> _S11) * _INV53


@njit(cache=True, nogil=True)
def quantile(u, p0s, atoms, term, ta, tb):
    for j in range(p0s.shape[0]):
        if u < p0s[j]:
            return atoms[j]
        u = (u - p0s[j]) / (1.0 - p0s[j])
    if term == 0:
        return ta
    if term == 1:
        return ta + u * (tb - ta)
    return -math.log1p(-u) / ta


@njit(cache=True, nogil=True)
def edge_uniforms(seed, bases, steps):
    n, d = bases.shape
    out = np.empty(n, dtype=np.float64)
    s = np.uint64(seed)
    for i in range(n):
        h = mix_start(s)
        for k in range(d):
            h = mix_word(h, bases[i, k])
        for k in range(d):
            h = mix_word(h, steps[i, k])
        out[i] = to_unit(h)
    return out


@njit(cache=True, nogil=True)
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] > hk[i] or (hk[p] == hk[i] and hv[p] > hv[i]):
            tk = hk[p]
            tv = hv[p]
            hk[p] = hk[i]
            hv[p] = hv[i]
            hk[i] = tk
            hv[i] = tv
            i = p
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and (hk[r] < hk[l] or (hk[r] == hk[l] and hv[r] < hv[l])):
            c = r
        if hk[c] < hk[i] or (hk[c] == hk[i] and hv[c] < hv[i]):
            tk = hk[c]
            tv = hv[c]
            hk[c] = hk[i]
            hv[c] = hv[i]
            hk[i] = tk
            hv[i] = tv
            i = c
        else:
            break
    return key, val, size


@njit(cache=True, nogil=True)
def dijkstra_window(lo, shape, gens, seed, p0s, atoms, term, ta, tb,
                    src, targets, radius, max_pops):
    """Single-source Dijkstra on the box ``lo + [0, shape)`` of Z^d.

    Runs until every flat index in ``targets`` is settled and the next key
    exceeds ``radius``. Returns (dist, pred, boundary_min, pops, complete):
    ``boundary_min`` is the smallest settled distance of a vertex having a
    neighbour outside the box, the quantity that certifies exactness.
    """
    d = lo.shape[0]
    q = gens.shape[0]
    vol = 1
    for k in range(d):
        vol *= shape[k]
    strides = np.empty(d, dtype=np.int64)
    s = 1
    for k in range(d - 1, -1, -1):
        strides[k] = s
        s *= shape[k]
    offs = np.zeros(q, dtype=np.int64)
    for j in range(q):
        for k in range(d):
            offs[j] += gens[j, k] * strides[k]

    dist = np.full(vol, np.inf)
    pred = np.full(vol, -1, dtype=np.int64)
    settled = np.zeros(vol, dtype=np.bool_)
    is_target = np.zeros(vol, dtype=np.bool_)
    remaining = 0
    for t in targets:
        if not is_target[t]:
            is_target[t] = True
            remaining += 1

    cap = vol * q + 1
    hk = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    dist[src] = 0.0
    size = _heap_push(hk, hv, size, 0.0, src)

    seed64 = np.uint64(seed)
    h0 = mix_start(seed64)
    loc = np.empty(d, dtype=np.int64)
    boundary_min = np.inf
    pops = 0
    complete = True
    while size > 0:
        if remaining == 0 and hk[0] > radius:
            break
        key, u, size = _heap_pop(hk, hv, size)
        if settled[u]:
            continue
        settled[u] = True
        pops += 1
        if pops > max_pops:
            complete = False
            break
        if is_target[u]:
            remaining -= 1
        rem = u
        for k in range(d):
            loc[k] = rem // strides[k]
            rem -= loc[k] * strides[k]
        boundary = False
        for j in range(q):
            ok = True
            for k in range(d):
                c = loc[k] + gens[j, k]
                if c < 0 or c >= shape[k]:
                    ok = False
                    break
            if not ok:
                boundary = True
                continue
            v = u + offs[j]
            if settled[v]:
                continue
            # canonical key: lexicographically smaller endpoint is the base
            h = h0
            if v < u:
                for k in range(d):
                    h = mix_word(h, lo[k] + loc[k] + gens[j, k])
                for k in range(d):
                    h = mix_word(h, -gens[j, k])
            else:
                for k in range(d):
                    h = mix_word(h, lo[k] + loc[k])
                for k in range(d):
                    h = mix_word(h, gens[j, k])
            w = quantile(to_unit(h), p0s, atoms, term, ta, tb)
            nd = key + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                size = _heap_push(hk, hv, size, nd, v)
            elif nd == dist[v] and u < pred[v]:
                pred[v] = u
        if boundary and key < boundary_min:
            boundary_min = key
        if remaining == 0 and radius < 0:
            break
    return dist, pred, boundary_min, pops, complete


@njit(cache=True, nogil=True)
def window_edge_weights(lo, shape, gens, seed, p0s, atoms, term, ta, tb):
    """Weights of every in-box edge as (u_flat, v_flat, w) with u < v."""
    d = lo.shape[0]
    q = gens.shape[0]
    vol = 1
    for k in range(d):
        vol *= shape[k]
    strides = np.empty(d, dtype=np.int64)
    s = 1
    for k in range(d - 1, -1, -1):
        strides[k] = s
        s *= shape[k]
    us = np.empty(vol * q, dtype=np.int64)
    vs = np.empty(vol * q, dtype=np.int64)
    ws = np.empty(vol * q, dtype=np.float64)
    n = 0
    loc = np.empty(d, dtype=np.int64)
    h0 = mix_start(np.uint64(seed))
    for u in range(vol):
        rem = u
        for k in range(d):
            loc[k] = rem // strides[k]
            rem -= loc[k] * strides[k]
        for j in range(q):
            ok = True
            off = 0
            for k in range(d):
                c = loc[k] + gens[j, k]
                if c < 0 or c >= shape[k]:
                    ok = False
                    break
                off += gens[j, k] * strides[k]
            if not ok:
                continue
            v = u + off
            if v <= u:
                continue
            h = h0
            for k in range(d):
                h = mix_word(h, lo[k] + loc[k])
            for k in range(d):
                h = mix_word(h, gens[j, k])
            us[n] = u
            vs[n] = v
            ws[n] = quantile(to_unit(h), p0s, atoms, term, ta, tb)
            n += 1
    return us[:n], vs[:n], ws[:n]
