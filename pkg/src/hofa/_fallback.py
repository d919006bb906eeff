"""Numpy implementations of the kernels in ``_kernels.pyx``.

Same signatures and same enumeration orders; used when the compiled
extension is unavailable or when HOFA_PURE_PYTHON=1.
"""
import numpy as np

_CHUNK = 1 << 18


def _shift_indices(add, k, tuples):
    """u[S] = index of sum_{i in S} t_i for each row of ``tuples``."""
    m = 1 << k
    u = np.zeros((m, tuples.shape[0]), dtype=np.int64)
    for s in range(1, m):
        low = (s & -s).bit_length() - 1
        u[s] = add[u[s & (s - 1)], tuples[:, low]]
    return u


def _tuple_block(n, k, start, stop, tvals=None):
    idx = np.arange(start, stop, dtype=np.int64)
    nt = n if tvals is None else len(tvals)
    cols = []
    for j in range(k - 1, -1, -1):
        cols.append(idx % nt)
        idx = idx // nt
    tup = np.stack(cols[::-1], axis=1) if cols else np.zeros((stop - start, 0), dtype=np.int64)
    if tvals is not None:
        tup = np.asarray(tvals, dtype=np.int64)[tup]
    return tup


def _conv_rows(vals, add, k, start, stop):
    n = add.shape[0]
    tup = _tuple_block(n, k, start, stop)
    u = _shift_indices(add, k, tup)
    prod = np.broadcast_to(vals[0][None, :], (stop - start, n)).copy()
    for s in range(1, 1 << k):
        # f_S(x + u_S) for all x: add[u_S, x]
        prod *= vals[s][add[u[s]]]
    return prod.mean(axis=1)


def conv_table(vals, add, k):
    vals = np.asarray(vals, dtype=complex)
    add = np.asarray(add)
    n = add.shape[0]
    total = n**k
    out = np.empty(total, dtype=complex)
    step = max(1, _CHUNK // max(n, 1))
    for start in range(0, total, step):
        stop = min(total, start + step)
        out[start:stop] = _conv_rows(vals, add, k, start, stop)
    return out


def conv_mean(vals, add, k):
    vals = np.asarray(vals, dtype=complex)
    add = np.asarray(add)
    n = add.shape[0]
    total = n**k
    acc = 0j
    step = max(1, _CHUNK // max(n, 1))
    for start in range(0, total, step):
        stop = min(total, start + step)
        acc += _conv_rows(vals, add, k, start, stop).sum()
    return complex(acc / total)


def degree_violation(ang, L, add, m, tvals):
    ang = np.asarray(ang, dtype=np.int64)
    add = np.asarray(add)
    tvals = np.asarray(tvals, dtype=np.int64)
    n = add.shape[0]
    nt = len(tvals)
    M = 1 << m
    signs = np.array([1 if (m - bin(s).count("1")) % 2 == 0 else -1 for s in range(M)], dtype=np.int64)
    total = nt**m
    step = max(1, _CHUNK // max(n, 1))
    for start in range(0, total, step):
        stop = min(total, start + step)
        tup = _tuple_block(n, m, start, stop, tvals)
        u = _shift_indices(add, m, tup)
        acc = np.zeros((stop - start, n), dtype=np.int64)
        for s in range(M):
            acc += signs[s] * ang[add[u[s]]]
        bad = np.nonzero(acc % L)
        if bad[0].size:
            # first in (tuple, x) order
            r, x = bad[0][0], bad[1][0]
            return (int(x),) + tuple(int(v) for v in tup[r])
    return None


def character_system_norms(ang_table, add, d, L):
    ang_table = np.asarray(ang_table, dtype=np.int64)
    add = np.asarray(add)
    nc = ang_table.shape[0]
    n = add.shape[0]
    M = 1 << d
    nt = n**d
    tup = _tuple_block(n, d, 0, nt)
    u = _shift_indices(add, d, tup)
    # pos[S] has shape (nt, n): x + t_S
    pos = np.stack([add[u[s]] for s in range(M)])
    etab = np.exp(2j * np.pi * np.arange(L) / L)
    out = np.empty(nc**M, dtype=float)
    last = ang_table[:, pos[M - 1]]  # (nc, nt, n)
    nprefix = nc ** (M - 1)
    for p in range(nprefix):
        digits = []
        q = p
        for _ in range(M - 1):
            digits.append(q % nc)
            q //= nc
        digits = digits[::-1]
        part = np.zeros((nt, n), dtype=np.int64)
        for s, c in enumerate(digits):
            part += ang_table[c][pos[s]]
        vals = etab[(part[None] + last) % L].mean(axis=2)  # (nc, nt)
        out[p * nc:(p + 1) * nc] = np.sqrt((np.abs(vals) ** 2).mean(axis=1))
    return out
