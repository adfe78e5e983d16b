"""numba-compiled loop kernels with the same contracts as ``_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def _digit_table(dims):
    """``table[i, m]`` is party ``m``'s local index in flat index ``i`` (party 1 most significant)."""
    n = dims.shape[0]
    size = 1
    for m in range(n):
        size *= dims[m]
    table = np.empty((size, n), dtype=np.int64)
    for i in range(size):
        rest = i
        for m in range(n - 1, -1, -1):
            table[i, m] = rest % dims[m]
            rest //= dims[m]
    return table


@njit(cache=True)
def product_expectations(rho, dims, ops):
    n = dims.shape[0]
    k = ops.shape[1]
    total = k**n
    size = rho.shape[0]
    digits = _digit_table(dims)
    vals = np.empty((n, k), dtype=np.complex128)
    out = np.zeros(total, dtype=np.complex128)
    for i in range(size):
        for j in range(size):
            r = rho[i, j]
            if r == 0:
                continue
            for m in range(n):
                for c in range(k):
                    vals[m, c] = ops[m, c, digits[j, m], digits[i, m]]
            for c in range(total):
                prod = r
                rest = c
                for m in range(n):
                    prod *= vals[m, rest % k]
                    rest //= k
                out[c] += prod
    return out


@njit(cache=True)
def _effective(rho, digits, obs, g, party, dn, out):
    n = digits.shape[1]
    size = rho.shape[0]
    nx = 2**n
    out[:] = 0
    for i in range(size):
        ip = digits[i, party]
        for j in range(size):
            r = rho[i, j]
            if r == 0:
                continue
            jp = digits[j, party]
            for x in range(nx):
                coeff = g[x]
                if coeff == 0:
                    continue
                prod = r * coeff
                for m in range(n):
                    if m != party:
                        prod *= obs[m, (x >> m) & 1, digits[j, m], digits[i, m]]
                out[(x >> party) & 1, ip, jp] += prod


@njit(cache=True)
def effective_operator(rho, dims, obs, g, party):
    dn = dims[party]
    out = np.zeros((2, dn, dn), dtype=np.complex128)
    _effective(rho, _digit_table(dims), obs, g, party, dn, out)
    return out


@njit(cache=True)
def walsh_hadamard(values):
    v = values.astype(np.float64).copy()
    size = v.shape[0]
    h = 1
    while h < size:
        for start in range(0, size, 2 * h):
            for i in range(start, start + h):
                a = v[i]
                b = v[i + h]
                v[i] = a + b
                v[i + h] = a - b
        h *= 2
    return v


@njit(cache=True)
def strategy_tables(n):
    ns = 4**n
    nx = 2**n
    corr = np.ones((ns, nx))
    index = np.zeros((ns, nx), dtype=np.int64)
    for lam in range(ns):
        for x in range(nx):
            c = 1.0
            idx = 0
            for m in range(n):
                local = (lam >> (2 * m)) & 3
                bit = (local >> ((x >> m) & 1)) & 1
                if bit == 0:
                    c = -c
                idx += bit << m
            corr[lam, x] = c
            index[lam, x] = idx
    return corr, index


@njit(cache=True)
def _trace_product(obs, k, party, d):
    total = 0.0
    for x in range(2):
        for i in range(d):
            for j in range(d):
                total += (obs[party, x, i, j] * k[x, j, i]).real
    return total


@njit(cache=True)
def ascend(rho, dims, obs, g, ranks, limit, eps):
    n = dims.shape[0]
    scale = 2.0**n
    digits = _digit_table(dims)
    dmax = obs.shape[2]
    k = np.zeros((2, dmax, dmax), dtype=np.complex128)
    trace = np.empty(limit + 1)
    _effective(rho, digits, obs, g, 0, dims[0], k)
    trace[0] = _trace_product(obs, k, 0, dims[0]) / scale
    for sweep in range(1, limit + 1):
        for p in range(n):
            d = dims[p]
            _effective(rho, digits, obs, g, p, d, k)
            for x in range(2):
                h = np.empty((d, d), dtype=np.complex128)
                for i in range(d):
                    for j in range(d):
                        h[i, j] = 0.5 * (k[x, i, j] + np.conj(k[x, j, i]))
                vals, vecs = np.linalg.eigh(h)
                r = ranks[p, x]
                if r < 0:
                    r = 0
                    for v in vals:
                        if v >= 0:
                            r += 1
                for i in range(d):
                    for j in range(d):
                        acc = 0j
                        for c in range(d - r, d):
                            acc += vecs[i, c] * np.conj(vecs[j, c])
                        obs[p, x, i, j] = 2 * acc - (1.0 if i == j else 0.0)
        value = _trace_product(obs, k, n - 1, dims[n - 1]) / scale
        trace[sweep] = value
        if value - trace[sweep - 1] < eps:
            return trace[: sweep + 1], True, sweep
    return trace, False, limit
