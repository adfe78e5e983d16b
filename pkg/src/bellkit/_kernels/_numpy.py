"""Vectorized numpy kernels; reference path when numba is unavailable or disabled."""

import string

import numpy as np

_LETTERS = string.ascii_letters


def _trimmed(ops, dims):
    return [ops[m, :, : dims[m], : dims[m]] for m in range(len(dims))]


def product_expectations(rho, dims, ops):
    """``out[c] = tr[rho (x)_m ops[m, c_m]]`` with ``c`` little-endian in party order."""
    n = len(dims)
    dims = [int(d) for d in dims]
    rows = _LETTERS[:n]
    cols = _LETTERS[n : 2 * n]
    outs = _LETTERS[2 * n : 3 * n]
    terms = [rows + cols] + [outs[m] + cols[m] + rows[m] for m in range(n)]
    spec = ",".join(terms) + "->" + outs[::-1]
    tensor = rho.reshape(dims + dims)
    out = np.einsum(spec, tensor, *_trimmed(ops, dims), optimize=True)
    return np.ascontiguousarray(out).reshape(-1)


def effective_operator(rho, dims, obs, g, party):
    """Operator ``K[x]`` on ``party`` with ``sum_x tr[O(x) K[x]]`` the g-weighted expectation."""
    n = len(dims)
    dims = [int(d) for d in dims]
    rows = _LETTERS[:n]
    cols = _LETTERS[n : 2 * n]
    sets = _LETTERS[2 * n : 3 * n]
    trimmed = _trimmed(obs, dims)
    terms = [rows + cols]
    operands = [rho.reshape(dims + dims)]
    for m in range(n):
        if m == party:
            continue
        terms.append(sets[m] + cols[m] + rows[m])
        operands.append(trimmed[m])
    terms.append(sets[::-1])
    operands.append(np.asarray(g, dtype=float).reshape((2,) * n))
    spec = ",".join(terms) + "->" + sets[party] + rows[party] + cols[party]
    return np.einsum(spec, *operands, optimize=True)


def walsh_hadamard(values):
    """Unnormalized transform ``out[r] = sum_x (-1)^{popcount(r & x)} v[x]``."""
    v = np.array(values, dtype=float)
    size = v.shape[0]
    h = 1
    while h < size:
        v = v.reshape(-1, 2, h)
        v = np.stack((v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]), axis=1)
        h *= 2
    return v.reshape(size)


def strategy_tables(n):
    """Correlators and outcome indices of all ``4**n`` deterministic strategies."""
    lam = np.arange(4**n, dtype=np.int64)[:, None]
    xs = np.arange(2**n, dtype=np.int64)[None, :]
    corr = np.ones((4**n, 2**n))
    index = np.zeros((4**n, 2**n), dtype=np.int64)
    for m in range(n):
        local = (lam >> (2 * m)) & 3
        setting = (xs >> m) & 1
        bit = (local >> setting) & 1
        corr *= 2 * bit - 1
        index += bit << m
    return corr, index


def _observable(vecs, rank):
    d = vecs.shape[0]
    top = vecs[:, d - rank :]
    return 2 * top @ top.conj().T - np.eye(d)


def ascend(rho, dims, obs, g, ranks, limit, eps):
    """Cyclic exact party updates of +-1 observables ``obs`` (modified in place).

    ``ranks[p, x]`` fixes the +1 multiplicity of each observable; -1 means the
    update takes the whole nonnegative eigenspace. Returns the signed-score
    trace (normalized by ``2**N``), a converged flag and the sweeps used.
    """
    n = len(dims)
    scale = 2.0**n

    def value(p, k):
        d = dims[p]
        return float(sum(np.trace(obs[p, x, :d, :d] @ k[x]).real for x in range(2))) / scale

    trace = [value(0, effective_operator(rho, dims, obs, g, 0))]
    for sweep in range(1, limit + 1):
        for p in range(n):
            k = effective_operator(rho, dims, obs, g, p)
            d = dims[p]
            for x in range(2):
                vals, vecs = np.linalg.eigh(0.5 * (k[x] + k[x].conj().T))
                r = ranks[p, x] if ranks[p, x] >= 0 else int(np.sum(vals >= 0))
                obs[p, x, :d, :d] = _observable(vecs, r)
        trace.append(value(n - 1, k))
        if trace[-1] - trace[-2] < eps:
            return np.array(trace), True, sweep
    return np.array(trace), False, limit
