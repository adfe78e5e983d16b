import os
import subprocess
import sys

import numpy as np
import pytest

from bellkit import _kernels
from bellkit._kernels import numpy_impl

from conftest import random_density, random_observable

numba_impl = pytest.importorskip("bellkit._kernels._numba")


def setup(rng, dims):
    rho = random_density(rng, int(np.prod(dims)))
    dmax = max(dims)
    obs = np.zeros((len(dims), 2, dmax, dmax), dtype=complex)
    for n, d in enumerate(dims):
        for x in range(2):
            obs[n, x, :d, :d] = random_observable(rng, d)
    return rho, np.array(dims, dtype=np.int64), obs


@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 3, 2), (4, 4)])
def test_backends_agree(rng, dims):
    rho, d, obs = setup(rng, dims)
    g = rng.normal(size=2 ** len(dims))
    assert np.allclose(numba_impl.product_expectations(rho, d, obs),
                       numpy_impl.product_expectations(rho, d, obs), atol=1e-12)
    for p in range(len(dims)):
        assert np.allclose(numba_impl.effective_operator(rho, d, obs, g, p),
                           numpy_impl.effective_operator(rho, d, obs, g, p), atol=1e-12)
    ranks = np.full((len(dims), 2), -1, dtype=np.int64)
    t1, c1, s1 = numba_impl.ascend(rho, d, obs.copy(), g, ranks, 30, 1e-12)
    t2, c2, s2 = numpy_impl.ascend(rho, d, obs.copy(), g, ranks, 30, 1e-12)
    assert s1 == s2
    assert np.allclose(t1, t2, atol=1e-9)


def test_walsh_hadamard_and_strategies_agree(rng):
    v = rng.normal(size=16)
    assert np.allclose(numba_impl.walsh_hadamard(v), numpy_impl.walsh_hadamard(v))
    for n in (1, 2, 3):
        for a, b in zip(numba_impl.strategy_tables(n), numpy_impl.strategy_tables(n)):
            assert np.array_equal(a, b)


def test_walsh_hadamard_is_involution_up_to_scale(rng):
    v = rng.normal(size=8)
    assert np.allclose(numpy_impl.walsh_hadamard(numpy_impl.walsh_hadamard(v)) / 8, v)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, BELLKIT_DISABLE_NUMBA="1")
    code = ("from bellkit import _kernels, qcore, optimize, wwzb;"
            "r = optimize.seesaw(qcore.singlet_state(), wwzb.chsh(), optimize.SearchBudget(3, 3));"
            "print(_kernels.BACKEND, round(r.best_score, 9))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "1.414213562"]
    assert _kernels.BACKEND in ("numba", "numpy")
