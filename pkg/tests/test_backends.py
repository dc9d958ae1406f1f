"""The numba and numpy kernels must agree; the flag must select between them."""
import os
import subprocess
import sys

import numpy as np
import pytest

from csynth.kernels import _numba as nb
from csynth.kernels import _numpy as npk

rs = np.random.default_rng(11)
CASES = [(rs.standard_normal((n, n)) * scale, beta) for n in (1, 3, 8, 17) for scale in (1e-6, 1.0, 50.0) for beta in (1e-2, 1.0, 40.0)]


@pytest.mark.parametrize("z,beta", CASES)
def test_potential_agrees(z, beta):
    v1, g1 = nb.potential_value_grad(z, beta)
    v2, g2 = npk.potential_value_grad(z, beta)
    assert v1 == pytest.approx(v2, rel=1e-13, abs=1e-300)
    assert nb.potential_value(z, beta) == pytest.approx(v1, rel=1e-15, abs=1e-300)
    np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("seed", range(6))
def test_line_and_linesearch_agree(seed):
    r = np.random.default_rng(seed)
    n = 6
    B = r.standard_normal((n, n)) * 2
    z, a = r.standard_normal(n), r.standard_normal(n)
    for beta in (0.05, 1.0, 7.0):
        for t in (0.0, 0.3, 2.0):
            np.testing.assert_allclose(nb.line_derivs(B, z, a, t, beta), npk.line_derivs(B, z, a, t, beta), rtol=1e-11, atol=1e-14)
        t1, f1 = nb.linesearch(B, z, a, beta, 1e-12, 200)
        t2, f2 = npk.linesearch(B, z, a, beta, 1e-12, 200)
        assert f1 == pytest.approx(f2, rel=1e-10, abs=1e-13)
        assert t1 == pytest.approx(t2, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_coord_roots_agree(seed):
    r = np.random.default_rng(100 + seed)
    B = r.standard_normal((7, 5)) * 3
    a = r.standard_normal(5)
    a[1] = 0.0
    for beta in (0.1, 1.0, 10.0):
        u1 = nb.coord_roots(B, a, beta, 1e-12, 200)
        u2 = npk.coord_roots(B, a, beta, 1e-12, 200)
        np.testing.assert_allclose(u1, u2, rtol=1e-8, atol=1e-9)


def test_jacobi_agrees():
    A = np.random.default_rng(5).standard_normal((9, 6))
    outs = []
    for mod in (nb, npk):
        G = np.array(A, order="F")
        V = np.eye(6, order="F")
        sweeps, ok = mod.jacobi_sweeps(G, V, 1e-12, 60)
        assert ok
        outs.append((np.sort(np.linalg.norm(G, axis=0)), G @ V.T))
    np.testing.assert_allclose(outs[0][0], outs[1][0], rtol=1e-12)
    np.testing.assert_allclose(outs[0][1], A, atol=1e-12)
    np.testing.assert_allclose(outs[1][1], A, atol=1e-12)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_environment_flag(flag, expected):
    env = dict(os.environ, CSYNTH_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "import csynth.kernels as k; print(k.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == expected
