import os
import subprocess
import sys

import numpy as np

from mhdnudge import _kernels


def test_backend_reported():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_mode_solve_matches_einsum():
    rng = np.random.default_rng(0)
    mats = rng.standard_normal((50, 4, 4)) + 1j * rng.standard_normal((50, 4, 4))
    rhs = rng.standard_normal((50, 4)) + 1j * rng.standard_normal((50, 4))
    out = _kernels.mode_solve(np.ascontiguousarray(mats),
                              np.ascontiguousarray(rhs))
    expected = np.einsum("mij,mj->mi", mats, rhs)
    np.testing.assert_allclose(out, expected, atol=1e-13)


def test_advect_products_matches_numpy():
    rng = np.random.default_rng(1)
    a1, a2, g1x, g1y, g2x, g2y = rng.standard_normal((6, 16, 16))
    p1, p2 = _kernels.advect_products(a1, a2, g1x, g1y, g2x, g2y)
    np.testing.assert_allclose(p1, a1 * g1x + a2 * g1y, atol=1e-14)
    np.testing.assert_allclose(p2, a1 * g2x + a2 * g2y, atol=1e-14)


def test_numpy_fallback_selected_by_env_flag():
    code = "from mhdnudge import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, MHDNUDGE_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backends_agree_on_time_steps(tmp_path):
    """A short solver run must match between the two backends to roundoff."""
    script = r"""
import numpy as np, sys
from mhdnudge.spectral import Grid, random_divfree_field, SpectralVectorField
from mhdnudge.dynamics import derive_elsasser_params, ForcingSpec, MhdStepper
g = Grid(16)
p = derive_elsasser_params(5.0, 5.0)
f = random_divfree_field(g, 100, 2.0, 2)
fs = ForcingSpec(f, f.copy())
st = MhdStepper(g, p, fs, 2e-3)
init = random_divfree_field(g, 0, 2.0)
st.set_state(init.coef, init.coef, 0.0)
for _ in range(50):
    st.advance()
np.save(sys.argv[1], st.X)
"""
    outs = []
    for flag, name in (("0", "fast.npy"), ("1", "ref.npy")):
        path = tmp_path / name
        env = dict(os.environ, MHDNUDGE_NO_NUMBA=flag)
        subprocess.run([sys.executable, "-c", script, str(path)], env=env,
                       check=True)
        outs.append(np.load(path))
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-13)
