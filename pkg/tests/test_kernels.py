import random
from fractions import Fraction

import pytest

from loopquant import _kernels_py, kernels

compiled = pytest.importorskip("loopquant._kernels")


def _random_terms(rng, n):
    out = {}
    for _ in range(n):
        deg = rng.randint(0, 4)
        mono = tuple(sorted((rng.randint(0, 3) << 6) | rng.randint(0, 1) for _ in range(deg)))
        out[(rng.randint(-1, 1), mono)] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return {k: v for k, v in out.items() if v}


@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    rng = random.Random(seed)
    a, b = _random_terms(rng, 30), _random_terms(rng, 30)
    for D, L, cap in [(6, 8, kernels.NO_CAP), (4, 5, 6), (3, 2, 3)]:
        assert compiled.mul_terms(a, b, D, L, cap) == _kernels_py.mul_terms(a, b, D, L, cap)
    for v in (0, 1, 64, 65, 192):
        assert compiled.derive_terms(a, v) == _kernels_py.derive_terms(a, v)
    x, y = dict(a), dict(a)
    compiled.add_into(x, b, Fraction(3, 2))
    _kernels_py.add_into(y, b, Fraction(3, 2))
    assert x == y


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_fallback_switch():
    import os
    import subprocess
    import sys
    env = dict(os.environ, LOOPQUANT_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from loopquant import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True).stdout.strip()
    assert out == "python"
