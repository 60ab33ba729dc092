import math

import numpy as np
import pytest

from kinsa import _backend
from kinsa.jacobian import geometric_jacobian
from kinsa.model import DhRow, RobotModel, builtin

from .conftest import random_q

needs_ext = pytest.mark.skipif(not _backend.HAVE_EXTENSION, reason="compiled kernel not built")


def _reference(model, Q):
    out = np.full((len(Q), 3), np.nan)
    for k, q in enumerate(Q):
        J = geometric_jacobian(model, q).matrix
        if J.shape == (6, 6):
            out[k] = np.linalg.det(J), np.linalg.det(J[:3, :3]), np.linalg.det(J[3:, 3:])
        elif model.n >= 3:
            out[k, 1] = np.linalg.det(J[:3, :3])
    return out


@pytest.mark.parametrize("backend", _backend.BACKENDS)
def test_kernel_matches_reference(backend, robot, rng):
    Q = random_q(rng, 300)
    assert np.allclose(_backend.chain_dets(robot, Q, backend=backend), _reference(robot, Q), atol=1e-14, rtol=0)


@pytest.mark.parametrize("backend", _backend.BACKENDS)
def test_kernel_short_chain(backend, rng):
    model = RobotModel("four", (DhRow(0.3, math.pi / 2, 0.1), DhRow(0.5, 0, 0), DhRow(0.2, -0.4, 0.3), DhRow(0, 0, 0.2)))
    Q = rng.uniform(-3, 3, (20, 4))
    got = _backend.chain_dets(model, Q, backend=backend)
    assert np.isnan(got[:, 0]).all() and np.isnan(got[:, 2]).all()
    assert np.allclose(got[:, 1], _reference(model, Q)[:, 1], atol=1e-14)


@pytest.mark.parametrize("backend", _backend.BACKENDS)
def test_kernel_theta_offset(backend, rng):
    rows = tuple(DhRow(r.a, r.alpha, r.d, 0.25 * (i + 1)) for i, r in enumerate(builtin("our6").rows))
    model = RobotModel("shifted", rows)
    Q = random_q(rng, 50)
    assert np.allclose(_backend.chain_dets(model, Q, backend=backend), _reference(model, Q), atol=1e-14, rtol=0)


@pytest.mark.parametrize("backend", _backend.BACKENDS)
def test_thread_count_does_not_change_bits(backend, rng):
    model = builtin("wam6-code")
    Q = random_q(rng, 20000)
    one = _backend.chain_dets(model, Q, threads=1, backend=backend)
    many = _backend.chain_dets(model, Q, threads=4, backend=backend)
    assert np.array_equal(one, many)


@needs_ext
def test_backends_agree(rng):
    model = builtin("our6")
    Q = random_q(rng, 1000)
    c = _backend.chain_dets(model, Q, backend="cython")
    p = _backend.chain_dets(model, Q, backend="python")
    assert np.abs(c - p).max() <= 1e-14


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.chain_dets(builtin("our6"), np.zeros((1, 6)), backend="fortran")


def test_dimension_mismatch():
    for backend in _backend.BACKENDS:
        with pytest.raises(ValueError):
            _backend.chain_dets(builtin("our6"), np.zeros((2, 5)), backend=backend)


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("KINSA_THREADS", "3")
    assert _backend.resolve_threads() == 3
    monkeypatch.setenv("KINSA_THREADS", "0")
    assert _backend.resolve_threads() >= 1
    assert _backend.resolve_threads(2) == 2


def test_empty_batch():
    for backend in _backend.BACKENDS:
        assert _backend.chain_dets(builtin("our6"), np.zeros((0, 6)), backend=backend).shape == (0, 3)


def _probe(code, env=None):
    import os
    import subprocess
    import sys

    full_env = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=full_env).stdout.strip()


def test_env_forces_fallback():
    assert _probe("import kinsa; print(kinsa.DEFAULT_BACKEND)", {"KINSA_PURE_PYTHON": "1"}) == "python"


def test_missing_extension_falls_back():
    code = (
        "import sys; sys.modules['kinsa._kernels'] = None\n"
        "import kinsa._backend as b; print(b.HAVE_EXTENSION, b.DEFAULT_BACKEND, b.BACKENDS)"
    )
    assert _probe(code) == "False python ('python',)"
