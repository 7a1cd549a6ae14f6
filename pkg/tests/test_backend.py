"""Kernel backend selection and numba/numpy output equivalence."""

import os
import subprocess
import sys
import textwrap

import pytest

from splitsched.backend import active_backend


def test_active_backend_reports_a_real_backend():
    assert active_backend() in ("numba", "numpy")


def test_kernels_callable_in_process():
    from splitsched import _kernels as k

    assert k.w0_f64(1.0) == pytest.approx(0.5671432904097838, rel=1e-12)
    assert k.slot_power_k(5.0, 3e6, 1.0, 25088.0, 1e-13, 1e-13, 1e-3, 2.0,
                          1e-9) == 0.0


_WORKER = textwrap.dedent("""
    import sys
    from splitsched.backend import active_backend
    from splitsched.engine import SimConfig, run_simulation

    assert active_backend() == sys.argv[2], active_backend()
    s = run_simulation(SimConfig(users=2, frames=120, seed=5))
    s.write_trace(sys.argv[1])
""")


def _trace_bytes(tmp_path, backend):
    path = tmp_path / ("trace_%s.csv" % backend)
    env = dict(os.environ, SPLITSCHED_BACKEND=backend)
    subprocess.run([sys.executable, "-c", _WORKER, str(path), backend],
                   env=env, check=True, capture_output=True, text=True)
    return path.read_bytes()


def test_backends_produce_identical_traces(tmp_path):
    # the pure-numpy fallback must reproduce the jit path bit for bit
    # (fastmath stays off in the compiled kernels for exactly this reason)
    a = _trace_bytes(tmp_path, "numba")
    b = _trace_bytes(tmp_path, "numpy")
    assert a == b
    assert len(a) > 1000


def test_numpy_backend_skips_jit(tmp_path):
    probe = ("import splitsched._kernels as k; "
             "print(hasattr(k.slot_power_k, 'py_func'))")
    env = dict(os.environ, SPLITSCHED_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", probe], env=env, check=True,
                         capture_output=True, text=True)
    assert out.stdout.strip() == "False"
    env["SPLITSCHED_BACKEND"] = "numba"
    out = subprocess.run([sys.executable, "-c", probe], env=env, check=True,
                         capture_output=True, text=True)
    assert out.stdout.strip() == "True"


def test_unknown_backend_rejected():
    env = dict(os.environ, SPLITSCHED_BACKEND="cython")
    proc = subprocess.run([sys.executable, "-c", "import splitsched"],
                          env=env, capture_output=True, text=True)
    assert proc.returncode != 0
    assert "SPLITSCHED_BACKEND" in proc.stderr
