import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile (or load cached) numba kernels once so timings exclude JIT."""
    from rmf.curves import helix
    from rmf.framing import CurvatureField, default_initial_frame, rmf_double_reflection, rmf_ode

    s = np.linspace(0.0, 1.0, 11)
    rmf_double_reflection(helix(domain=(0, 1)), s)
    cf = CurvatureField(s, np.zeros((11, 2)))
    rmf_ode(cf, default_initial_frame([1.0, 0.0, 0.0]))
    rmf_ode(cf, default_initial_frame([1.0, 0.0, 0.0]), origin=np.zeros(3))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
