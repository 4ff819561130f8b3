import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from icd.backend import available_backends, get_kernels
from icd.kernels import MODE_MAX

# JIT compilation on first kernel call would blow per-example deadlines and
# skew the timed acceptance suite, so compile everything up front and keep
# hypothesis deterministic across runs.
settings.register_profile(
    "ci",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    img = np.full((2, 3, 3), 0.5)
    for name in available_backends():
        k = get_kernels(name)
        inten, chroma = k.decompose_kernel(img, 1e-4, MODE_MAX)
        k.reconstruct_kernel(inten, chroma, 1e-4)
        k.gate_kernel(inten, chroma, 0.5, 2.0)
        k.mc_trial_sums(img, chroma, img.argmax(axis=2), np.zeros_like(img), 1e-4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" in nodeid and getattr(rep, "when", "call") in ("call", "setup"):
                name = nodeid.split("::")[-1].removeprefix("test_")
                lines.append((name, label))
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in sorted(lines):
        terminalreporter.write_line(f"{label}  {name}")
