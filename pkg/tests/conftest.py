import pytest

from ebk import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load cached) jit kernels once, so per-test runtime budgets
    # measure the math and not LLVM
    kernels.warmup()
