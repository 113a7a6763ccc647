# tests/conftest.py
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from gausslang.config import get_tolerances  # noqa: E402
from gausslang.gauss import is_failure  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def fresh_tolerances(monkeypatch):
    for name in ("GAUSS_TOL", "GAUSS_RANK_TOL", "GAUSS_PSD_TOL", "GAUSS_EQ_TOL"):
        monkeypatch.delenv(name, raising=False)
    get_tolerances.cache_clear()
    yield
    get_tolerances.cache_clear()


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    A = rng.standard_normal((n, rank))
    return A @ A.T


def states_agree(a, b, tol=1e-8):
    """Both ⊥, or mean and covariance equal up to tol relative to their size."""
    if is_failure(a) or is_failure(b):
        return is_failure(a) and is_failure(b)
    if a.dim != b.dim:
        return False
    scale = 1.0 + max(np.max(np.abs(a.mean), initial=0.0), np.max(np.abs(a.cov), initial=0.0))
    return bool(
        np.max(np.abs(a.mean - b.mean), initial=0.0) <= tol * scale
        and np.max(np.abs(a.cov - b.cov), initial=0.0) <= tol * scale
    )


def chained_lets(n):
    """let x0 = normal() in let x1 = x0 + normal() in ... x0 =:= 1; x{n-1}, whose result is N(1, n - 1)."""
    lines = ["let x0 = normal() in"] + [f"let x{i} = x{i - 1} + normal() in" for i in range(1, n)]
    return "\n".join(lines + [f"x0 =:= 1; x{n - 1}"])
