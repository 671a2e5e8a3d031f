import numpy as np
import pytest
from hypothesis import strategies as st


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # results must not depend on whatever the developer exported
    for name in ("SEED", "SUBLINFRECHET_TRIALS", "SUBLINFRECHET_DEBUG", "SUBLINFRECHET_DATA_DIR"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def diagonal_matrix(n: int) -> np.ndarray:
    M = np.ones((n, n), dtype=np.uint8)
    np.fill_diagonal(M, 0)
    return M


def band_matrix(n: int, width: int) -> np.ndarray:
    idx = np.arange(n)
    return (np.abs(idx[:, None] - idx[None, :]) > width).astype(np.uint8)


def matrix_from_zeros(shape, zeros) -> np.ndarray:
    M = np.ones(shape, dtype=np.uint8)
    for i, j in zeros:
        M[i - 1, j - 1] = 0
    return M


@st.composite
def binary_matrices(draw, max_side: int = 8, square: bool = False):
    n = draw(st.integers(1, max_side))
    m = n if square else draw(st.integers(1, max_side))
    cells = draw(st.lists(st.integers(0, 1), min_size=n * m, max_size=n * m))
    return np.array(cells, dtype=np.uint8).reshape(n, m)


@st.composite
def yes_matrices(draw, max_side: int = 8):
    """Random square matrix with a monotone zero path carved from (1, 1) to (n, n)."""
    M = draw(binary_matrices(max_side=max_side, square=True))
    n = M.shape[0]
    i = j = 0
    M[0, 0] = 0
    while (i, j) != (n - 1, n - 1):
        steps = [(di, dj) for di, dj in ((1, 0), (0, 1), (1, 1)) if i + di < n and j + dj < n]
        di, dj = draw(st.sampled_from(steps))
        i, j = i + di, j + dj
        M[i, j] = 0
    return M
