import numpy as np
import pytest

from bookforge.kernels import DEFAULT_BACKEND, HAVE_NATIVE, argmax_dot

needs_native = pytest.mark.skipif(not HAVE_NATIVE, reason="native kernel not built")


def normalized(rng, n, d):
    m = rng.normal(size=(n, d))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def brute_force(queries, targets):
    """Per-query loop oracle, independent of the blocked kernels."""
    idx = np.empty(queries.shape[0], dtype=np.int64)
    sim = np.empty(queries.shape[0], dtype=np.float64)
    for i in range(queries.shape[0]):
        sims = targets @ queries[i]
        best = 0
        for j in range(1, sims.shape[0]):
            if sims[j] > sims[best]:
                best = j
        idx[i] = best
        sim[i] = sims[best]
    return idx, sim


class TestBackends:
    def test_numpy_matches_bruteforce(self):
        rng = np.random.default_rng(0)
        q, t = normalized(rng, 300, 64), normalized(rng, 150, 64)
        oi, osim = brute_force(q, t)
        ki, ksim = argmax_dot(q, t, backend="numpy")
        assert np.array_equal(oi, ki)
        assert np.allclose(osim, ksim, atol=1e-9)

    @needs_native
    def test_native_matches_bruteforce(self):
        rng = np.random.default_rng(1)
        q, t = normalized(rng, 300, 64), normalized(rng, 150, 64)
        oi, osim = brute_force(q, t)
        ki, ksim = argmax_dot(q, t, backend="native")
        assert np.array_equal(oi, ki)
        assert np.allclose(osim, ksim, atol=1e-9)

    @needs_native
    def test_backends_agree(self):
        rng = np.random.default_rng(2)
        q, t = normalized(rng, 1000, 128), normalized(rng, 700, 128)
        ni, nsim = argmax_dot(q, t, backend="numpy")
        ci, csim = argmax_dot(q, t, backend="native")
        assert np.array_equal(ni, ci)
        assert np.allclose(nsim, csim, atol=1e-9)

    def test_tie_break_keeps_first_target(self):
        q = np.array([[1.0, 0.0]])
        t = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
        for backend in ("numpy", "native") if HAVE_NATIVE else ("numpy",):
            idx, sim = argmax_dot(q, t, backend=backend)
            assert idx[0] == 1
            assert sim[0] == pytest.approx(1.0)

    def test_block_boundaries(self):
        # more queries than one block to cover the blocked numpy path
        rng = np.random.default_rng(3)
        q, t = normalized(rng, 1200, 16), normalized(rng, 40, 16)
        oi, _ = brute_force(q, t)
        ki, _ = argmax_dot(q, t, backend="numpy")
        assert np.array_equal(oi, ki)

    def test_default_backend_available(self):
        rng = np.random.default_rng(4)
        q, t = normalized(rng, 10, 8), normalized(rng, 5, 8)
        idx, sim = argmax_dot(q, t)
        assert idx.shape == (10,)
        assert DEFAULT_BACKEND in ("native", "numpy")

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            argmax_dot(np.ones((2, 3)), np.ones((2, 4)))

    def test_empty_targets(self):
        with pytest.raises(ValueError):
            argmax_dot(np.ones((2, 3)), np.ones((0, 3)))

    def test_empty_queries(self):
        idx, sim = argmax_dot(np.empty((0, 3)), np.ones((2, 3)))
        assert idx.shape == (0,)
