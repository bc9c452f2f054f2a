"""Kernel correctness: finite differences, backend parity, warm-start identity."""

import subprocess
import sys

import numpy as np
import pytest

from cosmic.knife import kernels, reference

try:
    from cosmic.knife import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(_speedups is None, reason="compiled backend unavailable")

BACKENDS = [reference] + ([_speedups] if _speedups is not None else [])


def random_marginal_case(b=17, k=3, d=4, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(b, d))
    logits = rng.normal(size=k)
    means = rng.normal(size=(k, d))
    log_sigmas = rng.normal(scale=0.3, size=(k, d))
    return x, logits, means, log_sigmas


def random_conditional_case(b=11, k=3, d=4, seed=1):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(b, d))
    logits_b = rng.normal(size=(b, k))
    means_b = rng.normal(size=(b, k, d))
    log_sigmas_b = rng.normal(scale=0.3, size=(b, k, d))
    return x, logits_b, means_b, log_sigmas_b


def tile(arr, b):
    return np.ascontiguousarray(np.broadcast_to(arr, (b,) + arr.shape))


class TestAgainstDirectDensity:
    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_single_gaussian_matches_closed_form(self, impl):
        x, _, _, _ = random_marginal_case(b=9, d=3, seed=4)
        mean = np.array([[0.5, -1.0, 2.0]])
        ls = np.array([[0.1, -0.2, 0.3]])
        logp = impl.marginal_logpdf(x, np.zeros(1), mean, ls)
        sig = np.exp(ls[0])
        expect = (
            -0.5 * np.log(2.0 * np.pi) * 3
            - ls.sum()
            - 0.5 * (((x - mean[0]) / sig) ** 2).sum(axis=1)
        )
        np.testing.assert_allclose(logp, expect, rtol=1e-12)

    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_two_mode_mixture_matches_manual_sum(self, impl):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(8, 2))
        logits = np.array([0.4, -0.9])
        means = rng.normal(size=(2, 2))
        ls = rng.normal(scale=0.2, size=(2, 2))
        logp = impl.marginal_logpdf(x, logits, means, ls)
        w = np.exp(logits) / np.exp(logits).sum()
        dens = np.zeros(8)
        for k in range(2):
            sig = np.exp(ls[k])
            comp = np.exp(-0.5 * (((x - means[k]) / sig) ** 2).sum(axis=1))
            comp /= (2.0 * np.pi) ** 1.0 * sig.prod()
            dens += w[k] * comp
        np.testing.assert_allclose(logp, np.log(dens), rtol=1e-12)


class TestFiniteDifferences:
    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_marginal_grads(self, impl):
        x, logits, means, log_sigmas = random_marginal_case()
        _, dlogits, dmeans, dls = impl.marginal_grads(x, logits, means, log_sigmas)
        eps = 1e-6

        def total(lg, mu, ls):
            return impl.marginal_logpdf(x, lg, mu, ls).sum()

        for k in range(logits.size):
            up, dn = logits.copy(), logits.copy()
            up[k] += eps
            dn[k] -= eps
            fd = (total(up, means, log_sigmas) - total(dn, means, log_sigmas)) / (2 * eps)
            assert dlogits[k] == pytest.approx(fd, abs=1e-6)
        for k in range(means.shape[0]):
            for j in range(means.shape[1]):
                up, dn = means.copy(), means.copy()
                up[k, j] += eps
                dn[k, j] -= eps
                fd = (total(logits, up, log_sigmas) - total(logits, dn, log_sigmas)) / (2 * eps)
                assert dmeans[k, j] == pytest.approx(fd, abs=1e-6)
                up, dn = log_sigmas.copy(), log_sigmas.copy()
                up[k, j] += eps
                dn[k, j] -= eps
                fd = (total(logits, means, up) - total(logits, means, dn)) / (2 * eps)
                assert dls[k, j] == pytest.approx(fd, abs=1e-6)

    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_conditional_grads(self, impl):
        x, logits_b, means_b, ls_b = random_conditional_case(b=5, k=2, d=3)
        _, dlogits, dmeans, dls = impl.conditional_grads(x, logits_b, means_b, ls_b)
        eps = 1e-6

        def total(lg, mu, ls):
            return impl.conditional_logpdf(x, lg, mu, ls).sum()

        rng = np.random.default_rng(9)
        # Spot-check a seeded sample of coordinates in each parameter block.
        for _ in range(10):
            i = int(rng.integers(0, x.shape[0]))
            k = int(rng.integers(0, logits_b.shape[1]))
            j = int(rng.integers(0, x.shape[1]))
            up, dn = logits_b.copy(), logits_b.copy()
            up[i, k] += eps
            dn[i, k] -= eps
            fd = (total(up, means_b, ls_b) - total(dn, means_b, ls_b)) / (2 * eps)
            assert dlogits[i, k] == pytest.approx(fd, abs=1e-6)
            up, dn = means_b.copy(), means_b.copy()
            up[i, k, j] += eps
            dn[i, k, j] -= eps
            fd = (total(logits_b, up, ls_b) - total(logits_b, dn, ls_b)) / (2 * eps)
            assert dmeans[i, k, j] == pytest.approx(fd, abs=1e-6)
            up, dn = ls_b.copy(), ls_b.copy()
            up[i, k, j] += eps
            dn[i, k, j] -= eps
            fd = (total(logits_b, means_b, up) - total(logits_b, means_b, dn)) / (2 * eps)
            assert dls[i, k, j] == pytest.approx(fd, abs=1e-6)


@needs_compiled
class TestBackendParity:
    def test_marginal_logpdf(self):
        x, logits, means, ls = random_marginal_case(b=64, k=4, d=6, seed=10)
        a = reference.marginal_logpdf(x, logits, means, ls)
        b = _speedups.marginal_logpdf(x, logits, means, ls)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_marginal_grads(self):
        x, logits, means, ls = random_marginal_case(b=64, k=4, d=6, seed=11)
        ra = reference.marginal_grads(x, logits, means, ls)
        rb = _speedups.marginal_grads(x, logits, means, ls)
        for a, b in zip(ra, rb):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)

    def test_conditional_logpdf(self):
        x, lb, mb, sb = random_conditional_case(b=48, k=4, d=6, seed=12)
        a = reference.conditional_logpdf(x, lb, mb, sb)
        b = _speedups.conditional_logpdf(x, lb, mb, sb)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_conditional_grads(self):
        x, lb, mb, sb = random_conditional_case(b=48, k=4, d=6, seed=13)
        ra = reference.conditional_grads(x, lb, mb, sb)
        rb = _speedups.conditional_grads(x, lb, mb, sb)
        for a, b in zip(ra, rb):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


class TestWarmStartIdentity:
    """Tiled marginal parameters must reproduce the marginal logpdf bitwise."""

    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_conditional_with_tiled_params_is_bitwise_equal(self, impl):
        x, logits, means, ls = random_marginal_case(b=33, k=4, d=5, seed=14)
        b = x.shape[0]
        marg = impl.marginal_logpdf(x, logits, means, ls)
        cond = impl.conditional_logpdf(x, tile(logits, b), tile(means, b), tile(ls, b))
        assert np.array_equal(marg, cond)


class TestStability:
    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_extreme_logits_finite(self, impl):
        x, _, means, ls = random_marginal_case(b=8, k=3, d=4, seed=15)
        logits = np.array([500.0, -500.0, 0.0])
        assert np.isfinite(impl.marginal_logpdf(x, logits, means, ls)).all()

    @pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
    def test_far_samples_finite(self, impl):
        x = np.full((4, 3), 50.0)
        logp = impl.marginal_logpdf(x, np.zeros(2), np.zeros((2, 3)), np.zeros((2, 3)))
        assert np.isfinite(logp).all()
        assert (logp < -1000).all()


class TestBackendSelection:
    def test_active_backend_exports_match(self):
        mod = _speedups if kernels.BACKEND == "compiled" else reference
        assert kernels.marginal_logpdf is mod.marginal_logpdf
        assert kernels.conditional_grads is mod.conditional_grads

    def _run(self, env_value):
        code = (
            "import os; os.environ['COSMIC_KERNELS'] = %r; "
            "from cosmic.knife import kernels; print(kernels.BACKEND)" % env_value
        )
        return subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True
        )

    def test_env_forces_python(self):
        proc = self._run("python")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "python"

    @needs_compiled
    def test_env_forces_compiled(self):
        proc = self._run("compiled")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "compiled"

    def test_env_rejects_unknown(self):
        proc = self._run("turbo")
        assert proc.returncode != 0
        assert "COSMIC_KERNELS" in proc.stderr
