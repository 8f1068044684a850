import numpy as np
import pytest

from antijam import mjpf
from antijam.signals import GdbnMatrices


def memoryless_matrices(dim=4, sigma_w=0.01, sigma_v=0.05):
    # A = 0: predictions come purely from the sampled cluster's control.
    return GdbnMatrices(
        a=np.zeros((dim, dim)),
        b=np.eye(dim),
        h=np.eye(dim),
        sigma_w=sigma_w * np.eye(dim),
        sigma_v=sigma_v * np.eye(dim),
    )


def spread_clusters(m=4, dist=50.0, cov=0.01):
    means = np.zeros((m, 4))
    means[:, 0] = dist * np.arange(m)
    covs = np.array([cov * np.eye(4)] * m)
    return means, covs


class TestPredict:
    def test_deterministic_row_moves_all_particles(self):
        means, covs = spread_clusters()
        trans = np.zeros((4, 4))
        trans[:, 2] = 1.0
        f = mjpf.MarkovJumpFilter(means, covs, trans, memoryless_matrices(), 64, np.random.default_rng(0))
        f.predict()
        assert np.all(f.ids == 2)

    def test_pure_control_prediction(self):
        # A=I, B=I, Sigma_w=0, mean 0: predicted mean equals the cluster mean
        means, covs = spread_clusters(m=2)
        mats = GdbnMatrices(
            a=np.eye(4), b=np.eye(4), h=np.eye(4),
            sigma_w=np.zeros((4, 4)), sigma_v=0.1 * np.eye(4),
        )
        f = mjpf.MarkovJumpFilter(means, covs, np.full((2, 2), 0.5), mats, 32, np.random.default_rng(1))
        f.kf_means[:] = 0.0
        f.predict()
        assert np.allclose(f.kf_means, means[f.ids])

    def test_uniform_row_fractions(self):
        means, covs = spread_clusters(m=5)
        trans = np.full((5, 5), 0.2)
        f = mjpf.MarkovJumpFilter(means, covs, trans, memoryless_matrices(), 500, np.random.default_rng(2))
        f.predict()
        frac = np.bincount(f.ids, minlength=5) / 500
        assert np.all(np.abs(frac - 0.2) <= 0.04)


class TestUpdate:
    def test_posterior_concentrates_on_matching_cluster(self):
        means, covs = spread_clusters()
        trans = np.full((4, 4), 0.25)
        f = mjpf.MarkovJumpFilter(means, covs, trans, memoryless_matrices(), 400, np.random.default_rng(3))
        f.predict()
        f.update(means[2])
        assert f.posterior[2] > 0.99

    def test_uninformative_likelihood_keeps_weights(self):
        means, covs = spread_clusters()
        mats = memoryless_matrices(sigma_v=1e12)
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), mats, 50, np.random.default_rng(4))
        f.weights = np.linspace(1, 2, 50)
        f.weights /= f.weights.sum()
        before = f.weights.copy()
        f.predict()
        f.update(means[0])
        assert np.allclose(f.weights, before, atol=1e-6)

    def test_degenerate_weights_reset_uniform(self):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), 30, np.random.default_rng(5))
        f.predict()
        f.update(np.full(4, 1e200))
        assert f.degenerate
        assert np.allclose(f.weights, 1.0 / 30)

    def test_update_requires_predict(self):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), 8, np.random.default_rng(6))
        with pytest.raises(RuntimeError):
            f.update(np.zeros(4))

    def test_messages_are_simplices(self):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), 100, np.random.default_rng(7))
        for _ in range(10):
            f.predict()
            msgs = f.update(np.random.default_rng(8).normal(size=4))
            assert msgs.discrete_pi.sum() == pytest.approx(1.0, abs=1e-9)
            assert msgs.discrete_lambda.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(msgs.discrete_pi >= 0)
            assert np.all(msgs.discrete_lambda >= 0)
            f.resample()

    def test_covariances_stay_spd(self):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), 40, np.random.default_rng(9))
        rng = np.random.default_rng(10)
        for _ in range(50):
            f.predict()
            f.update(rng.normal(scale=20.0, size=4))
            f.resample()
            assert np.linalg.eigvalsh(f.kf_covs).min() > 0

    def test_reject_observation_restores_prediction(self):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), 60, np.random.default_rng(11))
        f.predict()
        pred_means = f.kf_means.copy()
        pred_w = f.weights.copy()
        f.update(np.full(4, 500.0))
        f.reject_observation()
        assert np.array_equal(f.kf_means, pred_means)
        assert np.array_equal(f.weights, pred_w)


class TestResample:
    def make(self, weights):
        means, covs = spread_clusters()
        f = mjpf.MarkovJumpFilter(means, covs, np.full((4, 4), 0.25), memoryless_matrices(), len(weights), np.random.default_rng(12))
        f.weights = np.asarray(weights, dtype=float)
        return f

    def test_uniform_weights_no_trigger(self):
        f = self.make([0.25] * 4)
        assert not f.resample()

    def test_single_heavy_weight_copies_everywhere(self):
        f = self.make([1.0, 0.0, 0.0, 0.0])
        marker = f.kf_means[0].copy()
        assert f.resample()
        assert np.all(f.ids == f.ids[0])
        assert np.allclose(f.kf_means, marker)
        assert np.allclose(f.weights, 0.25)

    def test_ess_boundary_is_strict(self):
        # ESS({0.5, 0.5, 0, 0}) = 2 = L/2 exactly: "<" rule means no trigger
        assert mjpf.effective_sample_size(np.array([0.5, 0.5, 0.0, 0.0])) == pytest.approx(2.0)
        f = self.make([0.5, 0.5, 0.0, 0.0])
        assert not f.resample()


class TestSingleRegimeEqualsKalman:
    def test_matches_plain_kf_to_1e9(self):
        rng = np.random.default_rng(13)
        a = np.array([[1.0, 0.4], [0.0, 0.8]])
        b = np.eye(2)
        h = np.array([[1.0, 0.1], [0.0, 1.0]])
        sw = np.diag([0.05, 0.02])
        sv = np.diag([0.3, 0.2])
        mats = GdbnMatrices(a=a, b=b, h=h, sigma_w=sw, sigma_v=sv)
        mu = np.array([0.7, -0.2])
        cov_s = np.diag([0.4, 0.1])
        f = mjpf.MarkovJumpFilter(mu[None, :], cov_s[None, :, :], np.array([[1.0]]), mats, 25, rng)

        # reference: plain KF with control B mu and process noise B cov_s B^T + sw
        x = mu.copy()
        p = cov_s + sw
        q_eff = b @ cov_s @ b.T + sw
        for t in range(100):
            z = rng.normal(size=2) * (3 + t % 5)
            f.predict()
            f.update(z)
            triggered = f.resample()
            assert not triggered
            x = a @ x + b @ mu
            p = a @ p @ a.T + q_eff
            s = h @ p @ h.T + sv
            k = p @ h.T @ np.linalg.inv(s)
            x = x + k @ (z - h @ x)
            ikh = np.eye(2) - k @ h
            p = ikh @ p @ ikh.T + k @ sv @ k.T
            p = 0.5 * (p + p.T)
            assert np.allclose(f.post_mean, x, atol=1e-9)
            assert np.allclose(f.post_cov, p, atol=1e-9)


class TestRegimeSwap:
    def test_nearest_mean_mapping(self):
        means, covs = spread_clusters(m=3)
        f = mjpf.MarkovJumpFilter(means, covs, np.full((3, 3), 1 / 3), memoryless_matrices(), 30, np.random.default_rng(14))
        f.ids[:] = np.array([0, 1, 2] * 10)
        # new model: clusters reordered (reversed means)
        new_means = means[::-1].copy()
        f.set_regimes(new_means, covs, np.full((3, 3), 1 / 3))
        assert np.array_equal(f.ids, np.array([2, 1, 0] * 10))

    def test_particles_view(self):
        means, covs = spread_clusters(m=2)
        f = mjpf.MarkovJumpFilter(means, covs, np.full((2, 2), 0.5), memoryless_matrices(), 5, np.random.default_rng(15))
        parts = f.particles
        assert len(parts) == 5
        assert sum(p.weight for p in parts) == pytest.approx(1.0)
        assert all(p.superstate_id in (1, 2) for p in parts)
