import numpy as np
import pytest

from profinn import ConfigError
from profinn import domain as dom


class TestSinhMap:
    def test_origin(self):
        assert dom.to_y(0.0) == 0.0
        assert dom.to_z(0.0) == 0.0

    def test_z30_magnitude(self):
        y = dom.to_y(30.0)
        assert y == pytest.approx((np.exp(30) - np.exp(-30)) / 2, rel=1e-15)
        assert y == pytest.approx(5.3432e12, rel=1e-4)

    def test_round_trip_on_range(self):
        zs = np.linspace(-30, 30, 301)
        back = dom.to_z(dom.to_y(zs))
        err = np.abs(back - zs) / np.maximum(np.abs(zs), 1.0)
        assert np.max(err) <= 1e-12

    def test_round_trip_single(self):
        assert dom.to_z(dom.to_y(17.5)) == pytest.approx(17.5, rel=1e-12)

    def test_chain_factors(self):
        dy, d2y = dom.chain_factors(0.0)
        assert (dy, d2y) == (1.0, 0.0)
        dy, d2y = dom.chain_factors(1.0)
        assert dy == pytest.approx(np.cosh(1), rel=1e-15)
        assert d2y == pytest.approx(np.sinh(1), rel=1e-15)

    def test_dy_conversion_against_fd_in_y(self):
        # d/dy of f(z(y)) = f'(z) / cosh(z), checked at z = 2
        f = np.sin
        z0 = 2.0
        y0 = dom.to_y(z0)
        h = 1e-6 * y0
        fd = (f(dom.to_z(y0 + h)) - f(dom.to_z(y0 - h))) / (2 * h)
        analytic = np.cos(z0) / dom.chain_factors(z0)[0]
        assert fd == pytest.approx(analytic, rel=1e-6)


class TestResampleDue:
    def test_at_period(self):
        assert dom.resample_due(1000, 1000) is True

    def test_before_period(self):
        assert dom.resample_due(999, 1000) is False

    def test_epoch_zero(self):
        assert dom.resample_due(0, 1000) is False

    def test_bad_period(self):
        with pytest.raises(ConfigError):
            dom.resample_due(10, 0)


class TestSampler:
    def test_single_region_stats(self):
        spec = dom.SamplerSpec.uniform("interior", [(0.0, 30.0)], 10000, seed=0)
        batch = dom.sample(spec, 0)
        assert batch.points.shape == (10000, 1)
        assert np.all((batch.points >= 0) & (batch.points <= 30))
        sigma = 30 / np.sqrt(12 * 10000)
        assert abs(batch.points.mean() - 15.0) <= 3 * sigma

    def test_two_region_mixture_fraction(self):
        box_big = ((0.0, 30.0), (0.0, 30.0))
        box_small = ((0.0, 5.0), (0.0, 5.0))
        spec = dom.SamplerSpec("interior", ((box_big, 0.5), (box_small, 0.5)),
                               10000, seed=2)
        expect = 0.5 + 0.5 * (25.0 / 900.0)
        sigma = np.sqrt(expect * (1 - expect) / 10000)
        hits = []
        for epoch in range(10):
            batch = dom.sample(spec, epoch)
            inside = np.all(batch.points <= 5.0, axis=1)
            hits.append(inside.mean())
        assert all(abs(h - expect) <= 3 * sigma for h in hits)

    def test_determinism_in_seed_epoch(self):
        spec = dom.SamplerSpec.uniform("interior", [(0.0, 30.0)], 512, seed=9)
        a = dom.sample(spec, 4)
        b = dom.sample(spec, 4)
        assert np.array_equal(a.points, b.points)
        c = dom.sample(spec, 5)
        assert not np.array_equal(a.points, c.points)

    def test_region_containment_all_epochs(self):
        box = ((1.0, 2.0), (3.0, 4.5))
        spec = dom.SamplerSpec("smoothness", ((box, 1.0),), 256, seed=2)
        for epoch in range(5):
            pts = dom.sample(spec, epoch).points
            assert np.all(pts[:, 0] >= 1.0) and np.all(pts[:, 0] <= 2.0)
            assert np.all(pts[:, 1] >= 3.0) and np.all(pts[:, 1] <= 4.5)

    def test_weights_must_sum_to_one(self):
        box = ((0.0, 1.0),)
        with pytest.raises(ConfigError):
            dom.SamplerSpec("interior", ((box, 0.6), (box, 0.6)), 10, seed=0)

    def test_empty_regions_rejected(self):
        with pytest.raises(ConfigError):
            dom.SamplerSpec("interior", (), 10, seed=0)


class TestBoundarySampler:
    def test_four_edges_of_requested_size(self):
        edges = dom.boundary_sample(30.0, 1000, seed=0, epoch=0)
        assert set(edges) == {"z1=0", "z1=max", "z2=0", "z2=max"}
        assert all(b.size == 1000 for b in edges.values())

    def test_edge_coordinates_exact(self):
        edges = dom.boundary_sample(30.0, 100, seed=3, epoch=1)
        assert np.all(edges["z2=0"].points[:, 1] == 0.0)
        assert np.all(edges["z2=max"].points[:, 1] == 30.0)
        assert np.all(edges["z1=0"].points[:, 0] == 0.0)
        assert np.all(edges["z1=max"].points[:, 0] == 30.0)

    def test_determinism(self):
        a = dom.boundary_sample(30.0, 64, seed=5, epoch=7)
        b = dom.boundary_sample(30.0, 64, seed=5, epoch=7)
        for k in a:
            assert np.array_equal(a[k].points, b[k].points)
