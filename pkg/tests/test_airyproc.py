import numpy as np
import pytest
import scipy.stats

from rmtdpp.airyproc import (
    BlockKernel,
    MultitimeGrid,
    ProcessPath,
    build_block_kernel,
    sample_airy_path,
    simulate_dbm,
    two_time_prob,
)
from rmtdpp.fredholm import discretize, right_infinite
from rmtdpp.kernels import airy_kernel
from rmtdpp.errors import NoEigenvalueFound
from rmtdpp.rmtstats import extreme_cdf, soft_edge
from rmtdpp.samplers import make_rng, spawn_rng


class TestGrid:
    def test_midpoints(self):
        g = MultitimeGrid(times=(0.0,), x_lo=-5.0, x_hi=2.5, m_cells=150)
        assert g.dx == pytest.approx(0.05)
        assert g.midpoints[0] == pytest.approx(-4.975)
        assert g.midpoints[-1] == pytest.approx(2.475)
        assert g.dimension == 150

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValueError):
            MultitimeGrid(times=(1.0, 0.5), m_cells=60)

    def test_rejects_duplicate_times(self):
        with pytest.raises(ValueError):
            MultitimeGrid(times=(0.0, 0.0), m_cells=60)


class TestBlockKernel:
    def test_single_time_is_airy(self):
        g = MultitimeGrid(times=(0.7,), m_cells=40)
        bk = build_block_kernel(g)
        xs = g.midpoints
        ref = airy_kernel().eval_grid(xs, xs) * g.dx
        np.fill_diagonal(ref, airy_kernel().diag(xs) * g.dx)
        assert np.abs(bk.matrix - ref).max() < 1e-8

    def test_dimension_and_diag_blocks(self):
        g = MultitimeGrid(times=(0.0, 0.5, 1.0), m_cells=24)
        bk = build_block_kernel(g)
        assert bk.matrix.shape == (72, 72)
        m = g.m_cells
        first = bk.matrix[:m, :m]
        for j in (1, 2):
            block = bk.matrix[j * m : (j + 1) * m, j * m : (j + 1) * m]
            assert np.abs(block - first).max() < 1e-12  # gap-0 blocks all equal

    def test_far_separated_blocks_damped(self):
        g = MultitimeGrid(times=(0.0, 10.0), m_cells=24)
        bk = build_block_kernel(g)
        m = g.m_cells
        diag_scale = np.abs(np.diagonal(bk.matrix[:m, :m])).max()
        off = np.abs(bk.matrix[:m, m:]).max()
        # the kernel decays like 1/gap, so a 3% envelope is the honest bound
        assert off < 0.03 * diag_scale


class TestSampleAiryPath:
    def test_path_within_window(self):
        g = MultitimeGrid(times=(0.0, 0.5), m_cells=60)
        bk = build_block_kernel(g)
        p = sample_airy_path(g, make_rng(1), kernel=bk)
        assert len(p.values) == 2
        for v in p.values:
            assert g.x_lo <= v <= g.x_hi

    def test_single_time_marginal_is_tracy_widom(self):
        g = MultitimeGrid(times=(0.0,), m_cells=60)
        bk = build_block_kernel(g)
        vals = np.array(
            [sample_airy_path(g, spawn_rng(700, i), kernel=bk).values[0] for i in range(2000)]
        )
        edge = soft_edge()
        bounds = g.x_lo + np.arange(1, g.m_cells) * g.dx
        cdf = np.array([extreme_cdf(edge, b, m=40) for b in bounds])
        emp = np.searchsorted(np.sort(vals), bounds - 1e-12) / len(vals)
        ks = np.abs(emp - cdf).max()
        assert ks < 1.628 / np.sqrt(len(vals))  # 1% critical value

    def test_deterministic(self):
        g = MultitimeGrid(times=(0.0, 0.25), m_cells=40)
        bk = build_block_kernel(g)
        a = sample_airy_path(g, make_rng(5), kernel=bk)
        b = sample_airy_path(g, make_rng(5), kernel=bk)
        assert a.values == b.values

    def test_no_eigenvalue_reported(self):
        # a window entirely in the far right tail has no eigenvalues to find
        g = MultitimeGrid(times=(0.0,), x_lo=8.0, x_hi=10.0, m_cells=16)
        bk = build_block_kernel(g)
        with pytest.raises(NoEigenvalueFound):
            sample_airy_path(g, make_rng(3), kernel=bk)

    def test_csv_format(self):
        p = ProcessPath(times=(0.0, 1.0), values=(-1.5, -2.0))
        text = p.to_csv(seed=9)
        lines = text.splitlines()
        assert lines[0] == "# seed=9"
        assert lines[1] == "t,value"
        assert lines[2].startswith("0,")


class TestStationarity:
    @pytest.fixture(scope="class")
    def paths(self):
        times = tuple(np.arange(5) * 0.3)
        g = MultitimeGrid(times=times, m_cells=60)
        bk = build_block_kernel(g)
        return np.array(
            [sample_airy_path(g, spawn_rng(800, i), kernel=bk).values for i in range(400)]
        )

    def test_variance_flat_and_near_tracy_widom(self, paths):
        n = paths.shape[0]
        target = 0.8132
        band = 4.0 * target * np.sqrt(2.0 / (n - 1)) + 0.02  # MC + grid quantization
        for var in paths.var(axis=0, ddof=1):
            assert abs(var - target) < band

    def test_marginals_identical_across_times(self, paths):
        # pairwise two-sample KS at the 1% level
        n = paths.shape[0]
        crit = 1.628 * np.sqrt(2.0 / n)
        for j in range(paths.shape[1]):
            for k in range(j + 1, paths.shape[1]):
                stat = scipy.stats.ks_2samp(paths[:, j], paths[:, k]).statistic
                assert stat < crit

    def test_distant_times_uncorrelated(self):
        times = (0.0, 10.0)
        g = MultitimeGrid(times=times, m_cells=60)
        bk = build_block_kernel(g)
        vals = np.array(
            [sample_airy_path(g, spawn_rng(900, i), kernel=bk).values for i in range(500)]
        )
        rho = np.corrcoef(vals.T)[0, 1]
        assert abs(rho) < 4.0 / np.sqrt(len(vals))


class TestTwoTimeProb:
    def test_degenerate_gap_matches_one_time(self):
        for s in (-1.0, 0.5):
            got = two_time_prob(0.0, s, s, 40)
            want = extreme_cdf(soft_edge(), s, m=40)
            assert got == pytest.approx(want, abs=1e-8)

    def test_factorizes_at_large_gap(self):
        edge = soft_edge()
        got = two_time_prob(10.0, -0.5, 0.3, 30)
        want = extreme_cdf(edge, -0.5, m=30) * extreme_cdf(edge, 0.3, m=30)
        assert got == pytest.approx(want, abs=1e-3)

    def test_monotone_in_levels(self):
        s_grid = np.linspace(-2.0, 1.0, 5)
        vals = np.array([[two_time_prob(1.0, a, b, 20) for b in s_grid] for a in s_grid])
        assert np.all(np.diff(vals, axis=0) > -1e-9)
        assert np.all(np.diff(vals, axis=1) > -1e-9)

    def test_bounded_by_marginals(self):
        edge = soft_edge()
        v = two_time_prob(1.0, -0.5, 0.5, 30)
        assert v <= min(
            extreme_cdf(edge, -0.5, m=30), extreme_cdf(edge, 0.5, m=30)
        ) + 1e-9


class TestDbm:
    def test_initial_marginal(self):
        vals = np.array(
            [simulate_dbm(200, [0.0], spawn_rng(1000, i)).values[0] for i in range(500)]
        )
        # finite-size bias is O(N^(-1/3)); bands widened accordingly
        mean_band = 3.0 * np.sqrt(0.8132 / len(vals)) + 0.15
        var_band = 3.0 * 0.8132 * np.sqrt(2.0 / (len(vals) - 1)) + 0.15
        assert abs(vals.mean() + 1.771) < mean_band
        assert abs(vals.var(ddof=1) - 0.8132) < var_band

    def test_variance_flat_in_time(self):
        times = [0.0, 0.5, 1.0, 1.5]
        vals = np.array(
            [simulate_dbm(100, times, spawn_rng(1100, i)).values for i in range(400)]
        )
        variances = vals.var(axis=0, ddof=1)
        band = 4.0 * variances[0] * np.sqrt(2.0 / (len(vals) - 1)) + 0.1
        for v in variances[1:]:
            assert abs(v - variances[0]) < band

    def test_two_by_two_matches_direct_gue(self):
        n_draws = 2000
        sim = np.array(
            [simulate_dbm(2, [0.0], spawn_rng(1200, i)).values[0] for i in range(n_draws)]
        )
        rng = np.random.default_rng(55)
        direct = []
        for _ in range(n_draws):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            h = (a + a.conj().T) / (2 * np.sqrt(2))
            lam = np.linalg.eigvalsh(h).max()
            direct.append(np.sqrt(2.0) * 2 ** (1.0 / 6.0) * (lam - 2.0))
        stat = scipy.stats.ks_2samp(sim, np.array(direct)).statistic
        assert stat < 1.628 * np.sqrt(2.0 / n_draws)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            simulate_dbm(1, [0.0], make_rng(0))
        with pytest.raises(ValueError):
            simulate_dbm(10, [1.0, 0.0], make_rng(0))
