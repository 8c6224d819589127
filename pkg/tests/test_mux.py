import numpy as np
import pytest

from ummimo.errors import ContractError, DomainError
from ummimo.channel import los_channel
from ummimo.geometry import build_ula
from ummimo.mux import (UplinkScenario, lmmse_combiner, lmmse_combiners,
                        optimal_spacing, su_capacity, uplink_se, uplink_se_bound,
                        waterfill_powers)

LAM = 0.01


def _random_scenario(m, k, seed, sigma2=0.1):
    rng = np.random.default_rng(seed)
    H = (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2)
    powers = rng.uniform(0.5, 2.0, k)
    return UplinkScenario(H, powers, sigma2)


class TestLmmseCombiner:
    def test_single_ue_matched_filter(self):
        scen = _random_scenario(8, 1, 0)
        v = lmmse_combiner(scen, 0)
        h = scen.H[:, 0]
        assert abs(abs(v.conj() @ h) - np.linalg.norm(v) * np.linalg.norm(h)) \
            < 1e-9 * np.linalg.norm(v) * np.linalg.norm(h)

    def test_orthogonal_ues_whitening(self):
        m = 8
        H = np.zeros((m, 2), dtype=complex)
        H[0, 0] = 1.0
        H[1, 1] = 1.0
        for sigma2, tol in ((1e-2, 2e-2), (1e-6, 2e-6)):
            scen = UplinkScenario(H, np.ones(2), sigma2)
            v0 = lmmse_combiner(scen, 0)
            leak = abs(v0.conj() @ H[:, 1]) / (np.linalg.norm(v0) * 1.0)
            assert leak < tol

    def test_beats_maximum_ratio(self):
        for seed in range(100):
            scen = _random_scenario(12, 4, seed)
            se_lmmse = uplink_se(scen, lmmse_combiners(scen)).sum()
            se_mr = uplink_se(scen, scen.H).sum()
            assert se_lmmse >= se_mr - 1e-9

    def test_out_of_range_rejected(self):
        with pytest.raises(ContractError):
            lmmse_combiner(_random_scenario(4, 2, 1), 2)


class TestUplinkSe:
    def test_single_ue_closed_form(self):
        scen = _random_scenario(8, 1, 2, sigma2=0.3)
        se = uplink_se(scen, scen.H)  # v = h, no interference
        p, h = scen.powers[0], scen.H[:, 0]
        expected = np.log2(1 + p * np.linalg.norm(h) ** 2 / 0.3)
        assert abs(se[0] - expected) < 1e-12

    def test_lmmse_achieves_bound(self):
        scen = _random_scenario(10, 4, 3)
        se = uplink_se(scen, lmmse_combiners(scen))
        for k in range(4):
            assert abs(se[k] - uplink_se_bound(scen, k)) < 1e-9

    def test_mismatched_combiners_lose(self):
        # far-field-approximated combiners applied to the true near-field
        # channels never beat the matched LMMSE combiners
        geom = build_ula(64, LAM / 2, LAM)
        rng = np.random.default_rng(7)
        for drop in range(10):
            K = 6
            H = np.zeros((64, K), dtype=complex)
            Hff = np.zeros_like(H)
            for k in range(K):
                phi = rng.uniform(-np.pi / 3, np.pi / 3)
                r = rng.uniform(0.2, 2.0)
                t = np.array([np.sin(phi) * r, 0.0, np.cos(phi) * r])
                H[:, k] = los_channel(geom, t, "exact")
                u = t / np.linalg.norm(t)
                amp = LAM / (4 * np.pi * t[2])
                plane = np.exp(-2j * np.pi / LAM * (r - geom.positions @ u))
                Hff[:, k] = amp * plane
            powers = np.ones(K)
            scen = UplinkScenario(H, powers, 1e-8)
            scen_ff = UplinkScenario(Hff, powers, 1e-8)
            se_exact = uplink_se(scen, lmmse_combiners(scen)).sum()
            se_mismatch = uplink_se(scen, lmmse_combiners(scen_ff)).sum()
            assert se_exact >= se_mismatch - 1e-9

    def test_relabeling_invariance(self):
        scen = _random_scenario(8, 5, 4)
        perm = np.array([2, 0, 4, 1, 3])
        scen_p = UplinkScenario(scen.H[:, perm], scen.powers[perm], scen.noise_power)
        se = uplink_se(scen, lmmse_combiners(scen))
        se_p = uplink_se(scen_p, lmmse_combiners(scen_p))
        assert abs(se.sum() - se_p.sum()) < 1e-9
        assert np.allclose(np.sort(se), np.sort(se_p), atol=1e-9)

    def test_adding_interferers_never_helps(self):
        scen_full = _random_scenario(10, 6, 5)
        for k_sub in (2, 4, 6):
            scen = UplinkScenario(scen_full.H[:, :k_sub], scen_full.powers[:k_sub],
                                  scen_full.noise_power)
            se = uplink_se(scen, lmmse_combiners(scen))
            if k_sub > 2:
                assert np.all(se[:2] <= prev2 + 1e-9)
            prev2 = se[:2]

    def test_zero_combiner_rejected(self):
        scen = _random_scenario(4, 2, 6)
        V = scen.H.copy()
        V[:, 0] = 0
        with pytest.raises(ContractError):
            uplink_se(scen, V)


class TestSuCapacity:
    def test_rank_one(self):
        h = np.array([[1.0 + 1j], [2.0 - 1j]])
        c = su_capacity(h, 4.0, 0.5)
        mu2 = np.linalg.norm(h) ** 2
        assert abs(c - np.log2(1 + 4.0 * mu2 / 0.5)) < 1e-12

    def test_ideal_equal_singular_values(self):
        # M_min log2(1 + SNR M_r M_t / M_min^2) for the ideal channel
        m, beta = 8, 0.7
        F = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
        H = np.sqrt(beta) * F  # entries |H|^2 = beta, all singular values equal
        p, sigma2 = 3.0, 0.4
        snr = p * beta / sigma2
        expected = m * np.log2(1 + snr * m * m / m ** 2)
        assert abs(su_capacity(H, p, sigma2, "equal") - expected) < 1e-9
        assert abs(su_capacity(H, p, sigma2, "waterfilling") - expected) < 1e-9

    def test_waterfilling_dominates_equal(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            H = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
            wf = su_capacity(H, 2.0, 1.0, "waterfilling")
            eq = su_capacity(H, 2.0, 1.0, "equal")
            assert wf >= eq - 1e-9

    def test_zero_channel(self):
        assert su_capacity(np.zeros((3, 3)), 1.0, 1.0) == 0.0

    def test_unitary_invariance(self):
        rng = np.random.default_rng(9)
        H = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5))
                            + 1j * rng.standard_normal((5, 5)))
        assert abs(su_capacity(H, 2.0, 0.7) - su_capacity(Q @ H, 2.0, 0.7)) < 1e-9

    def test_waterfill_budget(self):
        g = np.array([3.0, 1.0, 0.2, 0.0])
        p = waterfill_powers(g, 5.0)
        assert abs(p.sum() - 5.0) < 1e-12
        assert p[3] == 0.0
        assert np.all(np.diff(p[:3]) <= 1e-12)


class TestOptimalSpacing:
    def test_reference_value(self):
        assert abs(optimal_spacing(0.01, 50.0, 16, 0.005) - 6.25) < 1e-12

    def test_halving(self):
        a = optimal_spacing(0.01, 50.0, 16, 0.005)
        b = optimal_spacing(0.01, 50.0, 16, 0.01)
        assert abs(a - 2 * b) < 1e-12

    def test_fresnel_channel_equal_singular_values(self):
        # at the returned spacing the paraxial-model LoS matrix is an ideal
        # DFT-like channel: all 16 singular values equal within 5%
        lam, d, m = 0.01, 50.0, 16
        dr = lam / 2
        dt = optimal_spacing(lam, d, m, dr)
        rx = build_ula(m, dr, lam)
        H = np.zeros((m, m), dtype=complex)
        xt = (np.arange(m) - (m - 1) / 2) * dt
        for n in range(m):
            H[:, n] = los_channel(rx, np.array([xt[n], 0.0, d]), "fresnel")
        s = np.linalg.svd(H, compute_uv=False)
        assert s.min() / s.max() > 0.95

    def test_bad_arguments_rejected(self):
        with pytest.raises(DomainError):
            optimal_spacing(0.0, 1.0, 4, 0.1)
