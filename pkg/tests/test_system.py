import numpy as np
import pytest

from starfd.channel import ChannelSet
from starfd.system import (
    NoiseParams,
    PowerPair,
    RateRequirements,
    StarProfile,
    dbm_to_mw,
    downlink_rate,
    link_gain,
    mw_to_dbm,
    rate_threshold_linear,
    uplink_rate,
)


def make_profile(rng, m):
    beta = rng.random(m)
    q_t = np.sqrt(beta) * np.exp(2j * np.pi * rng.random(m))
    q_r = np.sqrt(1 - beta) * np.exp(2j * np.pi * rng.random(m))
    return StarProfile(q_t, q_r)


def make_channels(rng, m, h_bb=0.01 + 0.02j):
    def vec():
        return rng.standard_normal(m) + 1j * rng.standard_normal(m)

    return ChannelSet.from_links(vec(), vec(), vec(), vec(), h_bb)


class TestStarProfile:
    def test_energy_conservation_enforced(self):
        with pytest.raises(ValueError, match="energy conservation"):
            StarProfile(np.ones(3), np.ones(3))

    def test_valid_profile(self):
        p = StarProfile(np.full(4, np.sqrt(0.5)), np.full(4, np.sqrt(0.5) * 1j))
        assert np.allclose(p.beta_t + p.beta_r, 1.0)

    def test_tolerance_boundary(self):
        q_t = np.array([np.sqrt(0.5 + 5e-7)])
        q_r = np.array([np.sqrt(0.5)])
        StarProfile(q_t, q_r)  # within 1e-6


class TestLinkGain:
    def test_cauchy_schwarz_equality(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert link_gain(h, h / np.linalg.norm(h)) == pytest.approx(
            np.linalg.norm(h) ** 2
        )

    def test_orthogonal(self):
        assert link_gain(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_trace_product_oracle(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        q = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        trace_form = np.trace(np.outer(q, q.conj()) @ np.outer(h, h.conj())).real
        assert link_gain(h, q) == pytest.approx(trace_form, rel=1e-9)

    def test_conjugation_symmetry(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        q = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert link_gain(h, q) == pytest.approx(link_gain(h.conj(), q.conj()), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            link_gain(np.ones(3), np.ones(4))


class TestRates:
    def setup_method(self):
        self.rng = np.random.default_rng(3)
        self.noise = NoiseParams(1e-8, 1e-8)

    def test_zero_power_zero_rate(self):
        ch = make_channels(self.rng, 4)
        prof = make_profile(self.rng, 4)
        assert uplink_rate(PowerPair(0.0, 1.0), prof, ch, self.noise) == 0.0
        assert downlink_rate(PowerPair(1.0, 0.0), prof, ch, self.noise) == 0.0

    def test_unit_sinr_gives_one_bps(self):
        ch = make_channels(self.rng, 4, h_bb=0.0)
        prof = make_profile(self.rng, 4)
        g1 = link_gain(ch.h1, prof.q_r)
        p_u = self.noise.sigma_u_sq / g1
        assert uplink_rate(PowerPair(p_u, 5.0), prof, ch, self.noise) == pytest.approx(1.0)

    def test_downlink_sinr_three_gives_two_bps(self):
        rng = np.random.default_rng(4)
        m = 4
        h_ui = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        h_id = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        ch = make_channels(rng, m)
        prof = make_profile(rng, m)
        # null the cross composite against q_t, keeping energy conservation
        h3 = ch.h3
        q_t = prof.q_t - h3 * (np.vdot(h3, prof.q_t) / np.vdot(h3, h3))
        q_t = q_t / max(1.0, float(np.abs(q_t).max()))
        q_r = np.sqrt(np.maximum(0.0, 1 - np.abs(q_t) ** 2)) * np.exp(
            1j * np.angle(prof.q_r)
        )
        prof2 = StarProfile(q_t, q_r)
        g2 = link_gain(ch.h2, prof2.q_t)
        p_d = 3.0 * self.noise.sigma_d_sq / g2
        rate = downlink_rate(PowerPair(1.0, p_d), prof2, ch, self.noise)
        assert rate == pytest.approx(2.0, abs=1e-9)

    def test_matrix_form_oracle(self):
        # the adopted gain convention pairs the conjugated profile with the
        # diagonal matrix form of the received-signal model
        rng = np.random.default_rng(5)
        m = 4
        ch = make_channels(rng, m)
        prof = make_profile(rng, m)
        p = PowerPair(2.0, 3.0)
        phi_r = np.diag(prof.q_r.conj())
        num = p.p_u * abs(ch.h_ib.conj() @ phi_r @ ch.h_ui) ** 2
        den = p.p_d * abs(ch.h_bb) ** 2 + self.noise.sigma_u_sq
        assert uplink_rate(p, prof, ch, self.noise) == pytest.approx(
            np.log2(1 + num / den), rel=1e-9
        )
        phi_t = np.diag(prof.q_t.conj())
        num_d = p.p_d * abs(ch.h_id.conj() @ phi_t @ ch.h_bi) ** 2
        den_d = p.p_u * abs(ch.h_id.conj() @ phi_t @ ch.h_ui) ** 2 + self.noise.sigma_d_sq
        assert downlink_rate(p, prof, ch, self.noise) == pytest.approx(
            np.log2(1 + num_d / den_d), rel=1e-9
        )

    def test_global_phase_invariance(self):
        ch = make_channels(self.rng, 5)
        prof = make_profile(self.rng, 5)
        p = PowerPair(1.0, 2.0)
        for theta in (0.3, 1.7):
            shifted = StarProfile(prof.q_t * np.exp(1j * theta), prof.q_r)
            assert downlink_rate(p, shifted, ch, self.noise) == pytest.approx(
                downlink_rate(p, prof, ch, self.noise), abs=1e-9
            )
            shifted_r = StarProfile(prof.q_t, prof.q_r * np.exp(1j * theta))
            assert uplink_rate(p, shifted_r, ch, self.noise) == pytest.approx(
                uplink_rate(p, prof, ch, self.noise), abs=1e-9
            )

    def test_downlink_decreasing_in_uplink_power(self):
        ch = make_channels(self.rng, 5)
        prof = make_profile(self.rng, 5)
        rates = [
            downlink_rate(PowerPair(p_u, 2.0), prof, ch, self.noise)
            for p_u in (0.1, 1.0, 10.0)
        ]
        assert rates[0] > rates[1] > rates[2]

    def test_uplink_monotonicity(self):
        ch = make_channels(self.rng, 5)
        prof = make_profile(self.rng, 5)
        assert uplink_rate(PowerPair(2.0, 1.0), prof, ch, self.noise) > uplink_rate(
            PowerPair(1.0, 1.0), prof, ch, self.noise
        )
        assert uplink_rate(PowerPair(1.0, 2.0), prof, ch, self.noise) < uplink_rate(
            PowerPair(1.0, 1.0), prof, ch, self.noise
        )


class TestThresholdAndUnits:
    def test_rate_threshold_values(self):
        assert rate_threshold_linear(0.0) == 0.0
        assert rate_threshold_linear(1.0) == 1.0
        assert rate_threshold_linear(4.0) == 15.0

    def test_dbm_roundtrip(self):
        for dbm in (-80.0, 0.0, 17.5):
            assert mw_to_dbm(dbm_to_mw(dbm)) == pytest.approx(dbm, abs=1e-12)
        assert mw_to_dbm(0.0) == float("-inf")
        assert dbm_to_mw(-80.0) == pytest.approx(1e-8)

    def test_noise_from_dbm(self):
        n = NoiseParams.from_dbm(-80.0, -80.0)
        assert n.sigma_u_sq == pytest.approx(1e-8)

    def test_requirements_validation(self):
        with pytest.raises(ValueError):
            RateRequirements(-1.0, 0.0)
        with pytest.raises(ValueError):
            PowerPair(-1.0, 0.0)
        with pytest.raises(ValueError):
            PowerPair(float("nan"), 0.0)
