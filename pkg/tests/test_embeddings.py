import numpy as np
import pytest

from inbetween.model.config import CurriculumState, GeneratorConfig
from inbetween.model.embeddings import noise_schedule, sample_target_noise, tta_embedding


class TestTtaEmbedding:
    def test_spot_value_d2(self):
        z = tta_embedding(1, d=2, basis=10000.0)
        assert abs(z[0] - np.sin(1.0)) < 1e-12
        assert abs(z[1] - np.cos(1.0)) < 1e-12

    def test_documented_numbers(self):
        z = tta_embedding(1, d=2)
        np.testing.assert_allclose(z, [0.8414709848, 0.5403023059], atol=1e-9)

    def test_bounded(self):
        for tta in (1, 7, 35, 100):
            z = tta_embedding(tta, d=256, t_max_tta=35)
            assert np.all(z >= -1.0) and np.all(z <= 1.0)

    def test_pairwise_distinct_within_horizon(self):
        t_max = 35
        zs = [tta_embedding(t, d=256, t_max_tta=t_max) for t in range(1, t_max + 1)]
        for i in range(len(zs)):
            for k in range(i + 1, len(zs)):
                assert np.abs(zs[i] - zs[k]).max() > 1e-6

    def test_clamped_beyond_horizon(self):
        z35 = tta_embedding(35, d=256, t_max_tta=35)
        z40 = tta_embedding(40, d=256, t_max_tta=35)
        z400 = tta_embedding(400, d=256, t_max_tta=35)
        np.testing.assert_array_equal(z35, z40)
        np.testing.assert_array_equal(z35, z400)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            tta_embedding(0, d=4)
        with pytest.raises(ValueError):
            tta_embedding(1, d=3)

    def test_frequency_layout(self):
        # dimension pair i uses angle t / basis^(2i/d)
        d, t = 8, 13
        z = tta_embedding(t, d=d, basis=100.0)
        for i in range(d // 2):
            angle = t / 100.0 ** (2 * i / d)
            assert abs(z[2 * i] - np.sin(angle)) < 1e-12
            assert abs(z[2 * i + 1] - np.cos(angle)) < 1e-12


class TestNoiseSchedule:
    def test_paper_values(self):
        assert noise_schedule(30) == 1.0
        assert abs(noise_schedule(10) - 0.2) < 1e-15
        assert noise_schedule(4) == 0.0

    def test_piecewise_exact_over_range(self):
        for tta in range(0, 61):
            if tta >= 30:
                expected = 1.0
            elif tta >= 5:
                expected = (tta - 5) / 25
            else:
                expected = 0.0
            assert noise_schedule(tta) == expected

    def test_continuity_at_breakpoints(self):
        assert abs(noise_schedule(5) - 0.0) < 1e-15
        assert abs(noise_schedule(30) - noise_schedule(29) - 1 / 25) < 1e-12

    def test_monotone(self):
        values = [noise_schedule(t) for t in range(0, 61)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            noise_schedule(-1)


class TestCurriculum:
    def test_starts_at_five(self):
        cs = CurriculumState(p_max=30, n_ep_max=3)
        assert cs.max_length(0) == 5

    def test_saturates(self):
        cs = CurriculumState(p_max=30, n_ep_max=3)
        assert cs.max_length(3) == 30
        assert cs.max_length(10) == 30

    def test_linear_interpolation_epoch1(self):
        cs = CurriculumState(p_max=30, n_ep_max=3)
        assert cs.max_length(1) == 13  # round(5 + 25/3)

    def test_nondecreasing(self):
        cs = CurriculumState(p_max=30, n_ep_max=3)
        values = [cs.max_length(e) for e in range(8)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_sampled_lengths_in_range(self):
        cs = CurriculumState(p_max=30, n_ep_max=3)
        rng = np.random.default_rng(0)
        for epoch in range(5):
            cap = cs.max_length(epoch)
            for _ in range(50):
                length = cs.sample_length(rng, epoch)
                assert 5 <= length <= cap


class TestGeneratorConfigInvariants:
    def test_t_max_tta_relation(self):
        cfg = GeneratorConfig(p_max=30, t_past=10)
        assert cfg.t_max_tta == 35
        cfg2 = GeneratorConfig(p_max=50, t_past=10)
        assert cfg2.t_max_tta == 55

    def test_dimension_bookkeeping_lafan_size(self):
        cfg = GeneratorConfig(joint_count=22, include_contacts=True)
        assert cfg.state_input_dim == 22 * 4 + 3 + 4
        assert cfg.offset_input_dim == 3 + 88
        assert cfg.target_input_dim == 88
        assert cfg.lstm_input_dim == 768
        assert cfg.decoder_output_dim == 95
        assert cfg.z_target_dim == 512
        assert cfg.tta_dim == 256

    def test_noise_sampler(self):
        rng = np.random.default_rng(0)
        z = sample_target_noise(rng, 4, 16, 0.5)
        assert z.shape == (4, 16)
        assert sample_target_noise(rng, 4, 16, 0.0) is None
