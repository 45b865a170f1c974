import math

import numpy as np
import pytest

import geometry
from exact import DomainError, grassmann_measure
from grassmann import (
    DegenerateFrameError,
    NonFiniteSampleError,
    SubspaceFrame,
    frame_for,
    frame_stream,
    kubota_check,
    mc_grassmann_integral,
    projection_mci_integrand,
    projection_volume_integrand,
    sample_subspace,
)
from helpers import block_rng
from reports import CheckReport

PI = math.pi


class TestFrames:

    def test_sampled_frames_are_orthonormal(self):
        rng = block_rng(5, 0)
        for n, r in ((2, 1), (3, 2), (5, 2), (6, 5)):
            frame = sample_subspace(n, r, rng)
            assert frame.vectors.shape == (r, n)
            assert frame.gram_error < 1e-12

    def test_frames_are_read_only(self):
        frame = sample_subspace(3, 2, block_rng(1, 0))
        with pytest.raises(ValueError):
            frame.vectors[0, 0] = 2.0

    def test_rank_range(self):
        with pytest.raises(DomainError):
            sample_subspace(3, 3, block_rng(1, 0))
        with pytest.raises(DomainError):
            sample_subspace(3, 0, block_rng(1, 0))

    def test_frame_is_reorthonormalized(self):
        frame = SubspaceFrame(3, 2, [[2.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
        assert frame.gram_error < 1e-12
        np.testing.assert_allclose(frame.vectors[0], [1.0, 0.0, 0.0], atol=1e-15)

    def test_degenerate_frame(self):
        with pytest.raises(DegenerateFrameError):
            SubspaceFrame(3, 2, [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])

    def test_frame_for(self):
        np.testing.assert_array_equal(frame_for(3, 2), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        drawn = frame_for(3, 2, frame_seed=4)
        np.testing.assert_array_equal(drawn, sample_subspace(3, 2, block_rng(4, 0)).vectors)
        np.testing.assert_allclose(drawn @ drawn.T, np.eye(2), atol=1e-12)

    def test_frame_stream_is_reproducible(self):
        first = [f.to_list() for f in frame_stream(4, 2, 10, seed=9, block_size=3)]
        second = [f.to_list() for f in frame_stream(4, 2, 10, seed=9, block_size=3)]
        assert first == second
        assert len(first) == 10

    def test_uniformity_of_lines_in_the_plane(self):
        # the angle of a uniform line is uniform on [0, pi)
        angles = np.array([math.atan2(f.vectors[0, 1], f.vectors[0, 0]) % PI
                           for f in frame_stream(2, 1, 4000, seed=3)])
        assert abs(angles.mean() - PI / 2) < 4 * (PI / math.sqrt(12)) / math.sqrt(4000)


class TestMonteCarlo:

    def test_constant_integrand_gives_the_measure(self):
        estimate = mc_grassmann_integral(lambda frame: 1.0, 3, 2, 100, seed=1)
        assert estimate.mean == pytest.approx(2 * PI, rel=1e-15)
        assert estimate.standard_error == 0.0

    def test_worker_count_does_not_change_the_estimate(self):
        body = geometry.load_body({"family": "odd_harmonic_3d", "halfwidth": 1.0,
                                   "harmonics": [{"degree": 3, "order": 3, "coefficient": 0.02}]})
        fn = projection_volume_integrand(body)
        runs = [mc_grassmann_integral(fn, 3, 2, 3000, seed=4, workers=w, vectorized=True, block_size=512)
                for w in (1, 2, 8)]
        assert runs[0] == runs[1] == runs[2]

    def test_rotating_the_body_keeps_the_estimate(self):
        body = geometry.load_body({"family": "odd_harmonic_3d", "halfwidth": 1.0,
                                   "harmonics": [{"degree": 3, "order": 3, "coefficient": 0.02}]})
        rotation = sample_subspace(3, 2, block_rng(31, 0)).vectors
        rotation = np.vstack([rotation, np.cross(rotation[0], rotation[1])])
        rotated = geometry.project(body, rotation)
        for integrand in (projection_volume_integrand, lambda b: projection_mci_integrand(b, 0)):
            plain = mc_grassmann_integral(integrand(body), 3, 2, 4000, seed=6, vectorized=True)
            turned = mc_grassmann_integral(integrand(rotated), 3, 2, 4000, seed=7, vectorized=True)
            # shadow perimeters are constant (Barbier), so the band needs a round-off floor
            band = 4 * math.hypot(plain.standard_error, turned.standard_error) + 1e-9 * abs(plain.mean)
            assert abs(plain.mean - turned.mean) < band

    def test_nonfinite_sample_carries_the_frame(self):
        with pytest.raises(NonFiniteSampleError) as info:
            mc_grassmann_integral(lambda frame: float("nan"), 3, 1, 10, seed=1)
        assert len(info.value.frame) == 1
        assert len(info.value.frame[0]) == 3

    def test_needs_two_samples(self):
        with pytest.raises(DomainError):
            mc_grassmann_integral(lambda frame: 1.0, 3, 1, 1, seed=1)

    def test_ball_transfer_of_perimeter(self):
        # integral over planes of the shadow perimeter of the unit ball: 2 pi * m(G) = 4 pi^2
        estimate = mc_grassmann_integral(projection_mci_integrand(geometry.ball(1.0, 3), 0), 3, 2, 2000,
                                         seed=2, vectorized=True)
        assert estimate.mean == pytest.approx(4 * PI ** 2, rel=1e-12)

    def test_error_scales_like_inverse_square_root(self):
        body = geometry.load_body({"family": "odd_harmonic_3d", "halfwidth": 1.0,
                                   "harmonics": [{"degree": 3, "order": 0, "coefficient": 0.02}]})
        fn = projection_volume_integrand(body)
        sizes = [1000, 4000, 16000]
        errors = [mc_grassmann_integral(fn, 3, 2, s, seed=8, vectorized=True).standard_error for s in sizes]
        slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.05)


class TestKubota:

    @pytest.mark.parametrize("r", [1, 2])
    def test_unit_ball(self, r):
        report = kubota_check(geometry.ball(1.0, 3), r, samples=20000, seed=42)
        assert report.verdict == "pass"
        assert report.rhs == pytest.approx(4 * PI / 3, rel=1e-12)

    def test_harmonic_body_within_band(self):
        body = geometry.load_body({"family": "odd_harmonic_3d", "halfwidth": 1.0,
                                   "harmonics": [{"degree": 3, "order": 3, "coefficient": 0.02}]})
        report = kubota_check(body, 1, samples=20000, seed=42)
        assert report.verdict == "pass"
        assert report.details["standard_error"] > 0

    def test_plane_body(self):
        report = kubota_check(geometry.ball(1.0, 2), 1, samples=2000, seed=1)
        assert report.verdict == "pass"

    def test_report_carries_the_given_configuration(self):
        cfg = {"n": 2, "body": {"family": "ball", "radius": 1.0}, "r": 1, "samples": 500, "seed": 2}
        report = kubota_check(geometry.ball(1.0, 2), 1, samples=500, seed=2, configuration=cfg)
        assert isinstance(report, CheckReport)
        assert report.configuration == cfg
        assert report.details["samples"] == 500

    def test_four_dimensions_rejected(self):
        with pytest.raises(DomainError):
            kubota_check(geometry.ball(1.0, 4), 1, samples=100, seed=1)

    def test_measure_is_used_for_scaling(self):
        estimate = mc_grassmann_integral(lambda frame: 2.0, 4, 2, 10, seed=0)
        assert estimate.mean == pytest.approx(2 * grassmann_measure(4, 2).to_float(), rel=1e-15)
