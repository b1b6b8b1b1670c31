import numpy as np
import pytest
from scipy.special import ndtr

from cwcp.streams import derive_seed, normal, substream, uniform_open


class TestSubstream:
    def test_same_tags_same_stream(self):
        a = substream(7, "x", 1).random(16)
        b = substream(7, "x", 1).random(16)
        assert np.array_equal(a, b)

    def test_any_tag_change_gives_new_stream(self):
        base = substream(7, "x", 1).random(16)
        for tags in ((8, "x", 1), (7, "y", 1), (7, "x", 2), (7, "x"), (7, 1, "x")):
            other = substream(*tags).random(16)
            assert not np.array_equal(base, other)

    def test_string_tags_stable_across_processes(self):
        # blake2s-based tag hashing does not depend on PYTHONHASHSEED
        import subprocess
        import sys

        code = (
            "from cwcp.streams import substream;"
            "print(substream(3, 'needle', 'P', 'x').integers(0, 2**32, 4).tolist())"
        )
        outs = {
            subprocess.run(
                [sys.executable, "-c", code],
                capture_output=True,
                text=True,
                env={"PYTHONHASHSEED": str(h), "PATH": "/usr/bin:/bin"},
                check=True,
            ).stdout
            for h in (0, 1)
        }
        assert len(outs) == 1


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(11, "a", 2) == derive_seed(11, "a", 2)

    def test_no_collisions_across_roles(self):
        purposes = ("fit-src", "fit-tgt", "bias", "cal", "eval", "opt")
        seeds = {
            derive_seed(42, "cov", shift, trial, purpose)
            for shift in range(5)
            for trial in range(50)
            for purpose in purposes
        }
        assert len(seeds) == 5 * 50 * len(purposes)

    def test_nonnegative_63_bit(self):
        for tag in range(100):
            s = derive_seed(1, tag)
            assert 0 <= s < 2**63


class TestDraws:
    def test_uniform_strictly_inside_unit_interval(self):
        u = uniform_open(substream(5, "u"), 10**6)
        assert u.min() > 0.0 and u.max() < 1.0

    def test_uniform_moments(self):
        u = uniform_open(substream(6, "u"), 10**6)
        assert abs(float(u.mean()) - 0.5) <= 4 * 0.2887 / 1000
        assert abs(float(u.var()) - 1 / 12) <= 4e-4

    def test_normal_is_inverse_cdf_of_uniforms(self):
        rng1 = substream(9, "n")
        rng2 = substream(9, "n")
        z = normal(rng1, 1000)
        u = uniform_open(rng2, 1000)
        assert np.allclose(ndtr(z), u, atol=1e-15)

    def test_normal_moments(self):
        z = normal(substream(10, "n"), 10**6)
        assert abs(float(z.mean())) <= 4 / 1000
        assert abs(float(z.var()) - 1.0) <= 0.006


class TestTrialSampleDisjointness:
    def test_four_data_roles_never_share_draws(self):
        # the coverage runner derives one seed per (shift, trial, purpose);
        # the resulting samples must be pairwise different
        from cwcp.synth import gen_gaussian_shift

        purposes = ("fit-src", "bias", "cal", "eval")
        samples = {
            p: gen_gaussian_shift("P", 0.0, 3, 50, derive_seed(1, "cov", 0, 0, p)).x
            for p in purposes
        }
        keys = list(samples)
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                assert not np.array_equal(samples[keys[i]], samples[keys[j]])
