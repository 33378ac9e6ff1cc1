"""Child-seed derivation."""

import pytest

from klpref.seeding import ROLE_TAGS, seed_split


class TestSeedSplit:
    def test_deterministic(self):
        assert seed_split(42, 7, "learner") == seed_split(42, 7, "learner")

    def test_roles_are_validated(self):
        with pytest.raises(ValueError):
            seed_split(1, 0, "nonsense")

    def test_distinct_roles_give_distinct_seeds(self):
        seeds = {role: seed_split(123, 0, role) for role in ROLE_TAGS}
        assert len(set(seeds.values())) == len(ROLE_TAGS)

    def test_master_change_propagates(self):
        for role in ROLE_TAGS:
            assert seed_split(1, 5, role) != seed_split(2, 5, role)

    def test_no_collisions_over_a_million_derivations(self):
        seen = set()
        for role in ("learner", "eval-set"):
            for master in range(50):
                for index in range(10_000):
                    seen.add(seed_split(master, index, role))
        assert len(seen) == 2 * 50 * 10_000

    def test_fits_in_64_bits(self):
        for index in range(100):
            assert 0 <= seed_split(999, index, "truth") < 2**64
