import random

import pytest

from etea.analysis import (
    AvalancheReport,
    avalanche,
    equivalent_key_trials,
    equivalent_keys,
)
from etea.cipher import Block64, Key128, encrypt_block


class TestEquivalentKeys:
    def test_class_size_and_membership(self):
        key = Key128((0, 0, 0, 0))
        family = equivalent_keys(key)
        assert len(family) == 4
        assert key in family
        assert Key128((0x80000000, 0x80000000, 0, 0)) in family
        assert Key128((0, 0, 0x80000000, 0x80000000)) in family
        assert Key128((0x80000000,) * 4) in family

    def test_class_is_closed(self):
        # every member generates the same class
        key = Key128((0xDEADBEEF, 0x01234567, 0x89ABCDEF, 0x42424242))
        family = equivalent_keys(key)
        for member in family:
            assert equivalent_keys(member) == family

    def test_all_members_encrypt_identically(self):
        rng = random.Random(40)
        for _ in range(30):
            key = Key128(tuple(rng.getrandbits(32) for _ in range(4)))
            block = Block64(rng.getrandbits(32), rng.getrandbits(32))
            cts = {encrypt_block(block, member) for member in equivalent_keys(key)}
            assert len(cts) == 1

    def test_trials_report(self):
        report = equivalent_key_trials(keys=20, blocks=20, seed=0)
        assert report.trials == 400
        assert report.identical_trials == 400
        assert report.control_changed_trials >= 396  # lone flip must almost always differ

    def test_trials_reproducible(self):
        assert equivalent_key_trials(5, 5, seed=9) == equivalent_key_trials(5, 5, seed=9)

    def test_report_text(self):
        text = equivalent_key_trials(2, 2, seed=1).to_text()
        assert "class-identical    4/4" in text


class TestAvalanche:
    def test_zero_cycles_baseline(self):
        # without mixing the flipped input bit is the only changed output bit
        report = avalanche(trials=50, seed=123, cycles=0)
        assert report.mean_flipped_bits == 1.0
        assert report.stddev == 0.0
        assert report.histogram[1] == 50

    def test_full_cipher_mixes_to_half_the_bits(self):
        report = avalanche(trials=2000, seed=7)
        assert 28 <= report.mean_flipped_bits <= 36
        assert 2.0 <= report.stddev <= 6.0

    def test_reproducible(self):
        assert avalanche(300, seed=5) == avalanche(300, seed=5)

    def test_seed_matters(self):
        assert avalanche(300, seed=5) != avalanche(300, seed=6)

    def test_histogram_accounts_for_every_trial(self):
        report = avalanche(777, seed=0)
        assert len(report.histogram) == 65
        assert sum(report.histogram) == 777
        assert 0 <= report.mean_flipped_bits <= 64

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            avalanche(0, seed=0)

    def test_text_and_csv_shape(self):
        report = avalanche(100, seed=2)
        text = report.to_text()
        assert "trials=100" in text
        assert "mean flipped bits" in text
        csv = report.to_csv()
        lines = csv.strip().splitlines()
        assert lines[0] == "stat,value"
        assert f"trials,100" in lines
        assert "flipped_bits,count" in lines
        # one histogram row per bin
        assert lines[-1] == f"64,{report.histogram[64]}"
        assert len(lines) == 7 + 65

    def test_csv_reconstructs_histogram(self):
        report = avalanche(150, seed=3)
        rows = report.to_csv().split("flipped_bits,count\n")[1].strip().splitlines()
        parsed = [tuple(int(v) for v in row.split(",")) for row in rows]
        assert tuple(c for _, c in parsed) == report.histogram


def test_report_is_plain_data():
    report = avalanche(10, seed=0)
    assert isinstance(report, AvalancheReport)
    clone = AvalancheReport(
        report.trials,
        report.cycles,
        report.seed,
        report.mean_flipped_bits,
        report.stddev,
        report.histogram,
    )
    assert clone == report
