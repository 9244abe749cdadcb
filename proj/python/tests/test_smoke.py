#  This source code is licensed under the Apache 2.0 License
#  (found in the LICENSE file in the root directory).

import random

import pytest

import ribbon


def random_keys(n, seed):
    rng = random.Random(seed)
    return [rng.getrandbits(64) for _ in range(n)]


@pytest.mark.parametrize("variant", ["standard", "homogeneous", "balanced"])
@pytest.mark.parametrize("w", [16, 32, 64, 128])
def test_members_are_found(variant, w):
    keys = random_keys(5000, w)
    f = ribbon.build(keys, variant, w=w, r=6)
    assert all(f.contains_many(keys))
    assert f.num_keys == len(keys)
    assert f.variant == variant
    assert f.report["n"] == len(keys)


def test_string_keys_match_cli_hash():
    f = ribbon.build(["apple", "banana", b"cherry"])
    assert "apple" in f and b"banana" in f and "cherry" in f
    assert ribbon.hash_key("apple") == ribbon.hash_key(b"apple")


def test_serialize_round_trip():
    keys = random_keys(2000, 7)
    f = ribbon.build(keys, "balanced", w=32, r=5.5)
    g = ribbon.Filter.deserialize(f.serialize())
    assert g == f
    assert g.serialize() == f.serialize()
    assert all(g.contains_many(keys))


def test_truncated_bytes_raise():
    data = ribbon.build(random_keys(100, 1)).serialize()
    with pytest.raises(ribbon.FormatError):
        ribbon.Filter.deserialize(data[: len(data) // 2])


def test_fpr_near_two_to_minus_r():
    f = ribbon.build(random_keys(20000, 3), r=5)
    result = ribbon.fpr(f, trials=200_000, seed=1)
    lo, hi = result["ci95"]
    assert lo - 0.004 <= 2**-5 <= hi + 0.004
    assert result["trials"] == 200_000


def test_construction_failure_raises():
    keys = random_keys(1000, 4)
    with pytest.raises(ribbon.ConstructionFailed):
        ribbon.build(keys, "standard", w=16, epsilon=0.0, max_retries=2)


def test_drop_columns_keeps_members():
    keys = random_keys(3000, 5)
    f = ribbon.build(keys, r=8)
    g = f.drop_columns(2)
    assert all(g.contains_many(keys))
    assert g.total_bits < f.total_bits


def test_measurements():
    rate = ribbon.failure_rate(64, 1024, 0.05, trials=200, seed=2)
    assert 0.0 <= rate["failure_rate"] <= 0.3
    atf = ribbon.add_till_failure(32, 1024, trials=51, seed=3)
    assert 0.02 < atf["median_epsilon"] < 0.12
    assert ribbon.recommended_epsilon(7, 64) == pytest.approx((4 + 7 / 4) / 64)
    assert ribbon.space_overhead(8.0, 2**-7) == pytest.approx(8 / 7 - 1)
