from fractions import Fraction as F

import pytest

from tsilab.thetaseq import (PhiNotVanishingError, ThetaSeq,
                             UncertifiedTailError, bound_delta_j_v1,
                             bound_delta_j_v2, bound_delta_j_v2_report,
                             distortion_target_n, regularize,
                             regularize_bruteforce, space_from_json,
                             space_to_json)


def test_theta_values_and_conventions(tsirelson, harmonic):
    assert tsirelson.theta(0) == 1 and harmonic.theta(0) == 1
    assert tsirelson.theta(3) == F(1, 8)
    assert harmonic.theta(3) == F(1, 4)
    table = ThetaSeq.from_table(["1/2"])
    assert table.theta(1) == F(1, 2)
    with pytest.raises(ValueError):
        table.theta(2)
    assert table.q_limit == 1 and tsirelson.q_limit is None


def test_regularity_checks(tsirelson, harmonic):
    assert tsirelson.is_regular_prefix(10)
    assert harmonic.is_regular_prefix(10)
    bad = ThetaSeq.from_table([F(1, 2), F(3, 4)])
    assert not bad.is_regular_prefix()
    with pytest.raises(ValueError):
        bad.require_nonincreasing()


def test_phi(tsirelson, harmonic):
    assert tsirelson.phi(5) == 1
    assert harmonic.phi(3) == F(1, 4)
    assert harmonic.phi(1) == F(1, 2)
    assert harmonic.phi(0) == 1
    with pytest.raises(UncertifiedTailError):
        ThetaSeq.from_table([F(1, 2), F(1, 4)]).phi(1)


def test_phi_laws_on_prefix(tsirelson, harmonic):
    # supermultiplicative and bounded by one across the prefix
    for sp in (tsirelson, harmonic):
        phis = [sp.phi(n) for n in range(0, 13)]
        assert all(v <= 1 for v in phis)
        for n in range(1, 12):
            for m in range(1, 13 - n):
                assert phis[n + m] >= phis[n] * phis[m]


def test_regularize_fixed_points(tsirelson, harmonic):
    geo = regularize(tsirelson, 8)
    assert list(geo.table) == [tsirelson.theta(n) for n in range(1, 9)]
    harm = regularize(harmonic, 8)
    assert list(harm.table) == [harmonic.theta(n) for n in range(1, 9)]


def test_regularize_dp_example():
    raw = ThetaSeq.from_table([F(9, 10), F(1, 2), F(1, 2)])
    reg = regularize(raw, 3)
    assert list(reg.table) == [F(9, 10), F(81, 100), F(729, 1000)]


def test_regularize_matches_bruteforce_and_idempotent():
    raw = ThetaSeq.from_table([F(9, 10), F(3, 5), F(1, 2), F(2, 5), F(1, 5),
                               F(1, 6), F(1, 8), F(1, 11), F(1, 16), F(1, 30)])
    reg = regularize(raw, 10)
    assert list(reg.table) == regularize_bruteforce(raw, 10)
    assert regularize(reg, 10).table == reg.table
    assert reg.is_regular_prefix(10)
    assert all(reg.theta(n) >= raw.theta(n) for n in range(1, 11))


def test_regularize_rejects_non_monotone():
    with pytest.raises(ValueError):
        regularize(ThetaSeq.from_table([F(1, 2), F(3, 4)]), 2)


def test_theta_lower_bound_enclosures(tsirelson, harmonic):
    assert tsirelson.theta_lower_bound(8) == F(1, 2)  # every term is exactly 1/2
    lb = harmonic.theta_lower_bound(10)
    # enclosure property at the maximising index n = 10
    assert lb**10 <= F(1, 11) < (lb + F(1, 2**30))**10
    assert lb < 1
    # monotone in N
    assert harmonic.theta_lower_bound(4) <= lb
    seq = ThetaSeq.from_table([F(9, 10)])
    assert seq.theta_lower_bound(1) == F(9, 10)


def test_bound_v1(tsirelson, harmonic):
    for j in range(1, 7):
        assert bound_delta_j_v1(tsirelson, j) == F(1, 2)**(j - 1)
    assert bound_delta_j_v1(harmonic, 3) == F(1, 2)
    assert bound_delta_j_v1(harmonic, 1) == 1
    with pytest.raises(UncertifiedTailError):
        bound_delta_j_v1(ThetaSeq.from_table([F(1, 2), F(1, 4)]), 1)
    with pytest.raises(ValueError):
        bound_delta_j_v1(tsirelson, 0)


def test_bound_v2(tsirelson, harmonic):
    for j in range(1, 7):
        assert bound_delta_j_v2(tsirelson, j) == F(1, 2)**j
    assert bound_delta_j_v2(harmonic, 1) == 1  # sup is the (unattained) limit
    rep = bound_delta_j_v2_report(harmonic, 1, P_max=32)
    assert rep["value"] == "1" and not rep["attained"]
    assert rep["range_max"] == str(F(32, 33))
    assert bound_delta_j_v2(harmonic, 0) == 1  # empty-product convention


def test_distortion_target(harmonic, tsirelson):
    assert distortion_target_n(harmonic, 2) == 8
    assert distortion_target_n(harmonic, F(1, 2)) == 2
    with pytest.raises(PhiNotVanishingError):
        distortion_target_n(tsirelson, 2)
    with pytest.raises(ValueError):
        distortion_target_n(harmonic, 10**9, P_max=4)


def test_space_serialisation_roundtrip(tsirelson, harmonic):
    for sp in (tsirelson, harmonic, ThetaSeq.from_table([F(1, 2), F(1, 4)])):
        assert space_from_json(space_to_json(sp)).space_id() == sp.space_id()
    assert space_from_json("tsirelson").space_id() == tsirelson.space_id()
    assert space_from_json("tsirelson-s1").q_limit == 1
    with pytest.raises(ValueError):
        space_from_json("no-such-space")
