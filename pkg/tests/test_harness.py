import json
import random

import pytest

from hmfweights.derivation import reconstruct
from hmfweights.errors import InputError
from hmfweights.harness import (
    SweepConfig,
    check_one,
    confluence_check,
    enumerate_weights,
    oracle_admissible,
    oracle_hasse,
    partitions,
    pattern_check,
    profiles_up_to,
    roundtrip_check,
    run_sweep,
)
from hmfweights.lattice import Weight, make_embedding_set
from hmfweights.operators import CONDITION_3


def test_partitions_and_profiles():
    assert sorted(partitions(4)) == sorted([(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)])
    assert len(profiles_up_to(3)) == 1 + 2 + 3
    with pytest.raises(InputError):
        profiles_up_to(0)


@pytest.mark.parametrize("profile, p, cap, n", [((2,), 3, 3, 9), ((1, 1), 2, 4, 16), ((3,), 5, 7, 343)])
def test_enumeration_counts(profile, p, cap, n):
    cfg = SweepConfig(profiles=(profile,), primes=(p,), cap=cap)
    assert sum(1 for _ in enumerate_weights(cfg)) == n


def test_config_validation():
    with pytest.raises(InputError):
        SweepConfig(profiles=((2,),), primes=())
    with pytest.raises(InputError):
        SweepConfig(profiles=((2,),), primes=(4,))
    with pytest.raises(InputError):
        SweepConfig(profiles=((2,),), primes=(5,), cap=1)
    with pytest.raises(InputError):
        SweepConfig(profiles=((2,),), primes=(5,), checks=("nope",))


def test_oracles():
    assert oracle_hasse((3,), [0], 5) == [-1, 5, 0]
    assert oracle_hasse((1, 2), [0, 2], 3) == [2, 3, -1]
    assert oracle_admissible((3,), 5, (1, 1, 3)) is None
    assert oracle_admissible((3,), 5, (1, 1, 7)) == "minimal_cone"
    assert oracle_admissible((2,), 5, (1, 1)) == "condition_4"
    assert oracle_admissible((3,), 5, (1, 1, 6)) == "minimal_cone"
    assert oracle_admissible((3,), 7, (1, 1, 8)) == "minimal_cone"
    assert oracle_admissible((4,), 7, (1, 1, 1, 8)) == "minimal_cone"
    assert oracle_admissible((3,), 5, (2, 2, 3)) == "non_algebraic"


def test_roundtrip_examples():
    E3, E2 = make_embedding_set([3]), make_embedding_set([2])
    assert roundtrip_check(E3, 5, (1, 1, 3)).status == "verified"
    res = roundtrip_check(E3, 5, (1, 1, 7))
    assert (res.status, res.reason) == ("filtered", "minimal_cone")
    res = roundtrip_check(E2, 5, (1, 1))
    assert (res.status, res.reason) == ("filtered", "condition_4")


def test_confluence_examples():
    E8 = make_embedding_set([8])
    kdp = (0, 6, 3, 1, 7, 0, 6, 7)
    res = confluence_check(E8, 5, kdp, 50, random.Random(1), expected_final=(1, 1, 3, 2, 2, 1, 2, 2))
    assert res.status == "verified"
    E1 = make_embedding_set([1])
    assert confluence_check(E1, 2, (0,), 5, random.Random(0)).status == "verified"
    assert confluence_check(E8, 5, (1, 1, 3, 2, 2, 1, 2, 2), 5, random.Random(0)).status == "verified"


def test_pattern_examples():
    assert pattern_check(make_embedding_set([8]), 5, (1, 1, 3, 2, 2, 1, 2, 2)).status == "verified"
    assert pattern_check(make_embedding_set([3]), 5, (1, 1, 3)).status == "verified"
    assert pattern_check(make_embedding_set([3]), 5, (2, 3, 2)).status == "verified"


def test_check_one_marks_filtered_reason():
    out = check_one((3,), 5, (1, 1, 7), ("roundtrip",), 1, 0, admissible_only=False)
    assert out["status"] == "filtered" and out["reason"] == "minimal_cone"
    assert out["checks"]["forward"]["status"] == "verified"


def test_small_sweep_is_clean(tmp_path):
    cfg = SweepConfig(profiles=tuple(profiles_up_to(3)), primes=(2, 3, 5), cap=6, trials=5)
    res = run_sweep(cfg, tmp_path / "cex.jsonl")
    assert res.failed == 0 and res.counterexamples == []
    assert res.verified + res.undecidable + res.failed + res.filtered == res.total
    assert sum(res.filter_reasons.values()) == res.filtered
    assert (tmp_path / "cex.jsonl").read_text() == ""


def test_sweep_counts_only():
    cfg = SweepConfig(profiles=((2,),), primes=(3,), cap=3, checks=())
    res = run_sweep(cfg)
    assert res.total == 9 and res.check_counts == {}
    assert res.admissible + res.filtered == 9


def test_sweep_deterministic_across_workers():
    base = dict(profiles=((2,), (1, 1), (3,)), primes=(3, 5), trials=4, seed=7)
    one = run_sweep(SweepConfig(**base, workers=1), chunk=50).summary()
    two = run_sweep(SweepConfig(**base, workers=2), chunk=50).summary()
    one.pop("seconds"), two.pop("seconds")
    assert json.dumps(one, sort_keys=True) == json.dumps(two, sort_keys=True)


def test_eight_tuple_instances_verified():
    cfg = SweepConfig(profiles=((8,),), primes=(5,), cap=7, admissible_only=True)
    E8 = make_embedding_set([8])
    for kappa in range(3, 8):
        k = (1, 1, kappa, 2, 2, 1, 2, 2)
        out = check_one(E8.degrees, 5, k, cfg.checks, 5, 0)
        if oracle_admissible(E8.degrees, 5, k) is None:
            assert out["status"] == "verified"
            assert reconstruct(Weight.of(E8, k), 5, {CONDITION_3}).final == k
        else:
            # p·k_τ1 = 5 < κ leaves the cone
            assert kappa > 5 and out["reason"] == "minimal_cone"
