"""Acceptance criteria 1-8; a per-criterion PASS/FAIL line is printed in the terminal summary."""

import time
from itertools import product

import pytest

from hmfweights.derivation import (
    PatternError,
    check_hypotheses,
    hasdiv_chain,
    hasdiv_pattern,
    reconstruct,
    reports_agree,
)
from hmfweights.golden import GOLDEN, golden_weight, run_golden
from hmfweights.harness import SweepConfig, oracle_admissible, profiles_up_to, run_sweep
from hmfweights.lattice import KAPPA, P, Tri, Weight, make_embedding_set, vec_strs
from hmfweights.operators import CONDITION_3, dk_divisibility, reduce_to_min_cone

SWEEP = dict(profiles=tuple(profiles_up_to(4)), primes=(2, 3, 5, 7), cap=None, workers=1)


@pytest.fixture(scope="module")
def identity_sweep():
    cfg = SweepConfig(**SWEEP, checks=("roundtrip", "pattern"))
    start = time.perf_counter()
    res = run_sweep(cfg)
    return res, time.perf_counter() - start


@pytest.fixture(scope="module")
def confluence_sweep():
    return run_sweep(SweepConfig(**SWEEP, checks=("confluence",), trials=20, seed=0))


def _timed_golden(name):
    start = time.perf_counter()
    report, diffs = run_golden(name)
    return report, diffs, time.perf_counter() - start


def test_criterion_1_quadratic_cubic_example():
    report, diffs, seconds = _timed_golden("quadratic-cubic")
    assert diffs == []
    assert [t.index for t in report.M] == [0, 2] and [t.index for t in report.Mtilde] == [2]
    assert vec_strs(report.kprime.k) == ["p", "p+1", "κ-1"]
    (mu, wmu), = report.kmu
    assert (vec_strs(wmu.k), vec_strs(wmu.l)) == (["p", "p+1", "κ+1"], ["0", "0", "-1"])
    assert seconds < 1.0


def test_criterion_2_k2_equals_2_example():
    report, diffs, _ = _timed_golden("k2-equals-2")
    assert diffs == []
    assert vec_strs(report.kprime.k) == ["p", "p", "p+1"]
    (mu, wmu), = report.kmu
    assert (vec_strs(wmu.k), vec_strs(wmu.l)) == (["p", "p", "p+3"], ["0", "0", "-1"])


def test_criterion_3_eight_tuple_example():
    report, diffs, seconds = _timed_golden("eight-tuple")
    assert diffs == []
    assert vec_strs(report.kprime.k) == ["p", "p+1", "κ-1", "p+1", "p+1", "p", "p+1", "p+1"]
    assert [vec_strs(w.k) for _, w in report.kmu] == [
        ["p", "p+1", "κ+1", "p+1", "p+1", "p", "p+1", "p+1"],
        ["p", "p+1", "κ-1", "p+1", "p+3", "p", "p+1", "p+1"],
        ["p", "p+1", "κ-1", "p+1", "p+1", "p", "p+1", "p+3"],
    ]
    assert vec_strs(report.kdoubleprime) == ["0", "p+1", "κ", "1", "p+2", "0", "p+1", "p+2"]
    assert report.verdict == "verified"
    assert vec_strs(report.final) == ["1", "1", "κ", "2", "2", "1", "2", "2"]
    assert seconds < 1.0


def test_criterion_4_identity_sweep(identity_sweep):
    res, seconds = identity_sweep
    assert res.failed == 0 and res.counterexamples == []
    assert res.admissible > 0
    assert res.check_counts["roundtrip"] == {"verified": res.admissible}
    assert res.check_counts["pattern"] == {"verified": res.admissible}
    assert res.verified + res.undecidable + res.failed + res.filtered == res.total
    assert seconds < 60


def test_criterion_5_hasdiv_chains(identity_sweep):
    # reconstruction chains: the round trip replays every non-matching step under p·k_τ < k_next
    res, _ = identity_sweep
    assert res.check_counts["roundtrip"].get("failed", 0) == 0
    # every HasDiv pattern instance over small orbits, with entries 0..p+2
    instances = 0
    for prof in profiles_up_to(4):
        E = make_embedding_set(prof)
        for p in (2, 3, 5, 7):
            for k in product(range(p + 3), repeat=E.d):
                for tau in E.embeddings:
                    if dk_divisibility(E, k, tau, p) is not Tri.ALWAYS:
                        continue
                    try:
                        hasdiv_pattern(E, k, tau, p)
                    except PatternError:
                        continue
                    chain = hasdiv_chain(E, k, tau, p)  # raises unless every step is ALWAYS
                    instances += 1
                    cur = k
                    for step, after in zip(chain.chain, chain.weights):
                        assert dk_divisibility(E, cur, step, p) is Tri.ALWAYS
                        cur = after
    assert instances > 0
    E4 = make_embedding_set([4])
    red = reduce_to_min_cone(E4, (0, 5, 5, 6), 5)
    assert red.final == (1, 1, 1, 1) and len(red.chain) == 3
    assert hasdiv_chain(E4, (0, 5, 5, 6), E4.at(0), 5).weights[-1] == (1, 1, 1, 1)


def test_criterion_6_confluence(confluence_sweep):
    res = confluence_sweep
    assert res.failed == 0 and res.counterexamples == []
    assert res.check_counts["confluence"] == {"verified": res.admissible}


def test_criterion_7_symbolic_concrete_coherence():
    compared = 0
    for name, g in GOLDEN.items():
        w_sym, ctx = golden_weight(g)
        sym = reconstruct(w_sym, ctx.sym(P), {CONDITION_3})
        E = w_sym.E
        kappas = range(3, 10) if g.kappa_min is not None else [None]
        for p in (2, 3, 5, 7):
            for kv in kappas:
                env = {P: p} if kv is None else {P: p, KAPPA: kv}
                k = tuple(kv if c == "κ" else int(c) for c in g.k)
                if oracle_admissible(E.degrees, p, k) is not None:
                    continue
                concrete = reconstruct(Weight.of(E, k), p, {CONDITION_3})
                assert reports_agree(sym.evaluate(env), concrete) == [], (name, env)
                compared += 1
    assert compared > 0


def test_criterion_8_hypothesis_labels():
    h = check_hypotheses(Weight.of(make_embedding_set([2]), [1, 1]), 5)
    assert h.verdicts["condition_4"] is Tri.NEVER and "condition_4" in h.failed
    h = check_hypotheses(Weight.of(make_embedding_set([3]), [1, 1, 6]), 5)
    assert h.verdicts["condition_5"] is Tri.NEVER and "condition_5" in h.failed
