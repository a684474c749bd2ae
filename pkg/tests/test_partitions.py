import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.functions.combinatorial.numbers import bell
from sympy.utilities.iterables import multiset_partitions

from conftest import small_corpus
from pasf_lab.conjecture_lab import (
    HOLDS,
    INCONCLUSIVE,
    REFUTED,
    Budget,
    PartitionCertificate,
    akemann_weaver_search,
    feichtinger_search,
    r_eps_search,
    verify_certificate,
    weaver_search,
)
from pasf_lab.conjecture_lab.search import (
    bell_number,
    canonical_labels,
    labels_to_parts,
    restricted_growth_strings,
)
from pasf_lab.frames import PASF, make_pasf


@pytest.mark.parametrize("n", range(1, 9))
def test_rgs_enumerates_every_partition_once(n):
    got = {tuple(tuple(p) for p in labels_to_parts(l)) for l in restricted_growth_strings(n)}
    want = {tuple(tuple(sorted(b)) for b in sorted(part)) for part in multiset_partitions(list(range(n)))}
    assert got == want
    assert bell_number(n) == int(bell(n)) == len(got)


def test_rgs_block_cap():
    for labels in restricted_growth_strings(6, 2):
        assert max(labels) <= 1
    assert sum(1 for _ in restricted_growth_strings(6, 2)) == 2**5


@given(st.lists(st.integers(0, 5), min_size=1, max_size=10))
def test_canonical_labels_is_rgs(labels):
    c = canonical_labels(labels)
    seen = -1
    for v in c:
        assert v <= seen + 1
        seen = max(seen, v)
    assert labels_to_parts(c) == sorted(labels_to_parts(labels))


@pytest.mark.parametrize("idx", range(len(small_corpus())))
def test_exhaustive_not_worse_than_greedy(idx):
    P = small_corpus()[idx]
    ex = feichtinger_search(P, 0.3, strategy="exhaustive")
    gr = feichtinger_search(P, 0.3, strategy="greedy", seed=2)
    assert ex.status == HOLDS and ex.details["minimal"]
    if gr.status == HOLDS:
        assert gr.details["M"] >= ex.details["M"]
        assert gr.witness["verified"]
    assert ex.witness["verified"]


def test_feichtinger_citations():
    assert feichtinger_search(make_pasf("standard", d=2), 0.5).citation == "Conjecture FB"
    P = PASF(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 1.0], [0.0, 0.0]]), 2.0, 2.0)
    assert feichtinger_search(P, 0.5).citation == "Conjecture FS"


def test_feichtinger_preconditions():
    with pytest.raises(ValueError):
        feichtinger_search(make_pasf("standard", d=2), 0.0)
    zero = PASF(np.array([[1.0, 0.0], [0.0, 0.0]]), np.eye(2), 2.0, 2.0)
    with pytest.raises(ValueError):
        feichtinger_search(zero, 0.5)


def test_infeasible_threshold_is_inconclusive():
    rep = feichtinger_search(make_pasf("standard", d=2), 5.0)
    assert rep.status == INCONCLUSIVE and rep.witness is None


def test_budget_exhaustion_reported():
    P = small_corpus()[10]
    rep = feichtinger_search(P, 0.9, budget=Budget(max_nodes=3), strategy="exhaustive")
    assert rep.status == INCONCLUSIVE
    assert rep.details.get("budget_exhausted")


def test_r_eps_standard_basis():
    rep = r_eps_search(make_pasf("standard", d=3), 0.2)
    assert rep.status == HOLDS and rep.details["M"] == 1
    assert rep.citation == "Conjecture 11"


def _perturbed_basis(d, seed, delta=0.3):
    rng = np.random.default_rng(seed)
    T = np.eye(d) + delta * rng.standard_normal((d, d))
    T /= np.linalg.norm(T, axis=0)
    return PASF(T.T.copy(), T, 2.0, 2.0, "perturbed basis")


def _brute_eps(P, eps):
    def good(part):
        s = np.linalg.svd(P.T[:, part], compute_uv=False)
        return s[-1] >= 1 - eps and s[0] <= 1 + eps

    return min(len(part) for part in multiset_partitions(list(range(P.n))) if all(good(b) for b in part))


@pytest.mark.parametrize("d,seed", [(3, 0), (4, 1), (5, 2), (6, 3)])
def test_r_eps_matches_brute_force(d, seed):
    P = _perturbed_basis(d, seed)
    rep = r_eps_search(P, 0.05)
    assert rep.status == HOLDS
    assert rep.details["M"] == _brute_eps(P, 0.05)
    assert verify_certificate(rep.witness, P)


def test_r_eps_preconditions():
    with pytest.raises(ValueError):
        r_eps_search(make_pasf("standard", d=2), 1.5)
    with pytest.raises(ValueError):
        r_eps_search(make_pasf("explicit", F=np.eye(2), T=2 * np.eye(2)), 0.1)
    with pytest.raises(ValueError):
        r_eps_search(make_pasf("duplicated-standard", d=2, k=2, normalize=False), 0.1)


def test_weaver_refutes_single_part():
    P = make_pasf("duplicated-standard", d=2, k=2, normalize=False)
    rep = weaver_search(P, 2.0, 0.5, 1, unit_norm=True, strategy="exhaustive")
    assert rep.status == REFUTED


def test_weaver_citation_flags():
    P = make_pasf("duplicated-standard", d=2, k=2, normalize=False)
    assert weaver_search(P, 2.0, 1.0, 2).citation == "Conjecture 12"
    assert weaver_search(P, 2.0, 1.0, 2, unit_norm=True).citation != "Conjecture 12"


def test_akemann_weaver_balanced_split():
    P = make_pasf("duplicated-standard", d=2, k=2)
    rep = akemann_weaver_search(P, np.full(4, 0.5))
    assert rep.status == HOLDS
    assert rep.witness["discrepancy"] == pytest.approx(0.0, abs=1e-12)
    assert rep.citation == "Conjecture AW"


def test_akemann_weaver_requires_bessel_bound():
    P = make_pasf("duplicated-standard", d=2, k=2, normalize=False)
    with pytest.raises(ValueError):
        akemann_weaver_search(P, np.full(4, 0.5))


def test_certificate_round_trip_and_tamper():
    P = small_corpus()[6]
    rep = feichtinger_search(P, 0.6)
    cert = PartitionCertificate.from_dict(json.loads(json.dumps(rep.witness)))
    assert verify_certificate(cert, P)
    bad = dict(rep.witness)
    bad["parts"] = [[0, 1, 2, 3, 4]]
    assert not verify_certificate(bad, P)
    overlap = dict(rep.witness)
    overlap["parts"] = [list(range(P.n)), [0]]
    assert not verify_certificate(overlap, P)
    with pytest.raises(ValueError):
        verify_certificate({"parts": "nope"}, P)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.integers(3, 7), st.integers(0, 10_000), st.sampled_from([0.2, 0.5, 0.8]))
def test_random_frames_certificates_and_determinism(d, n, seed, a_min):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((d, n))
    T /= np.linalg.norm(T, axis=0)
    P = PASF(T.T.copy(), T, 2.0, 2.0)
    a = feichtinger_search(P, a_min, seed=seed)
    b = feichtinger_search(P, a_min, seed=seed)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    if a.status == HOLDS:
        assert verify_certificate(a.witness, P)
        g = feichtinger_search(P, a_min, strategy="greedy", seed=seed)
        if g.status == HOLDS:
            assert g.details["M"] >= a.details["M"]


@pytest.mark.parametrize("p", [1.0, 3.0])
def test_non_euclidean_exponent_partition(p):
    P = make_pasf("duplicated-standard", d=2, k=2, normalize=False, p=p, r=p)
    rep = feichtinger_search(P, 0.5)
    assert rep.details["M"] == 2
    assert verify_certificate(rep.witness, P)


def test_weaver_exhaustive_matches_brute_force():
    rng = np.random.default_rng(3)
    T = rng.standard_normal((2, 6))
    T /= np.linalg.norm(T, axis=0)
    P = PASF(T.T.copy(), T, 2.0, 2.0)
    rep = weaver_search(P, 10.0, 1.0, 2, strategy="exhaustive")
    best = min(
        max(np.linalg.norm(T[:, [j for j in range(6) if lab[j] == k]] @ T[:, [j for j in range(6) if lab[j] == k]].T, 2)
            if any(l == k for l in lab) else 0.0 for k in (0, 1))
        for lab in itertools.product((0, 1), repeat=6)
    )
    assert rep.details["min_max_part_norm"] == pytest.approx(best, abs=1e-10)
