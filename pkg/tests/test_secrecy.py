import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msrsec.galois import TowerSpec, extend, field_create, make_tower
from msrsec.matgf import MatrixGF, rank, same_row_space
from msrsec.msrcode import zigzag_construct
from msrsec.secrecy import (
    CSV_HEADER,
    EavesdropperPattern as P,
    LeakageReport,
    LinearScheme,
    PatternError,
    Precoder,
    capacity_csv,
    capacity_rows,
    enumerate_patterns,
    eve_view_matrix,
    fig1_code,
    fig1_precoder,
    fig1_scheme,
    flatten_matrix,
    gabidulin_precoder,
    leakage_accounting,
    leaked_dimensions,
    linear_entropy,
    linear_secrecy,
    max_secure_filesize,
    perfect_secrecy_check,
    scheme_from_code,
    scheme_leakage,
    secrecy_oracle_bruteforce,
    thm1_bound,
    thm2_capacity,
)

GF2 = field_create(2)
GF3 = field_create(3)
GF4 = field_create(2, 2)


def all_patterns(code):
    for total in range(code.k):
        for l2 in range(total + 1):
            yield from enumerate_patterns(code.n, code.k, total - l2, l2)


def random_invertible(F, n, rng):
    while True:
        M = MatrixGF(F, rng.integers(0, F.order, size=(n, n)))
        if rank(M) == n:
            return M


def toy_precoder(code, secret_size, seed):
    """Random invertible mixing over the code field itself (N = 1)."""
    tower = TowerSpec(code.field, extend(code.field, 1))
    M = code.k * code.alpha
    G = random_invertible(tower.ext, M, np.random.default_rng(seed))
    return Precoder(tower, M, secret_size, G)


# -- bounds --------------------------------------------------------------


def test_thm1_values():
    assert thm1_bound(4, 2, 3, 4, 0, 1) == 2
    assert thm1_bound(5, 3, 4, 8, 0, 2) == 2
    assert thm1_bound(5, 3, 4, 8, 2, 0) == 8
    assert thm1_bound(6, 2, 3, 5, 0, 1) == Fraction(5, 2)
    with pytest.raises(ValueError):
        thm1_bound(4, 2, 3, 4, 1, 1)
    with pytest.raises(ValueError):
        thm1_bound(4, 2, 4, 4, 0, 0)


def test_thm2_values():
    assert thm2_capacity(4, 2, 0, 1) == (4, 2)
    assert thm2_capacity(5, 3, 1, 1) == (8, 4)
    for n, k in ((4, 2), (5, 3), (7, 3)):
        alpha = (n - k) ** k
        assert thm2_capacity(n, k, k - 1, 0) == (alpha, alpha)


def test_thm2_decays_with_repair_observations():
    vals = [thm2_capacity(8, 5, 0, l2)[1] for l2 in range(5)]
    assert vals == sorted(vals, reverse=True)
    assert len(set(vals)) == len(vals)


# -- patterns and views ------------------------------------------------


def test_pattern_validation(code423):
    with pytest.raises(PatternError):
        P([1], [1]).validate(code423.params)
    with pytest.raises(PatternError):
        P([], [3]).validate(code423.params)
    with pytest.raises(PatternError):
        P([1], [2]).validate(code423.params)
    with pytest.raises(PatternError):
        P([5]).validate(code423.params)
    P([4]).validate(code423.params)


def test_enumerate_patterns_counts():
    assert len(list(enumerate_patterns(4, 2, 1, 0))) == 4
    assert len(list(enumerate_patterns(4, 2, 0, 1))) == 2
    # Es from 5 nodes, Ed from the systematic nodes left over
    assert len(list(enumerate_patterns(5, 3, 1, 1))) == 3 * 2 + 2 * 3
    with pytest.raises(PatternError):
        list(enumerate_patterns(4, 2, 1, 1))


def test_view_ranks_423(code423):
    assert eve_view_matrix(code423, P()).rows == 0
    assert linear_entropy(eve_view_matrix(code423, P())) == 0
    assert linear_entropy(eve_view_matrix(code423, P([1]))) == 4
    assert linear_entropy(eve_view_matrix(code423, P([3]))) == 4
    assert linear_entropy(eve_view_matrix(code423, P([], [1]))) == 6
    assert linear_entropy(MatrixGF.identity(GF4, 8)) == 8


@pytest.mark.parametrize("fixture", ["code423", "code534"])
def test_view_rank_monotone(fixture, request):
    code = request.getfixturevalue(fixture)
    pats = list(all_patterns(code))
    ranks = {p: linear_entropy(eve_view_matrix(code, p)) for p in pats}
    for a, b in itertools.product(pats, repeat=2):
        if a <= b:
            assert ranks[a] <= ranks[b]


# -- leakage accounting ------------------------------------------------


def test_leakage_accounting_examples(code423, code534):
    rep = leakage_accounting(code423, P([], [1]))
    assert rep.per_node_residual == ((2, 4, 2),)
    assert rep.bound == 2 == rep.thm1_bound
    assert not rep.secrecy_ok  # unkeyed data
    rep = leakage_accounting(code534, P([], [1, 2]))
    assert rep.per_node_residual == ((3, 8, 6),)
    assert rep.bound == 2
    rep = leakage_accounting(code534, P([2]))
    assert rep.bound == 16


def test_leakage_accounting_parity_stored(code534):
    # a watched parity still leaves k - l1 - l2 retained systematic nodes
    rep = leakage_accounting(code534, P([5], [1]))
    assert len(rep.per_node_residual) == 1
    assert rep.bound == rep.thm1_bound == 4


def test_leakage_report_json(code423, tower423):
    pre = gabidulin_precoder(8, 2, tower423)
    rep = leakage_accounting(code423, P([], [1]), pre)
    d = json.loads(rep.to_json())
    assert set(d) == {"pattern", "view_rank", "per_node_residual", "thm1_bound", "secrecy_ok"}
    assert d["thm1_bound"] == {"num": 2, "den": 1}
    assert d["secrecy_ok"] is True
    assert LeakageReport.from_dict(d) == rep


# -- precoders -----------------------------------------------------------


def test_moore_precoder_small():
    tower = make_tower(GF4, 2)
    pre = gabidulin_precoder(2, 1, tower)
    ext = tower.ext
    g1, g2 = tower.basis
    G = pre.generator.data
    assert G.tolist() == [[g1, ext.power(g1, 4)], [g2, ext.power(g2, 4)]]
    det = ext.sub(ext.mul(g1, ext.power(g2, 4)), ext.mul(g2, ext.power(g1, 4)))
    assert det != 0
    assert gabidulin_precoder(1, 1, make_tower(GF4, 1)).generator.data.tolist() == [[1]]


def test_moore_precoder_invertible_flattened(tower423):
    pre = gabidulin_precoder(8, 3, tower423)
    assert rank(flatten_matrix(tower423, pre.generator)) == 64


def test_precoder_errors():
    with pytest.raises(ValueError):
        gabidulin_precoder(4, 1, make_tower(GF4, 3))
    with pytest.raises(ValueError):
        gabidulin_precoder(2, 3, make_tower(GF4, 2))
    tower = TowerSpec(GF3, extend(GF3, 1))
    with pytest.raises(ValueError):
        Precoder(tower, 2, 1, MatrixGF(tower.ext, [[1, 2], [2, 1]]))


def test_precoder_roundtrip(tower423):
    pre = gabidulin_precoder(8, 3, tower423)
    rng = np.random.default_rng(0)
    secret = rng.integers(0, tower423.ext.order, 3)
    keys = rng.integers(0, tower423.ext.order, 5)
    data = pre.encode(secret, keys)
    assert np.array_equal(pre.decode(data), secret)
    assert Precoder.from_dict(json.loads(json.dumps(pre.to_dict()))).generator == pre.generator


# -- secrecy checks ------------------------------------------------------


def test_no_secret_always_secure(code423, tower423):
    pre = gabidulin_precoder(8, 0, tower423)
    for pat in all_patterns(code423):
        assert perfect_secrecy_check(code423, pre, pat)


def test_moore_ms2_secure_for_all_small_patterns(code423, tower423):
    pre = gabidulin_precoder(8, 2, tower423)
    for pat in all_patterns(code423):
        assert perfect_secrecy_check(code423, pre, pat)


def test_unkeyed_leaks(code423, tower423):
    pre = gabidulin_precoder(8, 8, tower423)
    assert leaked_dimensions(code423, pre, P([], [1])) == 6 * 8
    assert leaked_dimensions(code423, pre, P()) == 0


def test_flatten_and_extension_agree(code423, tower423):
    for ms in range(9):
        pre = gabidulin_precoder(8, ms, tower423)
        for pat in all_patterns(code423):
            a = leaked_dimensions(code423, pre, pat, "flatten")
            b = leaked_dimensions(code423, pre, pat, "extension")
            assert a == b
            assert a % 8 == 0


def test_fig1_verdicts():
    code, pre = fig1_code(), fig1_precoder()
    assert code.params.n == 3 and code.params.alpha == 1
    for node in (1, 2, 3):
        pat = P([node])
        assert perfect_secrecy_check(code, pre, pat)
        assert secrecy_oracle_bruteforce(fig1_scheme(pat))
    pat = P([], [1])
    assert not perfect_secrecy_check(code, pre, pat)
    assert leaked_dimensions(code, pre, pat) == 1
    assert not secrecy_oracle_bruteforce(fig1_scheme(pat))


def test_fig1_shares():
    s = fig1_scheme(P([1]))
    assert s.observation.data.tolist() == [[1, 1]]  # F + K over inputs (K; F)
    s = fig1_scheme(P([], [1]))
    # the downloads K and F + 2K, up to a change of basis
    assert same_row_space(s.observation, MatrixGF(GF3, [[1, 0], [2, 1]]))


def test_oracle_trivial_cases():
    empty = LinearScheme(GF3, 1, 1, MatrixGF.zeros(GF3, 0, 2))
    assert secrecy_oracle_bruteforce(empty)
    no_secret = LinearScheme(GF2, 2, 0, MatrixGF(GF2, [[1, 1]]))
    assert secrecy_oracle_bruteforce(no_secret)
    big = LinearScheme(GF3, 20, 1, MatrixGF.zeros(GF3, 1, 21))
    with pytest.raises(ValueError):
        secrecy_oracle_bruteforce(big)


@st.composite
def toy_schemes(draw):
    F = draw(st.sampled_from([GF2, GF3, GF4]))
    limit = {2: 12, 3: 8, 4: 6}[F.order]
    t = draw(st.integers(1, limit))
    s = draw(st.integers(0, t))
    rows = draw(st.integers(0, t + 1))
    vals = draw(st.lists(st.integers(0, F.order - 1), min_size=rows * t, max_size=rows * t))
    O = MatrixGF(F, np.array(vals, dtype=np.int64).reshape(rows, t), t)
    return LinearScheme(F, t - s, s, O)


@settings(max_examples=200, deadline=None)
@given(toy_schemes())
def test_rank_criterion_matches_oracle_on_toys(scheme):
    assert linear_secrecy(scheme) == secrecy_oracle_bruteforce(scheme)


def test_oracle_on_precoded_code(code423):
    # (4,2,3) with a random invertible GF(4) precoder: 4^8 input assignments
    for seed, ms in ((0, 1), (1, 2), (2, 3)):
        pre = toy_precoder(code423, ms, seed)
        for pat in all_patterns(code423):
            scheme = scheme_from_code(code423, pre, pat)
            assert scheme.n_inputs == 8
            expect = perfect_secrecy_check(code423, pre, pat)
            assert secrecy_oracle_bruteforce(scheme) == expect
            assert (scheme_leakage(scheme) == 0) == expect


# -- capacity -----------------------------------------------------------


@pytest.mark.parametrize("l1,l2,want", [(0, 0, 8), (1, 0, 4), (0, 1, 2)])
def test_max_secure_filesize_423(code423, tower423, l1, l2, want):
    got, cert = max_secure_filesize(code423, l1, l2, tower423)
    assert got == want == cert.bound
    assert cert.secure_at_achieved and cert.tight
    assert cert.achieved_base_symbols == 8 * want
    assert len(cert.profiles) == len(list(enumerate_patterns(4, 2, l1, l2)))
    assert json.loads(json.dumps(cert.to_dict()))["achieved"] == want


def test_repair_observation_costs_more(code423, tower423):
    stored, _ = max_secure_filesize(code423, 1, 0, tower423)
    repaired, _ = max_secure_filesize(code423, 0, 1, tower423)
    assert (stored, repaired) == (4, 2)


@pytest.mark.slow
@pytest.mark.parametrize("l1,l2", [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_max_secure_filesize_534_meets_capacity(code534, tower534, l1, l2):
    got, cert = max_secure_filesize(code534, l1, l2, tower534, method="extension")
    assert got == thm2_capacity(5, 3, l1, l2)[1] == cert.bound
    assert cert.secure_at_achieved and cert.tight


def test_capacity_csv(code423, tower423):
    text = capacity_csv(capacity_rows(code423, tower423))
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1:] == ["4,2,3,4,0,0,8,8", "4,2,3,4,1,0,4,4", "4,2,3,4,0,1,2,2"]


def test_capacity_rows_bound_only(code534):
    rows = capacity_rows(code534, achieve=False)
    assert len(rows) == 6
    assert all(r[7] is None for r in rows)
    assert [r for r in rows if (r[4], r[5]) == (0, 2)][0][6] == 2


@pytest.mark.parametrize("l1,l2", [(0, 0), (1, 0), (0, 1)])
def test_max_secure_filesize_three_parities(l1, l2):
    code = zigzag_construct(2, 3)
    got, cert = max_secure_filesize(code, l1, l2, method="extension")
    assert got == thm2_capacity(5, 2, l1, l2)[1]
    assert cert.tight and cert.secure_at_achieved
