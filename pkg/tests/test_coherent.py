import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonorder import coherent
from bosonorder.algebra import A, ADAG, BosonPolynomial, BosonWord, NormalForm, normal_order, parse_expr
from bosonorder.coherent import (
    ComplexAmplitude,
    LambdaSeries,
    coherent_vector,
    expectation,
    expm_taylor,
    fock_expectation,
    fock_matrix,
    ladder_matrices,
    number_exp_nf,
    series_exp,
    vacuum_projector_nf,
    verify_identity,
)
from bosonorder.combinatorics import bell_polynomial, stirling_rec

EXAMPLE = parse_expr("a ad a a ad a")


def ladder_product(p, dim):
    a, ad = ladder_matrices(dim)
    total = np.zeros((dim, dim))
    for w, c in p.items():
        m = np.eye(dim)
        for letter in w.letters:
            m = m @ (a if letter is A else ad)
        total += float(c) * m
    return total


# --- expectation values ---------------------------------------------------------

@pytest.mark.parametrize("z", [0.3, 1 + 2j, -0.7 + 0.4j])
def test_expectation_of_worked_example(z):
    nf = normal_order(EXAMPLE)
    zc = np.conj(z)
    assert expectation(nf, z) == pytest.approx(zc**2 * z**4 + 4 * zc * z**3 + 2 * z**2, rel=1e-14)


def test_expectation_of_identity():
    assert expectation(NormalForm.one(), 1.3 - 0.2j) == 1


@pytest.mark.parametrize("r2", [1, 2])
def test_number_powers_give_bell_polynomials(r2):
    z = cmath_polar(math.sqrt(r2), 0.7)
    for n in range(9):
        nf = normal_order(parse_expr(f"(ad a)^{n}"))
        assert expectation(nf, z) == pytest.approx(float(bell_polynomial(n)(Fraction(r2))), rel=1e-12)


def cmath_polar(r, phi):
    return complex(r * math.cos(phi), r * math.sin(phi))


def test_amplitude_parsing():
    assert ComplexAmplitude.parse("1.5,-2").value == complex(1.5, -2)
    assert ComplexAmplitude.parse("0.5").value == 0.5
    with pytest.raises(ValueError):
        ComplexAmplitude.parse("1,2,3")
    with pytest.raises(ValueError):
        ComplexAmplitude(float("nan"), 0)


# --- Fock matrices ------------------------------------------------------------------

def test_number_operator_matrix():
    m = fock_matrix(parse_expr("ad a"), 4)
    np.testing.assert_array_equal(m.data, np.diag([0, 1, 2, 3]).astype(complex))
    assert m.exact_dim == 4


def test_vacuum_projector_matrix():
    m = fock_matrix(vacuum_projector_nf(20), 20)
    target = np.zeros((20, 20))
    target[0, 0] = 1
    assert np.abs(m.data - target).max() < 1e-12


def test_word_matrix_equals_normal_form_matrix():
    word_m = fock_matrix(EXAMPLE, 20)
    nf_m = fock_matrix(normal_order(EXAMPLE), 20)
    t = min(word_m.exact_dim, nf_m.exact_dim)
    assert t >= 18
    np.testing.assert_allclose(word_m.data[:t, :t], nf_m.data[:t, :t], atol=1e-9, rtol=1e-13)


def test_exact_path_matches_float_ladder_products():
    for text in ["a ad a a ad a", "ad^2 a ad^3 a^2", "(a + ad)^5 - 3/2 a^2 ad", "a^3 ad^4"]:
        p = parse_expr(text)
        np.testing.assert_allclose(fock_matrix(p, 15).data.real, ladder_product(p, 15), rtol=1e-12, atol=1e-9)


def test_truncation_flag():
    assert fock_matrix(parse_expr("a ad"), 10).exact_dim == 9
    assert fock_matrix(parse_expr("ad^3 a^3"), 10).exact_dim == 10
    prod = fock_matrix(parse_expr("a"), 10) @ fock_matrix(parse_expr("ad^2"), 10)
    assert prod.exact_dim == 8


def test_products_of_fock_matrices():
    p, q = parse_expr("a^2 + ad"), parse_expr("a ad^2 - ad a")
    prod = fock_matrix(p, 20) @ fock_matrix(q, 20)
    direct = fock_matrix(normal_order(p * q), 20)
    t = prod.exact_dim
    np.testing.assert_allclose(prod.data[:t, :t], direct.data[:t, :t], atol=1e-9)


# --- matrix exponential ----------------------------------------------------------

def test_expm_against_scipy():
    rng = np.random.default_rng(5)
    for scale in (0.1, 1.0, 6.0):
        m = scale * (rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12)))
        ref = scipy.linalg.expm(m)
        np.testing.assert_allclose(expm_taylor(m), ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())


def test_expm_of_zero_is_identity():
    np.testing.assert_array_equal(expm_taylor(np.zeros((3, 3))), np.eye(3))


# --- coherent vectors -------------------------------------------------------------

def test_vacuum_vector():
    v = coherent_vector(0)
    assert v[0] == 1 and np.all(v[1:] == 0)


@pytest.mark.parametrize("z", [0.5, 1j, 1.2 - 1.1j, 2.0, -1.4 + 1.4j])
def test_annihilation_eigenvalue(z):
    a = fock_matrix(parse_expr("a"), 40)
    assert abs(fock_expectation(a, z, 40) - z) < 1e-8
    assert abs(np.linalg.norm(coherent_vector(z, 40)) - 1) < 1e-6


def test_tail_warning():
    with pytest.warns(RuntimeWarning):
        coherent_vector(3.0, 12)


def test_default_dimension():
    assert coherent.coherent_dimension(0.1) == 40
    assert coherent.coherent_dimension(5) == 85


def test_number_exponential_generating_function():
    n = fock_matrix(parse_expr("ad a"), 60)
    value = fock_expectation(n.scale(0.3).expm(), 1.0)
    assert abs(value - math.exp(math.e**0.3 - 1)) < 1e-8


# --- lambda series ------------------------------------------------------------------

def test_series_exp_second_coefficient():
    s = series_exp(parse_expr("ad a"), 4)
    assert s[2] == normal_order(parse_expr("(ad a)^2")).scale(Fraction(1, 2))


def test_series_exp_of_zero():
    assert series_exp(LambdaSeries.zero(5)) == LambdaSeries.one(5)


def test_series_exp_rejects_constant_term():
    with pytest.raises(ValueError):
        series_exp(LambdaSeries.one(3))
    with pytest.raises(ValueError):
        series_exp(parse_expr("a"))


def test_bch_series_against_matrix_powers():
    order, dim = 4, 40
    s = series_exp(parse_expr("a + ad"), order)
    x = fock_matrix(parse_expr("a + ad"), dim).data
    t = dim - order
    power = np.eye(dim)
    for n in range(order + 1):
        np.testing.assert_allclose(
            fock_matrix(s[n], dim).data[:t, :t], (power / math.factorial(n))[:t, :t], atol=1e-9
        )
        power = power @ x


def test_bch_series_against_matrix_exponential():
    lam, order, dim = 0.2, 4, 60
    approx = LambdaSeries.fock_sum(series_exp(parse_expr("a + ad"), order), lam, dim)
    x = lam * fock_matrix(parse_expr("a + ad"), dim).data
    exact = expm_taylor(x)
    # the truncation error is the dropped tail, bounded entrywise by |x|^n / n!
    tail = np.zeros((dim, dim))
    power = np.linalg.matrix_power(np.abs(x), order + 1)
    for n in range(order + 1, order + 30):
        tail += power / math.factorial(n)
        power = power @ np.abs(x)
    diff = np.abs(approx - exact)[:6, :6]
    assert np.all(diff <= tail[:6, :6] + 1e-12)
    assert diff.max() > 0


def test_number_exp_has_stirling_structure():
    s = series_exp(parse_expr("ad a"), 6)
    for n in range(7):
        assert s[n] == NormalForm({(k, k): Fraction(stirling_rec(n, k), math.factorial(n)) for k in range(n + 1)})


# --- identities -----------------------------------------------------------------------

@pytest.mark.parametrize("name, order", [("number-exp", 6), ("bch-linear", 6), ("excited-21", 5), ("kerr", 4)])
def test_named_identities(name, order):
    report = verify_identity(name, order)
    assert report.equal
    assert report.first_mismatch is None
    assert report.to_dict() == {"identity": name, "order": order, "equal": True}


def test_kerr_rhs_coefficients_are_poisson_moments():
    report = verify_identity("kerr", 2)
    # (n(n-1))^2 = n_(4) + 4 n_(3) + 2 n_(2), halved at lam^2, with n_(k) -> (a+)^k a^k
    assert report.rhs[1] == NormalForm({(2, 2): 1})
    assert report.rhs[2] == NormalForm({(2, 2): 1, (3, 3): 2, (4, 4): Fraction(1, 2)})


def test_identity_mismatch_is_reported(monkeypatch):
    expr, builder = coherent.IDENTITIES["number-exp"]

    def wrong(order):
        s = builder(order)
        return s + LambdaSeries.monomial(NormalForm({(3, 1): 1}), 2, order)

    monkeypatch.setitem(coherent.IDENTITIES, "number-exp", (expr, wrong))
    report = verify_identity("number-exp", 4)
    assert not report.equal
    assert report.mismatch_order == 2
    assert report.diff_terms == NormalForm({(3, 1): -1})
    assert report.to_dict()["diff_terms"] == [{"j": 3, "k": 1, "c": "-1/1"}]


def test_verify_errors():
    with pytest.raises(ValueError):
        verify_identity("nope", 3)
    with pytest.raises(ValueError):
        verify_identity("kerr", 9)


def test_vacuum_limit_of_number_exponential():
    m = fock_matrix(number_exp_nf(-40.0, 20), 20)
    target = np.zeros((20, 20))
    target[0, 0] = 1
    proj = fock_matrix(vacuum_projector_nf(20), 20)
    assert np.abs(m.data - target).max() < 1e-12
    assert np.abs(m.data - proj.data).max() < 1e-12


# --- expectation vs Fock oracle ------------------------------------------------------

words = st.lists(st.sampled_from([A, ADAG]), max_size=6).map(BosonWord.from_letters)
polys = st.dictionaries(words, st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=1, max_size=3)
amplitudes = st.builds(cmath_polar, st.floats(0, 2), st.floats(0, 2 * math.pi))


@given(polys.map(BosonPolynomial), amplitudes)
@settings(max_examples=40, deadline=None)
def test_expectation_matches_fock_oracle(p, z):
    direct = fock_expectation(fock_matrix(p, 60), z, 60)
    assert abs(expectation(normal_order(p), z) - direct) < 1e-7
