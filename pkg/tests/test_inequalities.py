from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from symbell.core import BellInequality, ConsistencyError, PreconditionError, StrategyCounts
from symbell.inequalities import (
    ClassBParams,
    ParityError,
    class_b_analytic_bound,
    class_b_build,
    class_b_report,
    class_b_square_bound_failures,
    classical_bound,
    classical_bound_bruteforce,
    classical_bound_exact,
    classify_facets_as_class_b,
    dicke_bound,
    dicke_bound_piecewise,
    dicke_build,
    dicke_saturating_counts,
    invert_class_b,
)
from symbell.polytope import enumerate_boundary_counts, facets, is_tight

ELEMENTARY = (-2, 0, 1, -1, 1)


def test_elementary_bound_n5():
    assert classical_bound_exact(*ELEMENTARY, 5).beta_c == 10


def test_zero_bound_has_every_minimizer():
    rep = classical_bound_exact(0, 0, 0, 0, 0, 4)
    assert rep.beta_c == 0
    assert set(rep.minimizers) == set(enumerate_boundary_counts(4))


def test_dicke_bound_n3():
    assert classical_bound_exact(*dicke_build(3).coefficients, 3).beta_c == 9


@pytest.mark.parametrize("n, expected", [(4, 8)])
def test_bruteforce_elementary(n, expected):
    assert classical_bound_bruteforce(*ELEMENTARY, n) == expected


def test_bruteforce_small_cases():
    assert classical_bound_bruteforce(0, 0, 0, 0, 0, 3) == 0
    assert classical_bound_bruteforce(*dicke_build(4).coefficients, 4) == 18


def test_bruteforce_refuses_large_n():
    with pytest.raises(PreconditionError, match="14"):
        classical_bound_bruteforce(*ELEMENTARY, 15)


def test_bound_requires_n2():
    with pytest.raises(PreconditionError):
        classical_bound_exact(*ELEMENTARY, 1)


def test_bound_report_json():
    data = classical_bound_exact(*ELEMENTARY, 3).to_dict()
    assert data["beta_c"] == 6
    assert [3, 0, 0, 0] in data["minimizers"]


small_coeff = st.integers(-5, 5)


@settings(max_examples=60, deadline=None)
@given(st.tuples(small_coeff, small_coeff, small_coeff, small_coeff, small_coeff), st.integers(2, 6))
def test_boundary_bound_equals_bruteforce(coeffs, n):
    assert classical_bound_exact(*coeffs, n).beta_c == classical_bound_bruteforce(*coeffs, n)


def test_rational_coefficients_bound():
    ineq = dicke_build(5)
    assert isinstance(ineq.delta, Fraction)
    assert classical_bound(ineq).beta_c == classical_bound_bruteforce(*ineq.coefficients, 5) == 40


# --- three-parameter class ---------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_class_member_reduces_to_elementary(n):
    ineq = class_b_build(ClassBParams(1, 1, -1, 0, -1), n, strict=True)
    assert ineq.as_tuple() == (-2, 0, 1, -1, 1, 2 * n)


@pytest.mark.parametrize("n", [4, 6])
def test_class_member_example_even(n):
    ineq = class_b_build(ClassBParams(1, 2, 1, 0, 1), n, strict=True)
    assert ineq.coefficients == (3, 0, 1, 2, 4)
    assert ineq.beta_c == Fraction(9 * n, 2)
    assert classical_bound_bruteforce(*ineq.coefficients, n) == ineq.beta_c


def test_parity_rejection_names_condition():
    with pytest.raises(ParityError, match="opposite parity to epsilon"):
        class_b_build(ClassBParams(1, 1, 1, 1, 1), 5)


def test_class_params_validation():
    with pytest.raises(PreconditionError):
        ClassBParams(0, 1, 1, 0, 1)
    with pytest.raises(PreconditionError):
        ClassBParams(1, 1, 2, 0, 1)


def test_closed_form_not_always_attained():
    rep = class_b_report(ClassBParams(1, 4, 1, 6, 1), 4)
    assert (rep.analytic_bound, rep.exact_bound) == (74, 70)
    assert not rep.attained
    with pytest.raises(ConsistencyError):
        class_b_build(ClassBParams(1, 4, 1, 6, 1), 4, strict=True)
    # the member still carries a valid (exact) bound
    assert class_b_build(ClassBParams(1, 4, 1, 6, 1), 4).beta_c == 70


params = st.builds(
    ClassBParams,
    st.integers(1, 4),
    st.integers(1, 4),
    st.sampled_from([1, -1]),
    st.integers(-6, 6),
    st.sampled_from([1, -1]),
)


@settings(max_examples=150, deadline=None)
@given(params, st.integers(2, 9))
def test_closed_form_is_always_a_valid_bound(p, n):
    assume(p.admissible(n))
    rep = class_b_report(p, n)
    assert rep.exact_bound <= rep.analytic_bound
    assert class_b_square_bound_failures(p, n) == []


@settings(max_examples=150, deadline=None)
@given(params, st.integers(2, 9))
def test_inversion_recovers_attained_members(p, n):
    assume(p.admissible(n))
    rep = class_b_report(p, n)
    assume(rep.attained)
    member = BellInequality(n, *p.coefficients(), rep.analytic_bound)
    found = invert_class_b(member)
    assert found, p
    for q in found:
        assert BellInequality(n, *q.coefficients(), class_b_analytic_bound(q, n)).canonical() == member.canonical()


def test_classifier_n5():
    match = classify_facets_as_class_b(facets(5))
    assert match.count == 16
    assert "both sigma" in match.convention


# --- Dicke family ------------------------------------------------------------


def test_dicke_reduces_to_chsh():
    ineq = dicke_build(2)
    assert ineq.as_tuple() == (0, 0, 1, 1, -1, 2)
    assert ineq.canonical().beta_c == 2


@pytest.mark.parametrize("n, bc", [(2, 2), (3, 9), (4, 18), (7, 105)])
def test_dicke_bounds(n, bc):
    assert dicke_build(n).beta_c == bc == dicke_bound(n) == dicke_bound_piecewise(n)


def test_dicke_odd_canonical_integer_form():
    canon = dicke_build(7).canonical()
    assert canon.as_tuple() == (42, 6, 42, 7, -2, 210)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 9, 12])
def test_dicke_tight_with_five_saturating_points(n):
    res = is_tight(dicke_build(n).canonical())
    assert res.tight
    assert set(res.saturating) == set(dicke_saturating_counts(n))
    assert len(res.saturating) == 5


def test_dicke_saturating_examples():
    assert StrategyCounts(0, 2, 0, 2) in dicke_saturating_counts(4)
    assert StrategyCounts(1, 0, 4, 0) in dicke_saturating_counts(5)


def test_dicke_requires_n2():
    with pytest.raises(PreconditionError):
        dicke_build(1)
