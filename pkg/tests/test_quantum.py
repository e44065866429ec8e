import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symbell.core import BellInequality, PreconditionError
from symbell.inequalities import dicke_build
from symbell.polytope import facets
from symbell.quantum import (
    ConvergenceError,
    DickeState,
    LMGParams,
    MeasurementSettings,
    SymmetricOperator,
    bell_operator_full,
    bell_operator_sym,
    collective_moments,
    collective_spin,
    collective_to_pairwise,
    dicke_reduced_two_qubit,
    dicke_state_full,
    dicke_value_closed_form,
    dicke_violation_analytic,
    lmg_ground_state,
    lmg_ground_state_full,
    min_eigenvalue,
    optimize_theta,
    reduced_bell_operator,
    reduced_two_qubit_from_full,
)


def elementary(n):
    return BellInequality(n, -2, 0, 1, -1, 1, 2 * n)


def op_from_dense(m):
    n = len(m) - 1
    bands = np.zeros((3, n + 1))
    for off in range(3):
        bands[off, : n + 1 - off] = np.diag(m, -off)
    return SymmetricOperator(n, bands)


def test_settings_range():
    MeasurementSettings(0.0)
    MeasurementSettings(math.pi)
    for bad in (-0.1, 3.2, float("nan")):
        with pytest.raises(PreconditionError):
            MeasurementSettings(bad)
    s = MeasurementSettings(0.3)
    assert np.isclose(np.linalg.norm(s.m1), 1.0)


def test_min_eigenvalue_trivial():
    assert min_eigenvalue(op_from_dense(np.diag([1.0, -1.0]))) == pytest.approx(-1.0)
    assert min_eigenvalue(op_from_dense(np.eye(5))) == pytest.approx(1.0)


def test_min_eigenvalue_reports_failure():
    bands = np.zeros((3, 3))
    bands[0, 0] = np.nan
    with pytest.raises(ConvergenceError, match="iteration budget"):
        min_eigenvalue(SymmetricOperator(2, bands))


def test_operator_is_banded_and_symmetric():
    op = bell_operator_sym(elementary(9), MeasurementSettings(1.2))
    d = op.dense()
    assert np.array_equal(d, d.T)
    k, l = np.indices(d.shape)
    assert np.all(d[np.abs(k - l) > 2] == 0)


def test_collective_spin_traces():
    sx, sz = collective_spin(4)
    assert np.isclose(np.trace(sx @ sx), np.trace(sz @ sz))
    assert np.allclose(np.diag(sz), [2, 1, 0, -1, -2])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("theta", [0.0, 0.9, math.pi / 2, 2.5])
def test_symmetric_block_matches_full_space(n, theta):
    s = MeasurementSettings(theta)
    for ineq in (elementary(n), dicke_build(n)):
        full = bell_operator_full(ineq, s)
        sym = bell_operator_sym(ineq, s).dense()
        basis = np.array([dicke_state_full(n, k) for k in range(n + 1)]).T
        assert np.allclose(basis.T @ full @ basis, sym, atol=1e-9)


def test_full_operator_n2_spectrum_is_triplet_plus_singlet():
    s = MeasurementSettings(math.pi / 2)
    full = np.linalg.eigvalsh(bell_operator_full(elementary(2), s))
    sym = np.linalg.eigvalsh(bell_operator_sym(elementary(2), s).dense())
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    singlet_value = singlet @ bell_operator_full(elementary(2), s) @ singlet
    assert np.allclose(np.sort(np.append(sym, singlet_value)), full)


def test_full_operator_refusals():
    with pytest.raises(PreconditionError):
        bell_operator_full(BellInequality(1, 1, 0, 0, 0, 0, 1), MeasurementSettings(0.1))
    with pytest.raises(PreconditionError):
        bell_operator_full(elementary(11), MeasurementSettings(0.1))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 73))
def test_commuting_settings_are_classical(i):
    f = facets(4).facets[i]
    assert min_eigenvalue(bell_operator_sym(f, MeasurementSettings(0.0))) >= -1e-9


def test_elementary_violated_at_n10_against_dense_oracle():
    rep = optimize_theta(elementary(10))
    assert rep.lambda_min < 0 and rep.violated
    dense = np.linalg.eigvalsh(bell_operator_sym(elementary(10), MeasurementSettings(rep.theta_star)).dense())[0]
    assert abs(dense - rep.lambda_min) < 1e-8
    assert rep.effective_violation == pytest.approx(rep.lambda_min / 20)


def test_no_violation_is_reported_not_raised():
    rep = optimize_theta(BellInequality(3, 0, 0, 0, 0, 0, 1), grid=16)
    assert not rep.violated
    assert rep.status == "no violation at these settings"


@pytest.mark.parametrize("n", [2, 6, 7])
def test_dicke_objective(n):
    kk = (n + 1) // 2
    rep = optimize_theta(dicke_build(n), state=kk)
    assert rep.theta_star == pytest.approx(math.acos(kk / (kk + 1)), abs=1e-6)
    assert rep.lambda_min == pytest.approx(-(n // 2) / (kk + 1), abs=1e-9)
    assert rep.objective == f"dicke:{kk}"


def test_ground_objective_is_below_dicke_objective():
    ground = optimize_theta(dicke_build(2))
    assert ground.lambda_min == pytest.approx(2 - 2 * math.sqrt(2), abs=1e-9)


def test_threaded_scan_matches_serial():
    a = optimize_theta(elementary(12), grid=64)
    b = optimize_theta(elementary(12), grid=64, workers=3)
    assert a == b


@pytest.mark.parametrize("n, theta, value", [(2, math.acos(0.5), -0.5), (6, math.acos(0.75), -0.75)])
def test_dicke_violation_analytic(n, theta, value):
    d = dicke_violation_analytic(n)
    assert d.theta_min == pytest.approx(theta)
    assert d.value == pytest.approx(value)
    assert d.effective == pytest.approx(value / d.beta_c)


def test_dicke_effective_scaling_large_n():
    d = dicke_violation_analytic(1000)
    # value tends to -1 and the bound to n**3 / 4
    assert d.effective * 1000**3 == pytest.approx(-4.0, rel=1e-2)


@pytest.mark.parametrize("n", [2, 3, 8, 15])
def test_closed_form_matches_operator(n):
    kk = (n + 1) // 2
    for t in np.linspace(0, math.pi, 13):
        op = bell_operator_sym(dicke_build(n), MeasurementSettings(float(t)))
        assert abs(op.diagonal[kk] - dicke_value_closed_form(n, float(t))) < 1e-9


def test_reduced_state_examples():
    assert np.allclose(dicke_reduced_two_qubit(4) * 12, [[2, 0, 0, 0], [0, 4, 4, 0], [0, 4, 4, 0], [0, 0, 0, 2]])
    rho2 = dicke_reduced_two_qubit(2)
    assert np.allclose(rho2, np.outer([0, 1, 1, 0], [0, 1, 1, 0]) / 2)
    rho7 = dicke_reduced_two_qubit(7)
    assert np.allclose(rho7 * 42, [[6, 0, 0, 0], [0, 12, 12, 0], [0, 12, 12, 0], [0, 0, 0, 12]])


@pytest.mark.parametrize("n", [2, 3, 4, 7, 9])
def test_reduced_state_matches_partial_trace(n):
    for k in range(n + 1):
        rho = dicke_reduced_two_qubit(n, k)
        assert np.allclose(rho, reduced_two_qubit_from_full(dicke_state_full(n, k), n))
        assert np.trace(rho) == pytest.approx(1.0)
        assert np.linalg.eigvalsh(rho).min() >= -1e-12


@pytest.mark.parametrize("n", [2, 5, 6, 10])
def test_reduced_operator_reproduces_expectation(n):
    ineq = dicke_build(n)
    kk = (n + 1) // 2
    for t in np.linspace(0, math.pi, 7):
        s = MeasurementSettings(float(t))
        value = np.trace(dicke_reduced_two_qubit(n) @ reduced_bell_operator(ineq, s))
        assert abs(value - bell_operator_sym(ineq, s).diagonal[kk]) < 1e-10
    s0 = MeasurementSettings(0.0)
    assert np.trace(dicke_reduced_two_qubit(n) @ reduced_bell_operator(ineq, s0)) >= -1e-12


def test_collective_to_pairwise_examples():
    assert collective_to_pairwise(0.0, 0.0, 4).czz == pytest.approx(-1 / 3)
    assert collective_to_pairwise(0.0, 0.0, 2).czz == pytest.approx(-1.0)
    assert collective_to_pairwise(25 / 4, 0.0, 5).czz == pytest.approx(1.0)
    flagged = collective_to_pairwise(100.0, 0.0, 4)
    assert not flagged.attainable and flagged.czz > 1


@pytest.mark.parametrize("n", [2, 3, 6])
def test_collective_round_trip_against_reduced_state(n):
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    for k in range(n + 1):
        sz2, szx = collective_moments(DickeState(n, k).amplitudes)
        pc = collective_to_pairwise(sz2, szx, n)
        assert pc.czz == pytest.approx(np.trace(dicke_reduced_two_qubit(n, k) @ zz))


def test_collective_zx_factor_on_product_state():
    # all spins along (sin t, 0, cos t): <sz_i sx_j> = cos t sin t for i != j
    n, t = 5, 0.7
    one = np.array([math.cos(t / 2), math.sin(t / 2)])
    psi = one
    for _ in range(n - 1):
        psi = np.kron(psi, one)
    sym = np.array([dicke_state_full(n, k) @ psi for k in range(n + 1)])
    pc = collective_to_pairwise(*collective_moments(sym), n)
    assert pc.czx == pytest.approx(math.cos(t) * math.sin(t))
    assert pc.czz == pytest.approx(math.cos(t) ** 2)


def test_lmg_examples():
    g = lmg_ground_state(LMGParams(1.0, 0.1 / 4, 4))
    assert g.fidelity(2) > 1 - 1e-10
    g = lmg_ground_state(LMGParams(1.0, 0.0, 5))
    assert g.degeneracy == 2
    assert g.fidelity(2) == pytest.approx(1.0) and g.fidelity(3) == pytest.approx(1.0)
    g = lmg_ground_state(LMGParams(1.0, 0.5 / 5, 5))
    assert g.degeneracy == 1 and g.fidelity(3) > 1 - 1e-10


def test_lmg_strong_field_polarizes_along_the_field():
    g = lmg_ground_state(LMGParams(1.0, 10.0, 6))
    assert g.dominant_k == 6 and not g.params.weak_field


def test_lmg_even_boundary_field_is_degenerate():
    g = lmg_ground_state(LMGParams(1.0, 1.0 / 6, 6))
    assert g.degeneracy == 2


def test_lmg_params_validation():
    for bad in ((0.0, 0.1, 3), (1.0, -0.1, 3), (1.0, 0.1, 0)):
        with pytest.raises(PreconditionError):
            LMGParams(*bad)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_lmg_energy_non_increasing_in_field(n):
    energies = [lmg_ground_state(LMGParams(1.0, h, n)).energy for h in np.linspace(0, 2, 21)]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_lmg_full_space_agrees(n):
    for h in (0.0, 0.3 / n, 2.0):
        p = LMGParams(1.0, h, n)
        sym = lmg_ground_state(p)
        energy, deg, _ = lmg_ground_state_full(p)
        assert energy == pytest.approx(sym.energy, abs=1e-9)
        assert deg == sym.degeneracy
