import numpy as np
import pytest
from scipy.integrate import solve_ivp

from volcano.oa import (critical_coupling_continuum, jacobian_at_origin,
                        leading_eigenvalue_numeric, matrix_A, oa_integrate,
                        oa_local_field, oa_local_field_direct,
                        oa_order_parameter, oa_rhs, spectrum_analytic,
                        spectrum_numeric, u_matrix, zeta_vector)


def test_u_matrix_enumerates_all_sign_patterns():
    for k in (2, 4):
        u = u_matrix(k)
        assert u.shape == (2**k, k)
        assert set(map(tuple, u)) == {
            t for t in __import__("itertools").product((1, -1), repeat=k)}
    assert tuple(u_matrix(2)[0]) == (1, 1)  # index 0 is the all-plus pattern


def test_u_matrix_rejects_bad_k():
    for k in (0, 3, 14):
        with pytest.raises(ValueError):
            u_matrix(k)


def test_local_field_fast_matches_direct():
    rng = np.random.default_rng(0)
    for k in (2, 4, 6):
        a = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
        fast = oa_local_field(a, 1.7, k)
        direct = oa_local_field_direct(a, 1.7, k)
        assert np.max(np.abs(fast - direct)) < 1e-12


def test_rhs_hand_value_k2():
    # uniform amplitudes: t_m = sum_u u_m a* = 0 by sign cancellation,
    # so P = 0 and the rhs reduces to -a
    a = np.full(4, 0.3 + 0.1j)
    assert np.max(np.abs(oa_rhs(a, 2.0, 2) + a)) < 1e-15


def test_matrix_A_structure():
    A = matrix_A(2)
    u = u_matrix(2)
    expected = np.array([[sum((-1) ** (m + 1) * u[i, m] * u[j, m]
                              for m in range(2))
                          for j in range(4)] for i in range(4)])
    assert np.array_equal(A, expected)
    assert np.array_equal(A, A.T)


@pytest.mark.parametrize("k", [2, 4, 6, 8])
def test_spectrum_analytic_vs_numeric(k):
    rep = spectrum_analytic(k)
    assert rep.plus_value == 2**k and rep.minus_value == -(2**k)
    assert rep.plus_multiplicity == rep.minus_multiplicity == k // 2
    assert rep.zero_multiplicity == 2**k - k
    numeric = spectrum_numeric(k)
    assert np.max(np.abs(np.sort(numeric) - rep.eigenvalues())) < 1e-8
    assert rep.eigenvector_residual < 1e-10


def test_zeta_vectors_are_eigenvectors():
    for k in (2, 4):
        A = matrix_A(k)
        for n in range(1, k + 1):
            z = zeta_vector(n, k)
            lam = (-1) ** n * 2**k
            assert np.max(np.abs(A @ z - lam * z)) < 1e-12


def test_jacobian_leading_eigenvalue():
    for k in (2, 4, 6):
        for j in (0.5, 2.0, 3.0):
            _, analytic, numeric = jacobian_at_origin(j, k)
            assert analytic == pytest.approx(-1.0 + j / 2.0, abs=1e-14)
            assert numeric == pytest.approx(analytic, abs=1e-10)
            assert leading_eigenvalue_numeric(j, k) == pytest.approx(
                analytic, abs=1e-10)


def test_critical_coupling_value():
    assert critical_coupling_continuum() == 2.0


def test_uncoupled_amplitudes_decay_linearly():
    # J = 0: da/dt = -a exactly
    k = 2
    a0 = np.full(2**k, 0.05 + 0.02j)
    traj = oa_integrate(a0, j=0.0, k=k, dt=0.001, steps=2000)
    expected = abs(oa_order_parameter(a0)) * np.exp(-traj.times)
    assert np.max(np.abs(np.abs(traj.order_param) - expected)) < 1e-9


def test_oa_integrate_matches_adaptive_reference():
    k, j = 2, 1.5
    rng = np.random.default_rng(1)
    a0 = 0.1 * (rng.normal(size=4) + 1j * rng.normal(size=4))

    def rhs(t, y):
        a = y[:4] + 1j * y[4:]
        da = oa_rhs(a, j, k)
        return np.concatenate([da.real, da.imag])

    ref = solve_ivp(rhs, (0, 5.0), np.concatenate([a0.real, a0.imag]),
                    rtol=1e-12, atol=1e-12)
    a_ref = ref.y[:4, -1] + 1j * ref.y[4:, -1]
    traj = oa_integrate(a0, j=j, k=k, dt=0.005, steps=1000)
    assert np.max(np.abs(traj.states[-1] - a_ref)) < 1e-8
    assert traj.order_param[-1] == pytest.approx(
        oa_order_parameter(a_ref), abs=1e-8)


def test_subcritical_decay_supercritical_saturation():
    k = 4
    rng = np.random.default_rng(2)
    a0 = 0.01 * (rng.normal(size=2**k) + 1j * rng.normal(size=2**k))
    sub = oa_integrate(a0, j=1.0, k=k, dt=0.01, steps=800)
    assert np.max(np.abs(sub.states[-1])) < np.max(np.abs(a0)) * 0.05
    # above threshold the amplitudes grow and saturate at sqrt(1 - 2/J)
    sup = oa_integrate(a0, j=3.0, k=k, dt=0.01, steps=2000)
    assert np.max(np.abs(sup.states[-1])) == pytest.approx(
        np.sqrt(1.0 - 2.0 / 3.0), abs=1e-3)


def test_oa_integrate_guards():
    with pytest.raises(ValueError):
        oa_integrate(np.full(4, 1.2 + 0.0j), j=1.0, k=2, dt=0.01, steps=10)
    # dt far outside the stability region makes the step diverge
    with pytest.raises(RuntimeError):
        oa_integrate(np.full(4, 0.5 + 0.0j), j=0.0, k=2, dt=3.0, steps=50)


def test_oa_trajectory_csv(tmp_path):
    a0 = np.full(4, 0.1 + 0.0j)
    traj = oa_integrate(a0, j=1.0, k=2, dt=0.01, steps=10)
    path = tmp_path / "oa.csv"
    traj.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[0] == len(traj.times)
