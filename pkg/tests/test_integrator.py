import numpy as np
import pytest
from scipy.integrate import solve_ivp

from volcano.integrator import (integrate, local_fields, rk4_step, velocity,
                                velocity_pairwise)
from volcano.model import (LowRankCoupling, OscillatorSystem, SystemSpec,
                           sample_interaction_vectors)


def _system(n, k, j, seed, **kw):
    return SystemSpec(n=n, k=k, j=j, seed=seed, **kw).build()


def test_local_fields_match_dense_matrix():
    rng = np.random.default_rng(0)
    for trial in range(40):
        n = int(rng.integers(5, 120))
        k = int(rng.choice([2, 4, 6]))
        j = float(rng.uniform(0.1, 5.0))
        s = _system(n, k, j, seed=trial)
        dense = s.coupling.matrix() @ np.exp(1j * s.phases)
        assert np.max(np.abs(local_fields(s) - dense)) < 1e-12


def test_velocity_matches_pairwise_sum():
    for coupling in ("lowrank", "gaussian"):
        s = _system(80, 4, 2.0, seed=3, coupling=coupling)
        assert np.max(np.abs(velocity(s) - velocity_pairwise(s))) < 1e-12


def test_uncoupled_velocity_is_frequency():
    s = _system(50, 2, 0.0, seed=1)
    assert np.array_equal(velocity(s), s.frequencies)


def test_two_oscillator_phase_difference_oracle():
    # For n=2 the phase difference obeys psi' = dw - 2c sin(psi) with
    # c the (symmetric) coupling entry; compare against a high-accuracy
    # adaptive reference integration.
    vectors = np.array([[1, 1], [1, -1]])
    c_entry = -2.0  # (J/N) * sum_m (-1)^m u^0_m u^1_m = (2/2)(-1 - 1)
    coupling = LowRankCoupling(2.0, vectors)
    assert coupling.entry(0, 1) == pytest.approx(c_entry, abs=1e-15)

    omega = np.array([0.3, 1.3])
    theta0 = np.array([0.1, 0.7])
    s = OscillatorSystem(phases=theta0, frequencies=omega, coupling=coupling)
    dt, steps = 0.001, 10_000
    for _ in range(steps):
        s = rk4_step(s, dt)
    psi = (s.phases[1] - s.phases[0]) % (2 * np.pi)

    ref = solve_ivp(lambda t, y: [1.0 - 2 * c_entry * np.sin(y[0])],
                    (0.0, dt * steps), [0.6], rtol=1e-12, atol=1e-12)
    psi_ref = ref.y[0, -1] % (2 * np.pi)
    assert psi == pytest.approx(psi_ref, abs=1e-6)


def test_rk4_fourth_order_convergence():
    s0 = _system(20, 2, 1.5, seed=4)
    t_final = 0.32

    def advance(dt):
        s = s0
        for _ in range(round(t_final / dt)):
            s = rk4_step(s, dt)
        return s.phases

    fine = advance(0.0025)
    err_h = np.max(np.abs(advance(0.04) - fine))
    err_h2 = np.max(np.abs(advance(0.02) - fine))
    # fourth-order: halving the step shrinks error ~16x (14x allows slack)
    assert err_h / err_h2 > 14.0


def test_rotational_equivariance():
    s = _system(60, 4, 2.0, seed=5)
    shift = 1.234
    a = rk4_step(s, 0.01).phases + shift
    b = rk4_step(s.with_phases(s.phases + shift), 0.01).phases
    diff = np.angle(np.exp(1j * (a - b)))
    assert np.max(np.abs(diff)) < 1e-12


def test_frequency_shift_covariance():
    s = _system(60, 4, 2.0, seed=6)
    c = 0.7
    t = 0.01
    a = rk4_step(s, t).phases + c * t
    shifted = OscillatorSystem(phases=s.phases, frequencies=s.frequencies + c,
                               coupling=s.coupling)
    b = rk4_step(shifted, t).phases
    assert np.max(np.abs(a - b)) < 1e-12


def test_integrate_shapes_and_wrapping():
    s = _system(40, 2, 1.0, seed=7)
    rec = integrate(s, dt=0.01, transient=50, recorded=100)
    assert rec.times.shape == (100,)
    assert rec.order_param.shape == (100,)
    assert rec.times[0] == pytest.approx(0.51)
    assert rec.times[-1] == pytest.approx(1.5)


def test_integrate_record_initial_includes_t0():
    s = _system(40, 2, 1.0, seed=7, init="zero")
    rec = integrate(s, dt=0.01, transient=0, recorded=10,
                    record_initial=True)
    assert rec.times.shape == (11,)
    assert rec.times[0] == 0.0
    assert rec.order_param[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        integrate(s, dt=0.01, transient=5, recorded=10,
                  record_initial=True)


def test_integrate_validation():
    s = _system(10, 2, 1.0, seed=0)
    with pytest.raises(ValueError):
        integrate(s, dt=0.0, transient=0, recorded=10)
    with pytest.raises(ValueError):
        integrate(s, dt=0.01, transient=0, recorded=0)


def test_integrate_field_and_phase_records():
    s = _system(30, 2, 1.0, seed=9)
    rec = integrate(s, dt=0.01, transient=10, recorded=40,
                    record_fields=True, field_stride=10,
                    record_phases=True, phase_stride=20)
    assert rec.field_mags.shape == (4, 30)
    assert rec.phase_snapshots.shape == (2, 30)
    assert np.all(rec.phase_snapshots >= 0.0)
    assert np.all(rec.phase_snapshots < 2 * np.pi)


def test_trajectory_csv_roundtrip(tmp_path):
    s = _system(25, 2, 1.0, seed=11)
    rec = integrate(s, dt=0.01, transient=0, recorded=20)
    path = tmp_path / "traj.csv"
    rec.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    z = data[:, 1] + 1j * data[:, 2]
    assert np.array_equal(data[:, 0], rec.times)
    assert np.array_equal(z, rec.order_param)


def test_observation_reuse_matches_plain_stepping():
    s = _system(30, 4, 1.5, seed=13)
    rec = integrate(s, dt=0.01, transient=5, recorded=15)
    plain = s
    zs = []
    for i in range(20):
        plain = rk4_step(plain, 0.01)
        if i >= 5:
            zs.append(np.mean(np.exp(1j * plain.phases)))
    assert np.max(np.abs(rec.order_param - np.array(zs))) < 1e-12
