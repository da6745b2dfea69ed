"""Fixed-step RK4 integration of the coupled phase equations.

The velocity field is evaluated through the complex local fields
P_j = r_j e^{i phi_j} = sum_k J_jk e^{i theta_k}, so one evaluation costs
O(NK) on the low-rank backend and O(N^2) on dense matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import OscillatorSystem

TWO_PI = 2.0 * np.pi


def local_fields(system: OscillatorSystem) -> np.ndarray:
    """Complex local fields P_j at the system's current phases."""
    c = np.cos(system.phases)
    s = np.sin(system.phases)
    pr, pi = system.coupling.local_field_parts(c, s)
    return pr + 1j * pi


def velocity(system: OscillatorSystem) -> np.ndarray:
    """theta_dot_j = omega_j + r_j sin(phi_j - theta_j) via local fields."""
    c = np.cos(system.phases)
    s = np.sin(system.phases)
    pr, pi = system.coupling.local_field_parts(c, s)
    return system.frequencies + pi * c - pr * s


def velocity_pairwise(system: OscillatorSystem) -> np.ndarray:
    """O(N^2) reference: omega_j + sum_k J_jk sin(theta_k - theta_j)."""
    theta = system.phases
    m = system.coupling.matrix()
    diff = np.sin(theta[None, :] - theta[:, None])
    return system.frequencies + np.sum(m * diff, axis=1)


def _velocity_arrays(omega, coupling, theta):
    c = np.cos(theta)
    s = np.sin(theta)
    pr, pi = coupling.local_field_parts(c, s)
    return omega + pi * c - pr * s


def rk4_step(system: OscillatorSystem, dt: float) -> OscillatorSystem:
    """One classical RK4 step; phases wrapped back into [0, 2*pi)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    theta = _rk4_advance(system.phases, system.frequencies, system.coupling, dt)
    return system.with_phases(theta)


def _rk4_advance(theta, omega, coupling, dt):
    k1 = _velocity_arrays(omega, coupling, theta)
    k2 = _velocity_arrays(omega, coupling, theta + 0.5 * dt * k1)
    k3 = _velocity_arrays(omega, coupling, theta + 0.5 * dt * k2)
    k4 = _velocity_arrays(omega, coupling, theta + dt * k3)
    return np.mod(theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), TWO_PI)


@dataclass
class TrajectoryRecord:
    """Recorded observables on a uniform time grid."""

    times: np.ndarray
    order_param: np.ndarray  # complex, mean of e^{i theta}
    field_mags: np.ndarray | None = None  # (n_snapshots, N)
    field_times: np.ndarray | None = None
    phase_snapshots: np.ndarray | None = None  # (n_snapshots, N)
    phase_times: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,z_re,z_im\n")
            for t, z in zip(self.times, self.order_param):
                fh.write(f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r}\n")


def integrate(
    system: OscillatorSystem,
    *,
    dt: float = 0.01,
    transient: int = 1000,
    recorded: int = 2000,
    stride: int = 1,
    record_initial: bool = False,
    record_fields: bool = False,
    field_stride: int = 1,
    record_phases: bool = False,
    phase_stride: int | None = None,
    moments=None,
) -> TrajectoryRecord:
    """Run transient steps (discarded) then recorded steps, sampling observables.

    Observables are sampled after each recorded step (and, with
    record_initial, at the initial state).  `moments`, if given, is a
    MomentAccumulator fed the local-field magnitudes at every recorded step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if recorded < 1:
        raise ValueError("recorded step count must be >= 1")
    if transient < 0 or stride < 1 or field_stride < 1:
        raise ValueError("invalid step counts")
    if record_initial and transient != 0:
        raise ValueError("record_initial requires transient == 0")
    phase_stride = field_stride if phase_stride is None else phase_stride

    theta = system.phases.copy()
    omega = system.frequencies
    coupling = system.coupling
    inv_n = 1.0 / len(theta)

    times, zs, fmags, ftimes, psnaps, ptimes = [], [], [], [], [], []

    def observe(step_index):
        t = step_index * dt
        c = np.cos(theta)
        s = np.sin(theta)
        pr, pi = coupling.local_field_parts(c, s)
        if step_index > transient or record_initial:
            rec_index = step_index - transient
            if rec_index % stride == 0:
                times.append(t)
                zs.append(complex(np.mean(c), np.mean(s)))
            if rec_index > 0 or record_initial:
                r = np.hypot(pr, pi)
                if moments is not None and rec_index > 0:
                    moments.add(r)
                if record_fields and rec_index % field_stride == 0:
                    fmags.append(r)
                    ftimes.append(t)
                if record_phases and rec_index % phase_stride == 0:
                    psnaps.append(theta.copy())
                    ptimes.append(t)
        # reuse this evaluation as the k1 stage of the next step
        return omega + pi * c - pr * s

    k1 = None
    if record_initial and transient == 0:
        k1 = observe(0)
    total = transient + recorded
    for step in range(1, total + 1):
        if k1 is None:
            k1 = _velocity_arrays(omega, coupling, theta)
        k2 = _velocity_arrays(omega, coupling, theta + 0.5 * dt * k1)
        k3 = _velocity_arrays(omega, coupling, theta + 0.5 * dt * k2)
        k4 = _velocity_arrays(omega, coupling, theta + dt * k3)
        theta = np.mod(theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), TWO_PI)
        k1 = observe(step) if step >= transient else None

    return TrajectoryRecord(
        times=np.asarray(times),
        order_param=np.asarray(zs),
        field_mags=np.asarray(fmags) if record_fields else None,
        field_times=np.asarray(ftimes) if record_fields else None,
        phase_snapshots=np.asarray(psnaps) if record_phases else None,
        phase_times=np.asarray(ptimes) if record_phases else None,
    )
