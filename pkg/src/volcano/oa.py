"""Reduced continuum dynamics: 2^K complex amplitudes a(u, t), the Jacobian
at incoherence, and its closed-form spectrum.

Canonical indexing: bit m-1 of the integer index is 0 for u_m = +1 and 1
for u_m = -1, m = 1..K.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

K_CAP = 12  # dense 4^K storage beyond this is refused


def _check_k(k: int, cap: int = K_CAP) -> None:
    if k < 2 or k % 2 != 0:
        raise ValueError("K must be even and >= 2")
    if k > cap:
        raise ValueError(f"K={k} exceeds cap {cap}")


def u_matrix(k: int) -> np.ndarray:
    """(2^K, K) array of u_m values (+-1) in canonical index order."""
    _check_k(k)
    idx = np.arange(2**k)
    bits = (idx[:, None] >> np.arange(k)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _alt_signs(k: int) -> np.ndarray:
    s = np.ones(k)
    s[::2] = -1.0
    return s


def oa_local_field(a: np.ndarray, j: float, k: int) -> np.ndarray:
    """P(u) = (J/2^K) sum_m (-1)^m u_m t_m with t_m = sum_{u'} u'_m a*(u')."""
    u = u_matrix(k)
    t = u.T @ np.conj(a)
    return (j / 2**k) * (u @ (_alt_signs(k) * t))


def oa_local_field_direct(a: np.ndarray, j: float, k: int) -> np.ndarray:
    """O(4^K) reference evaluation of the double sum."""
    return (j / 2**k) * (matrix_A(k) @ np.conj(a))


def oa_rhs(a: np.ndarray, j: float, k: int) -> np.ndarray:
    """Right side of the reduced amplitude equations."""
    p = oa_local_field(a, j, k)
    return -a + 0.5 * (np.conj(p) - a * a * p)


def oa_order_parameter(a: np.ndarray) -> complex:
    """Population order parameter implied by the ansatz: mean of a*(u)."""
    return complex(np.mean(np.conj(a)))


@dataclass
class OATrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, 2^K) complex
    order_param: np.ndarray  # complex

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,z_re,z_im\n")
            for t, z in zip(self.times, self.order_param):
                fh.write(f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r}\n")


def oa_integrate(
    a0: np.ndarray,
    j: float,
    k: int,
    *,
    dt: float = 0.01,
    steps: int = 1000,
    stride: int = 1,
) -> OATrajectory:
    """RK4 on the 2^K amplitude ODEs, aborting if any |a| leaves the disk."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    a = np.asarray(a0, dtype=np.complex128).copy()
    if a.shape != (2**k,):
        raise ValueError("state length must be 2^K")
    if np.any(np.abs(a) > 1.0 + 1e-6):
        raise ValueError("initial amplitudes outside the unit disk")
    times = [0.0]
    states = [a.copy()]
    zs = [oa_order_parameter(a)]
    for step in range(1, steps + 1):
        k1 = oa_rhs(a, j, k)
        k2 = oa_rhs(a + 0.5 * dt * k1, j, k)
        k3 = oa_rhs(a + 0.5 * dt * k2, j, k)
        k4 = oa_rhs(a + dt * k3, j, k)
        a = a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(np.abs(a) > 1.0 + 1e-6):
            raise RuntimeError(f"amplitude left the unit disk at step {step}")
        if step % stride == 0:
            times.append(step * dt)
            states.append(a.copy())
            zs.append(oa_order_parameter(a))
    return OATrajectory(np.asarray(times), np.asarray(states), np.asarray(zs))


def matrix_A(k: int, cap: int = K_CAP) -> np.ndarray:
    """A_{u,v} = sum_m (-1)^m u_m v_m in canonical order."""
    _check_k(k, cap)
    u = u_matrix(k)
    return (u * _alt_signs(k)) @ u.T


@dataclass(frozen=True)
class SpectrumReport:
    """The three eigenvalue groups of A and their numeric residuals."""

    k: int
    plus_value: float
    minus_value: float
    plus_multiplicity: int
    minus_multiplicity: int
    zero_multiplicity: int
    eigenvector_residual: float

    def eigenvalues(self) -> np.ndarray:
        """All 2^K eigenvalues, ascending."""
        return np.concatenate([
            np.full(self.minus_multiplicity, self.minus_value),
            np.zeros(self.zero_multiplicity),
            np.full(self.plus_multiplicity, self.plus_value),
        ])


def zeta_vector(n: int, k: int) -> np.ndarray:
    """Eigenvector zeta^(n) with v-th entry v_n, for 1 <= n <= K."""
    if not 1 <= n <= k:
        raise ValueError("n must be in 1..K")
    return u_matrix(k)[:, n - 1].copy()


def spectrum_analytic(k: int) -> SpectrumReport:
    """Closed-form spectrum of A, with the eigenvector identity verified."""
    _check_k(k)
    a = matrix_A(k)
    residual = 0.0
    for n in range(1, k + 1):
        zeta = zeta_vector(n, k)
        residual = max(residual, float(np.max(np.abs(
            a @ zeta - (-1) ** n * 2**k * zeta))))
    return SpectrumReport(
        k=k,
        plus_value=float(2**k),
        minus_value=float(-(2**k)),
        plus_multiplicity=k // 2,
        minus_multiplicity=k // 2,
        zero_multiplicity=2**k - k,
        eigenvector_residual=residual,
    )


def spectrum_numeric(k: int) -> np.ndarray:
    """Eigenvalues of A from a dense symmetric eigensolver, ascending."""
    return np.linalg.eigvalsh(matrix_A(k))


def jacobian_at_origin(j: float, k: int):
    """(matrix, analytic leading eigenvalue, numeric leading eigenvalue).

    The linearization of the amplitude equations at a = 0 restricted to the
    real subspace is -I + J/2^{K+1} A; its top eigenvalue is -1 + J/2.
    """
    a = matrix_A(k)
    jac = -np.eye(2**k) + (j / 2 ** (k + 1)) * a
    numeric = float(np.linalg.eigvalsh(jac)[-1])
    return jac, -1.0 + j / 2.0, numeric


def leading_eigenvalue_numeric(j: float, k: int) -> float:
    return jacobian_at_origin(j, k)[2]


def critical_coupling_continuum() -> float:
    """The continuum volcano threshold; holds for every even K."""
    return 2.0
