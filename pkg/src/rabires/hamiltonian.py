"""Full, bare and semidressed Hamiltonians on the truncated product basis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rabires.basis import DriveParams, InternalState, ProductBasis, TrapModel, motional_energies, motional_energy
from rabires.coupling import cos_sin_elements, coupling_matrix
from rabires.errors import DomainError


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray = field(repr=False)
    trap: TrapModel
    drive: DriveParams
    n_trunc: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def basis(self) -> ProductBasis:
        return ProductBasis(self.trap, self.n_trunc)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def build_full_hamiltonian(trap: TrapModel, drive: DriveParams, n_trunc: int) -> HamiltonianMatrix:
    """H = H_trap - (delta/2) sigma_z + (omega_r/2)[exp(ikx)|e><g| + h.c.].

    Couplings to levels beyond the truncation are dropped.
    """
    if n_trunc < 2:
        raise DomainError("n_trunc must be >= 2")
    energies = motional_energies(trap, n_trunc)
    h = np.zeros((2 * n_trunc, 2 * n_trunc), dtype=complex)
    gg = slice(0, n_trunc)
    ee = slice(n_trunc, 2 * n_trunc)
    h[gg, gg] = np.diag(energies + 0.5 * drive.delta)
    h[ee, ee] = np.diag(energies - 0.5 * drive.delta)
    if drive.omega_r != 0.0:
        if drive.eta == 0.0:
            eg = np.eye(n_trunc, dtype=complex)
        else:
            eg = coupling_matrix(trap, drive.eta, n_trunc).entries
        h[ee, gg] = 0.5 * drive.omega_r * eg
        h[gg, ee] = h[ee, gg].conj().T
    h.setflags(write=False)
    return HamiltonianMatrix(h, trap, drive, n_trunc)


def build_bare_hamiltonian(trap: TrapModel, delta: float, n_trunc: int) -> HamiltonianMatrix:
    """Laser off: diagonal with eps_{g,n} = E_n + delta/2, eps_{e,n} = E_n - delta/2."""
    return build_full_hamiltonian(trap, DriveParams(omega_r=0.0, delta=delta, eta=0.0), n_trunc)


def build_semidressed_hamiltonian(trap: TrapModel, drive: DriveParams, n_trunc: int) -> HamiltonianMatrix:
    """The full Hamiltonian at eta = 0 (no motional coupling)."""
    return build_full_hamiltonian(trap, drive.replace(eta=0.0), n_trunc)


@dataclass(frozen=True)
class SemidressedLevel:
    n: int
    sign: int
    energy: float
    # amplitudes on (|g,n>, |e,n>)
    state: np.ndarray = field(repr=False)
    norm_factor: float | None = None
    degenerate: bool = False

    @property
    def label(self) -> tuple[int, int]:
        return (self.n, self.sign)


def norm_factors(delta: float, omega_r: float) -> tuple[float, float]:
    """(N_+, N_-) = 2 Omega (Omega +- delta) / omega_r^2, cancellation-free."""
    if omega_r <= 0:
        raise DomainError("normalization factors need omega_r > 0")
    omega = math.hypot(omega_r, delta)
    # omega - |delta| = omega_r^2 / (omega + |delta|)
    small = omega_r * omega_r / (omega + abs(delta))
    big = omega + abs(delta)
    plus, minus = (big, small) if delta >= 0 else (small, big)
    scale = 2.0 * omega / (omega_r * omega_r)
    return scale * plus, scale * minus


def _internal_amplitudes(delta: float, omega_r: float, sign: int) -> np.ndarray:
    omega = math.hypot(omega_r, delta)
    if omega == 0.0:
        # delta = omega_r = 0: continuous along the delta = 0 axis
        return np.array([sign, 1.0]) / math.sqrt(2.0)
    # Two proportional forms of ((delta + s omega)/omega_r, 1); pick the one
    # without cancellation. Both keep the continuity phase as omega_r -> 0.
    if sign > 0:
        v = np.array([delta + omega, omega_r]) if delta >= 0 else np.array([omega_r, omega - delta])
    else:
        v = np.array([delta - omega, omega_r]) if delta <= 0 else np.array([-omega_r, delta + omega])
    return v / np.linalg.norm(v)


def semidressed_spectrum(
    trap: TrapModel, drive: DriveParams, n: int
) -> tuple[SemidressedLevel, SemidressedLevel]:
    """The two eta = 0 eigenpairs at motional level n, (+) first.

    Energies are E_n +- Omega/2. For omega_r = 0 the states are taken as the
    continuous limit (the sign of delta selects the bare state); with
    delta = 0 as well the pair is degenerate and flagged.
    """
    e_n = motional_energy(trap, n)
    omega = drive.omega
    degenerate = omega == 0.0
    factors = norm_factors(drive.delta, drive.omega_r) if drive.omega_r > 0 else (None, None)
    levels = []
    for sign, factor in zip((1, -1), factors):
        levels.append(
            SemidressedLevel(
                n=int(n),
                sign=sign,
                energy=e_n + 0.5 * sign * omega,
                state=_internal_amplitudes(drive.delta, drive.omega_r, sign),
                norm_factor=factor,
                degenerate=degenerate,
            )
        )
    return levels[0], levels[1]


def semidressed_vector(basis: ProductBasis, drive: DriveParams, n: int, sign: int) -> np.ndarray:
    """|eps_{n,s}> embedded in the full truncated basis."""
    amps = _internal_amplitudes(drive.delta, drive.omega_r, sign)
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(InternalState.g, n)] = amps[0]
    v[basis.index(InternalState.e, n)] = amps[1]
    return v


def semidressed_basis(basis: ProductBasis, drive: DriveParams) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Unitary whose columns are the semidressed states, with their (n, s) labels."""
    amps_p = _internal_amplitudes(drive.delta, drive.omega_r, 1)
    amps_m = _internal_amplitudes(drive.delta, drive.omega_r, -1)
    n_trunc = basis.n_trunc
    u = np.zeros((basis.dim, basis.dim), dtype=complex)
    labels = []
    for k, n in enumerate(basis.trap.levels(n_trunc)):
        for col, (sign, amps) in enumerate(((1, amps_p), (-1, amps_m))):
            j = 2 * k + col
            u[k, j] = amps[0]
            u[n_trunc + k, j] = amps[1]
            labels.append((int(n), sign))
    return u, labels


def w_matrix_element(
    trap: TrapModel, drive: DriveParams, s: int, n: int, s_prime: int, n_prime: int
) -> complex:
    """<eps_{n,s}| W(eta) |eps_{n',s'}> from the cos/sin matrix elements.

    W couples through (C - delta_nn') on the diagonal-sign block and through
    i S between opposite signs; the prefactor is 1/sqrt(N_s N_s').
    """
    if drive.omega_r <= 0:
        raise DomainError("w_matrix_element needs omega_r > 0")
    if s not in (1, -1) or s_prime not in (1, -1):
        raise DomainError("signs must be +1 or -1")
    trap.check_n(n)
    trap.check_n(n_prime)
    c, sn = cos_sin_elements(trap, n, n_prime, drive.eta)
    c_shift = c - (1.0 if n == n_prime else 0.0)
    n_plus, n_minus = norm_factors(drive.delta, drive.omega_r)
    norm = math.sqrt((n_plus if s > 0 else n_minus) * (n_plus if s_prime > 0 else n_minus))
    if s == s_prime:
        value = (drive.delta + s_prime * drive.omega) * c_shift
    else:
        value = drive.delta * c_shift + s_prime * drive.omega * 1j * sn
    return complex(value / norm)


def w_matrix_element_direct(
    trap: TrapModel, drive: DriveParams, s: int, n: int, s_prime: int, n_prime: int, n_trunc: int | None = None
) -> complex:
    """Same element as a sandwich of H_full - H_semidressed on the truncated basis."""
    if n_trunc is None:
        n_trunc = max(n, n_prime) - trap.n_min + 2
    full = build_full_hamiltonian(trap, drive, n_trunc)
    semi = build_semidressed_hamiltonian(trap, drive, n_trunc)
    w = full.matrix - semi.matrix
    basis = full.basis
    left = semidressed_vector(basis, drive, n, s)
    right = semidressed_vector(basis, drive, n_prime, s_prime)
    return complex(left.conj() @ w @ right)
