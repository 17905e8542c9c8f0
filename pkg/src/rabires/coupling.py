"""Laser-motion coupling strengths <n| exp(i k x) |n'> for both traps.

All couplings are returned divided by the on-resonance Rabi frequency, so
the harmonic value is <n|exp(i eta (a + a^dag))|n'> and the hard-wall value
is the plane-wave matrix element between box states.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from rabires.basis import TrapKind, TrapModel, domain, motional_eigenfunction
from rabires.errors import DomainError, NumericalError

# i**k for k mod 4
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

# Half-width of the band around a hard-wall removable singularity in which
# the pole-free form is used instead of the product form.
EPS_SING = 1e-6


def i_power(k: int) -> complex:
    return _I_POWERS[k % 4]


def laguerre_assoc(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x) by upward recurrence."""
    if n < 0 or alpha < 0:
        raise DomainError("laguerre_assoc needs n >= 0 and alpha >= 0")
    prev, cur = 0.0, 1.0
    for k in range(n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def harmonic_coupling_exact(n: int, n_prime: int, eta: float) -> complex:
    """<n|exp(i eta (a + a^dag))|n'>, closed form with a Laguerre polynomial."""
    if n < 0 or n_prime < 0:
        raise DomainError("harmonic quantum numbers must be >= 0")
    lo, hi = sorted((int(n), int(n_prime)))
    d = hi - lo
    if eta == 0.0:
        return complex(d == 0)
    x = eta * eta
    log_mag = -0.5 * x + d * math.log(abs(eta)) + 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1))
    phase = i_power(d) if eta > 0 or d % 2 == 0 else -i_power(d)
    return phase * math.exp(log_mag) * laguerre_assoc(lo, d, x)


def harmonic_coupling_leading(n: int, n_prime: int, eta: float) -> complex:
    """Lowest nonvanishing order in eta: (i eta)^d sqrt(n_>!/n_<!) / d!."""
    if n < 0 or n_prime < 0:
        raise DomainError("harmonic quantum numbers must be >= 0")
    lo, hi = sorted((int(n), int(n_prime)))
    d = hi - lo
    if d == 0:
        return 1.0 + 0.0j
    if eta == 0.0:
        return 0j
    log_mag = d * math.log(abs(eta)) + 0.5 * (math.lgamma(hi + 1) - math.lgamma(lo + 1)) - math.lgamma(d + 1)
    phase = i_power(d) if eta > 0 or d % 2 == 0 else -i_power(d)
    return phase * math.exp(log_mag)


def _mixed_parity_sign(n: int, n_prime: int) -> int:
    """sin(d_eo pi/2) with d_eo = (even index) - (odd index)."""
    even, odd = (n, n_prime) if n % 2 == 0 else (n_prime, n)
    return 1 if (even - odd) % 4 == 1 else -1


def _hardwall_phase(n: int, n_prime: int) -> complex:
    """Phase multiplying 8 eta n n' trig(eta pi/2) / (pi Dt).

    Same-parity pairs carry -i^d. Mixed-parity pairs carry i*sin(d_eo pi/2);
    this is what the integral over the cos/sin box states gives with both
    amplitudes sqrt(2) > 0, and it keeps the element symmetric in n, n'.
    """
    d = abs(n - n_prime)
    if d % 2 == 0:
        return -i_power(d)
    return 1j * _mixed_parity_sign(n, n_prime)


def _pole_term(k: int, eta: float) -> float:
    """eta * t(eta) / (k^2 - eta^2) without the removable pole at eta = k.

    t is sin(eta pi/2) for even k and cos(eta pi/2) for odd k, so numerator
    and denominator vanish together at eta = k.
    """
    if k == 0:
        return -0.5 * math.pi * float(np.sinc(eta / 2))
    # t(eta) = c_k (pi/2) (eta - k) sinc((eta - k)/2)
    c_k = (1 if (k // 2) % 2 == 0 else -1) if k % 2 == 0 else -_sin_half_pi(k)
    return -c_k * 0.5 * math.pi * eta * float(np.sinc((eta - k) / 2)) / (eta + k)


def _sin_half_pi(k: int) -> int:
    return (0, 1, 0, -1)[k % 4]


def _hardwall_regular(n: int, n_prime: int, eta: float) -> complex:
    """Partial-fraction form of the hard-wall integral, analytic in eta >= 0."""
    d = abs(n - n_prime)
    s = n + n_prime
    poles = (2.0 / math.pi) * (_pole_term(d, eta) - _pole_term(s, eta))
    if d % 2 == 0:
        return complex(-(1 if (d // 2) % 2 == 0 else -1) * poles)
    return 1j * _mixed_parity_sign(n, n_prime) * poles


def hardwall_coupling_exact(n: int, n_prime: int, eta: float) -> complex:
    """<phi_n| exp(i pi eta x) |phi_n'> for the unit-width box.

    Evaluates phase * 8 eta n n' trig(eta pi/2) / (pi Dt) with
    Dt = (eta^2 - d^2)(eta^2 - s^2), d = |n - n'|, s = n + n'. Within
    ``EPS_SING`` of a zero of Dt the equivalent pole-free partial-fraction
    form is used instead.
    """
    if n < 1 or n_prime < 1:
        raise DomainError("hard-wall quantum numbers must be >= 1")
    # sorted so the float products are exactly symmetric
    n, n_prime = sorted((int(n), int(n_prime)))
    if eta < 0:
        return hardwall_coupling_exact(n, n_prime, -eta).conjugate()
    d = abs(n - n_prime)
    s = n + n_prime
    if min(abs(eta - d), abs(eta - s)) < EPS_SING:
        return _hardwall_regular(n, n_prime, eta)
    e2 = eta * eta
    denom = (e2 - d * d) * (e2 - s * s)
    trig = math.sin(eta * math.pi / 2) if d % 2 == 0 else math.cos(eta * math.pi / 2)
    return _hardwall_phase(n, n_prime) * 8.0 * eta * n * n_prime * trig / (math.pi * denom)


def hardwall_coupling_leading(n: int, n_prime: int, eta: float) -> complex:
    """Lowest order in eta of the hard-wall coupling for n != n'."""
    if n < 1 or n_prime < 1:
        raise DomainError("hard-wall quantum numbers must be >= 1")
    if n == n_prime:
        raise DomainError(
            "leading-order hard-wall coupling is undefined for n == n'; "
            "use hardwall_coupling_exact for the carrier"
        )
    d = abs(n - n_prime)
    s = n + n_prime
    magnitude = 4.0 * n * n_prime / (d * d * s * s)
    factor = eta * eta if d % 2 == 0 else 2.0 * eta / math.pi
    return _hardwall_phase(n, n_prime) * magnitude * factor


def coupling_exact(trap: TrapModel, n: int, n_prime: int, eta: float) -> complex:
    if trap.kind is TrapKind.HARMONIC:
        return harmonic_coupling_exact(n, n_prime, eta)
    return hardwall_coupling_exact(n, n_prime, eta)


def coupling_leading(trap: TrapModel, n: int, n_prime: int, eta: float) -> complex:
    if trap.kind is TrapKind.HARMONIC:
        return harmonic_coupling_leading(n, n_prime, eta)
    return hardwall_coupling_leading(n, n_prime, eta)


def cos_sin_elements(trap: TrapModel, n: int, n_prime: int, eta: float) -> tuple[float, float]:
    """(<n|cos k x|n'>, <n|sin k x|n'>) from the exact coupling.

    Parity makes one of the two vanish identically; it is returned as an
    exact zero.
    """
    c = coupling_exact(trap, n, n_prime, eta)
    if abs(n - n_prime) % 2 == 0:
        return c.real, 0.0
    return 0.0, c.imag


def coupling_quadrature_oracle(
    trap: TrapModel, n: int, n_prime: int, eta: float, tol: float = 1e-12
) -> complex:
    """Adaptive quadrature of the defining overlap integral.

    Independent of the closed forms: only the eigenfunctions from the basis
    module are used.
    """
    n = trap.check_n(n)
    n_prime = trap.check_n(n_prime)
    k = trap.wavenumber * eta
    lo, hi = domain(trap, max(n, n_prime))
    # enough subintervals to resolve the oscillations of the integrand
    n_osc = (n + n_prime + abs(k) / math.pi + 4) * (1 if trap.kind is TrapKind.HARDWALL else 4)
    limit = int(50 + 20 * n_osc)

    def part(trig):
        def f(x):
            return motional_eigenfunction(trap, n, x) * motional_eigenfunction(trap, n_prime, x) * trig(k * x)

        value, err = integrate.quad(f, lo, hi, epsabs=tol * 0.1, epsrel=0.0, limit=limit)
        if not err <= tol:
            raise NumericalError(
                f"quadrature for ({trap}, {n}, {n_prime}, eta={eta}) did not reach {tol:g} (error {err:.2e})"
            )
        return value

    return complex(part(np.cos), part(np.sin))


@dataclass(frozen=True)
class CouplingMatrix:
    """Dense table of exact couplings for the ``size`` lowest levels."""

    trap: TrapModel
    eta: float
    entries: np.ndarray = field(repr=False)

    @property
    def levels(self) -> np.ndarray:
        return self.trap.levels(self.entries.shape[0])

    def __getitem__(self, nn: tuple[int, int]) -> complex:
        n, n_prime = nn
        m = self.trap.n_min
        return complex(self.entries[n - m, n_prime - m])


@functools.lru_cache(maxsize=64)
def _coupling_table(kind: TrapKind, eta: float, size: int) -> np.ndarray:
    trap = TrapModel(kind)
    levels = trap.levels(size)
    table = np.empty((size, size), dtype=complex)
    for i, n in enumerate(levels):
        for j in range(i, size):
            table[i, j] = table[j, i] = coupling_exact(trap, int(n), int(levels[j]), eta)
    table.setflags(write=False)
    return table


def coupling_matrix(trap: TrapModel, eta: float, size: int) -> CouplingMatrix:
    """Exact couplings between the ``size`` lowest motional levels (cached)."""
    if size < 1:
        raise DomainError("coupling matrix size must be >= 1")
    return CouplingMatrix(trap, float(eta), _coupling_table(trap.kind, float(eta), int(size)))
