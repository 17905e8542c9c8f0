"""Rabi resonances, their perturbative splittings and isolation.

A Rabi resonance between motional levels n < n' is the crossing of the
semidressed levels (n, +) and (n', -), which happens on the circle
Omega = E_n' - E_n in the (delta, omega_r) half-plane.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from rabires.basis import DriveParams, TrapKind, TrapModel, motional_energy
from rabires.coupling import coupling_exact, cos_sin_elements, coupling_leading
from rabires.errors import DomainError

DEFAULT_ISOLATION_THRESHOLD = 0.1


class ResonanceKind(str, enum.Enum):
    CARRIER = "carrier"
    RED = "red"
    BLUE = "blue"
    GENERALIZED = "generalized"


@dataclass(frozen=True)
class ResonanceSpec:
    trap: TrapModel
    n: int
    n_prime: int

    @property
    def order(self) -> int:
        return self.n_prime - self.n

    @property
    def radius(self) -> float:
        """Omega on the resonance circle."""
        return abs(motional_energy(self.trap, self.n_prime) - motional_energy(self.trap, self.n))

    def kind(self, delta: float = 0.0) -> ResonanceKind:
        """Blue/red by the sign of delta; generalized on the delta = 0 axis."""
        if self.n == self.n_prime:
            return ResonanceKind.CARRIER
        if delta > 0:
            return ResonanceKind.BLUE
        if delta < 0:
            return ResonanceKind.RED
        return ResonanceKind.GENERALIZED

    def point(self, angle: float = math.pi / 2, eta: float = 0.0) -> DriveParams:
        """Drive on the resonance circle at polar angle atan2(omega_r, delta)."""
        return DriveParams.on_circle(self.radius, angle, eta)

    def weak_field_point(self, omega_r: float, eta: float, sign: int = 1) -> DriveParams:
        """Point of the circle with the given omega_r, on the delta > 0 (sign=1) side."""
        r = self.radius
        if omega_r > r:
            raise DomainError(f"omega_r={omega_r} exceeds the resonance radius {r}")
        return DriveParams(omega_r=omega_r, delta=sign * math.sqrt(r * r - omega_r * omega_r), eta=eta)


def enumerate_resonances(
    trap: TrapModel, n_max: int, k_max: int | None = None, include_carriers: bool = True
) -> list[ResonanceSpec]:
    """All pairs n <= n' <= n_max with 0 < n' - n <= k_max, plus the carriers.

    ``k_max=None`` removes the bound on the order.
    """
    if n_max < trap.n_min + 1:
        raise DomainError(f"n_max must be >= {trap.n_min + 1}")
    if k_max is not None and k_max < 1:
        raise DomainError("k_max must be >= 1")
    out = []
    for n in range(trap.n_min, n_max + 1):
        if include_carriers:
            out.append(ResonanceSpec(trap, n, n))
        for n_prime in range(n + 1, n_max + 1):
            if k_max is None or n_prime - n <= k_max:
                out.append(ResonanceSpec(trap, n, n_prime))
    return out


@dataclass(frozen=True)
class SplittingPrediction:
    """Perturbative avoided-crossing splitting for one resonance.

    ``general`` is the minimum gap of the degenerate 2x2 block (twice the
    modulus of its off-diagonal element) using exact cos/sin elements;
    ``leading`` keeps only the lowest order in eta. ``at_point`` is the
    eigenvalue difference of the same block at the given drive point,
    including the diagonal first-order shifts, which move the crossing but
    do not change its minimum gap.
    """

    n: int
    n_prime: int
    general: float
    leading: float
    at_point: float
    scheme: str = "eta"

    @property
    def isolation_ratio(self) -> float:
        # splitting over the trap frequency unit, which is 1 in natural units
        return self.general

    @property
    def leading_over_general(self) -> float:
        return self.leading / self.general if self.general else math.nan


def weakfield_splitting(trap: TrapModel, n: int, n_prime: int, drive: DriveParams) -> float:
    """|Omega_nn'| = omega_r |<n|exp(ikx)|n'>| (low-intensity sideband splitting)."""
    return drive.omega_r * abs(coupling_exact(trap, n, n_prime, drive.eta))


def weakfield_prediction(trap: TrapModel, n: int, n_prime: int, drive: DriveParams) -> SplittingPrediction:
    """Weak-field splitting packaged as a prediction (used for carriers)."""
    exact = weakfield_splitting(trap, n, n_prime, drive)
    if n == n_prime:
        leading = drive.omega_r
    else:
        leading = drive.omega_r * abs(coupling_leading(trap, n, n_prime, drive.eta))
    return SplittingPrediction(n, n_prime, general=exact, leading=leading, at_point=exact, scheme="weak-field")


def _leading_splitting(trap: TrapModel, n: int, n_prime: int, drive: DriveParams) -> float:
    lo, hi = sorted((n, n_prime))
    l = hi - lo
    detuning_factor = abs(drive.delta) / drive.omega if l % 2 == 0 else 1.0
    eta = drive.eta
    if trap.kind is TrapKind.HARMONIC:
        base = math.exp(l * math.log(eta) + 0.5 * (math.lgamma(hi + 1) - math.lgamma(lo + 1)) - math.lgamma(l + 1)) if eta > 0 else 0.0
    else:
        base = 4.0 * lo * hi / (l * l * (lo + hi) ** 2) * (eta * eta if l % 2 == 0 else 2.0 * eta / math.pi)
    return drive.omega_r * base * detuning_factor


def perturbative_splitting_general(
    trap: TrapModel, n: int, n_prime: int, drive: DriveParams
) -> SplittingPrediction:
    """First-order degenerate perturbation theory in eta at the (n, +)/(n', -) crossing."""
    trap.check_n(n)
    trap.check_n(n_prime)
    if n == n_prime:
        raise DomainError(
            "the carrier splitting is already contained in the semidressed Hamiltonian; "
            "use weakfield_splitting instead"
        )
    omega = drive.omega
    if omega == 0.0:
        raise DomainError("perturbative splitting needs Omega > 0")
    lo, hi = sorted((n, n_prime))
    c_off, s_off = cos_sin_elements(trap, lo, hi, drive.eta)
    c_lo, _ = cos_sin_elements(trap, lo, lo, drive.eta)
    c_hi, _ = cos_sin_elements(trap, hi, hi, drive.eta)
    omega_r, delta = drive.omega_r, drive.delta
    off = omega_r / omega * math.sqrt(delta * delta * c_off * c_off + omega * omega * s_off * s_off)
    diag = omega_r * omega_r / (2.0 * omega) * (c_lo + c_hi - 2.0)
    at_point = math.hypot(diag, off)
    return SplittingPrediction(
        lo, hi, general=off, leading=_leading_splitting(trap, lo, hi, drive), at_point=at_point
    )


def neighbor_spacing(trap: TrapModel, n: int, n_prime: int) -> float:
    """Distance to the nearest neighbouring resonance along the scan axis.

    One trap unit for the equally spaced harmonic levels; for the hard wall
    the smallest adjacent-level spacing E_{n+1} - E_n among the levels involved.
    """
    if trap.kind is TrapKind.HARMONIC:
        return 1.0
    lo = min(n, n_prime)
    return motional_energy(trap, lo + 1) - motional_energy(trap, lo)


def isolation_check(
    prediction: SplittingPrediction, trap: TrapModel, threshold: float = DEFAULT_ISOLATION_THRESHOLD
) -> tuple[bool, float]:
    ratio = prediction.general / neighbor_spacing(trap, prediction.n, prediction.n_prime)
    return ratio < threshold, ratio
