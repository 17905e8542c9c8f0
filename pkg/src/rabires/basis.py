"""Units, trap models and the truncated product basis.

Natural units are used throughout with hbar = 1.

* Harmonic trap: energies in units of hbar*omega_T, so E_n = n (n >= 0).
  Positions are measured in oscillator lengths sqrt(hbar/(m omega_T)),
  so the laser phase is exp(i*sqrt(2)*eta*x).
* Hard-wall trap: energies in units of E_1 = hbar^2 pi^2 / (2 m a^2), so
  E_n = n^2 (n >= 1). Positions are measured in units of the well width a,
  the well spans (-1/2, 1/2) and the laser phase is exp(i*pi*eta*x).

The product basis is ordered as [|g, n_min>, ..., |g, n_max>, |e, n_min>, ...].
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from rabires.errors import DomainError


class InternalState(enum.IntEnum):
    g = 0
    e = 1

    @property
    def sigma_z(self) -> int:
        return 1 if self is InternalState.e else -1


class TrapKind(str, enum.Enum):
    HARMONIC = "harmonic"
    HARDWALL = "hardwall"


@dataclass(frozen=True)
class TrapModel:
    kind: TrapKind

    @classmethod
    def from_name(cls, name: str | TrapKind) -> "TrapModel":
        try:
            return cls(TrapKind(str(getattr(name, "value", name)).lower().replace("-", "")))
        except ValueError:
            raise DomainError(f"unknown trap kind {name!r}") from None

    @property
    def n_min(self) -> int:
        """Quantum number of the motional ground state."""
        return 0 if self.kind is TrapKind.HARMONIC else 1

    @property
    def wavenumber(self) -> float:
        """Laser wavenumber per unit eta in this trap's length unit."""
        return math.sqrt(2.0) if self.kind is TrapKind.HARMONIC else math.pi

    def check_n(self, n: int) -> int:
        if int(n) != n or n < self.n_min:
            raise DomainError(
                f"motional quantum number {n!r} invalid for {self.kind.value} trap "
                f"(must be an integer >= {self.n_min})"
            )
        return int(n)

    def levels(self, n_trunc: int) -> np.ndarray:
        """The ``n_trunc`` lowest motional quantum numbers."""
        return np.arange(self.n_min, self.n_min + n_trunc)

    def __str__(self) -> str:
        return self.kind.value


HARMONIC = TrapModel(TrapKind.HARMONIC)
HARDWALL = TrapModel(TrapKind.HARDWALL)


@dataclass(frozen=True)
class DriveParams:
    """Laser parameters: on-resonance Rabi frequency, detuning and LD parameter."""

    omega_r: float
    delta: float
    eta: float

    def __post_init__(self) -> None:
        for name in ("omega_r", "delta", "eta"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.omega_r < 0:
            raise DomainError(f"omega_r must be >= 0, got {self.omega_r!r}")
        if self.eta < 0:
            raise DomainError(f"eta must be >= 0, got {self.eta!r}")

    @property
    def omega(self) -> float:
        """Detuning-adapted Rabi frequency sqrt(omega_r^2 + delta^2)."""
        return math.hypot(self.omega_r, self.delta)

    def replace(self, **changes: float) -> "DriveParams":
        values = {"omega_r": self.omega_r, "delta": self.delta, "eta": self.eta}
        values.update(changes)
        return DriveParams(**values)

    @classmethod
    def on_circle(cls, radius: float, angle: float, eta: float) -> "DriveParams":
        """Point of the (delta, omega_r) half-plane at polar angle ``angle``.

        ``angle`` is atan2(omega_r, delta), so 0 is the positive detuning axis
        and pi/2 is zero detuning.
        """
        if not 0.0 <= angle <= math.pi:
            raise DomainError("polar angle must lie in [0, pi]")
        return cls(omega_r=max(radius * math.sin(angle), 0.0), delta=radius * math.cos(angle), eta=eta)


@dataclass(frozen=True)
class BasisIndex:
    internal: InternalState
    n: int
    flat_index: int


@dataclass(frozen=True)
class ProductBasis:
    """Truncated {g, e} x {motional} basis with ``n_trunc`` motional levels."""

    trap: TrapModel
    n_trunc: int

    def __post_init__(self) -> None:
        if self.n_trunc < 1:
            raise DomainError("n_trunc must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.n_trunc

    def index(self, internal: InternalState | str, n: int) -> int:
        internal = InternalState[internal] if isinstance(internal, str) else InternalState(internal)
        n = self.trap.check_n(n)
        k = n - self.trap.n_min
        if k >= self.n_trunc:
            raise DomainError(f"n={n} lies above the truncation (n_trunc={self.n_trunc})")
        return int(internal) * self.n_trunc + k

    def label(self, flat_index: int) -> BasisIndex:
        if not 0 <= flat_index < self.dim:
            raise DomainError(f"flat index {flat_index} out of range 0..{self.dim - 1}")
        internal, k = divmod(int(flat_index), self.n_trunc)
        return BasisIndex(InternalState(internal), self.trap.n_min + k, int(flat_index))

    def __iter__(self) -> Iterator[BasisIndex]:
        return (self.label(i) for i in range(self.dim))

    def basis_vector(self, internal: InternalState | str, n: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(internal, n)] = 1.0
        return v


def motional_energy(trap: TrapModel, n: int) -> float:
    """E_n in natural units: n (harmonic) or n**2 (hard wall)."""
    n = trap.check_n(n)
    return float(n) if trap.kind is TrapKind.HARMONIC else float(n * n)


def motional_energies(trap: TrapModel, n_trunc: int) -> np.ndarray:
    n = trap.levels(n_trunc).astype(float)
    return n if trap.kind is TrapKind.HARMONIC else n * n


def motional_eigenfunction(trap: TrapModel, n: int, x):
    """Real, normalized motional eigenfunction phi_n(x).

    Hard wall: sqrt(2) cos(n pi x) for odd n, sqrt(2) sin(n pi x) for even n,
    zero outside the well. Harmonic: Hermite function evaluated by its
    normalized three-term recurrence.
    """
    n = trap.check_n(n)
    x = np.asarray(x, dtype=float)
    if trap.kind is TrapKind.HARDWALL:
        arg = n * math.pi * x
        phi = math.sqrt(2.0) * (np.cos(arg) if n % 2 else np.sin(arg))
        phi = np.where(np.abs(x) <= 0.5, phi, 0.0)
    else:
        prev = np.zeros_like(x)
        phi = math.pi ** -0.25 * np.exp(-0.5 * x * x)
        for k in range(n):
            prev, phi = phi, math.sqrt(2.0 / (k + 1)) * x * phi - math.sqrt(k / (k + 1)) * prev
    return float(phi) if phi.ndim == 0 else phi


def domain(trap: TrapModel, n_max: int = 0) -> tuple[float, float]:
    """Integration domain covering phi_n for n <= n_max to below 1e-20."""
    if trap.kind is TrapKind.HARDWALL:
        return -0.5, 0.5
    half = math.sqrt(2 * max(n_max, 0) + 1) + 10.0
    return -half, half
