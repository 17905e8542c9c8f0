"""Harmonic vs hard-wall comparison tables and CSV/JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, TextIO

from rabires.coupling import (
    harmonic_coupling_exact,
    harmonic_coupling_leading,
    hardwall_coupling_exact,
    hardwall_coupling_leading,
)
from rabires.errors import DomainError

CSV_DIGITS = 12


class SingularRatio(DomainError):
    """The harmonic coupling in the denominator of a sideband ratio vanishes."""


@dataclass(frozen=True)
class RatioRow:
    l: int
    eta: float
    log10_ratio: float
    log10_ratio_leading: float | None


def sideband_ratio(l: int, eta: float) -> float:
    """log10 |chi_{1,1+l}| / |Omega_{0,l}|, both from the ground state of each trap."""
    if l < 0:
        raise DomainError("sideband order l must be >= 0")
    if not eta > 0:
        raise DomainError("eta must be > 0")
    num = abs(hardwall_coupling_exact(1, 1 + l, eta))
    den = abs(harmonic_coupling_exact(0, l, eta))
    if den == 0.0 or num == 0.0:
        raise SingularRatio(f"coupling vanishes at l={l}, eta={eta}")
    return math.log10(num / den)


def sideband_ratio_leading(l: int, eta: float) -> float | None:
    """Same ratio from the leading-order couplings (None for the carrier)."""
    if l == 0:
        return None
    return math.log10(abs(hardwall_coupling_leading(1, 1 + l, eta)) / abs(harmonic_coupling_leading(0, l, eta)))


def ratio_table(l_values: Iterable[int], eta_values: Iterable[float]) -> list[RatioRow]:
    eta_values = list(eta_values)
    return [
        RatioRow(l, float(eta), sideband_ratio(l, eta), sideband_ratio_leading(l, eta))
        for l in l_values
        for eta in eta_values
    ]


@dataclass(frozen=True)
class CarrierRow:
    eta: float
    harmonic: float
    hardwall: float


def carrier_comparison(eta_grid: Iterable[float]) -> list[CarrierRow]:
    """|Omega_00| / omega_r (harmonic) and |chi_11| / omega_r (hard wall) per eta."""
    rows = []
    for eta in eta_grid:
        eta = float(eta)
        if not 0.0 <= eta <= 2.0:
            raise DomainError(f"carrier comparison eta must lie in [0, 2], got {eta}")
        rows.append(CarrierRow(eta, abs(harmonic_coupling_exact(0, 0, eta)), abs(hardwall_coupling_exact(1, 1, eta))))
    return rows


def format_number(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{CSV_DIGITS}g")
    if value is None:
        return ""
    return str(value)


def write_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str], stream: TextIO) -> None:
    """Floats with 12 significant digits, booleans lower-case, None empty."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(c)) for c in columns])


def to_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def to_json(payload: Any) -> str:
    """JSON with shortest round-trip floats and stable key order."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
