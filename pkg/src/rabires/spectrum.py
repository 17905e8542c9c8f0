"""Diagonalization, parameter scans with level tracking, and avoided crossings."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from rabires.basis import DriveParams, ProductBasis, TrapModel
from rabires.errors import DomainError, NumericalError
from rabires.hamiltonian import HamiltonianMatrix, build_full_hamiltonian, semidressed_basis
from rabires.resonance import (
    SplittingPrediction,
    perturbative_splitting_general,
    weakfield_prediction,
)

log = logging.getLogger(__name__)

AXES = ("detuning", "rabi", "radius")
CROSSING_THRESHOLD = 1e-9
TAIL_TOLERANCE = 1e-8
TAIL_LEVELS = 3
OVERLAP_TIE = 1e-6
DEGENERACY_TOL = 1e-9
PLATEAU_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    drive: DriveParams | None = None

    def residual(self, h: HamiltonianMatrix) -> float:
        r = h.matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.linalg.norm(r, axis=0)))

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))


def diagonalize(h: HamiltonianMatrix) -> Spectrum:
    """Full eigendecomposition, eigenvalues ascending."""
    try:
        w, v = scipy.linalg.eigh(h.matrix, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    return Spectrum(w, v, h.drive)


def tail_weights(vectors: np.ndarray, n_trunc: int, levels: int = TAIL_LEVELS) -> np.ndarray:
    """Probability carried by the top ``levels`` motional states, per column."""
    levels = min(levels, n_trunc)
    p = np.abs(vectors) ** 2
    top = slice(n_trunc - levels, n_trunc)
    return p[top].sum(axis=0) + p[n_trunc:][top].sum(axis=0)


def drive_at(template: DriveParams, axis: str, value: float, angle: float | None = None) -> DriveParams:
    """The drive at scan coordinate ``value``.

    ``detuning`` varies delta, ``rabi`` varies omega_r, ``radius`` varies
    Omega at fixed polar angle atan2(omega_r, delta) (taken from the
    template unless ``angle`` is given).
    """
    if axis == "detuning":
        return template.replace(delta=value)
    if axis == "rabi":
        return template.replace(omega_r=value)
    if axis == "radius":
        if angle is None:
            angle = math.atan2(template.omega_r, template.delta)
        return DriveParams.on_circle(value, angle, template.eta)
    raise DomainError(f"unknown scan axis {axis!r}; expected one of {AXES}")


@dataclass
class LevelTrack:
    trap: TrapModel
    template: DriveParams
    axis: str
    grid: np.ndarray
    n_trunc: int
    # energies[k, b]: energy of branch b at grid point k
    energies: np.ndarray = field(repr=False)
    tail_weights: np.ndarray = field(repr=False)
    min_overlap: np.ndarray = field(repr=False)
    branch_labels: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)
    angle: float | None = None
    ambiguous_matches: int = 0

    @property
    def n_branches(self) -> int:
        return self.energies.shape[1]

    def drive(self, value: float) -> DriveParams:
        return drive_at(self.template, self.axis, value, self.angle)


def _align_degenerate(w: np.ndarray, v: np.ndarray, prev: np.ndarray) -> np.ndarray:
    """Rotate eigenvectors inside degenerate clusters to follow ``prev``."""
    v = v.copy()
    start = 0
    dim = len(w)
    while start < dim:
        stop = start + 1
        while stop < dim and w[stop] - w[stop - 1] < DEGENERACY_TOL * max(1.0, abs(w[stop])):
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            proj = block.conj().T @ prev
            chosen = np.argsort(-np.linalg.norm(proj, axis=0), kind="stable")[: stop - start]
            chosen.sort()
            a, _, bh = np.linalg.svd(proj[:, chosen])
            v[:, start:stop] = block @ (a @ bh)
        start = stop
    return v


def _match(prev: np.ndarray, cur: np.ndarray, w: np.ndarray, predicted: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Assign current eigenvectors to branches by maximal total overlap.

    Returns (column for each branch, overlap of each branch, number of
    near-tied assignments resolved by eigenvalue proximity).
    """
    overlap = np.abs(prev.conj().T @ cur)
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    assign = np.empty(len(rows), dtype=int)
    assign[rows] = cols
    ties = 0
    # resolve pairwise near-ties between branches by eigenvalue proximity
    for i in range(len(assign)):
        j = assign[i]
        rivals = np.nonzero(overlap[i] >= overlap[i, j] - OVERLAP_TIE)[0]
        for jj in rivals:
            if jj == j:
                continue
            ii = int(np.nonzero(assign == jj)[0][0])
            if overlap[ii, j] < overlap[ii, jj] - OVERLAP_TIE:
                continue
            ties += 1
            keep = abs(w[j] - predicted[i]) + abs(w[jj] - predicted[ii])
            swap = abs(w[jj] - predicted[i]) + abs(w[j] - predicted[ii])
            if swap < keep:
                assign[i], assign[ii] = jj, j
                j = jj
    return assign, overlap[np.arange(len(assign)), assign], ties


def _endpoint_labels(trap: TrapModel, n_trunc: int, drive: DriveParams, vectors: np.ndarray) -> list[tuple[int, int]]:
    u, labels = semidressed_basis(ProductBasis(trap, n_trunc), drive)
    weights = np.abs(u.conj().T @ vectors) ** 2
    return [labels[int(i)] for i in np.argmax(weights, axis=0)]


def scan(
    trap: TrapModel,
    drive_template: DriveParams,
    axis: str,
    value_range: tuple[float, float],
    steps: int,
    n_trunc: int,
    angle: float | None = None,
    workers: int = 1,
) -> LevelTrack:
    """Diagonalize along a 1-D grid and follow each branch by eigenvector overlap."""
    if steps < 2:
        raise DomainError("a scan needs at least 2 steps")
    lo, hi = value_range
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise DomainError("scan range must be finite")
    if axis not in AXES:
        raise DomainError(f"unknown scan axis {axis!r}; expected one of {AXES}")
    if axis == "radius" and angle is None:
        angle = math.atan2(drive_template.omega_r, drive_template.delta)
    grid = np.linspace(lo, hi, steps)
    drives = [drive_at(drive_template, axis, float(x), angle) for x in grid]

    def solve(d: DriveParams) -> Spectrum:
        return diagonalize(build_full_hamiltonian(trap, d, n_trunc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(solve, drives))
    else:
        spectra = [solve(d) for d in drives]

    dim = 2 * n_trunc
    energies = np.empty((steps, dim))
    tails = np.empty((steps, dim))
    min_overlap = np.ones(dim)
    ambiguous = 0

    vecs = spectra[0].eigenvectors
    energies[0] = spectra[0].eigenvalues
    tails[0] = tail_weights(vecs, n_trunc)
    first_vecs = vecs
    for k in range(1, steps):
        w = spectra[k].eigenvalues
        cur = _align_degenerate(w, spectra[k].eigenvectors, vecs)
        if k >= 2:
            predicted = 2 * energies[k - 1] - energies[k - 2]
        else:
            predicted = energies[k - 1]
        assign, ov, ties = _match(vecs, cur, w, predicted)
        ambiguous += ties
        vecs = cur[:, assign]
        energies[k] = w[assign]
        tails[k] = tail_weights(vecs, n_trunc)
        np.minimum(min_overlap, ov, out=min_overlap)
    if ambiguous:
        log.debug("scan: %d near-tied overlap assignments resolved by eigenvalue proximity", ambiguous)

    start_labels = _endpoint_labels(trap, n_trunc, drives[0], first_vecs)
    end_labels = _endpoint_labels(trap, n_trunc, drives[-1], vecs)
    return LevelTrack(
        trap=trap,
        template=drive_template,
        axis=axis,
        grid=grid,
        n_trunc=n_trunc,
        energies=energies,
        tail_weights=tails,
        min_overlap=min_overlap,
        branch_labels=list(zip(start_labels, end_labels)),
        angle=angle,
        ambiguous_matches=ambiguous,
    )


def golden_section(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-8, max_iter: int = 200) -> tuple[float, float, bool]:
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x), converged)."""
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, abs(b - a) <= xtol


def _hyperbolic_minimum(f: Callable[[float], float], x0: float, h: float) -> float | None:
    """Minimum of g where g^2 is fitted by a parabola through x0 - h, x0, x0 + h.

    Near an isolated (avoided or true) crossing the squared gap is quadratic
    in the parameter, so this recovers the minimum without needing to land
    on it.
    """
    xs = np.array([x0 - h, x0, x0 + h])
    g2 = np.array([f(x) for x in xs]) ** 2
    a2, a1, a0 = np.polyfit(xs - x0, g2, 2)
    if a2 <= 0:
        return None
    m2 = a0 - a1 * a1 / (4 * a2)
    return math.sqrt(max(m2, 0.0))


@dataclass(frozen=True)
class AvoidedCrossing:
    branch_pair: tuple[int, int]
    param_star: float
    gap: float
    predicted: SplittingPrediction | None
    is_true_crossing: bool
    labels: tuple[tuple[int, int], tuple[int, int]]
    drive: DriveParams
    refined: bool
    energy: float


class _GapFunction:
    """Gap between the two adjacent levels nearest a reference energy."""

    def __init__(self, track: LevelTrack, mean_lo: float, mean_hi: float, x_lo: float, x_hi: float):
        self.track = track
        self.x_lo, self.x_hi = x_lo, x_hi
        self.mean_lo, self.mean_hi = mean_lo, mean_hi
        self.last: tuple[float, Spectrum, int] | None = None

    def spectrum(self, x: float) -> tuple[Spectrum, int]:
        track = self.track
        spec = diagonalize(build_full_hamiltonian(track.trap, track.drive(x), track.n_trunc))
        t = 0.0 if self.x_hi == self.x_lo else (x - self.x_lo) / (self.x_hi - self.x_lo)
        target = self.mean_lo + t * (self.mean_hi - self.mean_lo)
        w = spec.eigenvalues
        mids = 0.5 * (w[1:] + w[:-1])
        i = int(np.argmin(np.abs(mids - target)))
        return spec, i

    def __call__(self, x: float) -> float:
        spec, i = self.spectrum(x)
        return float(spec.eigenvalues[i + 1] - spec.eigenvalues[i])


def _pair_labels(trap: TrapModel, n_trunc: int, drive: DriveParams, vectors: np.ndarray) -> tuple[tuple[int, int], tuple[int, int]]:
    u, labels = semidressed_basis(ProductBasis(trap, n_trunc), drive)
    weights = (np.abs(u.conj().T @ vectors) ** 2).sum(axis=1)
    top = np.argsort(-weights, kind="stable")[:2]
    pair = sorted((labels[int(i)] for i in top), key=lambda ns: (ns[0], -ns[1]))
    return pair[0], pair[1]


def _prediction(trap: TrapModel, labels, drive: DriveParams) -> SplittingPrediction | None:
    (n1, s1), (n2, s2) = labels
    if s1 == s2:
        return None
    try:
        if n1 == n2:
            return weakfield_prediction(trap, n1, n2, drive)
        if drive.omega_r == 0.0:
            return None
        return perturbative_splitting_general(trap, n1, n2, drive)
    except DomainError:
        return None


def find_avoided_crossings(
    track: LevelTrack,
    refine: bool = True,
    crossing_threshold: float = CROSSING_THRESHOLD,
    tail_tolerance: float = TAIL_TOLERANCE,
    max_gap: float | None = None,
    xtol: float = 1e-8,
) -> list[AvoidedCrossing]:
    """Interior minima of adjacent-branch gaps, refined by re-diagonalization."""
    steps = len(track.grid)
    if steps < 3:
        raise DomainError("crossing detection needs at least 3 grid points")
    energies = track.energies
    gaps: dict[tuple[int, int], dict[int, float]] = {}
    for k in range(steps):
        order = np.argsort(energies[k], kind="stable")
        for a, b in zip(order[:-1], order[1:]):
            pair = (int(min(a, b)), int(max(a, b)))
            gaps.setdefault(pair, {})[k] = float(abs(energies[k, b] - energies[k, a]))

    found: list[AvoidedCrossing] = []
    for pair, series in sorted(gaps.items()):
        for k in sorted(series):
            if k == 0 or k == steps - 1:
                continue
            left, right = series.get(k - 1), series.get(k + 1)
            g = series[k]
            if left is None or right is None or not (g <= left and g < right):
                continue
            # flat gaps between parallel branches give rounding-level minima
            if max(left, right) - g <= PLATEAU_TOL * max(1.0, g):
                continue
            a, b = pair
            if max(track.tail_weights[k, a], track.tail_weights[k, b]) > tail_tolerance:
                continue
            if max_gap is not None and g > max_gap:
                continue
            crossing = _refine(track, pair, k, refine, crossing_threshold, xtol)
            if max_gap is not None and crossing.gap > max_gap:
                continue
            found.append(crossing)
    found.sort(key=lambda c: (c.param_star, c.energy))
    return found


def _refine(track: LevelTrack, pair: tuple[int, int], k: int, refine: bool, threshold: float, xtol: float) -> AvoidedCrossing:
    a, b = pair
    grid = track.grid
    x_lo, x_hi = float(grid[k - 1]), float(grid[k + 1])
    means = 0.5 * (track.energies[:, a] + track.energies[:, b])
    gap_fn = _GapFunction(track, float(means[k - 1]), float(means[k + 1]), x_lo, x_hi)
    converged = False
    if refine:
        x_star, gap, converged = golden_section(gap_fn, x_lo, x_hi, xtol=xtol)
        h = max(1e-4 * (x_hi - x_lo), 10 * xtol)
        polished = _hyperbolic_minimum(gap_fn, x_star, h)
        if polished is not None and polished < gap:
            gap = polished
        if not converged:
            log.warning("gap refinement did not converge near %s=%g", track.axis, grid[k])
    else:
        x_star = float(grid[k])
        gap = gap_fn(x_star)
    spec, i = gap_fn.spectrum(x_star)
    drive = track.drive(x_star)
    labels = _pair_labels(track.trap, track.n_trunc, drive, spec.eigenvectors[:, i : i + 2])
    return AvoidedCrossing(
        branch_pair=pair,
        param_star=float(x_star),
        gap=float(gap),
        predicted=_prediction(track.trap, labels, drive),
        is_true_crossing=bool(gap < threshold),
        labels=labels,
        drive=drive,
        refined=bool(refine and converged),
        energy=float(0.5 * (spec.eigenvalues[i] + spec.eigenvalues[i + 1])),
    )


def minimum_gap(
    trap: TrapModel,
    drive_template: DriveParams,
    axis: str,
    bracket: tuple[float, float],
    n_trunc: int,
    energy: float,
    steps: int = 41,
    angle: float | None = None,
) -> AvoidedCrossing:
    """Locate and refine the crossing nearest ``energy`` inside ``bracket``."""
    track = scan(trap, drive_template, axis, bracket, steps, n_trunc, angle=angle)
    candidates = find_avoided_crossings(track, tail_tolerance=math.inf)
    if not candidates:
        raise NumericalError(f"no gap minimum found in {axis} bracket {bracket}")
    return min(candidates, key=lambda c: (abs(c.energy - energy), c.gap))


@dataclass(frozen=True)
class ConvergenceRow:
    n_trunc: int
    next_n_trunc: int
    drift: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[ConvergenceRow]
    levels: int
    tolerance: float
    recommended: int | None


def convergence_probe(
    trap: TrapModel,
    drive: DriveParams,
    n_list: Sequence[int],
    levels: int = 10,
    tolerance: float = 1e-10,
) -> ConvergenceReport:
    """Drift of the lowest ``levels`` eigenvalues between consecutive truncations."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("N list must be strictly ascending with at least two entries")
    if 2 * n_list[0] < levels:
        raise DomainError("smallest truncation holds fewer states than requested levels")
    lowest = [diagonalize(build_full_hamiltonian(trap, drive, n)).eigenvalues[:levels] for n in n_list]
    rows = [
        ConvergenceRow(n_list[i], n_list[i + 1], float(np.max(np.abs(lowest[i + 1] - lowest[i]))))
        for i in range(len(n_list) - 1)
    ]
    recommended = next((r.n_trunc for r in rows if r.drift < tolerance), None)
    return ConvergenceReport(rows, levels, tolerance, recommended)
