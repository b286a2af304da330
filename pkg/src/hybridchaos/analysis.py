"""Diagnostics for the 4D hybrid map.

Lyapunov spectra use the tangent-frame method: evolve an orthonormal
4-frame through the per-step Jacobian, re-orthonormalize with modified
Gram-Schmidt every iteration, and average the logs of the diagonal
growth factors. Jacobians are central finite differences of the full
step map, with two corrections for its discontinuities: raw differences
are unwrapped mod 1 (d -> d - round(d)) so the 0/1 seam does not alias
into huge derivatives, and when a perturbed coordinate would cross 0.5
or leave [0, 1) the difference switches to one-sided on the non-crossing
side so branch switches do not contaminate the estimate.

The remaining diagnostics (bifurcation scans, cobweb staircases,
histograms with a chi-square uniformity statistic, coordinate-pair
scatters) are thin, deterministic reductions of generated trajectories.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .system import (
    COORD_INDEX,
    COORDS,
    NonFiniteStateError,
    SystemConfig,
    Trajectory,
    _engine,
    generate,
)

__all__ = [
    "LyapunovResult",
    "Classification",
    "Histogram",
    "ChiSquareResult",
    "BifurcationSkip",
    "BifurcationData",
    "CobwebData",
    "DegenerateJacobianError",
    "ScanFailedError",
    "TooFewSamplesError",
    "lyapunov_spectrum",
    "classify",
    "bifurcation_scan",
    "cobweb",
    "staircase",
    "histogram",
    "chi_square_uniformity",
    "scatter_pairs",
]

_R_FLOOR = 1e-300  # pivot underflow threshold for the QR diagonal


class DegenerateJacobianError(ArithmeticError):
    """QR pivots underflowed to zero on more than 1% of iterations."""


class ScanFailedError(ArithmeticError):
    """Every r value of a bifurcation sweep failed with a non-finite state."""


class TooFewSamplesError(ValueError):
    """Histogram too sparse for a meaningful chi-square statistic."""


@dataclass(frozen=True, slots=True)
class LyapunovResult:
    """Averaged exponents in nats/iteration, sorted descending."""

    lambdas: tuple[float, float, float, float]
    iterations_used: int
    r: float


class Classification(enum.Enum):
    CHAOTIC = "chaotic"
    PERIODIC = "periodic"
    BIFURCATION = "bifurcation"


@dataclass(eq=False)
class Histogram:
    """Counts over uniform half-open bins [k/bins, (k+1)/bins) of [0, 1)."""

    bin_count: int
    counts: np.ndarray
    total: int


@dataclass(frozen=True, slots=True)
class ChiSquareResult:
    statistic: float
    dof: int


@dataclass(frozen=True, slots=True)
class BifurcationSkip:
    r: float
    component: str
    branch: int
    iteration: int


@dataclass(eq=False)
class BifurcationData:
    """(r, value) pairs for one coordinate, plus r values that failed."""

    points: np.ndarray  # shape (m, 2)
    skipped: tuple[BifurcationSkip, ...]
    coord: str


@dataclass(eq=False)
class CobwebData:
    """Staircase polyline alternating between the map graph and the
    diagonal, starting at (s0, s0); 2n+1 points for n transitions."""

    points: np.ndarray  # shape (2n+1, 2)
    coord: str


# --- Lyapunov spectrum -------------------------------------------------

def _jacobian_rows(step_fn, s, base, delta):
    """4x4 Jacobian of the step map at state s (rows = output coords).

    `base` is step_fn(*s), reused when a perturbation would cross a
    branch threshold or the domain boundary and a one-sided difference
    is taken instead.
    """
    rows = ([0.0] * 4, [0.0] * 4, [0.0] * 4, [0.0] * 4)
    pert = list(s)
    for k in range(4):
        sk = s[k]
        up = sk + delta
        dn = sk - delta
        lower = sk < 0.5
        up_ok = up < 1.0 and (up < 0.5) == lower
        dn_ok = dn >= 0.0 and (dn < 0.5) == lower
        if up_ok and dn_ok:
            pert[k] = up
            fp = step_fn(*pert)
            pert[k] = dn
            fm = step_fn(*pert)
            scale = 0.5 / delta
        elif up_ok:
            pert[k] = up
            fp = step_fn(*pert)
            fm = base
            scale = 1.0 / delta
        else:
            fp = base
            pert[k] = dn
            fm = step_fn(*pert)
            scale = 1.0 / delta
        pert[k] = sk
        for i in range(4):
            d = fp[i] - fm[i]
            rows[i][k] = (d - round(d)) * scale
    return rows


def _complete_column(qcols):
    """Unit vector orthogonal to the columns built so far (degenerate path)."""
    best, best_n = None, -1.0
    for i in range(4):
        v = [0.0] * 4
        v[i] = 1.0
        for q in qcols:
            c = v[0] * q[0] + v[1] * q[1] + v[2] * q[2] + v[3] * q[3]
            for j in range(4):
                v[j] -= c * q[j]
        n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3])
        if n > best_n:
            best, best_n = v, n
    return [c / best_n for c in best]


def _mgs4(zcols):
    """Modified Gram-Schmidt of four 4-vectors, with a second
    orthogonalization pass: single-pass MGS loses orthogonality in
    proportion to the condition number, and this system's Jacobians can
    be very ill-conditioned.

    Returns (q columns, R diagonal, degenerate flag). Diagonal entries
    are norms, hence positive; an underflowed pivot is floored and its
    direction replaced by an orthogonal completion.
    """
    qcols = []
    rdiag = [0.0] * 4
    degenerate = False
    for j in range(4):
        v = list(zcols[j])
        for _ in range(2):
            for q in qcols:
                c = v[0] * q[0] + v[1] * q[1] + v[2] * q[2] + v[3] * q[3]
                v[0] -= c * q[0]
                v[1] -= c * q[1]
                v[2] -= c * q[2]
                v[3] -= c * q[3]
        nrm = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3])
        if nrm < _R_FLOOR:
            degenerate = True
            rdiag[j] = _R_FLOOR
            qcols.append(_complete_column(qcols))
        else:
            rdiag[j] = nrm
            inv = 1.0 / nrm
            qcols.append([v[0] * inv, v[1] * inv, v[2] * inv, v[3] * inv])
    return qcols, rdiag, degenerate


def _frame_error(qcols):
    err = 0.0
    for a in range(4):
        qa = qcols[a]
        for b in range(4):
            qb = qcols[b]
            d = qa[0] * qb[0] + qa[1] * qb[1] + qa[2] * qb[2] + qa[3] * qb[3]
            if a == b:
                d -= 1.0
            if abs(d) > err:
                err = abs(d)
    return err


def lyapunov_spectrum(
    cfg: SystemConfig,
    n: int,
    delta: float = 1e-6,
    orthonormal_tol: float | None = None,
) -> LyapunovResult:
    """Estimate all four Lyapunov exponents over n post-burn-in steps.

    delta is the finite-difference perturbation (0 < delta <= 1e-4).
    If orthonormal_tol is given, the tangent frame is verified to stay
    orthonormal to that tolerance after every re-orthonormalization.

    Raises NonFiniteStateError if stepping leaves the reals and
    DegenerateJacobianError if QR pivots underflow on more than 1% of
    iterations.
    """
    if n < 100:
        raise ValueError(f"n must be >= 100, got {n}")
    if not (0.0 < delta <= 1e-4):
        raise ValueError(f"delta must be in (0, 1e-4], got {delta}")
    step_fn = _engine(cfg)
    s = tuple(cfg.initial)
    qcols = [[1.0 if i == j else 0.0 for i in range(4)] for j in range(4)]
    sums = [0.0, 0.0, 0.0, 0.0]
    degenerate_steps = 0
    i = 0
    try:
        for i in range(cfg.burn_in):
            s = step_fn(*s)
        for i in range(cfg.burn_in, cfg.burn_in + n):
            base = step_fn(*s)
            rows = _jacobian_rows(step_fn, s, base, delta)
            zcols = [
                [
                    rows[0][0] * q[0] + rows[0][1] * q[1] + rows[0][2] * q[2] + rows[0][3] * q[3],
                    rows[1][0] * q[0] + rows[1][1] * q[1] + rows[1][2] * q[2] + rows[1][3] * q[3],
                    rows[2][0] * q[0] + rows[2][1] * q[1] + rows[2][2] * q[2] + rows[2][3] * q[3],
                    rows[3][0] * q[0] + rows[3][1] * q[1] + rows[3][2] * q[2] + rows[3][3] * q[3],
                ]
                for q in qcols
            ]
            qcols, rdiag, degen = _mgs4(zcols)
            if degen:
                degenerate_steps += 1
            sums[0] += math.log(rdiag[0])
            sums[1] += math.log(rdiag[1])
            sums[2] += math.log(rdiag[2])
            sums[3] += math.log(rdiag[3])
            if orthonormal_tol is not None:
                err = _frame_error(qcols)
                if err > orthonormal_tol:
                    raise ArithmeticError(
                        f"tangent frame lost orthonormality: {err:.3e} > {orthonormal_tol:.3e}"
                    )
            s = base
    except NonFiniteStateError as exc:
        exc.iteration = i
        raise
    if degenerate_steps > 0.01 * n:
        raise DegenerateJacobianError(
            f"QR pivot underflowed on {degenerate_steps}/{n} iterations"
        )
    lambdas = tuple(sorted((acc / n for acc in sums), reverse=True))
    return LyapunovResult(lambdas=lambdas, iterations_used=n, r=cfg.r)


def classify(res: LyapunovResult, tol: float = 0.01) -> Classification:
    """Chaotic if the largest exponent exceeds tol, periodic if below
    -tol, bifurcation inside the dead band (floating-point exponents are
    never exactly zero)."""
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    lam1 = res.lambdas[0]
    if lam1 > tol:
        return Classification.CHAOTIC
    if lam1 < -tol:
        return Classification.PERIODIC
    return Classification.BIFURCATION


# --- bifurcation -------------------------------------------------------

def _scan_one(task):
    cfg, keep, coord = task
    try:
        traj = generate(cfg, keep)
    except NonFiniteStateError as exc:
        return cfg.r, None, BifurcationSkip(cfg.r, exc.component, exc.branch, exc.iteration)
    return cfg.r, traj.coord(coord), None


def bifurcation_scan(
    cfg: SystemConfig,
    r_lo: float,
    r_hi: float,
    steps: int,
    keep: int,
    coord: str = "x",
    jobs: int | None = None,
) -> BifurcationData:
    """Long-run attractor samples of one coordinate over an r grid.

    For each of `steps` evenly spaced r values in [r_lo, r_hi], run the
    system with cfg's burn-in and record the last `keep` values of the
    chosen coordinate. r values where stepping leaves the reals go on
    the skip list instead of failing the scan; only a scan in which
    every r fails raises. jobs > 1 distributes r values over worker
    processes (results are merged in r order either way).
    """
    if coord not in COORDS:
        raise ValueError(f"coord must be one of {COORDS}, got {coord!r}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if keep < 1:
        raise ValueError(f"keep must be >= 1, got {keep}")
    if not (0.0 < r_lo <= r_hi <= 1.2):
        raise ValueError(f"need 0 < r_lo <= r_hi <= 1.2, got {r_lo}..{r_hi}")
    if steps >= 2 and r_lo == r_hi:
        raise ValueError("r_lo must be < r_hi for a multi-point sweep")

    tasks = [(replace(cfg, r=float(rv)), keep, coord) for rv in np.linspace(r_lo, r_hi, steps)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_one, tasks, chunksize=max(1, steps // (8 * jobs))))
    else:
        results = [_scan_one(t) for t in tasks]

    rs, vals, skipped = [], [], []
    for rv, values, skip in results:
        if skip is not None:
            skipped.append(skip)
        else:
            rs.append(np.full(len(values), rv))
            vals.append(values)
    if not rs:
        raise ScanFailedError(
            f"bifurcation scan failed at every r value ({len(skipped)} of {steps} skipped)"
        )
    points = np.column_stack([np.concatenate(rs), np.concatenate(vals)])
    return BifurcationData(points=points, skipped=tuple(skipped), coord=coord)


# --- orbit/distribution diagnostics -------------------------------------

def staircase(seq: Sequence[float] | np.ndarray) -> np.ndarray:
    """Cobweb staircase for an orbit s0, s1, ..., sn:
    (s0,s0), (s0,s1), (s1,s1), (s1,s2), ... - 2n+1 points alternating
    between vertical and horizontal segments."""
    seq = np.asarray(seq, dtype=np.float64)
    n = len(seq) - 1
    if n < 1:
        raise ValueError("staircase needs at least two orbit values")
    points = np.empty((2 * n + 1, 2))
    points[0] = (seq[0], seq[0])
    points[1::2, 0] = seq[:-1]
    points[1::2, 1] = seq[1:]
    points[2::2, 0] = seq[1:]
    points[2::2, 1] = seq[1:]
    return points


def cobweb(cfg: SystemConfig, coord: str, n: int) -> CobwebData:
    """Staircase data for n transitions of one coordinate of the orbit."""
    if coord not in COORDS:
        raise ValueError(f"coord must be one of {COORDS}, got {coord!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return CobwebData(points=staircase(generate(cfg, n + 1).coord(coord)), coord=coord)


def histogram(values: Sequence[float] | np.ndarray, bins: int) -> Histogram:
    """Count values into `bins` uniform half-open bins of [0, 1)."""
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("values must be a non-empty 1D sequence")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() >= 1.0:
        raise ValueError("values must lie in [0, 1)")
    idx = np.minimum((arr * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(bin_count=bins, counts=counts, total=int(arr.size))


def chi_square_uniformity(h: Histogram) -> ChiSquareResult:
    """Pearson chi-square statistic against the uniform distribution,
    with dof = bin_count - 1. Requires total >= 5 * bin_count."""
    if h.total < 5 * h.bin_count:
        raise TooFewSamplesError(
            f"need at least {5 * h.bin_count} samples for {h.bin_count} bins, got {h.total}"
        )
    expected = h.total / h.bin_count
    stat = float((((h.counts - expected) ** 2) / expected).sum())
    return ChiSquareResult(statistic=stat, dof=h.bin_count - 1)


def scatter_pairs(traj: Trajectory, a: str, b: str) -> np.ndarray:
    """(state.a, state.b) for every state, order preserved; a != b."""
    if a == b:
        raise ValueError("scatter coordinates must differ")
    for c in (a, b):
        if c not in COORDS:
            raise ValueError(f"coord must be one of {COORDS}, got {c!r}")
    return np.column_stack([traj.coord(a), traj.coord(b)])
