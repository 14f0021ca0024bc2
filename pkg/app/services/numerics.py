"""
Numerics Service

This module provides the floating-point verification layer: dense complex
eigenvalues, the leading splitting exponent near nu = 0 and holonomy loops
that track eigenvalues around (or through) the exceptional point.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import linear_sum_assignment
from scipy.stats import linregress

from app.config import settings
from app.errors import InputError, NumericalError
from app.tools.charpoly import ParametricMatrix, eval_matrix
from app.tools.poly import BiPoly

# Set up logging
logger = logging.getLogger(__name__)

Source = Union[ParametricMatrix, BiPoly]
Spectrum = Callable[[complex], np.ndarray]


def eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """
    All eigenvalues of a dense complex matrix, with multiplicity.

    LAPACK geev balances, reduces to Hessenberg form and runs shifted QR.

    Args:
        matrix: Square complex array

    Returns:
        Array of n complex eigenvalues
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"eigenvalues need a square matrix, got shape {a.shape}")
    if a.shape[0] > settings.EIGEN_MAX_DIM:
        raise InputError(f"matrix dimension {a.shape[0]} exceeds EIGEN_MAX_DIM={settings.EIGEN_MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix contains non-finite entries")
    try:
        return scipy.linalg.eigvals(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"QR iteration did not converge: {e}; no partial results", partial=None) from e


def polynomial_roots(p: BiPoly, nu: complex) -> np.ndarray:
    """Roots in lambda of p(nu, .) by the companion eigenvalue method."""
    coefficients = np.array([p.lambda_coefficient(i)(nu) for i in range(p.lambda_degree + 1)])
    if not np.any(coefficients):
        raise NumericalError(f"p(nu, lambda) vanishes identically at nu={nu}")
    return np.roots(coefficients[::-1])


def spectrum_of(source: Source) -> Spectrum:
    """Map nu to the spectrum: eigenvalues for a matrix, roots for a polynomial."""
    if isinstance(source, ParametricMatrix):
        return lambda nu: eigenvalues(eval_matrix(source, nu))
    if isinstance(source, BiPoly):
        if source.lambda_degree < 1:
            raise InputError("polynomial has no lambda dependence")
        return lambda nu: polynomial_roots(source, nu)
    raise InputError(f"cannot take a spectrum of {type(source).__name__}")


def max_splitting(values: np.ndarray) -> float:
    values = np.asarray(values)
    if len(values) < 2:
        return 0.0
    return float(np.max(np.abs(values[:, None] - values[None, :])))


def root_valuations(p: BiPoly, nu: complex) -> np.ndarray:
    """log|lambda_j| / log|nu| for the non-zero numeric roots of p(nu, .)."""
    roots = polynomial_roots(p, nu)
    roots = roots[np.abs(roots) > 0]
    return np.log(np.abs(roots)) / math.log(abs(nu))


class DecadeRange(BaseModel):
    """Splitting samples at nu = 10^-k for k_min <= k <= k_max."""

    model_config = ConfigDict(extra="forbid")

    k_min: int = Field(default_factory=lambda: settings.DECADE_MIN, ge=0, description="First decade")
    k_max: int = Field(default_factory=lambda: settings.DECADE_MAX, description="Last decade")

    @model_validator(mode="after")
    def _check_span(self) -> "DecadeRange":
        if self.k_max - self.k_min < 3:
            raise ValueError("splitting samples must span at least 3 decades")
        return self

    @classmethod
    def parse(cls, text: str) -> "DecadeRange":
        """Read ``k_min,k_max``."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 2:
            raise InputError(f"--decades expects k_min,k_max, got {text!r}")
        try:
            return cls(k_min=int(parts[0]), k_max=int(parts[1]))
        except ValueError as e:
            raise InputError(f"invalid --decades {text!r}: {e}") from e

    def nus(self) -> np.ndarray:
        return 10.0 ** -np.arange(self.k_min, self.k_max + 1, dtype=float)


@dataclass(frozen=True)
class SplittingFit:
    exponent: float
    stderr: float
    intercept: float
    samples: Tuple[Tuple[float, float], ...]  # (nu, max pairwise splitting)


def splitting_exponent(source: Source, decades: Optional[DecadeRange] = None) -> SplittingFit:
    """
    Fit the leading exponent of the eigenvalue splitting near nu = 0.

    The largest pairwise eigenvalue distance is sampled at nu = 10^-k and
    the slope of log(splitting) against log(nu) is found by least squares.

    Args:
        source: Parametric matrix or characteristic polynomial
        decades: Decade range (defaults from settings)

    Returns:
        SplittingFit with exponent and its standard error
    """
    decades = decades or DecadeRange()
    spectrum = spectrum_of(source)
    nus = decades.nus()
    splits = np.array([max_splitting(spectrum(complex(nu))) for nu in nus])
    samples = tuple((float(nu), float(s)) for nu, s in zip(nus, splits))

    usable = splits >= settings.SPLITTING_FLOOR
    if not usable.any():
        raise NumericalError("degenerate or constant spectrum", partial=samples)
    if usable.sum() < 3:
        raise NumericalError(
            f"only {int(usable.sum())} samples above the splitting floor {settings.SPLITTING_FLOOR}",
            partial=samples,
        )

    fit = linregress(np.log10(nus[usable]), np.log10(splits[usable]))
    logger.info(f"Splitting exponent {fit.slope:.4f} ± {fit.stderr:.4f} over decades {decades.k_min}..{decades.k_max}")
    return SplittingFit(exponent=float(fit.slope), stderr=float(fit.stderr),
                        intercept=float(fit.intercept), samples=samples)


class LoopMode(str, Enum):
    ENCLOSING = "enclosing"
    TOUCHING = "touching"


class LoopOptions(BaseModel):
    """Loop parameters as given on the command line or in a run config."""

    model_config = ConfigDict(extra="forbid")

    radius: float = Field(default_factory=lambda: settings.LOOP_RADIUS, gt=0, description="Loop radius c")
    samples: int = Field(default_factory=lambda: settings.LOOP_SAMPLES, description="Samples K")
    mode: LoopMode = Field(default=LoopMode.ENCLOSING, description="enclosing or touching")

    @model_validator(mode="after")
    def _check_samples(self) -> "LoopOptions":
        if self.samples < settings.LOOP_MIN_SAMPLES:
            raise ValueError(f"a loop needs at least {settings.LOOP_MIN_SAMPLES} samples")
        return self

    @classmethod
    def parse(cls, text: str) -> "LoopOptions":
        """Read ``c,K,mode``."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 3:
            raise InputError(f"--loop expects c,K,mode, got {text!r}")
        try:
            return cls(radius=float(parts[0]), samples=int(parts[1]), mode=parts[2])
        except ValueError as e:
            raise InputError(f"invalid --loop {text!r}: {e}") from e


@dataclass(frozen=True)
class LoopSpec:
    source: Source
    radius: float
    samples: int
    mode: LoopMode = LoopMode.ENCLOSING

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError(f"loop radius must be positive, got {self.radius}")
        if self.samples < settings.LOOP_MIN_SAMPLES:
            raise InputError(f"a loop needs at least {settings.LOOP_MIN_SAMPLES} samples, got {self.samples}")
        object.__setattr__(self, "mode", LoopMode(self.mode))

    @classmethod
    def from_options(cls, source: Source, options: LoopOptions) -> "LoopSpec":
        return cls(source=source, radius=options.radius, samples=options.samples, mode=options.mode)

    def points(self, samples: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Loop angles psi_k and the nu values on the loop."""
        count = samples or self.samples
        if self.mode is LoopMode.ENCLOSING:
            psi = 2.0 * np.pi * np.arange(count) / count
            return psi, self.radius * np.exp(1j * psi)
        psi = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return psi, self.radius * (1.0 - np.exp(1j * psi))


@dataclass(frozen=True)
class HolonomyResult:
    permutation: Tuple[int, ...]
    trajectories: np.ndarray  # shape (K, n); column j follows eigenvalue j
    psi: np.ndarray
    petal_count: Optional[int]
    samples: int
    step_ratio: float
    mode: LoopMode
    ep_value: Optional[complex] = None  # lambda_EP of a touching loop

    def cycles(self) -> List[Tuple[int, ...]]:
        return cycle_decomposition(self.permutation)

    def cycle_type(self) -> List[int]:
        return sorted(len(cycle) for cycle in self.cycles())


def cycle_decomposition(permutation: Sequence[int]) -> List[Tuple[int, ...]]:
    """Disjoint cycles of a permutation given as an image list, fixed points included."""
    if sorted(permutation) != list(range(len(permutation))):
        raise InputError(f"{list(permutation)} is not a permutation")
    seen = set()
    cycles = []
    for start in range(len(permutation)):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        current = permutation[start]
        while current != start:
            cycle.append(current)
            seen.add(current)
            current = permutation[current]
        cycles.append(tuple(cycle))
    return cycles


def cycle_notation(permutation: Sequence[int]) -> str:
    return "".join("(" + " ".join(str(j) for j in cycle) + ")" for cycle in cycle_decomposition(permutation))


def _match(previous: np.ndarray, current: np.ndarray, tol: float) -> np.ndarray:
    """
    Minimum-total-distance assignment of ``current`` onto ``previous``.

    Returns cols with current[cols[j]] continuing trajectory j. Raises when
    swapping two assignments changes the total cost by less than ``tol``.
    """
    cost = np.abs(previous[:, None] - current[None, :])
    _, cols = linear_sum_assignment(cost)
    for a in range(len(cols)):
        for b in range(a + 1, len(cols)):
            if abs(current[cols[a]] - current[cols[b]]) <= tol:
                continue
            delta = cost[a, cols[b]] + cost[b, cols[a]] - cost[a, cols[a]] - cost[b, cols[b]]
            if delta < tol:
                raise NumericalError("ambiguous eigenvalue matching along the loop; increase K")
    return cols


def degenerate_cluster(values: np.ndarray) -> Tuple[complex, np.ndarray]:
    """
    Centre and member indices of the most degenerate eigenvalue cluster.

    A defective block of size m is resolved only to about eps^(1/m), so
    eigenvalues closer than scale * (1e6 eps)^(1/n) count as one.
    """
    values = np.asarray(values, dtype=complex)
    n = len(values)
    scale = max(1.0, float(np.abs(values).max()))
    tol = scale * (1e6 * np.finfo(float).eps) ** (1.0 / n)
    close = np.abs(values[:, None] - values[None, :]) <= tol
    members = np.flatnonzero(close[int(np.argmax(close.sum(axis=1)))])
    return complex(values[members].mean()), members


def _count_petals(trajectories: np.ndarray, start: np.ndarray, share: float) -> Tuple[int, Optional[complex]]:
    """
    Lobes traced around lambda_EP by the branches leaving the degenerate cluster.

    Only points at least ``share`` of the largest excursion away are kept, so
    faster-vanishing branches drop out; the petal count is the number of
    angular groups of the kept points around lambda_EP.
    """
    center, members = degenerate_cluster(start)
    if len(members) < 2:
        return 0, None
    # branch cols[r] continues from the nu = 0 eigenvalue start[r]
    _, cols = linear_sum_assignment(np.abs(start[:, None] - trajectories[0][None, :]))
    offsets = (trajectories[:, cols[members]] - center).ravel()
    distance = np.abs(offsets)
    if distance.max() <= 0:
        return 0, center
    angles = np.sort(np.angle(offsets[distance >= share * distance.max()]))
    gaps = np.diff(np.append(angles, angles[0] + 2.0 * np.pi))
    # N petals of width pi/N leave gaps of pi/N, and N <= len(members)
    petals = int(np.count_nonzero(gaps > np.pi / (2 * len(members))))
    return max(1, petals), center


def _trace(spectrum: Spectrum, spec: LoopSpec, samples: int) -> HolonomyResult:
    psi, nus = spec.points(samples)
    frames = [np.asarray(spectrum(complex(nu))) for nu in nus]
    n = len(frames[0])
    if any(len(frame) != n for frame in frames):
        raise NumericalError("the number of eigenvalues changes along the loop")

    tol = settings.MATCH_AMBIGUITY_TOL
    tracks = np.empty((samples, n), dtype=complex)
    tracks[0] = frames[0]
    for t in range(1, samples):
        tracks[t] = frames[t][_match(tracks[t - 1], frames[t], tol)]

    steps = np.abs(np.diff(tracks, axis=0)).ravel()
    if spec.mode is LoopMode.ENCLOSING:
        closing = _match(tracks[-1], frames[0], tol)
        permutation = tuple(int(j) for j in closing)
        steps = np.concatenate([steps, np.abs(frames[0][closing] - tracks[-1])])
        petals, center = None, None
    else:
        permutation = tuple(range(n))
        petals, center = _count_petals(tracks, np.asarray(spectrum(0j)), settings.PETAL_RADIUS_SHARE)

    median = float(np.median(steps)) if len(steps) else 0.0
    largest = float(steps.max()) if len(steps) else 0.0
    ratio = 1.0 if largest == 0 else (math.inf if median == 0 else largest / median)
    return HolonomyResult(
        permutation=permutation,
        trajectories=tracks,
        psi=psi,
        petal_count=petals,
        samples=samples,
        step_ratio=ratio,
        mode=spec.mode,
        ep_value=center,
    )


def holonomy_trace(spec: LoopSpec) -> HolonomyResult:
    """
    Track the spectrum around a loop in the nu plane.

    Consecutive frames are matched by optimal assignment. An enclosing loop
    reports the permutation picked up on closing and is retried with twice
    the samples while the largest step exceeds CONTINUITY_FACTOR times the
    median step. A touching loop passes through nu = 0, closes every branch
    at the degenerate eigenvalue of nu = 0 and counts the petals traced
    around it instead.

    Args:
        spec: Loop description

    Returns:
        HolonomyResult
    """
    spectrum = spectrum_of(spec.source)
    samples = spec.samples
    logger.info(f"Tracing {spec.mode.value} loop, c={spec.radius}, K={samples}")
    while True:
        result = _trace(spectrum, spec, samples)
        if spec.mode is LoopMode.TOUCHING or result.step_ratio < settings.CONTINUITY_FACTOR:
            break
        if samples * 2 > settings.LOOP_MAX_SAMPLES:
            raise NumericalError(
                f"eigenvalue trajectories are not continuous at K={samples} "
                f"(step ratio {result.step_ratio:.1f}); increase K",
                partial=result,
            )
        logger.warning(f"Step ratio {result.step_ratio:.1f} at K={samples}, doubling samples")
        samples *= 2

    logger.info(f"Holonomy permutation {cycle_notation(result.permutation)}, petals {result.petal_count}")
    return result
