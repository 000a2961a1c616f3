"""Pointwise bootstrap of a pattern and its closed-form variance limit.

A resample is encoded by occurrence counts w = (w(1), ..., w(n)): the
``multinomial`` scheme draws w ~ Multinomial(n; 1/n, ..., 1/n) (classic
with-replacement resampling of all n points), the ``poissonized`` scheme
draws w(i) i.i.d. Poisson(1), equivalent to resampling a Poisson(n)
number of points.

As the number of resamples N grows, the usual variance estimator over
the bootstrap statistics converges, conditionally on the pattern, to

    alpha4 * Q4 + 4 * alpha3 * T3 + 2 * alpha2 * R,

where Q4, T3, R are the distinct-index sums of the pattern and the
alpha coefficients are moment differences of the weights that depend
only on n and the scheme.  ``bootstrap_variance_limit`` evaluates this
directly, with no simulation; ``multinomial_moment_oracle`` provides
exact rational weight moments for verifying the alpha polynomials.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError, UndefinedMomentError
from .geometry import PointPattern
from .rng import RngSeed, chunk_sizes
from .twopoint import PairFunction, distinct_index_sums

SCHEMES = ("multinomial", "poissonized")


def _check_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown resampling scheme {scheme!r}; use one of {SCHEMES}")
    return scheme


@dataclass(frozen=True)
class WeightVector:
    """Occurrence counts of each original point in one resample."""

    w: np.ndarray
    scheme: str

    def __post_init__(self) -> None:
        w = np.ascontiguousarray(np.asarray(self.w, dtype=np.int64))
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        _check_scheme(self.scheme)
        if np.any(w < 0):
            raise ParameterError("weights must be nonnegative integers")
        if self.scheme == "multinomial" and w.sum() != len(w):
            raise ParameterError("multinomial weights must sum to n")

    @property
    def n(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class AlphaCoefficients:
    """The three weight-moment differences scaling R, T3 and Q4.

    ``n`` is None for the n -> infinity (equivalently poissonized)
    case, where (alpha2, alpha3, alpha4) = (3, 1, 0) exactly.
    """

    alpha2: float
    alpha3: float
    alpha4: float
    n: int | None
    scheme: str


def draw_weights(n: int, scheme: str, seed: RngSeed) -> WeightVector:
    """One resample weight vector for a pattern of n points."""
    _check_scheme(scheme)
    if n < 1:
        raise ParameterError(f"need n >= 1 to resample, got {n}")
    rng = seed.generator()
    if scheme == "multinomial":
        w = rng.multinomial(n, np.full(n, 1.0 / n))
    else:
        w = rng.poisson(1.0, n)
    return WeightVector(w, scheme)


def bootstrap_statistic(pattern: PointPattern, f: PairFunction, weights: WeightVector) -> float:
    """Weighted double sum sum_{i != j} f(x_i, x_j) w(i) w(j).

    Indices, not locations, must differ: two resampled copies of the
    same point pair across distinct indices only.
    """
    if weights.n != pattern.n:
        raise ParameterError(f"weight length {weights.n} != pattern size {pattern.n}")
    if pattern.n <= 1:
        return 0.0
    mat = f.pair_matrix(pattern.points)
    w = weights.w.astype(float)
    return float(w @ mat @ w)


def _batched_bootstrap_statistics(
    mat: np.ndarray, n: int, scheme: str, seed: RngSeed, count: int, first_index: int
) -> np.ndarray:
    """Statistics for resamples first_index .. first_index+count-1, one substream per draw."""
    w_block = np.empty((count, n))
    prob = np.full(n, 1.0 / n)
    for j in range(count):
        rng = seed.substream(first_index + j).generator()
        if scheme == "multinomial":
            w_block[j] = rng.multinomial(n, prob)
        else:
            w_block[j] = rng.poisson(1.0, n)
    return np.einsum("ki,ij,kj->k", w_block, mat, w_block, optimize=True)


def bootstrap_variance(
    pattern: PointPattern,
    f: PairFunction,
    n_resamples: int,
    scheme: str,
    seed: RngSeed,
    threads: int = 1,
) -> float:
    """Sample variance of the bootstrap statistic over N independent resamples.

    Two-pass (mean, then squared deviations) for stability; resample k
    always uses substream k of the seed, so the result is identical for
    any thread count.
    """
    _check_scheme(scheme)
    if n_resamples < 2:
        raise ParameterError(f"need at least 2 resamples, got {n_resamples}")
    stats = bootstrap_statistics(pattern, f, n_resamples, scheme, seed, threads=threads)
    return float(np.var(stats, ddof=1))


def bootstrap_statistics(
    pattern: PointPattern,
    f: PairFunction,
    n_resamples: int,
    scheme: str,
    seed: RngSeed,
    threads: int = 1,
    chunk: int = 4096,
) -> np.ndarray:
    """All N bootstrap statistics, in resample order (deterministic given seed)."""
    _check_scheme(scheme)
    if n_resamples < 1:
        raise ParameterError(f"need at least 1 resample, got {n_resamples}")
    if pattern.n == 0:
        return np.zeros(n_resamples)
    mat = f.pair_matrix(pattern.points)
    sizes = chunk_sizes(n_resamples, chunk)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)

    def run_chunk(c: int) -> np.ndarray:
        return _batched_bootstrap_statistics(mat, pattern.n, scheme, seed, sizes[c], int(starts[c]))

    from .rng import parallel_map

    blocks = parallel_map(run_chunk, len(sizes), threads=threads)
    return np.concatenate(blocks) if blocks else np.zeros(0)


def multinomial_moment_oracle(n: int, exponents: tuple[int, ...]) -> Fraction:
    """Exact E[w(1)^a1 * ... * w(m)^am] for w ~ Multinomial(n; 1/n each).

    Counts outcomes by the joint distribution of the first m coordinates
    (symmetry-reduced enumeration of the n^n equiprobable assignments).
    Intended as a small-n test oracle; cost grows like n^m.
    """
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    exps = tuple(int(a) for a in exponents)
    if not exps or any(a < 1 for a in exps):
        raise ParameterError(f"exponents must be positive integers, got {exponents}")
    m = len(exps)
    if m > n:
        raise UndefinedMomentError(f"moment uses {m} distinct categories but only n={n} draws")
    n_fact = math.factorial(n)
    total = 0
    # c_i = 0 contributes nothing since every exponent is >= 1
    for counts in itertools.product(range(1, n + 1), repeat=m):
        s = sum(counts)
        if s > n:
            continue
        ways = n_fact
        for c in counts:
            ways //= math.factorial(c)
        ways //= math.factorial(n - s)
        ways *= (n - m) ** (n - s)
        value = 1
        for c, a in zip(counts, exps):
            value *= c**a
        total += value * ways
    return Fraction(total, n**n)


def alpha_fractions_from_moments(n: int) -> tuple[Fraction, Fraction, Fraction]:
    """(alpha2, alpha3, alpha4) for the multinomial scheme, from the moment oracle only."""
    e_ww = multinomial_moment_oracle(n, (1, 1))
    alpha2 = multinomial_moment_oracle(n, (2, 2)) - e_ww**2
    alpha3 = multinomial_moment_oracle(n, (2, 1, 1)) - e_ww**2
    alpha4 = multinomial_moment_oracle(n, (1, 1, 1, 1)) - e_ww**2
    return alpha2, alpha3, alpha4


def alpha_polynomials_exact(n: int) -> tuple[Fraction, Fraction, Fraction]:
    """Closed-form (alpha2, alpha3, alpha4) for the multinomial scheme at finite n."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    n3 = Fraction(n**3)
    alpha2 = Fraction(3 * n**3 - 11 * n**2 + 14 * n - 6) / n3
    alpha3 = Fraction(n**3 - 7 * n**2 + 12 * n - 6) / n3
    alpha4 = Fraction(-4 * n**2 + 10 * n - 6) / n3
    return alpha2, alpha3, alpha4


def alpha_coefficients(n: int | None, scheme: str) -> AlphaCoefficients:
    """Alpha coefficients for a pattern of n points under the given scheme.

    The poissonized scheme (or n=None, the n -> infinity limit) gives
    exactly (3, 1, 0).
    """
    _check_scheme(scheme)
    if scheme == "poissonized" or n is None:
        return AlphaCoefficients(3.0, 1.0, 0.0, None if n is None else int(n), scheme)
    a2, a3, a4 = alpha_polynomials_exact(int(n))
    return AlphaCoefficients(float(a2), float(a3), float(a4), int(n), scheme)


def bootstrap_variance_limit(pattern: PointPattern, f: PairFunction, scheme: str) -> float:
    """The N -> infinity limit of the bootstrap variance estimator, simulation-free.

    Combines the pattern's distinct-index sums with the scheme's alpha
    coefficients: alpha4*Q4 + 4*alpha3*T3 + 2*alpha2*R.
    """
    _check_scheme(scheme)
    if pattern.n < 2:
        return 0.0
    sums = distinct_index_sums(pattern, f)
    alphas = alpha_coefficients(pattern.n, scheme)
    return alphas.alpha4 * sums.Q4 + 4.0 * alphas.alpha3 * sums.T3 + 2.0 * alphas.alpha2 * sums.R
