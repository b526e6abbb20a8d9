"""Shared data model: runs, cross-correlation matrices, matches, reports.

All containers are immutable after construction (arrays are marked
read-only) and validate their invariants in ``__post_init__``, so a value
that exists is a valid value.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonFiniteError,
    RaggedRunsError,
    RankDeficientError,
    TooFewRunsError,
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RunCollection:
    """K decomposition runs, each holding n_C component maps of length n.

    ``maps`` is a (K, n_C, n) array; map (run r, component c) is
    ``maps[r, c]``. Indices are zero-based internally; one-based in all
    human-facing output.
    """

    maps: np.ndarray

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.float64)
        if maps.ndim != 3:
            raise RaggedRunsError(f"expected a (K, n_C, n) array, got ndim={maps.ndim}")
        K, n_C, n = maps.shape
        if K < 2:
            raise TooFewRunsError(f"need at least 2 runs, got {K}")
        if n_C < 1:
            raise RaggedRunsError("need at least 1 component per run")
        if n <= 1:
            raise RaggedRunsError(f"map length must exceed 1, got {n}")
        if not np.isfinite(maps).all():
            raise NonFiniteError("component maps contain non-finite values")
        object.__setattr__(self, "maps", _freeze(maps))

    @property
    def K(self) -> int:
        return self.maps.shape[0]

    @property
    def n_C(self) -> int:
        return self.maps.shape[1]

    @property
    def n(self) -> int:
        return self.maps.shape[2]

    def flat_maps(self) -> np.ndarray:
        """All K*n_C maps stacked; flat index = run * n_C + component."""
        return self.maps.reshape(self.K * self.n_C, self.n)


def validate_run_collection(runs) -> RunCollection:
    """Build a RunCollection from nested lists/arrays, checking shape and
    finiteness. Raises RaggedRunsError / NonFiniteError / TooFewRunsError."""
    if len(runs) < 2:
        raise TooFewRunsError(f"need at least 2 runs, got {len(runs)}")
    per_run = []
    for r, run in enumerate(runs):
        maps = [np.asarray(m, dtype=np.float64) for m in run]
        if any(m.ndim != 1 for m in maps):
            raise RaggedRunsError(f"run {r + 1} contains a non-vector map")
        per_run.append(maps)
    n_C = len(per_run[0])
    lengths = {m.shape[0] for run in per_run for m in run}
    if any(len(run) != n_C for run in per_run) or len(lengths) != 1:
        raise RaggedRunsError("all runs must share n_C and map length n")
    return RunCollection(np.array([np.stack(run) for run in per_run]))


@dataclass(frozen=True)
class Crcm:
    """Cross-realization correlation matrix over K runs of n_C components.

    ``matrix`` is the (K*n_C, K*n_C) matrix of absolute correlations with
    the K within-run diagonal blocks zeroed; ``full`` keeps the same
    correlations with diagonal blocks intact, which is what permutation
    nulls re-partition.
    """

    K: int
    n_C: int
    matrix: np.ndarray
    full: np.ndarray

    def __post_init__(self):
        N = self.K * self.n_C
        matrix = np.asarray(self.matrix, dtype=np.float64)
        full = np.asarray(self.full, dtype=np.float64)
        if matrix.shape != (N, N) or full.shape != (N, N):
            raise RaggedRunsError(f"expected {(N, N)} matrices")
        if not (np.isfinite(matrix).all() and np.isfinite(full).all()):
            raise NonFiniteError("correlation matrix contains non-finite values")
        if matrix.min() < 0.0 or matrix.max() > 1.0:
            raise ValueError("correlation entries must lie in [0, 1]")
        if not np.array_equal(matrix, matrix.T):
            raise ValueError("correlation matrix must be symmetric")
        for r in range(self.K):
            sl = slice(r * self.n_C, (r + 1) * self.n_C)
            if matrix[sl, sl].any():
                raise ValueError("within-run diagonal blocks must be zero")
        object.__setattr__(self, "matrix", _freeze(matrix))
        object.__setattr__(self, "full", _freeze(full))

    def block(self, l: int, m: int) -> np.ndarray:
        """The n_C x n_C block of correlations between runs l and m."""
        i = slice(l * self.n_C, (l + 1) * self.n_C)
        j = slice(m * self.n_C, (m + 1) * self.n_C)
        return self.matrix[i, j]


@dataclass(frozen=True)
class MatchedComponent:
    """One aligned component per run plus its cross-run similarity.

    ``members[r] = (run_index, component_index, sign)`` with one member per
    run; the anchor member carries sign +1.
    """

    members: tuple
    anchor: tuple  # (run_index, component_index) of the anchor member
    similarity: np.ndarray
    reproducibility: float

    def __post_init__(self):
        K = len(self.members)
        runs = sorted(m[0] for m in self.members)
        if runs != list(range(K)):
            raise ValueError("members must contain exactly one entry per run")
        if any(m[2] not in (1, -1) for m in self.members):
            raise ValueError("signs must be +1 or -1")
        anchor_sign = next(m[2] for m in self.members if (m[0], m[1]) == tuple(self.anchor))
        if anchor_sign != 1:
            raise ValueError("anchor member must carry sign +1")
        H = np.asarray(self.similarity, dtype=np.float64)
        if H.shape != (K, K):
            raise ValueError(f"similarity matrix must be {K}x{K}")
        if H.min() < 0.0 or H.max() > 1.0 + 1e-12:
            raise ValueError("similarity entries must lie in [0, 1]")
        if not np.allclose(H, H.T, atol=1e-12) or not np.allclose(np.diag(H), 1.0):
            raise ValueError("similarity must be symmetric with unit diagonal")
        if not 0.0 <= self.reproducibility <= 1.0 + 1e-12:
            raise ValueError("reproducibility must lie in [0, 1]")
        object.__setattr__(self, "members", tuple(tuple(m) for m in self.members))
        object.__setattr__(self, "similarity", _freeze(H))
        object.__setattr__(self, "reproducibility", float(self.reproducibility))


@dataclass(frozen=True)
class ReproducibilityReport:
    """Matched components sorted by descending reproducibility, with the
    pooled null sample, p-values, and significance flags."""

    matched: tuple
    null_sample: np.ndarray
    p_values: np.ndarray
    p_crit: float
    significant: np.ndarray

    def __post_init__(self):
        reps = [mc.reproducibility for mc in self.matched]
        if any(b > a + 1e-12 for a, b in zip(reps, reps[1:])):
            raise ValueError("matched components must be sorted by descending reproducibility")
        p = np.asarray(self.p_values, dtype=np.float64)
        if p.shape != (len(self.matched),):
            raise ValueError("one p-value per matched component required")
        if (p <= 0).any() or (p > 1).any():
            raise ValueError("p-values must lie in (0, 1]")
        if any(b < a - 1e-15 for a, b in zip(p, p[1:])):
            raise ValueError("p-values must be non-decreasing down the ranking")
        sig = np.asarray(self.significant, dtype=bool)
        if not np.array_equal(sig, p < self.p_crit):
            raise ValueError("significance flags must equal p < p_crit")
        object.__setattr__(self, "matched", tuple(self.matched))
        object.__setattr__(self, "null_sample", _freeze(self.null_sample))
        object.__setattr__(self, "p_values", _freeze(p))
        sig = sig.copy()
        sig.setflags(write=False)
        object.__setattr__(self, "significant", sig)

    @property
    def n_C(self) -> int:
        return len(self.matched)


@dataclass(frozen=True)
class IcaModel:
    """Estimated noisy linear-mixture model: Y ~ mu + A S + noise.

    The source covariance is fixed to the identity, so all scale lives in
    the mixing matrix A.
    """

    mu: np.ndarray
    A: np.ndarray
    S: np.ndarray
    sigma2: float
    q: int
    converged: bool = True

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        S = np.asarray(self.S, dtype=np.float64)
        mu = np.asarray(self.mu, dtype=np.float64)
        p = mu.shape[0]
        if A.shape != (p, self.q) or S.shape[0] != self.q:
            raise RaggedRunsError("inconsistent model shapes")
        if not self.q < p:
            raise RankDeficientError(f"model order q={self.q} must be < p={p}")
        if np.linalg.matrix_rank(A) < self.q:
            raise RankDeficientError("mixing matrix is rank deficient")
        if self.sigma2 < 0:
            raise ValueError("noise variance must be non-negative")
        if np.abs(S.mean(axis=1)).max() > 1e-6 * max(1.0, np.abs(S).max()):
            raise ValueError("source rows must have zero mean")
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "S", _freeze(S))
