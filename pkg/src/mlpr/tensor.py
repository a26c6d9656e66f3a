"""Third-order stochastic tensors, their flattening, and instance generation.

A third-order tensor P with nonnegative entries whose first-index fibers
sum to one is stored through its n-by-n^2 flattening R.  Column layout is
fixed once and for all:

    column c = (k - 1) * n + j   (1-based)   holds the fiber P[:, j, k],

i.e. the third tensor index k varies slowest and the second index j varies
fastest within each block of n columns.  Consequently the Kronecker vector
paired with R is (x (x) y)[c] = x_k * y_j: the FIRST factor of the product
walks the slow index.  Mixing up this convention silently computes the
transposed problem, so every contraction in the package goes through
:func:`apply_bilinear` or the cube view defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidAlphaError,
    ShapeError,
    StochasticityError,
    ZeroStateError,
)

#: Absolute tolerance on column/fiber/vector sums that must equal one.
STOCHASTIC_TOL = 1e-12

_MASK64 = (1 << 64) - 1
_MULT = 2685821657736338717
#: State substituted for seed 0, which the xorshift update cannot accept.
SEED_ZERO_STATE = 0x9E3779B97F4A7C15


# ---------------------------------------------------------------------------
# Deterministic generator: xorshift64* (three-shift update, multiply output)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrngState:
    """Immutable 64-bit generator state; zero is not a valid state."""

    state: int

    def __post_init__(self):
        if not 0 < self.state <= _MASK64:
            raise ZeroStateError(
                f"generator state must be a nonzero 64-bit integer, got {self.state}"
            )


def seed_state(seed: int) -> PrngState:
    """Map an arbitrary integer seed to a valid generator state.

    The seed is reduced modulo 2^64; seed 0 maps to ``SEED_ZERO_STATE``.
    """
    state = seed & _MASK64
    if state == 0:
        state = SEED_ZERO_STATE
    return PrngState(state)


def _step(state: int) -> tuple[int, float]:
    state ^= state >> 12
    state ^= (state << 25) & _MASK64
    state ^= state >> 27
    word = (state * _MULT) & _MASK64
    return state, (word >> 11) * 2.0**-53


def prng_next(s: PrngState) -> tuple[PrngState, float]:
    """Advance the generator one step and return (new state, uniform in [0, 1))."""
    state, value = _step(s.state)
    return PrngState(state), value


# The state update is linear over GF(2), so jumping ahead k steps is a
# 64x64 bit-matrix power.  That lets long streams be produced in parallel
# lanes while remaining bit-identical to sequential prng_next calls.

def _update_images() -> list[int]:
    images = []
    for b in range(64):
        st, _ = _step(1 << b)
        images.append(st)
    return images


def _mat_apply(m: list[int], s: int) -> int:
    out = 0
    b = 0
    while s:
        if s & 1:
            out ^= m[b]
        s >>= 1
        b += 1
    return out


def _mat_pow(m: list[int], k: int) -> list[int]:
    result = [1 << b for b in range(64)]  # identity
    while k:
        if k & 1:
            result = [_mat_apply(m, w) for w in result]
        m = [_mat_apply(m, w) for w in m]
        k >>= 1
    return result


_JUMP_BASE = _update_images()


def prng_stream(s: PrngState, count: int, lanes: int = 4096) -> tuple[PrngState, np.ndarray]:
    """Generate ``count`` uniforms, bit-identical to chained :func:`prng_next`.

    Internally splits the stream into up to ``lanes`` jump-ahead lanes and
    advances them with vectorized 64-bit arithmetic; the stitched output and
    the returned final state match the sequential generator exactly.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return s, np.empty(0)
    lanes = max(1, min(lanes, count))
    per_lane = -(-count // lanes)

    jump = _mat_pow(_JUMP_BASE, per_lane)
    heads = np.empty(lanes, dtype=np.uint64)
    st = s.state
    for lane in range(lanes):
        heads[lane] = st
        st = _mat_apply(jump, st)

    sh12, sh25, sh27, sh11 = (np.uint64(k) for k in (12, 25, 27, 11))
    mult = np.uint64(_MULT)
    states = heads.copy()
    out = np.empty((lanes, per_lane))
    for t in range(per_lane):
        states ^= states >> sh12
        states ^= states << sh25
        states ^= states >> sh27
        out[:, t] = ((states * mult) >> sh11).astype(np.float64)
    out *= 2.0**-53

    final = _mat_apply(_mat_pow(_JUMP_BASE, count), s.state)
    return PrngState(final), out.reshape(-1)[:count]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FlattenedTensor:
    """Dense n-by-n^2 flattening R of a third-order stochastic tensor.

    The constructor takes ownership of ``entries`` and freezes it in place;
    instances are immutable and safe to share across threads.
    """

    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        n = self.n
        if n < 1:
            raise ShapeError(f"dimension must be positive, got {n}")
        if entries.shape != (n, n * n):
            raise ShapeError(
                f"flattening must have shape ({n}, {n * n}), got {entries.shape}"
            )
        if (entries < 0).any():
            raise ValueError("flattening entries must be nonnegative")
        sums = entries.sum(axis=0)
        dev = np.abs(sums - 1.0)
        worst = int(dev.argmax())
        if dev[worst] > STOCHASTIC_TOL:
            raise StochasticityError(
                f"column {worst + 1} sums to {sums[worst]!r}, not 1 within "
                f"{STOCHASTIC_TOL}",
                index=worst + 1,
            )
        object.__setattr__(self, "entries", _freeze(np.ascontiguousarray(entries)))

    @property
    def cube(self) -> np.ndarray:
        """Zero-copy view with axes [i, k, j]: cube[i, k, j] = P[i+1, j+1, k+1]."""
        return self.entries.reshape(self.n, self.n, self.n)


@dataclass(frozen=True)
class ProblemInstance:
    """One multilinear PageRank problem x = alpha*R(x(x)x) + (1-alpha)*v.

    ``alpha`` may be None for problem data whose damping factor is supplied
    at solve time; operations that need it raise InvalidAlphaError then.
    """

    tensor: FlattenedTensor
    alpha: float | None
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.alpha is not None and not 0.0 <= self.alpha < 1.0:
            raise InvalidAlphaError(f"alpha must lie in [0, 1), got {self.alpha}")
        v = np.asarray(self.v, dtype=np.float64)
        if v.shape != (self.tensor.n,):
            raise DimensionMismatchError(
                f"v must have length {self.tensor.n}, got shape {v.shape}"
            )
        if (v < 0).any():
            raise ValueError("v must be nonnegative")
        total = v.sum()
        if abs(total - 1.0) > STOCHASTIC_TOL:
            raise StochasticityError(f"v sums to {total!r}, not 1 within {STOCHASTIC_TOL}")
        object.__setattr__(self, "v", _freeze(np.ascontiguousarray(v)))

    @property
    def n(self) -> int:
        return self.tensor.n

    def require_alpha(self) -> float:
        if self.alpha is None:
            raise InvalidAlphaError(
                "this problem carries no alpha; supply one (e.g. via with_alpha)"
            )
        return self.alpha

    def with_alpha(self, alpha: float) -> "ProblemInstance":
        """Same tensor and v under a different damping factor."""
        return ProblemInstance(self.tensor, alpha, self.v)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def flatten_tensor(p: np.ndarray) -> FlattenedTensor:
    """Flatten a cubic array P[i, j, k] along its first index.

    Every fiber P[:, j, k] must sum to one within ``STOCHASTIC_TOL``.
    The result satisfies R[i, (k-1)*n + j] = P[i, j, k] (1-based).
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or len(set(p.shape)) != 1:
        raise ShapeError(f"expected a cubic n*n*n array, got shape {p.shape}")
    n = p.shape[0]
    fiber_sums = p.sum(axis=0)
    dev = np.abs(fiber_sums - 1.0)
    if (dev > STOCHASTIC_TOL).any():
        j, k = np.unravel_index(int(dev.argmax()), dev.shape)
        raise StochasticityError(
            f"fiber P[:, {j + 1}, {k + 1}] sums to {fiber_sums[j, k]!r}, "
            f"not 1 within {STOCHASTIC_TOL}",
            index=k * n + j + 1,
        )
    # axes (i, k, j) so that k is the slow column index
    entries = p.transpose(0, 2, 1).reshape(n, n * n)
    return FlattenedTensor(n, entries)


def apply_bilinear(r: FlattenedTensor, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Contract the tensor against two vectors: result_i = sum P_ijk x_k y_j.

    The first argument pairs with the slow Kronecker index, so
    ``apply_bilinear(r, x, y) == r.entries @ kron(x, y)`` with (x (x) y) in
    the layout documented at module level.  With x == y this is the
    quadratic term of the PageRank map.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (r.n,) or y.shape != (r.n,):
        raise DimensionMismatchError(
            f"expected two vectors of length {r.n}, got {x.shape} and {y.shape}"
        )
    return r.entries @ np.multiply.outer(x, y).reshape(-1)


def generate_random_problem(
    n: int, seed: int, alpha: float | None = None
) -> ProblemInstance:
    """Generate the standard dense random instance for a given (n, seed).

    The flattening is filled with uniform draws in column-major order
    (column 1 top to bottom, then column 2, ...), each column is divided by
    its sum, and v = e/n.  The result is a deterministic, platform-independent
    function of (n, seed).
    """
    if n < 1:
        raise ShapeError(f"dimension must be positive, got {n}")
    if alpha is not None and not 0.0 <= alpha < 1.0:
        raise InvalidAlphaError(f"alpha must lie in [0, 1), got {alpha}")
    _, draws = prng_stream(seed_state(seed), n * n * n)
    entries = np.ascontiguousarray(draws.reshape(n * n, n).T)
    entries /= entries.sum(axis=0)
    v = np.full(n, 1.0 / n)
    return ProblemInstance(FlattenedTensor(n, entries), alpha, v)
