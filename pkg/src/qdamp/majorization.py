"""Majorization-based Haar-likeness diagnostics.

For a probability vector P over d outcomes, sort in descending order and
take prefix sums C(k) = sum_{j<=k} P_sorted(j).  Across an ensemble of
states at a fixed circuit depth, the per-k population standard deviation of
these cumulants,

    SDL(k) = sqrt(E[C(k)^2] - E[C(k)]^2),

forms a signature whose distance to the signature of Haar-random states,

    D = || SDL - SDL_Haar ||_2,

is the scalar convergence diagnostic used throughout this package.  Haar
states are sampled exactly as normalized complex Gaussian vectors, whose
measurement probabilities are uniform on the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyEnsembleError,
    NotAProbabilityVectorError,
)

# Entries of probability vectors may dip this far below zero before the
# input is rejected; smaller excursions are clamped to exactly zero.
PROB_FLOOR = -1e-12

# Total probability must match 1 to this tolerance.
TOTAL_TOL = 1e-10

# Negative variance radicands up to this size are treated as rounding noise
# and clamped to zero; anything worse raises.
VARIANCE_FLOOR = -1e-12


def cumulants_batch(probs: np.ndarray) -> np.ndarray:
    """Descending-sorted prefix sums for each row of a batch of distributions.

    Each row is validated (entries >= -1e-12, total within 1e-10 of 1) and
    its cumulant vector is normalized by the final prefix sum, so C(d) is
    exactly 1.0 for every sample and the last SDL coordinate is exactly
    zero.  Ties in the sort do not affect the result.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2:
        raise DimensionMismatchError(f"expected a 2d batch, got shape {p.shape}")
    lo = float(p.min()) if p.size else 0.0
    if lo < PROB_FLOOR:
        raise NotAProbabilityVectorError(f"entry {lo} is negative beyond tolerance")
    p = np.clip(p, 0.0, None)
    totals = p.sum(axis=1)
    bad = np.abs(totals - 1.0) > TOTAL_TOL
    if bad.any():
        raise NotAProbabilityVectorError(
            f"probabilities sum to {totals[bad][0]}, expected 1 within {TOTAL_TOL}"
        )
    c = np.cumsum(np.sort(p, axis=1)[:, ::-1], axis=1)
    c /= c[:, -1:]
    return c


def cumulants(p: np.ndarray) -> np.ndarray:
    """Cumulant vector of a single probability distribution."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"expected a 1d vector, got shape {arr.shape}")
    return cumulants_batch(arr[None, :])[0]


class MomentAccumulator:
    """Running (count, sum, sum of squares) over arrays of one shape.

    Merging two accumulators adds their triples, so ensemble statistics can
    be reduced associatively over independently processed blocks; folding
    blocks in a fixed order makes the reduction bit-reproducible regardless
    of how the blocks were scheduled.
    """

    def __init__(self, shape):
        self.count = 0
        self.s1 = np.zeros(shape)
        self.s2 = np.zeros(shape)

    def add(self, values: np.ndarray) -> None:
        """Fold in one sample of the accumulator's shape."""
        self.s1 += values
        self.s2 += values * values
        self.count += 1

    def add_batch(self, batch: np.ndarray) -> None:
        """Fold in a batch with shape (m, *shape)."""
        self.s1 += batch.sum(axis=0)
        self.s2 += (batch * batch).sum(axis=0)
        self.count += batch.shape[0]

    def merge(self, other: "MomentAccumulator") -> None:
        if other.s1.shape != self.s1.shape:
            raise DimensionMismatchError(
                f"cannot merge shapes {other.s1.shape} and {self.s1.shape}"
            )
        self.count += other.count
        self.s1 += other.s1
        self.s2 += other.s2

    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise EmptyEnsembleError("no samples accumulated")
        return self.s1 / self.count

    def std(self) -> np.ndarray:
        """Population standard deviation sqrt(E[x^2] - E[x]^2), clamped at 0.

        The radicand may round slightly negative where the true variance is
        zero; values down to -1e-12 are clamped and anything below raises.
        """
        if self.count < 2:
            raise EmptyEnsembleError(
                f"need at least 2 samples for a spread, got {self.count}"
            )
        mean = self.s1 / self.count
        rad = self.s2 / self.count - mean * mean
        worst = float(rad.min())
        if worst < VARIANCE_FLOOR:
            raise ValueError(f"variance radicand {worst} below {VARIANCE_FLOOR}")
        np.clip(rad, 0.0, None, out=rad)
        return np.sqrt(rad)

    def state(self) -> tuple[int, np.ndarray, np.ndarray]:
        return self.count, self.s1.copy(), self.s2.copy()

    @classmethod
    def from_state(cls, count: int, s1: np.ndarray, s2: np.ndarray) -> "MomentAccumulator":
        acc = cls(s1.shape)
        acc.count = int(count)
        acc.s1[...] = s1
        acc.s2[...] = s2
        return acc


@dataclass
class SDLSignature:
    """Per-k cumulant standard deviations of one ensemble at one depth."""

    depth: int
    sdl: np.ndarray


def ensemble_sdl(cumulant_vectors, depth: int) -> SDLSignature:
    """SDL signature of a collection of cumulant vectors.

    Uses the population form sqrt(E[C^2] - E[C]^2) with no Bessel
    correction.  Needs at least two members of equal length.
    """
    arr = np.asarray(cumulant_vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(
            f"expected a 2d collection of cumulant vectors, got shape {arr.shape}"
        )
    if arr.shape[0] < 2:
        raise EmptyEnsembleError(f"need at least 2 members, got {arr.shape[0]}")
    acc = MomentAccumulator(arr.shape[1])
    acc.add_batch(arr)
    return SDLSignature(depth, acc.std())


def haar_state(rng: np.random.Generator, d: int) -> np.ndarray:
    """One Haar-random pure state in dimension d, as a unit amplitude vector.

    A complex standard-normal vector normalized to unit length is exactly
    Haar distributed (the Gaussian measure is unitarily invariant), and its
    measurement probabilities are uniform on the probability simplex.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def haar_probs_batch(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """Measurement probabilities of m Haar states, shape (m, d)."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    z = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    p = z.real**2 + z.imag**2
    p /= p.sum(axis=1, keepdims=True)
    return p


@dataclass
class HaarReference:
    """Frozen SDL signature of a seeded Haar ensemble in dimension d."""

    d: int
    m_haar: int
    seed: int
    sdl: np.ndarray

    def to_json_doc(self) -> dict:
        return {
            "d": self.d,
            "m_haar": self.m_haar,
            "seed": self.seed,
            "sdl": [float(x) for x in self.sdl],
        }

    @classmethod
    def from_json_doc(cls, doc: dict) -> "HaarReference":
        return cls(
            d=int(doc["d"]),
            m_haar=int(doc["m_haar"]),
            seed=int(doc["seed"]),
            sdl=np.asarray(doc["sdl"], dtype=np.float64),
        )


# Haar sampling proceeds in fixed-size blocks so the stream of RNG draws,
# and hence the reference, never depends on available memory or workers.
_HAAR_BLOCK = 4096


def haar_reference(d: int, m_haar: int, seed: int) -> HaarReference:
    """SDL signature of m_haar Haar states in dimension d; deterministic per seed."""
    if m_haar < 2:
        raise EmptyEnsembleError(f"need at least 2 Haar samples, got {m_haar}")
    rng = np.random.Generator(np.random.PCG64(seed))
    acc = MomentAccumulator(d)
    left = m_haar
    while left > 0:
        block = min(_HAAR_BLOCK, left)
        acc.add_batch(cumulants_batch(haar_probs_batch(rng, block, d)))
        left -= block
    return HaarReference(d, m_haar, seed, acc.std())


def distance_to_haar(signature: SDLSignature, ref: HaarReference) -> float:
    """Euclidean distance between an SDL signature and the Haar reference."""
    if signature.sdl.shape != ref.sdl.shape:
        raise DimensionMismatchError(
            f"signature has length {signature.sdl.shape} but reference has {ref.sdl.shape}"
        )
    return float(np.linalg.norm(signature.sdl - ref.sdl))
