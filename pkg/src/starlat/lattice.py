"""Nested cubic lattice codec for compute-and-forward style sum decoding.

A pair of scaled integer lattices: coarse q*Z^dim for shaping (power
control) and fine (q/M)*Z^dim carrying the data, M = nesting_ratio.
Messages are digit vectors in {0..M-1}^dim; one complex channel use is
two real dimensions, so a pair built for complex power P puts P/2 in
each real dimension and carries 2*log2(M) bits per complex use.

Cubic lattices keep every operation exact and O(dim).  They give away
the shaping and coding gains of high-dimensional lattices, which is why
sizing takes a `margin` factor: the fine cell's second moment is set to
margin times the MMSE residual noise rather than equal to it.

All cell conventions are half-open [-q/2, q/2) with quantizer ties
broken toward -inf, so results are bit-exact across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NestedLatticePair",
    "RateUnderflowError",
    "all_codewords",
    "build_pair",
    "codeword_from_digits",
    "codeword_from_index",
    "digits_from_codeword",
    "draw_dither",
    "encode",
    "encode_digits",
    "equivalent_noise_power",
    "extract_own",
    "index_from_codeword",
    "mmse_gamma",
    "mod_coarse",
    "quantize_fine",
    "sum_decode",
]


class RateUnderflowError(ValueError):
    """The snr cannot support even the smallest nontrivial codebook."""


@dataclass(frozen=True)
class NestedLatticePair:
    """Coarse cell [-q/2, q/2)^dim holding an M-per-axis fine grid."""

    dim: int
    coarse_step: float
    nesting_ratio: int

    @property
    def fine_step(self) -> float:
        return self.coarse_step / self.nesting_ratio

    @property
    def power_per_dim(self) -> float:
        """Second moment of the coarse cell, q^2/12."""
        return self.coarse_step ** 2 / 12.0

    @property
    def fine_second_moment(self) -> float:
        return self.fine_step ** 2 / 12.0

    @property
    def codebook_size(self) -> int:
        return self.nesting_ratio ** self.dim

    @property
    def bits_per_complex_use(self) -> float:
        # dim real dims = dim/2 complex uses, log2(M^dim) bits total
        return 2.0 * math.log2(self.nesting_ratio)


def build_pair(dim: int, power: float, noise: float, k_summands: int = 3,
               margin: float = 1.0, round_up: bool = False) -> NestedLatticePair:
    """Size a nested pair for decoding a k-summand sum under AWGN.

    `power` and `noise` are per complex channel use; each real dimension
    gets half of each.  The coarse cell is matched to the power budget
    (q = sqrt(12*P_d)) and the nesting ratio is the largest M whose fine
    cell second moment stays above margin times the MMSE residual
    k*P_d*N_d/(k*P_d+N_d), i.e. M = floor(sqrt(P_d/(margin*residual))).

    round_up switches floor to ceil and drops the margin >= 1 check;
    both deliberately size past the reliable point, for stress tests.

    Raises RateUnderflowError when even M=2 does not fit.
    """
    if dim < 2 or dim % 2 != 0:
        raise ValueError(f"dim must be even and >= 2, got {dim}")
    if power <= 0.0 or noise <= 0.0:
        raise ValueError("power and noise must be positive")
    if k_summands not in (2, 3):
        raise ValueError(f"k_summands must be 2 or 3, got {k_summands}")
    if margin <= 0.0 or (margin < 1.0 and not round_up):
        raise ValueError(f"margin must be >= 1 unless round_up is set, got {margin}")
    p_d = power / 2.0
    n_d = noise / 2.0
    residual = k_summands * p_d * n_d / (k_summands * p_d + n_d)
    raw = math.sqrt(p_d / (margin * residual))
    ratio = math.ceil(raw) if round_up else math.floor(raw)
    if ratio < 2:
        raise RateUnderflowError(
            f"rate underflow: snr {power / noise:.4g} supports nesting ratio "
            f"{ratio} < 2 at margin {margin:g} with {k_summands} summands")
    return NestedLatticePair(dim=dim, coarse_step=math.sqrt(12.0 * p_d),
                             nesting_ratio=ratio)


# ----------------------------------------------------------------------
# lattice operations
# ----------------------------------------------------------------------

def mod_coarse(x: np.ndarray, pair: NestedLatticePair) -> np.ndarray:
    """Reduce into the half-open coarse cell [-q/2, q/2) per coordinate."""
    q = pair.coarse_step
    x = np.asarray(x, dtype=np.float64)
    return x - q * np.floor(x / q + 0.5)


def quantize_fine(x: np.ndarray, pair: NestedLatticePair) -> np.ndarray:
    """Nearest fine-lattice point reduced mod the coarse lattice.

    Ties go toward -inf, so the exact midpoint between two fine points
    snaps to the lower one.
    """
    s = pair.fine_step
    x = np.asarray(x, dtype=np.float64)
    return mod_coarse(s * np.ceil(x / s - 0.5), pair)


def codeword_from_digits(digits: np.ndarray, pair: NestedLatticePair) -> np.ndarray:
    """Map digit vector in {0..M-1}^dim to its in-cell fine point."""
    return mod_coarse(pair.fine_step * np.asarray(digits, dtype=np.float64), pair)


def digits_from_codeword(codeword: np.ndarray, pair: NestedLatticePair) -> np.ndarray:
    digits = np.rint(np.asarray(codeword) / pair.fine_step).astype(np.int64)
    return np.mod(digits, pair.nesting_ratio)


def codeword_from_index(index: int, pair: NestedLatticePair) -> np.ndarray:
    """Mixed-radix expansion of index (base M, least significant first)."""
    if not 0 <= index < pair.codebook_size:
        raise ValueError(f"index {index} outside codebook of size {pair.codebook_size}")
    m = pair.nesting_ratio
    digits = np.empty(pair.dim, dtype=np.int64)
    for i in range(pair.dim):
        index, digits[i] = divmod(index, m)
    return codeword_from_digits(digits, pair)


def index_from_codeword(codeword: np.ndarray, pair: NestedLatticePair) -> int:
    digits = digits_from_codeword(codeword, pair)
    index = 0
    for d in digits[::-1]:
        index = index * pair.nesting_ratio + int(d)
    return index


def all_codewords(pair: NestedLatticePair) -> np.ndarray:
    """Full codebook, shape (M^dim, dim).  Small pairs only."""
    if pair.codebook_size > 1 << 20:
        raise ValueError(f"codebook of size {pair.codebook_size} is too large to enumerate")
    return np.stack([codeword_from_index(i, pair) for i in range(pair.codebook_size)])


def draw_dither(rng: np.random.Generator, pair: NestedLatticePair,
                count: int | None = None) -> np.ndarray:
    """Uniform dither(s) over the coarse cell; shape (dim,) or (count, dim)."""
    half = pair.coarse_step / 2.0
    shape = (pair.dim,) if count is None else (count, pair.dim)
    return rng.uniform(-half, half, size=shape)


def encode_digits(digits: np.ndarray, dither: np.ndarray,
                  pair: NestedLatticePair) -> np.ndarray:
    """Transmit signal (codeword - dither) mod coarse.

    With dither uniform over the cell the output is too (crypto lemma),
    so per-dimension transmit power is exactly q^2/12 on average.
    """
    return mod_coarse(codeword_from_digits(digits, pair) - dither, pair)


def encode(index: int, dither: np.ndarray, pair: NestedLatticePair) -> np.ndarray:
    """encode_digits for a message given as a codebook index."""
    return mod_coarse(codeword_from_index(index, pair) - dither, pair)


def sum_decode(received: np.ndarray, dithers: np.ndarray, gamma: float,
               pair: NestedLatticePair) -> np.ndarray:
    """Estimate the mod-coarse sum of the transmitted codewords.

    Scales the received vector by gamma, adds back the senders' dithers,
    and snaps to the fine lattice: quantize_fine(gamma*y + sum(dithers)).
    Noiseless with gamma=1 this is exact for any number of summands.

    dithers: array (k, dim), one row per summed transmitter.
    """
    dithers = np.asarray(dithers, dtype=np.float64)
    if dithers.ndim != 2 or dithers.shape[1] != pair.dim:
        raise ValueError(f"dithers must have shape (k, {pair.dim})")
    return quantize_fine(mod_coarse(gamma * np.asarray(received, dtype=np.float64)
                                    + dithers.sum(axis=0), pair), pair)


def extract_own(sum_hat: np.ndarray, others_sum: np.ndarray,
                pair: NestedLatticePair) -> np.ndarray:
    """Peel a known partial sum off a decoded sum codeword.

    mod_coarse(sum_hat - others_sum), snapped to the fine lattice to
    shed float dust.  With correct inputs this is exactly the remaining
    codeword, by the group structure of the quotient.
    """
    return quantize_fine(mod_coarse(np.asarray(sum_hat) - np.asarray(others_sum),
                                    pair), pair)


# ----------------------------------------------------------------------
# MMSE scaling
# ----------------------------------------------------------------------

def mmse_gamma(k: int, power: float, noise: float) -> float:
    """Scale minimizing the residual noise when decoding a k-summand sum."""
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    return k * power / (k * power + noise)


def equivalent_noise_power(gamma: float, k: int, power: float, noise: float) -> float:
    """Residual power gamma^2*N + k*P*(1-gamma)^2 after scaling by gamma.

    Minimized at mmse_gamma, where it equals k*P*N/(k*P+N).  Units
    follow the inputs (use per-dimension P, N for per-dimension output).
    """
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    return gamma * gamma * noise + k * power * (1.0 - gamma) ** 2
