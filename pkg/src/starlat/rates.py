"""Closed-form exchange-rate analysis for the two-phase star relay network.

Three source-sink pairs sit around a single half-duplex relay.  In the
multiple-access phase (fraction ``delta1`` of the block) the three sources
transmit simultaneously; in the broadcast phase (fraction ``delta2``) the
relay transmits alone.  Every node has the same power, every link sees
complex circular-symmetric noise, and ``snr`` is the per-link ratio P/N.
All logarithms are base 2; rates are bits per complex channel use.

The common (exchange) rate R supported by all three pairs obeys, with
L1 = log2(1+snr) and L3 = log2(1+3*snr):

  cut-set bound       R <= min(delta1*L1, delta2*L3)
                      optimized: L1*L3/(L1+L3) at delta1 = L3/(L1+L3)
  decode-and-forward  R < min(min(delta1,delta2)*L1,
                              (delta1/2)*log2(1+2*snr), (delta1/3)*L3)
                      optimized: L1*L3/(3*L1+L3) at delta1 = 3*L1/(3*L1+L3)
  amplify-and-forward fixed delta1 = delta2 = 1/2, relay gain
                      a^2 = snr/(1+3*snr); three-term minimum, see
                      af_exchange
  lattice (compute-and-forward style)
                      R < delta1*log2(1/3+snr) while the broadcast phase
                      can carry the sum index; optimized: L1*Ll/(L1+Ll)
                      with Ll = log2(1/3+snr), zero for snr <= 2/3
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "ASYMPTOTIC_LATTICE_GAP",
    "GapSummary",
    "PhaseSplit",
    "RateCurvePoint",
    "SnrPoint",
    "af_exchange",
    "af_exchange_terms",
    "curve_point",
    "df_exchange",
    "df_exchange_optimal",
    "df_two_r_slack",
    "gap_report",
    "lattice_exchange",
    "lattice_exchange_optimal",
    "ub_exchange",
    "ub_exchange_optimal",
    "ub_sum_constraints",
]

# High-snr limit of (optimized cut-set bound - optimized lattice rate).
ASYMPTOTIC_LATTICE_GAP = math.log2(3.0) / 4.0

# Lattice rate is zero at or below this snr: log2(1/3 + snr) <= 0.
LATTICE_ZERO_SNR = 2.0 / 3.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    if linear == 0.0:
        return -math.inf
    return 10.0 * math.log10(linear)


@dataclass(frozen=True)
class SnrPoint:
    """Linear signal-to-noise ratio P/N (unitless, >= 0)."""

    linear: float

    def __post_init__(self):
        if not (self.linear >= 0.0 and math.isfinite(self.linear)):
            raise ValueError(f"snr must be finite and >= 0, got {self.linear}")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(db_to_linear(db))

    @property
    def db(self) -> float:
        return linear_to_db(self.linear)


@dataclass(frozen=True)
class PhaseSplit:
    """Relative phase durations; delta2 is always derived as 1 - delta1."""

    delta1: float

    def __post_init__(self):
        if not 0.0 <= self.delta1 <= 1.0:
            raise ValueError(f"delta1 must lie in [0, 1], got {self.delta1}")

    @property
    def delta2(self) -> float:
        return 1.0 - self.delta1


@dataclass(frozen=True)
class RateCurvePoint:
    """All strategy rates, optimal splits, and gaps at one snr."""

    snr: SnrPoint
    ub: float
    df: float
    af: float
    lattice: float
    ub_split: PhaseSplit
    df_split: PhaseSplit
    lattice_split: PhaseSplit
    best_of_three: float
    gap_lattice: float
    gap_best: float


@dataclass(frozen=True)
class GapSummary:
    """Worst-case gaps over an snr grid, plus the high-snr tail point."""

    grid_points: int
    max_gap_lattice: float
    argmax_snr_lattice: float
    max_gap_best: float
    argmax_snr_best: float
    tail_snr: float
    tail_gap_lattice: float
    asymptote: float


# ----------------------------------------------------------------------
# cut-set outer bound
# ----------------------------------------------------------------------

def ub_exchange(snr: float, delta1: float) -> float:
    """Cut-set bound on the exchange rate at a fixed phase split.

    min(delta1*log2(1+snr), delta2*log2(1+3*snr)): the first term cuts
    one source off from the network, the second cuts one sink off from
    the relay it must hear.
    """
    delta2 = 1.0 - delta1
    return min(delta1 * math.log2(1.0 + snr),
               delta2 * math.log2(1.0 + 3.0 * snr))


def ub_sum_constraints(snr: float, delta1: float) -> tuple[float, float]:
    """Cut-set caps on 2R and 3R at a fixed split.

    Returns (two_r_cap, three_r_cap).  Both are implied by the
    single-rate bound: 2*ub_exchange <= two_r_cap and
    3*ub_exchange <= three_r_cap for every (snr, split).
    """
    delta2 = 1.0 - delta1
    log1 = math.log2(1.0 + snr)
    log3 = math.log2(1.0 + 3.0 * snr)
    two_r = min(delta1 * math.log2(1.0 + 4.0 * snr + 3.0 * snr * snr),
                2.0 * delta1 * log1 + delta2 * log3)
    three_r = min(delta1 * math.log2((1.0 + snr) ** 2 * (1.0 + 7.0 * snr)),
                  delta1 * math.log2((1.0 + snr) ** 2 * (1.0 + 4.0 * snr))
                  + delta2 * log3)
    return two_r, three_r


def ub_exchange_optimal(snr: float) -> tuple[float, PhaseSplit]:
    """Cut-set bound maximized over the phase split.

    The two branches of ub_exchange are linear in delta1 with opposite
    slopes, so the optimum equalizes them: rate L1*L3/(L1+L3) at
    delta1 = L3/(L1+L3).  snr=0 returns (0, delta1=1/2) by convention.
    """
    if snr == 0.0:
        return 0.0, PhaseSplit(0.5)
    log1 = math.log2(1.0 + snr)
    log3 = math.log2(1.0 + 3.0 * snr)
    return log1 * log3 / (log1 + log3), PhaseSplit(log3 / (log1 + log3))


# ----------------------------------------------------------------------
# decode-and-forward
# ----------------------------------------------------------------------

def df_exchange(snr: float, delta1: float) -> float:
    """Decode-and-forward exchange rate at a fixed split.

    The relay must decode all three messages in phase 1 (single, pair
    and triple sum-rate constraints) and each sink must receive its own
    message in phase 2.
    """
    delta2 = 1.0 - delta1
    return min(min(delta1, delta2) * math.log2(1.0 + snr),
               (delta1 / 2.0) * math.log2(1.0 + 2.0 * snr),
               (delta1 / 3.0) * math.log2(1.0 + 3.0 * snr))


def df_exchange_optimal(snr: float) -> tuple[float, PhaseSplit]:
    """DF rate maximized over the split: L1*L3/(3*L1+L3).

    The closed form equalizes the triple sum-rate constraint against the
    broadcast constraint and assumes the pair constraint stays slack at
    that point; df_two_r_slack exposes the margin so the assumption can
    be checked.  snr=0 returns (0, delta1=3/4) by convention.
    """
    if snr == 0.0:
        return 0.0, PhaseSplit(0.75)
    log1 = math.log2(1.0 + snr)
    log3 = math.log2(1.0 + 3.0 * snr)
    rate = log1 * log3 / (3.0 * log1 + log3)
    return rate, PhaseSplit(3.0 * log1 / (3.0 * log1 + log3))


def df_two_r_slack(snr: float) -> float:
    """Margin of the DF pair constraint at the optimal split.

    Returns (delta1/2)*log2(1+2*snr) - rate, evaluated at the
    df_exchange_optimal split.  Positive slack means the pair constraint
    does not bind there, so the closed form is valid.
    """
    rate, split = df_exchange_optimal(snr)
    return (split.delta1 / 2.0) * math.log2(1.0 + 2.0 * snr) - rate


# ----------------------------------------------------------------------
# amplify-and-forward
# ----------------------------------------------------------------------

def af_exchange_terms(snr: float) -> tuple[float, float, float]:
    """The three rate constraints of the AF scheme at delta1 = 1/2.

    The relay forwards an analog copy scaled to its own power budget
    (gain a^2 = snr/(1+3*snr)), so each sink sees a two-observation
    Gaussian channel; the constraints come from the single, pair, and
    triple cuts of that channel.
    """
    c = snr / (1.0 + 4.0 * snr)
    t1 = 0.5 * math.log2(1.0 + c * snr)
    t2 = 0.25 * math.log2(1.0 + ((1.0 + 6.0 * snr) / (1.0 + 4.0 * snr)) * snr
                          + c * snr * snr)
    t3 = (1.0 / 6.0) * math.log2(1.0 + ((2.0 + 11.0 * snr) / (1.0 + 4.0 * snr)) * snr
                                 + 2.0 * c * snr * snr)
    return t1, t2, t3


def af_exchange(snr: float) -> float:
    """Amplify-and-forward exchange rate (split fixed at 1/2)."""
    return min(af_exchange_terms(snr))


# ----------------------------------------------------------------------
# nested-lattice scheme
# ----------------------------------------------------------------------

def lattice_exchange(snr: float, delta1: float) -> float:
    """Lattice exchange rate at a fixed split, clamped at 0.

    Phase 1 supports delta1*log2(1/3+snr) for sum decoding at the relay;
    phase 2 must carry the sum's index, capping the rate at
    delta2*log2(1+snr).  The log2(1/3+snr) term is negative for
    snr < 2/3, where the scheme yields nothing.
    """
    delta2 = 1.0 - delta1
    return max(0.0, min(delta1 * math.log2(1.0 / 3.0 + snr),
                        delta2 * math.log2(1.0 + snr)))


def lattice_exchange_optimal(snr: float) -> tuple[float, PhaseSplit]:
    """Lattice rate maximized over the split: L1*Ll/(L1+Ll).

    Ll = log2(1/3+snr).  For snr <= 2/3 the rate is 0 and the split is
    delta1=1 by convention (the limit of the optimizer from above).
    """
    if snr <= LATTICE_ZERO_SNR:
        return 0.0, PhaseSplit(1.0)
    log1 = math.log2(1.0 + snr)
    logl = math.log2(1.0 / 3.0 + snr)
    return log1 * logl / (log1 + logl), PhaseSplit(log1 / (log1 + logl))


# ----------------------------------------------------------------------
# curve assembly and gap analysis
# ----------------------------------------------------------------------

def curve_point(snr: float) -> RateCurvePoint:
    """Evaluate every strategy at its optimal split for one snr."""
    ub, ub_split = ub_exchange_optimal(snr)
    df, df_split = df_exchange_optimal(snr)
    af = af_exchange(snr)
    lattice, lattice_split = lattice_exchange_optimal(snr)
    best = max(df, af, lattice)
    return RateCurvePoint(
        snr=SnrPoint(snr),
        ub=ub, df=df, af=af, lattice=lattice,
        ub_split=ub_split, df_split=df_split, lattice_split=lattice_split,
        best_of_three=best,
        gap_lattice=ub - lattice,
        gap_best=ub - best,
    )


def gap_report(snr_grid: Sequence[float]) -> GapSummary:
    """Worst-case gaps of the lattice and best-of-three rates over a grid.

    Args:
        snr_grid: nonempty, ascending linear snr values.

    Returns:
        GapSummary with the max lattice gap and best-of-three gap (and
        their argmax snr), plus the lattice gap at the top grid point for
        comparison against the high-snr limit log2(3)/4.
    """
    if len(snr_grid) == 0:
        raise ValueError("snr grid is empty")
    if any(b < a for a, b in zip(snr_grid, snr_grid[1:])):
        raise ValueError("snr grid must be sorted ascending")
    max_lat = max_best = -1.0
    arg_lat = arg_best = snr_grid[0]
    for snr in snr_grid:
        point = curve_point(snr)
        if point.gap_lattice > max_lat:
            max_lat, arg_lat = point.gap_lattice, snr
        if point.gap_best > max_best:
            max_best, arg_best = point.gap_best, snr
    tail = curve_point(snr_grid[-1])
    return GapSummary(
        grid_points=len(snr_grid),
        max_gap_lattice=max_lat,
        argmax_snr_lattice=arg_lat,
        max_gap_best=max_best,
        argmax_snr_best=arg_best,
        tail_snr=snr_grid[-1],
        tail_gap_lattice=tail.gap_lattice,
        asymptote=ASYMPTOTIC_LATTICE_GAP,
    )
