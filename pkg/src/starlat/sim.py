"""Link-level Monte Carlo for the two-phase star relay network.

Three sources a_0, a_1, a_2 and three sinks b_0, b_1, b_2 around one
half-duplex relay.  Phase 1: all sources transmit; the relay hears the
three-fold sum and sink b_i hears the two sources that are not its
partner (RECEIVER_HEARS).  Phase 2: only the relay transmits.  Noise is
complex circular-symmetric with variance N per complex symbol; the
simulator fixes N = 1 so transmit power equals the linear snr.

Strategies:
  lattice  sources send dithered nested-lattice codewords; the relay
           decodes the mod-sum of all three, each sink decodes the
           mod-sum of the two it hears, the relay's sum travels to the
           sinks in phase 2 (ideal index transport or a small coded
           broadcast), and each sink peels off its own codeword.
  df       relay jointly ML-decodes all three messages from Gaussian
           codebooks, then broadcasts a triple-indexed codeword; sinks
           ML-decode the pair they hear, then their own message.
  af       relay retransmits a scaled copy of its phase-1 observation;
           sinks run exact joint ML over all message triples using both
           of their observations.

Reproducibility: every trial gets its own counter-based stream keyed by
(seed, trial index), trials are aggregated in fixed chunks of 512, and
float accumulators use exact summation, so results are byte-identical
for any worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import (
    NestedLatticePair,
    build_pair,
    codeword_from_digits,
    codeword_from_index,
    digits_from_codeword,
    draw_dither,
    encode_digits,
    equivalent_noise_power,
    extract_own,
    index_from_codeword,
    mmse_gamma,
    mod_coarse,
    sum_decode,
)
from .rates import SnrPoint, af_exchange, df_exchange_optimal, lattice_exchange_optimal

__all__ = [
    "CHUNK",
    "ConfigError",
    "EquivalentNoiseResult",
    "ML_GUARD",
    "RECEIVER_HEARS",
    "SimConfig",
    "StrategyResult",
    "awgn",
    "equivalent_noise_curve",
    "measure_equivalent_noise",
    "phase1_receiver_signal",
    "run_af_trials",
    "run_df_trials",
    "run_lattice_trials",
    "run_trials",
    "trial_rng",
    "wilson_interval",
]

# Sink b_i hears these two sources in phase 1; never its own partner a_i.
RECEIVER_HEARS = ((1, 2), (2, 0), (0, 1))

# Trials per aggregation chunk.  Fixed, never derived from worker count,
# so the reduction tree (and hence every float) is scheduling-invariant.
CHUNK = 512

# Joint-ML searches enumerate M^3 triples; refuse anything bigger.
ML_GUARD = 10 ** 6

STRATEGIES = ("lattice", "df", "af")
BC_MODES = ("ideal", "coded")


class ConfigError(ValueError):
    """A SimConfig that cannot be run as requested."""


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo campaign.

    dim means real lattice dimensions for the lattice strategy (even),
    complex channel uses per phase for af, and total complex channel
    uses across both phases for df.  margin and bc_mode apply to the
    lattice strategy; rate_fraction sizes df/af codebooks relative to
    the strategy's closed-form rate.  codebook_size pins the per-source
    codebook to a fixed M instead, which is the only way to express
    "fixed code, growing blocklength" sweeps.  noiseless zeroes the
    channel noise while keeping codebooks sized for the nominal snr.
    """

    strategy: str
    snr: SnrPoint
    dim: int
    trials: int
    seed: int
    margin: float = 1.0
    rate_fraction: float = 0.7
    bc_mode: str = "ideal"
    noiseless: bool = False
    codebook_size: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}, want one of {STRATEGIES}")
        if self.snr.linear <= 0.0:
            raise ConfigError("snr must be positive")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")
        if self.strategy == "lattice":
            if self.dim < 2 or self.dim % 2 != 0:
                raise ConfigError(f"lattice dim must be even and >= 2, got {self.dim}")
        elif self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        if self.margin <= 0.0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if not 0.0 < self.rate_fraction <= 1.0:
            raise ConfigError(f"rate_fraction must be in (0, 1], got {self.rate_fraction}")
        if self.bc_mode not in BC_MODES:
            raise ConfigError(f"bc_mode must be one of {BC_MODES}, got {self.bc_mode!r}")
        if self.codebook_size is not None and self.codebook_size < 2:
            raise ConfigError(f"codebook_size must be >= 2, got {self.codebook_size}")


@dataclass(frozen=True)
class StrategyResult:
    """Aggregated campaign outcome.

    Error rates are raw frequencies; half-widths are 95% Wilson score.
    residual_noise_power is the relay-side per-real-dimension residual
    after MMSE scaling (lattice only).  elapsed_seconds is informational
    and excluded from to_dict so serialized results stay reproducible.
    """

    config: SimConfig
    trials: int
    codebook_m: int
    message_errors: tuple[int, int, int]
    message_error_rates: tuple[float, float, float]
    message_error_halfwidths: tuple[float, float, float]
    relay_errors: int | None
    relay_error_rate: float | None
    relay_error_halfwidth: float | None
    relay_message_errors: tuple[int, int, int] | None
    receiver_sum_errors: tuple[int, int, int] | None
    residual_noise_power: float | None
    tx_power: float
    relay_output_power: float | None
    bc_feasible: bool | None
    elapsed_seconds: float = field(compare=False)

    def to_dict(self) -> dict:
        """Canonical serializable form; deterministic for a given config."""
        cfg = self.config
        return {
            "schema": "starlat.result/1",
            "strategy": cfg.strategy,
            "snr_db": cfg.snr.db,
            "snr_linear": cfg.snr.linear,
            "dim": cfg.dim,
            "trials": self.trials,
            "seed": cfg.seed,
            "margin": cfg.margin,
            "rate_fraction": cfg.rate_fraction,
            "bc_mode": cfg.bc_mode,
            "noiseless": cfg.noiseless,
            "codebook_m": self.codebook_m,
            "message_errors": list(self.message_errors),
            "message_error_rates": list(self.message_error_rates),
            "message_error_halfwidths": list(self.message_error_halfwidths),
            "relay_errors": self.relay_errors,
            "relay_error_rate": self.relay_error_rate,
            "relay_error_halfwidth": self.relay_error_halfwidth,
            "relay_message_errors": (None if self.relay_message_errors is None
                                     else list(self.relay_message_errors)),
            "receiver_sum_errors": (None if self.receiver_sum_errors is None
                                    else list(self.receiver_sum_errors)),
            "residual_noise_power": self.residual_noise_power,
            "tx_power": self.tx_power,
            "relay_output_power": self.relay_output_power,
            "bc_feasible": self.bc_feasible,
        }


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval (center, half-width) for a binomial rate."""
    if trials <= 0:
        return 0.5, 0.5
    p = errors / trials
    zz = z * z / trials
    denom = 1.0 + zz
    center = (p + zz / 2.0) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + zz / (4.0 * trials))
    return center, half


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of execution order."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def awgn(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Complex circular-symmetric noise, total variance `variance` per entry."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def phase1_receiver_signal(x_sources: np.ndarray, receiver: int) -> np.ndarray:
    """Noise-free phase-1 signal at sink `receiver`: the two heard sources.

    x_sources has shape (3, ...) indexed by source id.
    """
    j, k = RECEIVER_HEARS[receiver]
    return x_sources[j] + x_sources[k]


def _gaussian_codebook(rng: np.random.Generator, m: int, n: int, power: float) -> np.ndarray:
    """(m, n) complex codebook with every row at exactly n*power energy."""
    cb = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    norms = np.linalg.norm(cb, axis=1, keepdims=True)
    return cb * (math.sqrt(n * power) / norms)


# ----------------------------------------------------------------------
# per-strategy setup (pure functions of the config)
# ----------------------------------------------------------------------

def _noise_var(cfg: SimConfig) -> float:
    return 0.0 if cfg.noiseless else 1.0


def _df_setup(cfg: SimConfig) -> tuple[int, int, int]:
    """(M, n1, n2) for decode-and-forward."""
    rate, split = df_exchange_optimal(cfg.snr.linear)
    if cfg.codebook_size is not None:
        m = cfg.codebook_size
    else:
        m = max(2, int(math.floor(2.0 ** (cfg.dim * cfg.rate_fraction * rate))))
    if m ** 3 > ML_GUARD:
        raise ConfigError(
            f"relay ML search over {m}^3 triples exceeds the {ML_GUARD} guard; "
            f"reduce dim or rate_fraction, or pin codebook_size")
    n1 = min(cfg.dim - 1, max(1, round(cfg.dim * split.delta1)))
    return m, n1, cfg.dim - n1


def _af_setup(cfg: SimConfig) -> int:
    """Per-source codebook size M for amplify-and-forward."""
    if cfg.codebook_size is not None:
        m = cfg.codebook_size
    else:
        rate = af_exchange(cfg.snr.linear)
        m = max(2, int(math.floor(2.0 ** (cfg.dim * cfg.rate_fraction * rate))))
    if m ** 3 > ML_GUARD:
        raise ConfigError(
            f"joint ML search over {m}^3 triples exceeds the {ML_GUARD} guard; "
            f"reduce dim or rate_fraction, or pin codebook_size")
    return m


def _lattice_setup(cfg: SimConfig) -> tuple[NestedLatticePair, bool, int]:
    """(pair, bc_feasible, bc_length) for the lattice strategy.

    The ideal broadcast gate asks whether, at the rate-optimal phase
    split for this snr, phase 2 can carry the relay's sum index:
    delta1 * bits_per_complex_use <= delta2 * log2(1+snr).  margin < 1
    is a deliberate stress configuration, so it implies round-up sizing.
    """
    snr = cfg.snr.linear
    pair = build_pair(cfg.dim, power=snr, noise=1.0, k_summands=3,
                      margin=cfg.margin, round_up=cfg.margin < 1.0)
    if cfg.noiseless:
        feasible = True
    else:
        _, split = lattice_exchange_optimal(snr)
        feasible = (split.delta1 * pair.bits_per_complex_use
                    <= split.delta2 * math.log2(1.0 + snr) + 1e-12)
    bc_len = 0
    if cfg.bc_mode == "coded":
        if pair.codebook_size > ML_GUARD:
            raise ConfigError(
                f"coded broadcast needs ML over {pair.codebook_size} indices, "
                f"above the {ML_GUARD} guard; use bc_mode='ideal' or a smaller dim")
        bits = cfg.dim * math.log2(pair.nesting_ratio)
        bc_len = max(1, math.ceil(bits / math.log2(1.0 + snr)))
    return pair, feasible, bc_len


# ----------------------------------------------------------------------
# chunk runners
# ----------------------------------------------------------------------

def _lattice_chunk(cfg: SimConfig, start: int, count: int) -> dict:
    snr = cfg.snr.linear
    pair, feasible, bc_len = _lattice_setup(cfg)
    m = pair.nesting_ratio
    dim = cfg.dim
    n_var = _noise_var(cfg)
    n_d = n_var / 2.0
    p_d = snr / 2.0
    if cfg.noiseless:
        g3 = g2 = 1.0
    else:
        g3 = mmse_gamma(3, p_d, n_d)
        g2 = mmse_gamma(2, p_d, n_d)
    msg_err = [0, 0, 0]
    sum_err = [0, 0, 0]
    relay_err = 0
    resid_sq = []
    tx_sq = []
    bc_sq = []
    for trial in range(start, start + count):
        rng = trial_rng(cfg.seed, trial)
        digits = rng.integers(0, m, size=(3, dim))
        dithers = draw_dither(rng, pair, count=3)
        z_r = math.sqrt(n_d) * rng.standard_normal(dim)
        z_rx = math.sqrt(n_d) * rng.standard_normal((3, dim))
        x = np.stack([encode_digits(digits[i], dithers[i], pair) for i in range(3)])
        tx_sq.append(float(np.sum(x * x)))

        y_r = x.sum(axis=0) + z_r
        sum_hat = sum_decode(y_r, dithers, g3, pair)
        true_sum_digits = digits.sum(axis=0) % m
        relay_bad = not np.array_equal(digits_from_codeword(sum_hat, pair),
                                       true_sum_digits)
        relay_err += relay_bad
        resid = mod_coarse(g3 * y_r + dithers.sum(axis=0)
                           - codeword_from_digits(true_sum_digits, pair), pair)
        resid_sq.append(float(np.sum(resid * resid)))

        if cfg.bc_mode == "coded":
            bc_cb = _gaussian_codebook(rng, pair.codebook_size, bc_len, snr)
            z_bc = awgn(rng, (3, bc_len), n_var)
            sent = bc_cb[index_from_codeword(sum_hat, pair)]
            bc_sq.append(float(np.sum(np.abs(sent) ** 2)))
            delivered = []
            for i in range(3):
                y_bc = sent + z_bc[i]
                idx = int(np.argmin(np.sum(np.abs(bc_cb - y_bc) ** 2, axis=1)))
                delivered.append(codeword_from_index(idx, pair))
        else:
            delivered = [sum_hat, sum_hat, sum_hat] if feasible else None

        for i in range(3):
            j, k = RECEIVER_HEARS[i]
            y_i = phase1_receiver_signal(x, i) + z_rx[i]
            pair_hat = sum_decode(y_i, dithers[[j, k]], g2, pair)
            sum_err[i] += not np.array_equal(digits_from_codeword(pair_hat, pair),
                                             (digits[j] + digits[k]) % m)
            if delivered is None:
                msg_err[i] += 1
                continue
            own = extract_own(delivered[i], pair_hat, pair)
            msg_err[i] += not np.array_equal(digits_from_codeword(own, pair), digits[i])
    return {
        "trials": count,
        "message_errors": msg_err,
        "relay_errors": relay_err,
        "receiver_sum_errors": sum_err,
        "resid_sq": math.fsum(resid_sq),
        "tx_sq": math.fsum(tx_sq),
        "relay_out_sq": math.fsum(bc_sq) if bc_sq else None,
    }


def _af_chunk(cfg: SimConfig, start: int, count: int) -> dict:
    m = _af_setup(cfg)
    n = cfg.dim
    p = cfg.snr.linear
    n_var = _noise_var(cfg)
    alpha = math.sqrt(p / (3.0 * p + n_var))
    aa = alpha * alpha
    msg_err = [0, 0, 0]
    tx_sq = []
    relay_sq = []
    for trial in range(start, start + count):
        rng = trial_rng(cfg.seed, trial)
        cbs = [_gaussian_codebook(rng, m, n, p) for _ in range(3)]
        w = rng.integers(0, m, size=3)
        z_r = awgn(rng, n, n_var)
        z1 = awgn(rng, (3, n), n_var)
        z2 = awgn(rng, (3, n), n_var)
        x = np.stack([cbs[i][w[i]] for i in range(3)])
        tx_sq.append(float(np.sum(np.abs(x) ** 2)))
        relay_tx = alpha * (x.sum(axis=0) + z_r)
        relay_sq.append(float(np.sum(np.abs(relay_tx) ** 2)))

        # pairwise codeword Grams, reused by all three sinks
        gram = {}
        for a in range(3):
            for b in range(a + 1, 3):
                gram[a, b] = np.real(cbs[a] @ cbs[b].conj().T)

        for i in range(3):
            j, k = RECEIVER_HEARS[i]
            y1 = phase1_receiver_signal(x, i) + z1[i]
            y2 = relay_tx + z2[i]
            a_j = np.real(cbs[j].conj() @ y1)
            a_k = np.real(cbs[k].conj() @ y1)
            b = [np.real(cbs[s].conj() @ y2) for s in range(3)]
            # weight tensor axes: (w_i, w_j, w_k); constant terms dropped
            g_jk = gram[j, k] if j < k else gram[k, j].T
            g_ij = gram[i, j] if i < j else gram[j, i].T
            g_ik = gram[i, k] if i < k else gram[k, i].T
            phase1_w = -2.0 * (a_j[:, None] + a_k[None, :]) + 2.0 * g_jk
            sum_ip = (b[i][:, None, None] + b[j][None, :, None] + b[k][None, None, :])
            sum_gram = (g_ij[:, :, None] + g_ik[:, None, :] + g_jk[None, :, :])
            weight = (phase1_w[None, :, :]
                      + (-2.0 * alpha * sum_ip + 2.0 * aa * sum_gram) / (1.0 + aa))
            best = np.unravel_index(int(np.argmin(weight)), weight.shape)
            msg_err[i] += int(best[0]) != int(w[i])
    return {
        "trials": count,
        "message_errors": msg_err,
        "relay_errors": None,
        "receiver_sum_errors": None,
        "resid_sq": None,
        "tx_sq": math.fsum(tx_sq),
        "relay_out_sq": math.fsum(relay_sq),
    }


def _triple_index(w0: int, w1: int, w2: int, m: int) -> int:
    return (w0 * m + w1) * m + w2


def _df_chunk(cfg: SimConfig, start: int, count: int) -> dict:
    m, n1, n2 = _df_setup(cfg)
    p = cfg.snr.linear
    n_var = _noise_var(cfg)
    msg_err = [0, 0, 0]
    relay_err = 0
    relay_msg_err = [0, 0, 0]
    tx_sq = []
    relay_sq = []
    for trial in range(start, start + count):
        rng = trial_rng(cfg.seed, trial)
        cbs = [_gaussian_codebook(rng, m, n1, p) for _ in range(3)]
        relay_cb = _gaussian_codebook(rng, m ** 3, n2, p)
        w = rng.integers(0, m, size=3)
        z_r = awgn(rng, n1, n_var)
        z1 = awgn(rng, (3, n1), n_var)
        z2 = awgn(rng, (3, n2), n_var)
        x = np.stack([cbs[i][w[i]] for i in range(3)])
        tx_sq.append(float(np.sum(np.abs(x) ** 2)))

        # relay: exact ML over all M^3 triples from the phase-1 sum
        y_r = x.sum(axis=0) + z_r
        a = [np.real(cbs[s].conj() @ y_r) for s in range(3)]
        g01 = np.real(cbs[0] @ cbs[1].conj().T)
        g02 = np.real(cbs[0] @ cbs[2].conj().T)
        g12 = np.real(cbs[1] @ cbs[2].conj().T)
        weight = (-2.0 * (a[0][:, None, None] + a[1][None, :, None] + a[2][None, None, :])
                  + 2.0 * (g01[:, :, None] + g02[:, None, :] + g12[None, :, :]))
        t_hat = tuple(int(v) for v in np.unravel_index(int(np.argmin(weight)), weight.shape))
        w_true = tuple(int(v) for v in w)
        relay_err += t_hat != w_true
        for s in range(3):
            relay_msg_err[s] += t_hat[s] != w_true[s]

        relay_tx = relay_cb[_triple_index(*t_hat, m)]
        relay_sq.append(float(np.sum(np.abs(relay_tx) ** 2)))

        for i in range(3):
            j, k = RECEIVER_HEARS[i]
            y1 = phase1_receiver_signal(x, i) + z1[i]
            a_j = np.real(cbs[j].conj() @ y1)
            a_k = np.real(cbs[k].conj() @ y1)
            if j < k:
                g_jk = np.real(cbs[j] @ cbs[k].conj().T)
            else:
                g_jk = np.real(cbs[k] @ cbs[j].conj().T).T
            pair_w = -2.0 * (a_j[:, None] + a_k[None, :]) + 2.0 * g_jk
            pj, pk = np.unravel_index(int(np.argmin(pair_w)), pair_w.shape)

            # own message: ML over the M relay words consistent with (pj, pk)
            triple = [0, 0, 0]
            triple[j], triple[k] = int(pj), int(pk)
            cand_idx = np.empty(m, dtype=np.int64)
            for c in range(m):
                triple[i] = c
                cand_idx[c] = _triple_index(*triple, m)
            y2 = relay_tx + z2[i]
            d = np.sum(np.abs(relay_cb[cand_idx] - y2) ** 2, axis=1)
            msg_err[i] += int(np.argmin(d)) != w_true[i]
    return {
        "trials": count,
        "message_errors": msg_err,
        "relay_errors": relay_err,
        "relay_message_errors": relay_msg_err,
        "receiver_sum_errors": None,
        "resid_sq": None,
        "tx_sq": math.fsum(tx_sq),
        "relay_out_sq": math.fsum(relay_sq),
    }


_CHUNK_FNS = {"lattice": _lattice_chunk, "af": _af_chunk, "df": _df_chunk}


def _run_chunk(cfg: SimConfig, start: int, count: int) -> dict:
    return _CHUNK_FNS[cfg.strategy](cfg, start, count)


# ----------------------------------------------------------------------
# campaign drivers
# ----------------------------------------------------------------------

def _combine(cfg: SimConfig, chunks: list[dict], codebook_m: int,
             relay_syms: int | None, elapsed: float) -> StrategyResult:
    trials = sum(c["trials"] for c in chunks)
    msg = tuple(sum(c["message_errors"][i] for c in chunks) for i in range(3))
    rates = tuple(e / trials for e in msg)
    halves = tuple(wilson_interval(e, trials)[1] for e in msg)
    relay_errors = relay_rate = relay_half = None
    if chunks[0]["relay_errors"] is not None:
        relay_errors = sum(c["relay_errors"] for c in chunks)
        relay_rate = relay_errors / trials
        relay_half = wilson_interval(relay_errors, trials)[1]
    relay_msg = None
    if chunks[0].get("relay_message_errors") is not None:
        relay_msg = tuple(sum(c["relay_message_errors"][i] for c in chunks)
                          for i in range(3))
    sum_err = None
    if chunks[0]["receiver_sum_errors"] is not None:
        sum_err = tuple(sum(c["receiver_sum_errors"][i] for c in chunks)
                        for i in range(3))
    resid = None
    if chunks[0]["resid_sq"] is not None:
        resid = math.fsum(c["resid_sq"] for c in chunks) / (trials * cfg.dim)
    # per-complex-symbol source power: lattice dims are real, so halve
    if cfg.strategy == "lattice":
        src_syms = 3 * (cfg.dim // 2)
        feasible = _lattice_setup(cfg)[1]
    else:
        src_syms = 3 * (cfg.dim if cfg.strategy == "af" else _df_setup(cfg)[1])
        feasible = None
    tx_power = math.fsum(c["tx_sq"] for c in chunks) / (trials * src_syms)
    relay_power = None
    if chunks[0]["relay_out_sq"] is not None and relay_syms:
        relay_power = math.fsum(c["relay_out_sq"] for c in chunks) / (trials * relay_syms)
    return StrategyResult(
        config=cfg, trials=trials, codebook_m=codebook_m,
        message_errors=msg, message_error_rates=rates,
        message_error_halfwidths=halves,
        relay_errors=relay_errors, relay_error_rate=relay_rate,
        relay_error_halfwidth=relay_half,
        relay_message_errors=relay_msg, receiver_sum_errors=sum_err,
        residual_noise_power=resid, tx_power=tx_power,
        relay_output_power=relay_power, bc_feasible=feasible,
        elapsed_seconds=elapsed,
    )


def run_trials(cfg: SimConfig, workers: int = 1) -> StrategyResult:
    """Run the configured campaign; identical output for any `workers`."""
    if cfg.strategy == "lattice":
        pair, _, bc_len = _lattice_setup(cfg)
        codebook_m = pair.nesting_ratio
        relay_syms = bc_len if cfg.bc_mode == "coded" else None
    elif cfg.strategy == "af":
        codebook_m = _af_setup(cfg)
        relay_syms = cfg.dim
    else:
        codebook_m, _, n2 = _df_setup(cfg)
        relay_syms = n2
    t0 = time.perf_counter()
    spans = [(s, min(CHUNK, cfg.trials - s)) for s in range(0, cfg.trials, CHUNK)]
    if workers <= 1 or len(spans) == 1:
        chunks = [_run_chunk(cfg, s, c) for s, c in spans]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, s, c) for s, c in spans]
            chunks = [f.result() for f in futures]  # chunk order, not completion order
    return _combine(cfg, chunks, codebook_m, relay_syms, time.perf_counter() - t0)


def run_lattice_trials(cfg: SimConfig, workers: int = 1) -> StrategyResult:
    if cfg.strategy != "lattice":
        raise ConfigError(f"expected lattice config, got {cfg.strategy!r}")
    return run_trials(cfg, workers)


def run_af_trials(cfg: SimConfig, workers: int = 1) -> StrategyResult:
    if cfg.strategy != "af":
        raise ConfigError(f"expected af config, got {cfg.strategy!r}")
    return run_trials(cfg, workers)


def run_df_trials(cfg: SimConfig, workers: int = 1) -> StrategyResult:
    if cfg.strategy != "df":
        raise ConfigError(f"expected df config, got {cfg.strategy!r}")
    return run_trials(cfg, workers)


# ----------------------------------------------------------------------
# equivalent-noise measurement
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalentNoiseResult:
    """Empirical check of the scaled-sum residual against its closed form.

    measured is E|gamma*Y - sum(x)|^2 per real dimension, the quantity
    the closed form describes.  folded is the same residual reduced to
    the coarse cell, which is what a lattice decoder actually faces; it
    drops below measured once wraparound kicks in, and the warning flag
    marks exactly that regime.
    """

    gamma: float
    k: int
    samples: int
    measured: float
    folded: float
    analytic: float
    wraparound_warning: bool

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.analytic) / self.analytic


def _measurement_pair(snr: float) -> NestedLatticePair:
    # fixed small ratio: the residual statistics do not depend on it
    return NestedLatticePair(dim=2, coarse_step=math.sqrt(12.0 * snr / 2.0),
                             nesting_ratio=4)


def _residual_draws(snr: float, k: int, samples: int, seed: int):
    """Shared raw material for residual measurements (common random numbers)."""
    pair = _measurement_pair(snr)
    rng = np.random.Generator(np.random.Philox(seed))
    m = pair.nesting_ratio
    digits = rng.integers(0, m, size=(k, samples, 2))
    dithers = rng.uniform(-pair.coarse_step / 2.0, pair.coarse_step / 2.0,
                          size=(k, samples, 2))
    z = math.sqrt(0.5) * rng.standard_normal((samples, 2))  # N_d = 1/2
    x = mod_coarse(codeword_from_digits(digits, pair) - dithers, pair)
    y_clean = x.sum(axis=0)
    c_sum = codeword_from_digits(digits.sum(axis=0) % m, pair)
    d_sum = dithers.sum(axis=0)
    return pair, y_clean, z, c_sum, d_sum


def _measured_residual(pair, y_clean, z, c_sum, d_sum, gamma: float) -> tuple[float, float]:
    """(linear, folded) per-dimension residual powers at this gamma."""
    lin = gamma * (y_clean + z) - y_clean
    folded = mod_coarse(gamma * (y_clean + z) + d_sum - c_sum, pair)
    return float(np.mean(lin * lin)), float(np.mean(folded * folded))


def measure_equivalent_noise(snr: SnrPoint, gamma: float, k: int,
                             samples: int, seed: int) -> EquivalentNoiseResult:
    """Empirical per-dimension residual of MMSE-scaled sum reception.

    Sources transmit dithered lattice codewords, so each is uniform on
    the coarse cell with exactly power/2 per real dimension; the linear
    residual gamma*Y - sum(x) then has mean square gamma^2*N/2 +
    k*(P/2)*(1-gamma)^2, which is what `measured` estimates.  `folded`
    reduces the same residual into the coarse cell (dithers removed,
    true sum codeword subtracted).  Once the analytic value reaches a
    quarter of the cell second moment, folding visibly shrinks the
    residual, so the result carries a warning flag: `folded` is still a
    valid observation of what a decoder sees, but it no longer tracks
    the closed form.
    """
    if k not in (2, 3):
        raise ConfigError(f"k must be 2 or 3, got {k}")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    p_d = snr.linear / 2.0
    analytic = equivalent_noise_power(gamma, k, p_d, 0.5)
    measured, folded = _measured_residual(
        *_residual_draws(snr.linear, k, samples, seed), gamma=gamma)
    return EquivalentNoiseResult(
        gamma=gamma, k=k, samples=samples, measured=measured, folded=folded,
        analytic=analytic, wraparound_warning=not analytic < p_d / 4.0)


def equivalent_noise_curve(snr: SnrPoint, k: int, gammas: Sequence[float],
                           samples: int, seed: int) -> np.ndarray:
    """Measured linear residual at each gamma, with common random numbers.

    Sharing the draws across the grid makes the argmin comparison a
    paired test, so the minimizer estimate is far tighter than the
    per-point noise would suggest.
    """
    draws = _residual_draws(snr.linear, k, samples, seed)
    return np.array([_measured_residual(*draws, gamma=g)[0] for g in gammas])
