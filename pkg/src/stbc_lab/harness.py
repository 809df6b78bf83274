"""Monte Carlo BER / decoding-complexity campaigns over Rayleigh fading.

Trials are grouped in blocks of ``block_size``.  Every block draws from
its own counter-based stream keyed by ``(seed, SNR in milli-dB, block
index)``, so results do not depend on how many workers evaluate the
blocks, and any single trial can be replayed with :func:`run_trial`.

SNR convention: with unit-energy QAM the code normalisation gives mean
power ``Es`` per antenna per slot (``Es = 1`` for ``x1``), and
``SNR = Es * Nt / N0`` is the mean received signal power per receive
antenna over the noise power.
"""

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import decoder as dec
from .mimo import build_equivalent_batch, complex_gaussian
from .stbc import constellation, x1_code, x2_code, x32_code

__all__ = [
    "SimConfig",
    "PointResult",
    "SimResult",
    "TrialOutcome",
    "CODES",
    "make_code",
    "noise_variance",
    "simulate_block",
    "run_trial",
    "run_campaign",
    "write_csv",
    "dump_r",
    "decode_trace",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CODES = {"x1": x1_code, "x32": x32_code, "x2": x2_code}
DECODERS = ("exhaustive", "sphere", "fast")
CSV_HEADER = (
    "snr_db",
    "ber",
    "bits",
    "errors",
    "mean_nodes",
    "median_nodes",
    "trials",
    "redraws",
    "fallbacks",
    "seed",
    "block_size",
)


def make_code(name):
    try:
        return CODES[name]()
    except KeyError:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(CODES)}") from None


@dataclass(frozen=True)
class SimConfig:
    code: str = "x1"
    M: int = 4
    Nr: int = 2
    snr_db: tuple = ()
    max_trials: int = 1_000_000
    target_errors: int = 200
    min_trials: int = 0
    seed: int = 0
    decoder: str = "fast"
    output: str = None
    block_size: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(x) for x in self.snr_db))
        self.validate()

    def validate(self):
        make_code(self.code)
        constellation(self.M)
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        if self.max_trials <= 0 or self.block_size <= 0 or self.Nr <= 0:
            raise ValueError("max_trials, block_size and Nr must be positive")
        if self.target_errors < 0 or self.min_trials < 0:
            raise ValueError("target_errors and min_trials must be nonnegative")


class TrialOutcome(NamedTuple):
    bit_errors: int
    bits: int
    visited_nodes: int
    redraws: int


@dataclass
class PointResult:
    snr_db: float
    bits: int
    errors: int
    trials: int
    redraws: int
    fallbacks: int
    mean_nodes: float
    median_nodes: float

    @property
    def ber(self):
        return self.errors / self.bits if self.bits else 0.0


@dataclass
class SimResult:
    config: SimConfig
    points: list = field(default_factory=list)

    def rows(self):
        cfg = self.config
        for p in self.points:
            yield (
                f"{p.snr_db:g}",
                repr(p.ber),
                p.bits,
                p.errors,
                repr(p.mean_nodes),
                repr(p.median_nodes),
                p.trials,
                p.redraws,
                p.fallbacks,
                cfg.seed,
                cfg.block_size,
            )


def noise_variance(code, const, Nt, snr_db):
    es = code.mean_entry_power(const.scale**2 * (const.M - 1) / 3)
    return es * Nt / 10 ** (snr_db / 10)


def _stream(seed, snr_db, block):
    key = int(round(snr_db * 1000)) % (1 << 32)
    ss = np.random.SeedSequence(int(seed), spawn_key=(key, int(block)))
    return np.random.Generator(np.random.Philox(ss))


class BlockOutcome(NamedTuple):
    errors: np.ndarray
    nodes: np.ndarray
    redraws: np.ndarray
    fallback: np.ndarray
    bits_per_trial: int


def _draw_block(cfg, code, const, snr_db, block):
    """Channels, symbols and received signals of one block, with redraws."""
    rng = _stream(cfg.seed, snr_db, block)
    B, Nt, Nr, T = cfg.block_size, code.Nt, cfg.Nr, code.T
    H = complex_gaussian(rng, (B, Nt, Nr))
    bits = rng.integers(0, 2, size=(B, code.twoK, const.bits_per_axis), dtype=np.int8)
    W = complex_gaussian(rng, (B, T, Nr), noise_variance(code, const, Nt, snr_db))
    h_real, q1, r, singular = build_equivalent_batch(code, H)
    redraws = np.zeros(B, dtype=int)
    for b in np.flatnonzero(singular):
        while True:
            redraws[b] += 1
            H[b] = complex_gaussian(rng, (Nt, Nr))
            hb, qb, rb, sb = build_equivalent_batch(code, H[b])
            if not sb:
                h_real[b], q1[b], r[b] = hb, qb, rb
                break
    levels = const.bits_to_levels(bits)
    X = const.scale * code.encode(levels)
    Y = X @ H + W
    return H, bits, levels, Y, h_real, q1, r, redraws


def simulate_block(cfg, snr_db, block, only=None):
    """Run one block of trials; ``only`` restricts decoding to one offset."""
    code = make_code(cfg.code)
    const = constellation(cfg.M)
    H, bits, levels, Y, h_real, q1, r, redraws = _draw_block(cfg, code, const, snr_db, block)
    yrec = np.swapaxes(Y, -1, -2).reshape(len(Y), -1)
    ytil = np.concatenate([yrec.real, yrec.imag], axis=1)
    yprime = (np.swapaxes(q1, -1, -2) @ ytil[..., None])[..., 0] / const.scale

    idx = np.arange(cfg.block_size) if only is None else np.array([only])
    B = len(idx)
    nodes = np.zeros(B, dtype=np.int64)
    fallback = np.zeros(B, dtype=bool)
    s_hat = np.zeros((B, code.twoK), dtype=int)
    if cfg.decoder == "fast" and cfg.code == "x1":
        s_hat, _, nodes, _, fallback = dec.fast_decode_x1_batch(yprime[idx], r[idx], const)
    else:
        fn = {
            "exhaustive": dec.exhaustive_ml,
            "sphere": dec.sphere_decode,
            "fast": {"x32": dec.fast_decode_x32, "x2": dec.fast_decode_x2}.get(cfg.code),
        }[cfg.decoder]
        for out, b in enumerate(idx):
            res = fn(yprime[b], r[b], const)
            s_hat[out] = res.s_hat
            nodes[out] = res.visited_nodes
            fallback[out] = res.fallback
    got = const.levels_to_bits(s_hat)
    errors = np.count_nonzero(got != bits[idx], axis=(1, 2))
    return BlockOutcome(errors, nodes, redraws[idx], fallback, code.twoK * const.bits_per_axis)


def run_trial(cfg, snr_db, trial_index):
    """Replay a single trial of a campaign."""
    block, offset = divmod(int(trial_index), cfg.block_size)
    out = simulate_block(cfg, snr_db, block, only=offset)
    return TrialOutcome(int(out.errors[0]), out.bits_per_trial, int(out.nodes[0]), int(out.redraws[0]))


def _block_job(args):
    cfg, snr_db, block = args
    return simulate_block(cfg, snr_db, block)


def _workers(workers):
    if workers is None:
        workers = int(os.environ.get("STBC_LAB_THREADS", "1") or 1)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _run_point(cfg, snr_db, pool, nworkers):
    errs, nodes, redraws, fallbacks = [], [], [], []
    total_err = 0
    trials = 0
    block = 0
    while True:
        if pool is None:
            batch = [simulate_block(cfg, snr_db, block)]
        else:
            jobs = [(cfg, snr_db, block + i) for i in range(nworkers)]
            batch = list(pool.map(_block_job, jobs))
        done = False
        for out in batch:
            block += 1
            cum = total_err + np.cumsum(out.errors)
            t = trials + np.arange(1, len(out.errors) + 1)
            stop = (t >= cfg.max_trials) | ((cum >= cfg.target_errors) & (t >= cfg.min_trials))
            n = int(np.argmax(stop)) + 1 if stop.any() else len(out.errors)
            errs.append(out.errors[:n])
            nodes.append(out.nodes[:n])
            redraws.append(out.redraws[:n])
            fallbacks.append(out.fallback[:n])
            total_err = int(cum[n - 1])
            trials += n
            bits_per_trial = out.bits_per_trial
            if stop.any():
                done = True
                break
        if done:
            break
    nodes = np.concatenate(nodes)
    return PointResult(
        snr_db=snr_db,
        bits=trials * bits_per_trial,
        errors=int(sum(int(e.sum()) for e in errs)),
        trials=trials,
        redraws=int(sum(int(r.sum()) for r in redraws)),
        fallbacks=int(sum(int(f.sum()) for f in fallbacks)),
        mean_nodes=float(nodes.mean()),
        median_nodes=float(np.median(nodes)),
    )


def run_campaign(cfg, workers=None):
    """Simulate every SNR point of ``cfg``; writes ``cfg.output`` if set."""
    nworkers = _workers(workers)
    result = SimResult(cfg)
    pool = ProcessPoolExecutor(nworkers) if nworkers > 1 and cfg.snr_db else None
    try:
        for snr in cfg.snr_db:
            point = _run_point(cfg, snr, pool, nworkers)
            log.info("%s M=%d %.1f dB: ber=%.3e (%d trials)", cfg.code, cfg.M, snr, point.ber, point.trials)
            result.points.append(point)
    finally:
        if pool is not None:
            pool.shutdown()
    if cfg.output:
        write_csv(result, cfg.output)
    return result


def write_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(result.rows())


def dump_r(cfg, path, trials_per_point=10):
    """Write the ``R`` factors of the first trials of every SNR point."""
    code = make_code(cfg.code)
    const = constellation(cfg.M)
    n = code.twoK
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "trial", "row"] + [f"c{j}" for j in range(n)])
        for snr in cfg.snr_db:
            r = _draw_block(cfg, code, const, snr, 0)[6]
            for t in range(min(trials_per_point, cfg.block_size)):
                for i in range(n):
                    w.writerow([f"{snr:g}", t, i] + [repr(float(x)) for x in r[t, i]])


def decode_trace(cfg, snr_db, trial_index=0):
    """Per-node trace ``(level, distance, action)`` of one decoded trial."""
    code = make_code(cfg.code)
    const = constellation(cfg.M)
    block, offset = divmod(int(trial_index), cfg.block_size)
    _, _, _, Y, _, q1, r, _ = _draw_block(cfg, code, const, snr_db, block)
    yrec = np.swapaxes(Y[offset], -1, -2).reshape(-1)
    yprime = q1[offset].T @ np.concatenate([yrec.real, yrec.imag]) / const.scale
    trace = []
    if cfg.decoder == "sphere":
        res = dec.sphere_decode(yprime, r[offset], const, trace=trace)
    elif cfg.decoder == "fast":
        fn = {"x1": dec.fast_decode_x1, "x32": dec.fast_decode_x32, "x2": dec.fast_decode_x2}[cfg.code]
        res = fn(yprime, r[offset], const, trace=trace)
    else:
        raise ValueError("decode traces are available for the sphere and fast decoders")
    return trace, res


def config_dict(cfg):
    return asdict(cfg)
