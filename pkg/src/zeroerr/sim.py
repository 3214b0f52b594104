"""Closed-loop remote state estimation over a DMC with a zero-error block code.

Scheme: encoder and decoder share an uncertainty box for the state at
each block start. The encoder splits the box into at most M cells, sends
the index of the cell holding s_{kN} as one codeword during block k, and
both ends move the box to A^N·cell plus the accumulated noise box. The
decoder's estimate between boundaries is the last decoded cell centre
pushed forward by A.

Two backends consume the same random draws from the same seed:

* ``exact``: Fractions throughout, records absolute states and estimates
  and the box half-widths per block. Denominators grow like 2**t, so this
  is for short horizons.
* ``float``: numpy, vectorised over trials, tracks only the estimation
  error (which is all the box scheme depends on) with a per-run power-of-two
  rescaling so diverging runs do not overflow. Errors are stored as log2.
  An unstable A amplifies rounding like any other perturbation, so the two
  backends agree closely at first and then drift apart; both stay valid
  runs of the scheme.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channel import Channel, channel_from_json, common_denominator, zero_pattern
from .codes import Code, code_from_json, is_zero_error
from .decide import Plant, instability_exponent, plant_from_json
from .errors import ConfigInvalid, DecodingAmbiguity, ParseError
from .exact import format_rational, parse_rational, power_exceeds

NOISE_BITS = 30
CHUNK = 4096
EXACT_HORIZON_LIMIT = 1000
SLOPE_TOLERANCE = 1e-3
_RESCALE = 64


@dataclass(frozen=True)
class SimConfig:
    plant: Plant
    channel: Channel
    code: Code
    noise_bound: Fraction
    initial_box: tuple  # ((lo, hi), ...) per coordinate
    horizon: int
    seed: int = 0
    trials: int = 1
    backend: str = "auto"  # auto | exact | float
    require_zero_error: bool = True

    def __post_init__(self):
        d = parse_rational(self.noise_bound)
        object.__setattr__(self, "noise_bound", d)
        box = tuple((parse_rational(lo), parse_rational(hi)) for lo, hi in self.initial_box)
        object.__setattr__(self, "initial_box", box)
        n = self.plant.dimension
        if d <= 0:
            raise ConfigInvalid("noise bound must be positive")
        if len(box) != n or any(lo > hi for lo, hi in box):
            raise ConfigInvalid(f"initial box must give lo <= hi for each of {n} coordinates")
        if self.horizon < self.code.block_length:
            raise ConfigInvalid("horizon shorter than one code block")
        if self.trials < 1:
            raise ConfigInvalid("need at least one trial")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid("seed must be a 64-bit natural")
        if self.backend not in ("auto", "exact", "float"):
            raise ConfigInvalid(f"unknown backend {self.backend!r}")
        if self.code.alphabets != self.channel.alphabets:
            raise ConfigInvalid("code and channel use different alphabets")
        if common_denominator(self.channel) > 2 ** 62:
            raise ConfigInvalid("channel probabilities need a common denominator <= 2^62")
        if self.require_zero_error and not is_zero_error(self.code, zero_pattern(self.channel)):
            raise ConfigInvalid("code is not zero-error for the channel")

    @property
    def resolved_backend(self) -> str:
        if self.backend != "auto":
            return self.backend
        return "exact" if self.horizon <= EXACT_HORIZON_LIMIT else "float"

    def rate_certified(self, precision: int = 30) -> bool:
        """M > (2**η(A))**N at the certified upper endpoint."""
        hi = instability_exponent(self.plant, precision).hi
        return power_exceeds(self.code.m, hi, self.code.block_length)


def sim_config_from_json(data: dict, **overrides) -> SimConfig:
    try:
        kw = dict(
            plant=plant_from_json(data["plant"]),
            channel=channel_from_json(data["channel"]),
            code=code_from_json(data["code"]),
            noise_bound=data["noise_bound"],
            initial_box=tuple(tuple(b) for b in data["initial_box"]),
            horizon=int(data["horizon"]),
            seed=int(data.get("seed", 0)),
            trials=int(data.get("trials", 1)),
            backend=data.get("backend", "auto"),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"simulation config is missing fields: {exc}") from exc
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**kw)


def load_sim_config(path, **overrides) -> SimConfig:
    with open(path) as fh:
        try:
            data = json.loads(fh.read(), parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid config JSON: {exc}") from exc
    return sim_config_from_json(data, **overrides)


@dataclass
class Trace:
    error_log2: np.ndarray  # log2 ||s_t - ŝ_t||_inf, -inf for an exact hit
    x_symbols: np.ndarray | None = None  # input index sent right after step t
    y_symbols: np.ndarray | None = None
    messages: np.ndarray | None = None  # message index per block
    states: list | None = None  # exact backend only
    estimates: list | None = None
    half_widths: list | None = None  # box half-widths per block, exact backend only

    def __len__(self):
        return len(self.error_log2)

    @property
    def errors(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp2(self.error_log2)

    @property
    def sup_error_log2(self) -> float:
        return float(np.max(self.error_log2))

    def slope(self) -> float:
        return log_error_slope(self.error_log2)

    def summary(self) -> dict:
        sup = self.sup_error_log2
        return {
            "sup_error": 2.0 ** sup if sup < 1000 else math.inf,
            "sup_error_log2": sup,
            "slope": self.slope(),
        }

    def to_csv(self, alphabets=None) -> str:
        buf = io.StringIO()
        n = len(self.states[0]) if self.states else 0
        w = csv.writer(buf)
        header = ["t", "error"] + [f"state_{i}" for i in range(n)] + [f"estimate_{i}" for i in range(n)] + ["x", "y"]
        w.writerow(header)
        errs = self.errors
        for t in range(len(self)):
            row = [t, repr(float(errs[t]))]
            if self.states:
                row += [format_rational(v) for v in self.states[t]]
                row += [format_rational(v) for v in self.estimates[t]]
            for arr, syms in ((self.x_symbols, alphabets and alphabets.inputs), (self.y_symbols, alphabets and alphabets.outputs)):
                if arr is None:
                    row.append("")
                else:
                    row.append(syms[arr[t]] if syms else int(arr[t]))
            w.writerow(row)
        return buf.getvalue()


def log_error_slope(error_log2: np.ndarray) -> float:
    """Least-squares slope of ln(error) against t over the last half, zeros skipped."""
    T = len(error_log2)
    t = np.arange(T // 2, T, dtype=float)
    y = np.asarray(error_log2[T // 2 :], dtype=float)
    keep = np.isfinite(y)
    if keep.sum() < 2:
        return 0.0
    t, y = t[keep], y[keep] * math.log(2)
    return float(np.polyfit(t, y, 1)[0])


# --- shared pieces -----------------------------------------------------------


def _cell_counts(extents: Sequence, m: int) -> list[int]:
    """Cells per coordinate with product <= m, growing the widest cell first."""
    k = [1] * len(extents)
    prod = 1
    while True:
        widths = [extents[i] / k[i] for i in range(len(k))]
        i = max(range(len(k)), key=lambda j: (widths[j], -j))
        nxt = prod // k[i] * (k[i] + 1)
        if nxt > m:
            return k
        k[i] += 1
        prod = nxt


def _mat_pow(a: list, n: int) -> list:
    size = len(a)
    out = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for _ in range(n):
        out = [[sum((out[i][k] * a[k][j] for k in range(size)), Fraction(0)) for j in range(size)] for i in range(size)]
    return out


def _mat_vec(a: list, v: Sequence) -> list:
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in a]


def _noise_spread(a: list, n_steps: int, d: Fraction) -> list:
    """d · Σ_{j<N} |A^j| 1, the half-width added by N steps of noise."""
    size = len(a)
    total = [Fraction(0)] * size
    p = _mat_pow(a, 0)
    for _ in range(n_steps):
        for i in range(size):
            total[i] += d * sum(abs(x) for x in p[i])
        p = [[sum((p[i][k] * a[k][j] for k in range(size)), Fraction(0)) for j in range(size)] for i in range(size)]
    return total


class _Stream:
    """Per-trial draws in fixed chunks so both backends consume them identically."""

    def __init__(self, gen: np.random.Generator, n: int, levels: int):
        self.gen, self.n, self.levels = gen, n, levels
        self.initial = gen.integers(-(2 ** NOISE_BITS), 2 ** NOISE_BITS, size=n, endpoint=True)
        self.pos = CHUNK

    def refill(self):
        self.noise = self.gen.integers(-(2 ** NOISE_BITS), 2 ** NOISE_BITS, size=(CHUNK, self.n), endpoint=True)
        self.uniform = self.gen.integers(0, self.levels, size=CHUNK)
        self.pos = 0

    def next(self):
        if self.pos == CHUNK:
            self.refill()
        i = self.pos
        self.pos += 1
        return self.noise[i], int(self.uniform[i])


def _streams(config: SimConfig) -> list[_Stream]:
    levels = common_denominator(config.channel)
    seqs = np.random.SeedSequence(config.seed).spawn(config.trials)
    return [_Stream(np.random.Generator(np.random.PCG64(s)), config.plant.dimension, levels) for s in seqs]


def _channel_tables(config: SimConfig):
    ch, code = config.channel, config.code
    a = ch.alphabets
    levels = common_denominator(ch)
    cum = np.array(
        [np.cumsum([int(p * levels) for p in row]) for row in ch.rows], dtype=np.int64
    )
    words = np.array([[a.input_index[s] for s in x] for x in code.messages], dtype=np.int64)
    ny = len(a.outputs)
    dec = np.full(ny ** code.block_length, -1, dtype=np.int64)
    msg_index = {x: i for i, x in enumerate(code.messages)}
    for y, x in code.decoder.items():
        idx = 0
        for s in y:
            idx = idx * ny + a.output_index[s]
        dec[idx] = msg_index[x]
    return cum, words, dec, ny


def _decode_fail(sent, got):
    raise DecodingAmbiguity(f"message {sent} decoded as {got}: the code is not zero-error for this channel")


# --- exact backend -----------------------------------------------------------


def _run_exact_trial(config: SimConfig, stream: _Stream, tables) -> Trace:
    cum, words, dec, ny = tables
    cum = [[int(c) for c in row] for row in cum]
    A = [list(r) for r in config.plant.matrix]
    n = len(A)
    N, M, T = config.code.block_length, config.code.m, config.horizon
    d = config.noise_bound
    scale = Fraction(1, 2 ** NOISE_BITS)
    AN = _mat_pow(A, N)
    absAN = [[abs(x) for x in row] for row in AN]
    spread = _noise_spread(A, N, d)

    centre = [(lo + hi) / 2 for lo, hi in config.initial_box]
    h = [(hi - lo) / 2 for lo, hi in config.initial_box]
    s = [centre[i] + h[i] * int(stream.initial[i]) * scale for i in range(n)]
    est = list(centre)

    err = np.empty(T)
    xs = np.empty(T, dtype=np.int64)
    ys = np.empty(T, dtype=np.int64)
    msgs = []
    states, estimates, widths = [], [], []
    t = 0
    while t < T:
        # block start: s is s_{kN}, box (centre, h) contains it
        widths.append(tuple(h))
        offset = [s[i] - centre[i] for i in range(n)]
        if any(abs(offset[i]) > h[i] for i in range(n)):
            raise AssertionError("state left the shared uncertainty box")
        k = _cell_counts(h, M)
        idx, msg, delta = [], 0, []
        for i in range(n):
            if h[i] == 0:
                j = 0
            else:
                j = min(int((offset[i] + h[i]) / (2 * h[i] / k[i])), k[i] - 1)
            idx.append(j)
            msg = msg * k[i] + j
            delta.append(-h[i] + (2 * j + 1) * h[i] / k[i])
        msgs.append(msg)
        yw = 0
        for j in range(N):
            if t + j >= T:
                break
            noise, u = stream.next()
            x = int(words[msg][j])
            y = sum(1 for c in cum[x] if c <= u)
            xs[t + j], ys[t + j] = x, y
            yw = yw * ny + y
            states.append(tuple(s))
            estimates.append(tuple(est))
            e = max((abs(s[i] - est[i]) for i in range(n)), default=Fraction(0))
            err[t + j] = math.log2(e) if e else -math.inf
            s = [v + d * int(z) * scale for v, z in zip(_mat_vec(A, s), noise)]
            est = _mat_vec(A, est)
        if t + N > T:
            break
        got = int(dec[yw])
        if got != msg:
            _decode_fail(msg, got)
        cell_centre = [centre[i] + delta[i] for i in range(n)]
        est = _mat_vec(AN, cell_centre)
        centre = est
        h = [sum(absAN[i][j] * h[j] / k[j] for j in range(n)) + spread[i] for i in range(n)]
        t += N
    return Trace(err, xs, ys, np.array(msgs, dtype=np.int64), states, estimates, widths)


# --- float backend -----------------------------------------------------------


def _run_float(config: SimConfig, streams: list[_Stream], tables) -> list[Trace]:
    cum, words, dec, ny = tables
    A = np.array([[float(v) for v in row] for row in config.plant.matrix])
    n = A.shape[0]
    N, M, T = config.code.block_length, config.code.m, config.horizon
    R = len(streams)
    d = float(config.noise_bound)
    AN = np.linalg.matrix_power(A, N)
    absAN = np.abs(AN)
    spread = np.array([float(v) for v in _noise_spread([list(r) for r in config.plant.matrix], N, config.noise_bound)])
    noise_scale = d / 2 ** NOISE_BITS

    h = np.array([float((hi - lo) / 2) for lo, hi in config.initial_box])
    e = np.stack([h * s.initial.astype(float) / 2 ** NOISE_BITS for s in streams])  # s_0 - ŝ_0
    E = 0  # stored values are true values / 2**E

    err = np.empty((R, T))
    xs = np.empty((R, T), dtype=np.int8 if cum.shape[0] < 128 else np.int64)
    ys = np.empty((R, T), dtype=np.int8 if cum.shape[1] < 128 else np.int64)
    n_blocks = -(-T // N)
    msgs = np.empty((R, n_blocks), dtype=np.int64)
    noise = np.empty((R, CHUNK, n), dtype=np.int64)
    unif = np.empty((R, CHUNK), dtype=np.int64)
    pos = CHUNK
    rows = np.arange(R)

    t, blk = 0, 0
    while t < T:
        k = _cell_counts(list(h), M)
        kk = np.array(k, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            cell = np.where(h > 0, 2 * h / kk, 1.0)
            j = np.floor((e + h) / cell)
        j = np.clip(np.nan_to_num(j), 0, kk - 1).astype(np.int64)
        msg = np.zeros(R, dtype=np.int64)
        for i in range(n):
            msg = msg * k[i] + j[:, i]
        msgs[:, blk] = msg
        delta = -h + (2 * j + 1) * h / kk
        yw = np.zeros(R, dtype=np.int64)
        steps = min(N, T - t)
        for jj in range(steps):
            if pos == CHUNK:
                for r, s in enumerate(streams):
                    s.refill()
                    noise[r], unif[r] = s.noise, s.uniform
                pos = 0
            x = words[msg, jj]
            y = (cum[x] <= unif[:, pos, None]).sum(axis=1)
            xs[:, t + jj], ys[:, t + jj] = x, y
            yw = yw * ny + y
            mag = np.max(np.abs(e), axis=1)
            with np.errstate(divide="ignore"):
                err[:, t + jj] = np.log2(mag) + E
            e = e @ A.T + noise[:, pos, :] * math.ldexp(noise_scale, -E)
            pos += 1
        if steps < N:
            break
        got = dec[yw]
        bad = np.nonzero(got != msg)[0]
        if len(bad):
            _decode_fail(int(msg[bad[0]]), int(got[bad[0]]))
        e = e - delta @ AN.T
        h = absAN @ (h / kk) + spread * math.ldexp(1.0, -E)
        top = h.max()
        if top > 2.0 ** _RESCALE:
            h, e, E = h / 2.0 ** _RESCALE, e / 2.0 ** _RESCALE, E + _RESCALE
        elif 0 < top < 2.0 ** -_RESCALE and E >= _RESCALE:
            h, e, E = h * 2.0 ** _RESCALE, e * 2.0 ** _RESCALE, E - _RESCALE
        t += N
        blk += 1
    return [Trace(err[r], xs[r], ys[r], msgs[r, : blk + (1 if t < T else 0)]) for r in range(R)]


def run_simulation(config: SimConfig) -> list[Trace]:
    """One trace per trial, deterministic in the seed."""
    streams = _streams(config)
    tables = _channel_tables(config)
    if config.resolved_backend == "exact":
        return [_run_exact_trial(config, s, tables) for s in streams]
    return _run_float(config, streams, tables)


# --- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class BoundednessReport:
    threshold: float
    sup_errors_log2: tuple
    slopes: tuple
    classes: tuple  # bounded-consistent | diverging

    @property
    def fraction_below(self) -> float:
        lt = math.log2(self.threshold) if self.threshold > 0 else -math.inf
        return sum(1 for s in self.sup_errors_log2 if s < lt) / len(self.sup_errors_log2)

    @property
    def fraction_diverging(self) -> float:
        return self.classes.count("diverging") / len(self.classes)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "trials": len(self.classes),
            "fraction_below": self.fraction_below,
            "fraction_diverging": self.fraction_diverging,
            "sup_errors_log2": list(self.sup_errors_log2),
            "slopes": list(self.slopes),
            "classes": list(self.classes),
        }


def boundedness_report(traces: Sequence[Trace], threshold) -> BoundednessReport:
    if not traces:
        raise ValueError("need at least one trace")
    sups = tuple(tr.sup_error_log2 for tr in traces)
    slopes = tuple(tr.slope() for tr in traces)
    classes = tuple("diverging" if s > SLOPE_TOLERANCE else "bounded-consistent" for s in slopes)
    return BoundednessReport(float(threshold), sups, slopes, classes)


def scalar_error_bound(a, m: int, d, h0) -> Fraction:
    """max(h0, d·M/(M - |a|)) for a scalar plant sent over a noiseless M-ary link, N = 1."""
    a, d, h0 = abs(parse_rational(a)), parse_rational(d), parse_rational(h0)
    if a >= m:
        raise ValueError("bound needs |a| < M")
    return max(h0, d * m / (m - a))
