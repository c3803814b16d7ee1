"""
Scenario harness
================

Reads a YAML scenario, generates one shared transmit/receive stream, runs
every configured canceller over it and reduces the residuals to smoothed
power traces and per-epoch summaries.

Scenario file schema (all keys except ``segments`` and ``cancellers`` are
optional; defaults shown)::

    name: reference
    segments:                       # transmitted in order
      - {waveform: ofdm, qam_order: 1024, fft_size: 64, cp_len: 16, length: 4400}
      - {waveform: single_carrier, qam_order: 1024, length: 4400}
    channel_change_interval: 2200   # must divide the total length
    channel_length: 19
    tx_power_dbm: 20.0
    residual_si_dbm: -50.0
    noise_dbm: -90.0
    seeds: {signal: 1, channel: 2, noise: 3, algorithm: 4}
    smoothing_window: 200
    convergence_margin_db: 3.0
    epoch_scale: 1.0                # multiplies every network's epoch count
    cancellers:                     # bare names or {name: ..., <settings>}
      - wh_lms
      - {name: static_dnn, epochs: 30000, params_file: static.params}

Per-algorithm settings and defaults are listed in ``ALGORITHM_SETTINGS``.
``params_file`` makes network training resumable: an existing file is
loaded instead of training, otherwise the trained parameters are written
there (format in :mod:`fdsic.neural`).

Output files
------------
``<algo>_trace.csv``
    Columns ``symbol_index,residual_dbm``: the causal moving average of
    ``|e|^2`` over ``smoothing_window`` samples (shorter at stream start), in dBm.
``summary.csv``
    Columns ``algorithm,epoch,segment,start,stop,attenuation_db,
    convergence_symbols,param_count,fault``, one row per algorithm and
    channel epoch. ``convergence_symbols`` is empty when the threshold is
    never reached.
"""
from __future__ import annotations

import csv
import io
import logging
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from .adaptive import AOPLMS, DEFAULT_MU, MOMENT_WINDOW, WHLMS, WHRLSOrth, WIHLMS
from .basis import DEFAULT_TAPS, delay_line_windows
from .canceller import OracleCanceller, PassThrough
from .errors import ConfigurationError, NumericFault, SICError
from .kernel import DEFAULT_FEATURES, DEFAULT_KERNEL_MU, KLMS, RFKLMS, median_bandwidth, real_view
from .neural import (
    ADAPTIVE_SIZES,
    STATIC_SIZES,
    AdaptiveDNNCanceller,
    StaticDNNCanceller,
    load_params,
    save_params,
    train_adaptive,
    train_static,
)
from .si_channel import ChannelSchedule, default_pa, make_received
from .signal_gen import ModulationSpec, dbm_to_watts, generate_tx, watts_to_dbm

log = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "scenarios")
TRACE_COLUMNS = ("symbol_index", "residual_dbm")
SUMMARY_COLUMNS = (
    "algorithm", "epoch", "segment", "start", "stop",
    "attenuation_db", "convergence_symbols", "param_count", "fault",
)

# Per-algorithm settings and their defaults. Unknown keys are rejected.
ALGORITHM_SETTINGS = {
    "none": {},
    "oracle": {},
    "wh_lms": {"mu": DEFAULT_MU, "taps": DEFAULT_TAPS},
    "wh_rls_orth": {"mu": DEFAULT_MU, "taps": DEFAULT_TAPS, "train_symbols": 2200},
    "wih_lms": {"mu": DEFAULT_MU, "taps": DEFAULT_TAPS, "sigma2": 1.0},
    "aop_lms": {"mu": DEFAULT_MU, "taps": DEFAULT_TAPS, "n_est": MOMENT_WINDOW, "lookahead": True},
    "klms": {"mu": DEFAULT_KERNEL_MU, "taps": DEFAULT_TAPS, "bandwidth": None, "bandwidth_samples": 500},
    "rfk_lms": {
        "mu": DEFAULT_KERNEL_MU, "taps": DEFAULT_TAPS, "n_features": DEFAULT_FEATURES,
        "bandwidth": None, "bandwidth_samples": 500,
    },
    "static_dnn": {"epochs": 30000, "train_symbols": 2200, "dtype": "float32", "params_file": None},
    "adaptive_dnn": {"epochs": 40000, "mu": DEFAULT_MU, "dtype": "float32", "params_file": None},
}
# Settings whose default is None (meaning "derive" or "off") and their type when given.
_OPTIONAL_SETTINGS = {"bandwidth": float, "params_file": str}

# Fixed sub-stream of the algorithm seed used by each randomized canceller,
# so results do not depend on which other algorithms are selected.
_SEED_STREAM = {"klms": 1, "rfk_lms": 2, "static_dnn": 3, "adaptive_dnn": 4}


@dataclass(frozen=True)
class Seeds:
    signal: int = 1
    channel: int = 2
    noise: int = 3
    algorithm: int = 4


@dataclass(frozen=True)
class CancellerSpec:
    name: str
    settings: dict = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    segments: list
    cancellers: list
    channel_change_interval: int = 2200
    channel_length: int = 19
    tx_power_dbm: float = 20.0
    residual_si_dbm: float = -50.0
    noise_dbm: float = -90.0
    seeds: Seeds = field(default_factory=Seeds)
    smoothing_window: int = 200
    convergence_margin_db: float = 3.0
    epoch_scale: float = 1.0
    name: str = "scenario"

    def __post_init__(self):
        self.validate()

    @property
    def total_symbols(self):
        return sum(length for _, length in self.segments)

    @property
    def segment_starts(self):
        return list(np.cumsum([0] + [length for _, length in self.segments[:-1]]))

    @property
    def threshold_dbm(self):
        return self.noise_dbm + self.convergence_margin_db

    def validate(self):
        if not self.segments:
            raise ConfigurationError("segments: at least one segment is required")
        for i, (spec, length) in enumerate(self.segments):
            if not isinstance(spec, ModulationSpec):
                raise ConfigurationError(f"segments[{i}]: expected a ModulationSpec")
            if int(length) < 1:
                raise ConfigurationError(f"segments[{i}].length: must be positive, got {length}")
        if self.channel_change_interval < 1:
            raise ConfigurationError("channel_change_interval: must be positive")
        if self.total_symbols % self.channel_change_interval:
            raise ConfigurationError(
                f"channel_change_interval {self.channel_change_interval} does not divide "
                f"the total length {self.total_symbols}"
            )
        if self.channel_length < 1:
            raise ConfigurationError("channel_length: must be positive")
        if self.smoothing_window < 1:
            raise ConfigurationError("smoothing_window: must be positive")
        if not self.epoch_scale >= 0:
            raise ConfigurationError("epoch_scale: must be non-negative")
        if not self.cancellers:
            raise ConfigurationError("cancellers: at least one canceller is required")
        names = [c.name for c in self.cancellers]
        if len(set(names)) != len(names):
            raise ConfigurationError("cancellers: duplicate algorithm names")

    def with_overrides(self, seed=None, epoch_scale=None, algos=None):
        """Copy with CLI overrides applied.

        ``seed`` replaces the four seeds by ``seed, seed+1, seed+2, seed+3``.
        """
        cfg = replace(self)
        if seed is not None:
            cfg.seeds = Seeds(seed, seed + 1, seed + 2, seed + 3)
        if epoch_scale is not None:
            cfg.epoch_scale = float(epoch_scale)
        if algos is not None:
            known = {c.name: c for c in self.cancellers}
            chosen = []
            for name in algos:
                if name in known:
                    chosen.append(known[name])
                elif name in ALGORITHM_SETTINGS:
                    chosen.append(CancellerSpec(name, dict(ALGORITHM_SETTINGS[name])))
                else:
                    raise ConfigurationError(f"--algos: unknown algorithm {name!r}")
            cfg.cancellers = chosen
        cfg.validate()
        return cfg

    def to_dict(self):
        segs = []
        for spec, length in self.segments:
            entry = {"waveform": spec.kind.value, "qam_order": spec.qam_order}
            if spec.kind.value == "ofdm":
                entry.update(fft_size=spec.fft_size, cp_len=spec.cp_len)
            entry["length"] = int(length)
            segs.append(entry)
        return {
            "name": self.name,
            "segments": segs,
            "channel_change_interval": self.channel_change_interval,
            "channel_length": self.channel_length,
            "tx_power_dbm": self.tx_power_dbm,
            "residual_si_dbm": self.residual_si_dbm,
            "noise_dbm": self.noise_dbm,
            "seeds": asdict(self.seeds),
            "smoothing_window": self.smoothing_window,
            "convergence_margin_db": self.convergence_margin_db,
            "epoch_scale": self.epoch_scale,
            "cancellers": [{"name": c.name, **c.settings} for c in self.cancellers],
        }


# ---------------------------------------------------------------- parsing

def _typed(value, kind, path):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected true/false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{path}: expected a string, got {value!r}")
        return value
    raise AssertionError(kind)


def _check_keys(mapping, allowed, path):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{path}: expected a mapping")
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        where = f"{path}." if path else ""
        raise ConfigurationError(f"{where}{extra[0]}: unknown key")


_SCALARS = {
    "name": str,
    "channel_change_interval": int,
    "channel_length": int,
    "tx_power_dbm": float,
    "residual_si_dbm": float,
    "noise_dbm": float,
    "smoothing_window": int,
    "convergence_margin_db": float,
    "epoch_scale": float,
}


def _parse_segment(raw, path):
    _check_keys(raw, {"waveform", "qam_order", "fft_size", "cp_len", "length"}, path)
    if "length" not in raw:
        raise ConfigurationError(f"{path}.length: required")
    if "waveform" not in raw:
        raise ConfigurationError(f"{path}.waveform: required")
    kwargs = {"kind": _typed(raw["waveform"], str, f"{path}.waveform")}
    for key in ("qam_order", "fft_size", "cp_len"):
        if key in raw:
            kwargs[key] = _typed(raw[key], int, f"{path}.{key}")
    try:
        spec = ModulationSpec(**kwargs)
    except ValueError as err:
        raise ConfigurationError(f"{path}: {err}") from err
    return spec, _typed(raw["length"], int, f"{path}.length")


def _parse_canceller(raw, path):
    if isinstance(raw, str):
        raw = {"name": raw}
    if not isinstance(raw, dict) or "name" not in raw:
        raise ConfigurationError(f"{path}: expected an algorithm name or a mapping with 'name'")
    name = _typed(raw["name"], str, f"{path}.name")
    if name not in ALGORITHM_SETTINGS:
        raise ConfigurationError(f"{path}.name: unknown algorithm {name!r}")
    defaults = ALGORITHM_SETTINGS[name]
    _check_keys(raw, {"name", *defaults}, path)
    settings = dict(defaults)
    for key, value in raw.items():
        if key == "name":
            continue
        default = defaults[key]
        if default is None:
            settings[key] = None if value is None else _typed(value, _OPTIONAL_SETTINGS[key], f"{path}.{key}")
        else:
            settings[key] = _typed(value, type(default), f"{path}.{key}")
    return CancellerSpec(name, settings)


def parse_config(data):
    """Validate a scenario mapping and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigurationError("scenario: top level must be a mapping")
    _check_keys(data, {"segments", "cancellers", "seeds", *_SCALARS}, "")
    for key in ("segments", "cancellers"):
        if key not in data:
            raise ConfigurationError(f"{key}: required")
        if not isinstance(data[key], list):
            raise ConfigurationError(f"{key}: expected a list")
    kwargs = {key: _typed(data[key], kind, key) for key, kind in _SCALARS.items() if key in data}
    kwargs["segments"] = [_parse_segment(s, f"segments[{i}]") for i, s in enumerate(data["segments"])]
    kwargs["cancellers"] = [_parse_canceller(c, f"cancellers[{i}]") for i, c in enumerate(data["cancellers"])]
    if "seeds" in data:
        _check_keys(data["seeds"], {"signal", "channel", "noise", "algorithm"}, "seeds")
        kwargs["seeds"] = Seeds(**{k: _typed(v, int, f"seeds.{k}") for k, v in data["seeds"].items()})
    return ScenarioConfig(**kwargs)


def bundled_scenario(name):
    """Path of a scenario file shipped with the package (``reference``, ``wh_extension``)."""
    path = os.path.join(SCENARIO_DIR, f"{name}.scenario")
    if not os.path.exists(path):
        raise ConfigurationError(f"no bundled scenario named {name!r}")
    return path


def load_config(path):
    """Read, validate and log a scenario file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as err:
        raise ConfigurationError(f"{path}: {err.strerror}") from err
    except yaml.YAMLError as err:
        raise ConfigurationError(f"{path}: not valid YAML ({err})") from err
    try:
        cfg = parse_config(data)
    except ConfigurationError as err:
        raise ConfigurationError(f"{path}: {err}") from err
    log.info("resolved scenario:\n%s", yaml.safe_dump(cfg.to_dict(), sort_keys=False))
    return cfg


# ---------------------------------------------------------------- streams

@dataclass
class Streams:
    """Shared inputs of one run; every canceller sees exactly these arrays."""

    x: np.ndarray            # transmit samples at unit drive
    rx: np.ndarray           # received samples (watts^0.5)
    si: np.ndarray
    noise: np.ndarray
    segment_starts: list
    epoch_bounds: list

    def __post_init__(self):
        for arr in (self.x, self.rx, self.si, self.noise):
            arr.setflags(write=False)


def build_streams(cfg, signal_seed=None, noise_seed=None):
    sig = cfg.seeds.signal if signal_seed is None else signal_seed
    nse = cfg.seeds.noise if noise_seed is None else noise_seed
    tx = generate_tx(cfg.segments, cfg.tx_power_dbm, sig)
    n = cfg.total_symbols
    schedule = ChannelSchedule.draw(
        n // cfg.channel_change_interval, cfg.channel_length, cfg.channel_change_interval, cfg.seeds.channel
    )
    frame = make_received(tx.samples, default_pa(cfg.tx_power_dbm), schedule, cfg.residual_si_dbm, cfg.noise_dbm, nse)
    x = tx.samples / np.sqrt(float(dbm_to_watts(cfg.tx_power_dbm)))
    return Streams(x, frame.rx, frame.si, frame.noise, [int(s) for s in cfg.segment_starts], schedule.epoch_bounds(n))


def _seed_for(cfg, name):
    return np.random.SeedSequence([cfg.seeds.algorithm, _SEED_STREAM[name]])


def _kernel_bandwidth(cfg, streams, settings, ss):
    if settings["bandwidth"] is not None:
        return settings["bandwidth"]
    first = cfg.segments[0][1]
    V = real_view(delay_line_windows(streams.x[:first], settings["taps"]))
    return median_bandwidth(V, settings["bandwidth_samples"], ss)


def _scaled_epochs(cfg, epochs):
    return int(round(epochs * cfg.epoch_scale))


def _trained(cfg, spec, sizes, fit):
    """Load network parameters from ``params_file`` if it exists, else train (and save)."""
    path = spec.settings["params_file"]
    if path and os.path.exists(path):
        params, variant, _ = load_params(path)
        if variant != spec.name or params.sizes != sizes:
            raise ConfigurationError(f"{path}: holds {variant} {params.sizes}, expected {spec.name} {sizes}")
        log.info("%s: loaded parameters from %s", spec.name, path)
        return params, np.zeros(0)
    params, losses = fit()
    if path:
        save_params(path, params, spec.name, cfg.seeds.algorithm)
        log.info("%s: saved parameters to %s", spec.name, path)
    return params, losses


def make_canceller(cfg, spec, streams):
    """Instantiate (and, for networks, train) one configured canceller."""
    s = spec.settings
    rx_scale = np.sqrt(float(dbm_to_watts(cfg.residual_si_dbm)))
    if spec.name == "none":
        return PassThrough()
    if spec.name == "oracle":
        return OracleCanceller(streams.rx - streams.noise)
    if spec.name == "wh_lms":
        return WHLMS(s["taps"], s["mu"])
    if spec.name == "wh_rls_orth":
        return WHRLSOrth.from_training(streams.x[: s["train_symbols"]], s["taps"], s["mu"])
    if spec.name == "wih_lms":
        return WIHLMS(s["sigma2"], s["taps"], s["mu"])
    if spec.name == "aop_lms":
        return AOPLMS(s["taps"], s["mu"], s["n_est"], s["lookahead"])
    if spec.name == "klms":
        h = _kernel_bandwidth(cfg, streams, s, _seed_for(cfg, "klms"))
        return KLMS(h, s["taps"], s["mu"], capacity=cfg.total_symbols)
    if spec.name == "rfk_lms":
        ss = _seed_for(cfg, "rfk_lms")
        bw_seed, feat_seed = ss.spawn(2)
        h = _kernel_bandwidth(cfg, streams, s, bw_seed)
        return RFKLMS(h, s["taps"], s["mu"], s["n_features"], feat_seed)
    if spec.name == "static_dnn":
        def fit():
            n = s["train_symbols"]
            X = real_view(delay_line_windows(streams.x, DEFAULT_TAPS)[:n])
            return train_static(
                X, streams.rx[:n] / rx_scale, _scaled_epochs(cfg, s["epochs"]),
                _seed_for(cfg, "static_dnn"), dtype=np.dtype(s["dtype"]),
            )

        params, losses = _trained(cfg, spec, STATIC_SIZES, fit)
        canceller = StaticDNNCanceller(params, rx_scale)
        canceller.losses = losses
        return canceller
    if spec.name == "adaptive_dnn":
        def fit():
            # pretraining stream: same scenario and channel draws, fresh data and noise
            ss = _seed_for(cfg, "adaptive_dnn")
            sig_seed, noise_seed, train_seed = (int(c.generate_state(1)[0]) for c in ss.spawn(3))
            pre = build_streams(cfg, signal_seed=sig_seed, noise_seed=noise_seed)
            return train_adaptive(
                pre.x, pre.rx / rx_scale, _scaled_epochs(cfg, s["epochs"]), train_seed,
                dtype=np.dtype(s["dtype"]), mu=s["mu"],
            )

        params, losses = _trained(cfg, spec, ADAPTIVE_SIZES, fit)
        canceller = AdaptiveDNNCanceller(params, rx_scale, mu=s["mu"])
        canceller.losses = losses
        return canceller
    raise ConfigurationError(f"unknown algorithm {spec.name!r}")


# ---------------------------------------------------------------- metrics

def moving_power_dbm(e, window):
    """Causal mean of ``|e|^2`` over the last ``window`` samples, in dBm.

    The first ``window - 1`` outputs average over the samples available so far.
    """
    p = np.abs(np.asarray(e, dtype=complex)) ** 2
    if p.size == 0:
        return np.zeros(0)
    sums = np.convolve(p, np.ones(window))[: p.size]
    counts = np.minimum(np.arange(1, p.size + 1), window)
    return watts_to_dbm(sums / counts)


def convergence_symbols(e, start, stop, threshold_dbm, window, skip=0):
    """Samples after ``start`` until the smoothed residual first drops to ``threshold_dbm``.

    Smoothing restarts at ``start`` so residuals from before a channel or
    distribution change cannot count towards convergence after it. The
    first ``skip`` samples (window warm-up) are not eligible. Returns None
    if the threshold is never reached before ``stop``.
    """
    tr = moving_power_dbm(np.asarray(e)[start:stop], window)
    hits = np.nonzero(tr[skip:] <= threshold_dbm)[0]
    return int(hits[0]) + skip if hits.size else None


def attenuation_db(trace_dbm, start, stop, residual_si_dbm):
    """Residual SI level minus the mean smoothed residual over the final quarter of ``[start, stop)``."""
    q = start + 3 * (stop - start) // 4
    tail = np.asarray(trace_dbm)[q:stop]
    if tail.size == 0:
        return float("nan")
    return float(residual_si_dbm - tail.mean())


@dataclass(frozen=True)
class TraceRecord:
    symbol_index: int
    algorithm: str
    residual_power_dbm: float
    raw_residual: complex


@dataclass
class AlgorithmTrace:
    """Full residual history of one algorithm (truncated at a fault)."""

    algorithm: str
    residual: np.ndarray
    residual_dbm: np.ndarray
    param_count: int
    fault: str | None = None
    elapsed_s: float = 0.0   # wall time including training; not written to CSV

    def records(self):
        for n, (p, e) in enumerate(zip(self.residual_dbm, self.residual)):
            yield TraceRecord(n, self.algorithm, float(p), complex(e))


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    epoch: int
    segment: int
    start: int
    stop: int
    attenuation_db: float
    convergence_symbols: int | None
    param_count: int
    fault: str | None = None


@dataclass
class RunResult:
    config: ScenarioConfig
    streams: Streams
    traces: dict
    summaries: list
    cancellers: dict

    def summary(self, algorithm):
        return [row for row in self.summaries if row.algorithm == algorithm]


def summarize(cfg, streams, trace):
    rows = []
    n_done = trace.residual.size
    for k, (start, stop) in enumerate(streams.epoch_bounds):
        segment = int(np.searchsorted(streams.segment_starts, start, side="right")) - 1
        if n_done >= stop:
            att = attenuation_db(trace.residual_dbm, start, stop, cfg.residual_si_dbm)
            skip = DEFAULT_TAPS - 1 if start == 0 else 0
            conv = convergence_symbols(
                trace.residual, start, stop, cfg.threshold_dbm, cfg.smoothing_window, skip
            )
        else:
            att, conv = float("nan"), None
        rows.append(SummaryRow(trace.algorithm, k, segment, start, stop, att, conv, trace.param_count, trace.fault))
    return rows


def run_scenario(cfg):
    """Run every configured canceller over one shared stream.

    A canceller that raises a numeric fault (or fails to build) keeps the
    residuals it produced so far; the fault is recorded in its trace and
    summary rows, and the remaining algorithms are unaffected.
    """
    streams = build_streams(cfg)
    boundaries = streams.segment_starts
    traces, summaries, cancellers = {}, [], {}
    for spec in cfg.cancellers:
        log.info("running %s", spec.name)
        fault = None
        canceller = None
        t0 = time.perf_counter()
        try:
            canceller = make_canceller(cfg, spec, streams)
            _, e = canceller.run(streams.x, streams.rx, boundaries)
        except NumericFault as err:
            fault = f"numeric fault: {err}"
            e = getattr(err, "residual", np.zeros(0, dtype=complex))
        except SICError as err:
            fault = f"{type(err).__name__}: {err}"
            e = np.zeros(0, dtype=complex)
        if fault:
            log.warning("%s: %s", spec.name, fault)
        e = np.asarray(e, dtype=complex)
        count = canceller.param_count if canceller is not None else 0
        trace = AlgorithmTrace(
            spec.name, e, moving_power_dbm(e, cfg.smoothing_window), count, fault, time.perf_counter() - t0
        )
        traces[spec.name] = trace
        cancellers[spec.name] = canceller
        summaries.extend(summarize(cfg, streams, trace))
    return RunResult(cfg, streams, traces, summaries, cancellers)


# ---------------------------------------------------------------- output

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_table(summaries):
    """Plain-text table of the summary rows."""
    header = ("algorithm", "epoch", "seg", "atten_dB", "conv_sym", "params", "fault")
    lines = [f"{header[0]:<14}{header[1]:>6}{header[2]:>5}{header[3]:>10}{header[4]:>10}{header[5]:>8}  {header[6]}"]
    for r in summaries:
        conv = "-" if r.convergence_symbols is None else str(r.convergence_symbols)
        lines.append(
            f"{r.algorithm:<14}{r.epoch:>6}{r.segment:>5}{r.attenuation_db:>10.2f}{conv:>10}"
            f"{r.param_count:>8}  {r.fault or ''}"
        )
    return "\n".join(lines)


def write_outputs(traces, summaries, out_dir, stdout=None):
    """Write per-algorithm trace CSVs, ``summary.csv`` and print the table.

    Returns the list of written paths.
    """
    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, trace in traces.items():
            path = os.path.join(out_dir, f"{name}_trace.csv")
            buf = io.StringIO()
            buf.write(",".join(TRACE_COLUMNS) + "\n")
            for n, value in enumerate(trace.residual_dbm):
                buf.write(f"{n},{float(value)!r}\n")
            with open(path, "w", newline="") as fh:
                fh.write(buf.getvalue())
            written.append(path)
        path = os.path.join(out_dir, "summary.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)
            for r in summaries:
                writer.writerow([_fmt(getattr(r, col)) for col in SUMMARY_COLUMNS])
        written.append(path)
    except OSError as err:
        raise SICError(f"cannot write outputs to {err.filename or out_dir}: {err.strerror}") from err
    if stdout is not None:
        print(format_table(summaries), file=stdout)
    return written
