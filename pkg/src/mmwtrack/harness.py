"""Experiment configuration, seeded Monte Carlo execution and CSV output.

Configs are flat key = value text documents with units spelled out in the key
names. Per-trial randomness is derived from the master seed and the trial /
variant / SNR indices through numpy SeedSequence spawn keys, so parallel and
serial runs produce identical results. Channel realizations are keyed on the
trial index alone and therefore shared across variants and SNR points
(paired comparison).
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (
    ArrayConfig,
    ChannelParams,
    LogDistancePathLoss,
    noise_variance,
    sample_channel,
)
from .evaluation import MetricConfig, dpsk_ser_trial, normalized_correlation, spectral_efficiency
from .protocol import (
    MODE_FD,
    MODE_HY,
    EstimatedBeamformers,
    ProtocolConfig,
    TrackerSpec,
    make_front_end,
    run_protocol,
)


class ConfigError(ValueError):
    """Raised for unparseable or invalid experiment configuration."""


ORACLE = "oracle"


@dataclass(frozen=True)
class Variant:
    """One algorithm/mode combination to evaluate, e.g. pastd-fd or oracle."""

    name: str
    algorithm: str   # pastd | ooja | oracle
    mode: str        # fd | hy (fd for the oracle baseline)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    variant: str
    snr_db: float
    eta_u: float
    eta_v: float
    spectral_eff_bits: float
    ser: float | None
    seed_used: int
    config_digest: str


@dataclass(frozen=True)
class ExperimentConfig:
    bs: ArrayConfig
    ms: ArrayConfig
    channel: ChannelParams
    protocol: ProtocolConfig
    metrics: MetricConfig
    snr_grid_db: tuple
    n_trials: int
    master_seed: int
    variants: tuple

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be >= 1, got {self.n_trials}")
        if len(self.snr_grid_db) == 0:
            raise ConfigError("snr_grid_db must be nonempty")
        if len(self.variants) == 0:
            raise ConfigError("variants must be nonempty")


def _parse_int(s):
    return int(s, 0)


def _parse_float(s):
    return float(s)


def _parse_str(s):
    return s


def _parse_float_list(s):
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


def _parse_int_list(s):
    return tuple(int(tok) for tok in s.split(",") if tok.strip())


def _parse_str_list(s):
    return tuple(tok.strip() for tok in s.split(",") if tok.strip())


# key -> (parser, default). Defaults are the documented paper-style setup.
_SCHEMA = {
    "n_bs": (_parse_int, 100),
    "n_ms": (_parse_int, 30),
    "element_spacing_wl": (_parse_float, 0.5),
    "n_clusters": (_parse_int, 5),
    "rays_per_cluster": (_parse_int_list, (10,)),
    "carrier_freq_ghz": (_parse_float, 73.0),
    "link_distance_m": (_parse_float, 50.0),
    "los_probability": (_parse_float, 0.0),
    "path_loss_intercept_db": (_parse_float, 72.0),
    "path_loss_exponent": (_parse_float, 2.92),
    "cluster_angle_spread_deg": (_parse_float, 5.0),
    "noise_psd_dbm_hz": (_parse_float, -174.0),
    "noise_figure_db": (_parse_float, 3.0),
    "bandwidth_mhz": (_parse_float, 500.0),
    "p_bs": (_parse_int, 30),
    "p_ms": (_parse_int, 30),
    "warmup": (_parse_int, 10),
    "multiplexing_order": (_parse_int, 1),
    "n_rf_bs": (_parse_int, 20),
    "n_rf_ms": (_parse_int, 10),
    "pastd_beta": (_parse_float, 0.95),
    "ooja_delta": (_parse_float, 0.01),
    "ooja_sign": (_parse_int, 1),
    "psk_order": (_parse_int, 16),
    "n_data_symbols": (_parse_int, 10_000),
    "p_t_bs": (_parse_float, 1.0),
    "snr_grid_db": (_parse_float_list, (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)),
    "n_trials": (_parse_int, 500),
    "master_seed": (_parse_int, 1),
    "variants": (_parse_str_list, ("pastd-fd", "ooja-fd", "pastd-hy", "ooja-hy", "oracle")),
}


def _parse_variant(token: str) -> Variant:
    if token == ORACLE:
        return Variant(name=token, algorithm=ORACLE, mode=MODE_FD)
    parts = token.split("-")
    if len(parts) != 2 or parts[0] not in ("pastd", "ooja") or parts[1] not in (MODE_FD, MODE_HY):
        raise ConfigError(
            f"variants: unknown variant {token!r} (expected pastd-fd, pastd-hy, "
            f"ooja-fd, ooja-hy or oracle)"
        )
    return Variant(name=token, algorithm=parts[0], mode=parts[1])


def _parse_document(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser, _ = _SCHEMA[key]
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {val!r} ({exc})") from None
    return values


def load_config(source) -> ExperimentConfig:
    """Build a fully validated ExperimentConfig from a file path or raw text."""
    text = source
    if isinstance(source, os.PathLike) or (
        isinstance(source, str) and source != "" and "=" not in source and "\n" not in source
    ):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {source!r}: {exc}") from None
    values = _parse_document(text)
    resolved = {key: values.get(key, default) for key, (_, default) in _SCHEMA.items()}

    rays = resolved["rays_per_cluster"]
    if len(rays) == 1:
        rays = rays * resolved["n_clusters"]
    resolved["rays_per_cluster"] = rays

    try:
        bs = ArrayConfig(resolved["n_bs"], resolved["element_spacing_wl"])
        ms = ArrayConfig(resolved["n_ms"], resolved["element_spacing_wl"])
        channel = ChannelParams(
            n_clusters=resolved["n_clusters"],
            rays_per_cluster=rays,
            carrier_freq_hz=resolved["carrier_freq_ghz"] * 1e9,
            link_distance_m=resolved["link_distance_m"],
            los_probability=resolved["los_probability"],
            path_loss_model=LogDistancePathLoss(
                resolved["path_loss_intercept_db"], resolved["path_loss_exponent"]
            ),
            cluster_angle_spread_deg=resolved["cluster_angle_spread_deg"],
            noise_psd_dbm_hz=resolved["noise_psd_dbm_hz"],
            noise_figure_db=resolved["noise_figure_db"],
            bandwidth_hz=resolved["bandwidth_mhz"] * 1e6,
        )
        protocol = ProtocolConfig(
            p_bs=resolved["p_bs"],
            p_ms=resolved["p_ms"],
            warmup=resolved["warmup"],
            m=resolved["multiplexing_order"],
            mode=MODE_FD,
            n_rf_bs=resolved["n_rf_bs"],
            n_rf_ms=resolved["n_rf_ms"],
            tracker=TrackerSpec(
                kind="pastd",
                beta=resolved["pastd_beta"],
                delta=resolved["ooja_delta"],
                sign=resolved["ooja_sign"],
            ),
        )
        metrics = MetricConfig(
            psk_order=resolved["psk_order"],
            n_data_symbols=resolved["n_data_symbols"],
            p_t_bs=resolved["p_t_bs"],
        )
        variants = tuple(_parse_variant(tok) for tok in resolved["variants"])
        if resolved["n_rf_bs"] > resolved["n_bs"] or resolved["n_rf_ms"] > resolved["n_ms"]:
            raise ConfigError("n_rf_bs/n_rf_ms must not exceed the antenna counts")
        cfg = ExperimentConfig(
            bs=bs,
            ms=ms,
            channel=channel,
            protocol=protocol,
            metrics=metrics,
            snr_grid_db=resolved["snr_grid_db"],
            n_trials=resolved["n_trials"],
            master_seed=resolved["master_seed"],
            variants=variants,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _fmt_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt_value(v) for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def resolved_text(cfg: ExperimentConfig) -> str:
    """Canonical key = value rendering of a config with defaults materialized."""
    model = cfg.channel.path_loss_model
    out = {
        "n_bs": cfg.bs.n_elements,
        "n_ms": cfg.ms.n_elements,
        "element_spacing_wl": cfg.bs.spacing,
        "n_clusters": cfg.channel.n_clusters,
        "rays_per_cluster": tuple(cfg.channel.rays_per_cluster),
        "carrier_freq_ghz": cfg.channel.carrier_freq_hz / 1e9,
        "link_distance_m": cfg.channel.link_distance_m,
        "los_probability": cfg.channel.los_probability,
        "path_loss_intercept_db": model.intercept_db,
        "path_loss_exponent": model.exponent,
        "cluster_angle_spread_deg": cfg.channel.cluster_angle_spread_deg,
        "noise_psd_dbm_hz": cfg.channel.noise_psd_dbm_hz,
        "noise_figure_db": cfg.channel.noise_figure_db,
        "bandwidth_mhz": cfg.channel.bandwidth_hz / 1e6,
        "p_bs": cfg.protocol.p_bs,
        "p_ms": cfg.protocol.p_ms,
        "warmup": cfg.protocol.warmup,
        "multiplexing_order": cfg.protocol.m,
        "n_rf_bs": cfg.protocol.n_rf_bs,
        "n_rf_ms": cfg.protocol.n_rf_ms,
        "pastd_beta": cfg.protocol.tracker.beta,
        "ooja_delta": cfg.protocol.tracker.delta,
        "ooja_sign": cfg.protocol.tracker.sign,
        "psk_order": cfg.metrics.psk_order,
        "n_data_symbols": cfg.metrics.n_data_symbols,
        "p_t_bs": cfg.metrics.p_t_bs,
        "snr_grid_db": tuple(cfg.snr_grid_db),
        "n_trials": cfg.n_trials,
        "master_seed": cfg.master_seed,
        "variants": tuple(v.name for v in cfg.variants),
    }
    return "".join(f"{key} = {_fmt_value(out[key])}\n" for key in _SCHEMA)


def config_digest(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(resolved_text(cfg).encode("utf-8")).hexdigest()[:16]


def _variant_protocol(cfg: ExperimentConfig, variant: Variant) -> ProtocolConfig:
    tracker = replace(cfg.protocol.tracker, kind=variant.algorithm)
    return replace(cfg.protocol, mode=variant.mode, tracker=tracker)


def _trial_records(cfg: ExperimentConfig, trial_idx: int, digest: str) -> list:
    chan_rng = np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(0, trial_idx))
    )
    chan = sample_channel(cfg.channel, cfg.bs, cfg.ms, chan_rng)
    sigma2 = noise_variance(cfg.channel)
    h2 = float(np.linalg.norm(chan.h) ** 2)
    m = cfg.protocol.m
    u1 = chan.u[:, 0]
    v1 = chan.v[:, 0]
    front = None
    if any(v.mode == MODE_HY for v in cfg.variants):
        front = make_front_end(cfg.bs, cfg.ms, cfg.protocol)

    records = []
    for vi, variant in enumerate(cfg.variants):
        for si, snr_db in enumerate(cfg.snr_grid_db):
            seq = np.random.SeedSequence(cfg.master_seed, spawn_key=(1, vi, si, trial_idx))
            seed_used = int(seq.generate_state(1)[0])
            rng = np.random.default_rng(seq)
            snr_lin = 10.0 ** (snr_db / 10.0)
            rho = snr_lin * cfg.ms.n_elements * sigma2 / h2 if h2 > 0 else 1.0
            if variant.algorithm == ORACLE:
                beams = EstimatedBeamformers(d_ms=chan.u[:, :m], d_bs=chan.v[:, :m])
            else:
                pcfg = replace(_variant_protocol(cfg, variant), tx_power_scale=rho)
                beams = run_protocol(chan, pcfg, front, sigma2, rng)
            p_t = rho * cfg.metrics.p_t_bs
            se = spectral_efficiency(chan.h, beams.d_ms, beams.d_bs, p_t, sigma2)
            ser = None
            if m == 1:
                mcfg = replace(cfg.metrics, p_t_bs=p_t)
                ser = dpsk_ser_trial(chan, beams, mcfg, sigma2, rng)
            records.append(
                TrialRecord(
                    trial_index=trial_idx,
                    variant=variant.name,
                    snr_db=snr_db,
                    eta_u=normalized_correlation(u1, beams.d_ms[:, 0]),
                    eta_v=normalized_correlation(v1, beams.d_bs[:, 0]),
                    spectral_eff_bits=se,
                    ser=ser,
                    seed_used=seed_used,
                    config_digest=digest,
                )
            )
    return records


def _trial_worker(args):
    cfg, trial_idx, digest = args
    return _trial_records(cfg, trial_idx, digest)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list:
    """All trial records for a config, ordered by (variant, SNR, trial)."""
    digest = config_digest(cfg)
    tasks = [(cfg, t, digest) for t in range(cfg.n_trials)]
    if workers > 1:
        chunk = max(1, cfg.n_trials // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_trial_worker, tasks, chunksize=chunk))
    else:
        per_trial = [_trial_worker(t) for t in tasks]
    records = [rec for trial in per_trial for rec in trial]
    vidx = {v.name: i for i, v in enumerate(cfg.variants)}
    sidx = {s: i for i, s in enumerate(cfg.snr_grid_db)}
    records.sort(key=lambda r: (vidx[r.variant], sidx[r.snr_db], r.trial_index))
    return records


def _fmt_float(x) -> str:
    return "" if x is None else format(float(x), ".17g")


_QUANTILES = (0.10, 0.25, 0.75, 0.90)


def _stats_cells(values) -> list:
    values = [v for v in values if v is not None]
    if not values:
        return [""] * (2 + len(_QUANTILES))
    arr = np.asarray(values, dtype=float)
    cells = [_fmt_float(arr.mean()), _fmt_float(np.median(arr))]
    cells += [_fmt_float(np.quantile(arr, q)) for q in _QUANTILES]
    return cells


def emit_csv(records, destination) -> None:
    """Write records.csv and per-(variant, SNR) aggregates.csv under destination."""
    if not records:
        raise ValueError("no records to emit")
    os.makedirs(destination, exist_ok=True)

    with open(os.path.join(destination, "records.csv"), "w", encoding="utf-8") as fh:
        fh.write("trial,variant,snr_db,eta_u,eta_v,se_bits,ser,seed\n")
        for r in records:
            fh.write(
                f"{r.trial_index},{r.variant},{_fmt_float(r.snr_db)},"
                f"{_fmt_float(r.eta_u)},{_fmt_float(r.eta_v)},"
                f"{_fmt_float(r.spectral_eff_bits)},{_fmt_float(r.ser)},{r.seed_used}\n"
            )

    groups = {}
    for r in records:
        groups.setdefault((r.variant, r.snr_db), []).append(r)
    metric_names = ("eta_u", "eta_v", "se_bits", "ser")
    stat_names = ("mean", "median") + tuple(f"q{int(q * 100)}" for q in _QUANTILES)
    header = ["variant", "snr_db", "n"]
    header += [f"{m}_{s}" for m in metric_names for s in stat_names]
    with open(os.path.join(destination, "aggregates.csv"), "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for (variant, snr_db), group in groups.items():
            cells = [variant, _fmt_float(snr_db), str(len(group))]
            cells += _stats_cells([g.eta_u for g in group])
            cells += _stats_cells([g.eta_v for g in group])
            cells += _stats_cells([g.spectral_eff_bits for g in group])
            cells += _stats_cells([g.ser for g in group])
            fh.write(",".join(cells) + "\n")
