"""Command-line entry points.

Subcommands: synth, train, forecast, evaluate, ablate, horizon. Every
command is deterministic given (config, seed); reruns produce byte-identical
outputs. Configuration comes from an optional YAML file plus flag overrides
(flags win). Exit codes: 0 success, 1 usage/config error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import importlib.resources
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import checkpoint as ckpt_io
from . import data as data_mod
from . import report as report_mod
from .errors import ConfigError, DataError, NumericalError
from .fileio import atomic_write_text
from .lstm import ModelSpec, init_params, network_forward
from .metrics import evaluate_series, horizon_aggregate
from .training import TrainConfig, apply_scaler, fit_scaler, train

log = logging.getLogger("eadforecast")

DEFAULT_FEATURES = ("temperature", "humidity", "day_label", "mobility")
ABLATION_VARIANTS = (
    ("all_features", None),
    ("no_mobility", "mobility"),
    ("no_temperature", "temperature"),
    ("no_humidity", "humidity"),
    ("no_day_label", "day_label"),
)
DEFAULT_HORIZONS = (3, 7, 14, 28)


@dataclass
class RunConfig:
    weather: Path = None
    ead: Path = None
    mobility: Path = None
    holidays: Path = None
    train_start: dt.date = None
    train_end: dt.date = None
    test_start: dt.date = None
    test_end: dt.date = None
    group: str = "all"
    lookback: int = 14
    horizon: int = 1
    features: tuple[str, ...] = DEFAULT_FEATURES
    epochs: int = 500
    batch_size: int = 8
    loss: str = "mse"
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True
    init: str = "uniform"
    lagged_m: bool = False
    baseline_month: str = "2020-01"
    out: Path = field(default_factory=lambda: Path("out"))

    def validate(self, need_spans: bool = True) -> None:
        for name in ("weather", "ead", "holidays"):
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"missing required data path: {name}")
            if not Path(path).exists():
                raise ConfigError(f"{name} file does not exist: {path}")
        if "mobility" in self.features:
            if self.mobility is None or not Path(self.mobility).exists():
                raise ConfigError("mobility feature enabled but mobility file is missing")
        if need_spans:
            for name in ("train_start", "train_end", "test_start", "test_end"):
                if getattr(self, name) is None:
                    raise ConfigError(f"missing required span field: {name}")
            if not (self.train_start <= self.train_end < self.test_start <= self.test_end):
                raise ConfigError("train span must precede and not overlap the test span")
        if self.group not in data_mod.GROUPS:
            raise ConfigError(f"unknown group {self.group!r}; valid: {list(data_mod.GROUPS)}")
        data_mod.FeatureMask.from_names(self.features)
        if self.lookback < 1 or self.horizon < 1:
            raise ConfigError("lookback and horizon must be >= 1")

    def mask(self) -> data_mod.FeatureMask:
        return data_mod.FeatureMask.from_names(self.features)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs, batch_size=self.batch_size, loss=self.loss,
            lr=self.lr, seed=self.seed, shuffle=self.shuffle,
            log_every=max(self.epochs // 10, 1),
            progress=lambda e, l: log.info("epoch %d  loss %.6g", e, l),
        )

    def digest_payload(self) -> dict:
        return {
            "train": [str(self.train_start), str(self.train_end)],
            "test": [str(self.test_start), str(self.test_end)],
            "group": self.group, "lookback": self.lookback, "horizon": self.horizon,
            "features": list(self.features), "epochs": self.epochs,
            "batch_size": self.batch_size, "loss": self.loss, "lr": self.lr,
            "seed": self.seed, "shuffle": self.shuffle, "init": self.init,
            "lagged_m": self.lagged_m, "baseline_month": self.baseline_month,
        }


def _coerce_date(value, label: str) -> dt.date:
    if value is None or isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"bad date for {label}: {value!r}") from None


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return doc


def build_run_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        doc = load_config_file(args.config)
        base = Path(args.config).parent
        paths = doc.get("data", {})

        def rel(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        for key in ("weather", "ead", "mobility", "holidays"):
            if key in paths:
                setattr(cfg, key, rel(paths[key]))
        for span_key, (a, b) in {
            "train": ("train_start", "train_end"),
            "test": ("test_start", "test_end"),
        }.items():
            span = doc.get(span_key, {})
            if "start" in span:
                setattr(cfg, a, _coerce_date(span["start"], f"{span_key}.start"))
            if "end" in span:
                setattr(cfg, b, _coerce_date(span["end"], f"{span_key}.end"))
        training = doc.get("training", {})
        for key in ("epochs", "batch_size", "loss", "lr", "seed", "shuffle"):
            if key in training:
                setattr(cfg, key, training[key])
        for key in ("group", "lookback", "horizon", "init", "baseline_month"):
            if key in doc:
                setattr(cfg, key, doc[key])
        if "features" in doc:
            cfg.features = tuple(doc["features"])
        if "eq5_lagged_m" in doc:
            cfg.lagged_m = bool(doc["eq5_lagged_m"])
        if "out" in doc:
            cfg.out = rel(doc["out"])

    # Flag overrides win over file values.
    overrides = {
        "weather": "weather", "ead": "ead", "mobility": "mobility", "holidays": "holidays",
        "train_start": "train_start", "train_end": "train_end",
        "test_start": "test_start", "test_end": "test_end",
        "group": "group", "lookback": "lookback", "horizon": "horizon",
        "epochs": "epochs", "batch_size": "batch_size", "loss": "loss", "lr": "lr",
        "seed": "seed", "init": "init", "out": "out",
    }
    for attr, flag in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "features", None):
        cfg.features = tuple(f.strip() for f in args.features.split(",") if f.strip())
    if getattr(args, "eq5_lagged_m", False):
        cfg.lagged_m = True
    for key in ("train_start", "train_end", "test_start", "test_end"):
        setattr(cfg, key, _coerce_date(getattr(cfg, key), key))
    for key in ("weather", "ead", "mobility", "holidays", "out"):
        value = getattr(cfg, key)
        if value is not None:
            setattr(cfg, key, Path(value))
    if cfg.loss == "squared_error":
        cfg.loss = "mse"
    if cfg.loss in ("cross_entropy", "normalized_cross_entropy"):
        cfg.loss = "xent"
    return cfg


# ---------------------------------------------------------------------------
# Shared pipeline pieces
# ---------------------------------------------------------------------------


def load_records(cfg: RunConfig) -> list[data_mod.DailyRecord]:
    records = data_mod.load_dataset(
        cfg.weather, cfg.ead,
        mobility_path=cfg.mobility if "mobility" in cfg.features else None,
        holidays_path=cfg.holidays,
    )
    if "mobility" in cfg.features:
        records = data_mod.fill_mobility(records, baseline_month=cfg.baseline_month)
    return records


def _slice_records(records, start: dt.date, end: dt.date):
    return [r for r in records if start <= r.date <= end]


def run_training(cfg: RunConfig, records) -> tuple[object, object, list[float]]:
    """Fit the scaler on training windows only, then train the network."""
    train_records = _slice_records(records, cfg.train_start, cfg.train_end)
    windows = data_mod.make_windows(
        train_records, cfg.lookback, cfg.horizon, cfg.mask(), cfg.group
    )
    scaler = fit_scaler(windows)
    X, Y = apply_scaler(scaler, windows)
    spec = ModelSpec(
        input_dim=X.shape[2],
        horizon=cfg.horizon,
        head_activation="sigmoid" if cfg.loss == "xent" else "identity",
        lagged_m=cfg.lagged_m,
    )
    model = init_params(spec, scheme=cfg.init, seed=cfg.seed)
    model, history = train(model, X, Y, cfg.train_config())
    return model, scaler, history


def run_forecast(model, scaler, records, cfg: RunConfig, start: dt.date, end: dt.date):
    """Per-anchor K-day predictions on the count scale.

    An anchor is the first predicted day; its window covers the L preceding
    days, which must all be present in the records.
    """
    if start > end:
        raise ConfigError("forecast span is empty")
    by_date = {r.date: idx for idx, r in enumerate(records)}
    features = data_mod.feature_matrix(records, cfg.mask())
    forecasts = []
    day = start
    while day <= end:
        idx = by_date.get(day)
        if idx is None or idx < cfg.lookback:
            raise DataError(
                f"not enough history before {day.isoformat()}: "
                f"need {cfg.lookback} prior days in the dataset"
            )
        window = scaler.transform_features(features[idx - cfg.lookback : idx])
        y, _ = network_forward(model, window)
        forecasts.append((day, scaler.invert_target(y)))
        day += dt.timedelta(days=1)
    return forecasts


def write_predictions_csv(path, forecasts) -> None:
    lines = ["anchor_date,step,target_date,value"]
    for anchor, vec in forecasts:
        for step, value in enumerate(np.asarray(vec, dtype=np.float64)):
            target_day = anchor + dt.timedelta(days=step)
            lines.append(f"{anchor.isoformat()},{step + 1},{target_day.isoformat()},{float(value)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_predictions_csv(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"predictions file not found: {path}")
    forecasts: dict[dt.date, dict[int, float]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["anchor_date", "step", "target_date", "value"]:
            raise DataError(f"{path}: bad predictions header {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise DataError(f"{path}:{line_no}: expected 4 fields")
            try:
                anchor = dt.date.fromisoformat(row[0])
                step = int(row[1])
                value = float(row[3])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            forecasts.setdefault(anchor, {})[step] = value
    out = []
    for anchor in sorted(forecasts):
        steps = forecasts[anchor]
        vec = np.array([steps[s] for s in sorted(steps)], dtype=np.float64)
        out.append((anchor, vec))
    return out


def write_horizon_csv(path, agg) -> None:
    lines = ["date,mean,min,max,count"]
    for i, day in enumerate(agg.dates):
        lines.append(
            f"{day.isoformat()},{float(agg.mean[i])!r},{float(agg.min[i])!r},"
            f"{float(agg.max[i])!r},{int(agg.count[i])}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_history_csv(path, history) -> None:
    lines = ["epoch,loss"] + [f"{i + 1},{loss!r}" for i, loss in enumerate(history)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def run_evaluation(records, forecasts, group: str, scenario: str, out_dir: Path):
    """Aggregate forecasts per date, compare with actuals, emit report + charts."""
    if not forecasts:
        raise DataError("no forecasts to evaluate")
    agg = horizon_aggregate(forecasts)
    actual_by_date = {r.date: r for r in records}
    actual_dates = [d for d in agg.dates if d in actual_by_date]
    if not actual_dates:
        raise DataError("predictions and dataset do not overlap in time")
    last_actual = max(actual_by_date)
    missing = [d.isoformat() for d in agg.dates if d not in actual_by_date and d <= last_actual]
    if missing:
        shown = ", ".join(missing[:10])
        raise DataError(f"dates in predictions have no matching actuals: {shown}")

    idx = [i for i, d in enumerate(agg.dates) if d in actual_by_date]
    est = agg.mean[idx]
    act = np.array([actual_by_date[d].ead[group] for d in actual_dates], dtype=np.float64)
    rep = evaluate_series(act, est, group=group, scenario=scenario)

    out_dir.mkdir(parents=True, exist_ok=True)
    report_mod.write_report_csv(out_dir / "report.csv", [rep])
    copy_reference_metrics(out_dir / "reference_metrics.csv")
    report_mod.render_line_chart(
        out_dir / "timeline.svg", actual_dates,
        {"actual": act, "estimated": est},
        f"Daily dispatch counts ({group}, {scenario})" if scenario else f"Daily dispatch counts ({group})",
    )
    tmax = np.array([actual_by_date[d].tmax for d in actual_dates])
    humidity = np.array([actual_by_date[d].humidity for d in actual_dates])
    report_mod.render_scatter_fit(
        out_dir / "fit_temperature.svg", tmax,
        {"actual": act, "estimated": est},
        "Dispatch counts vs daily maximum temperature", "max temperature (degC)",
    )
    report_mod.render_scatter_fit(
        out_dir / "fit_humidity.svg", humidity,
        {"actual": act, "estimated": est},
        "Dispatch counts vs daily average humidity", "relative humidity (%)",
    )
    return rep, agg, actual_dates, act


def copy_reference_metrics(dest: Path) -> None:
    text = (
        importlib.resources.files("eadforecast")
        .joinpath("reference_metrics.csv")
        .read_text(encoding="utf-8")
    )
    atomic_write_text(dest, text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> None:
    cfg = data_mod.SynthConfig()
    if args.start:
        cfg = replace(cfg, start=_coerce_date(args.start, "start"))
    if args.end:
        cfg = replace(cfg, end=_coerce_date(args.end, "end"))
    if args.base_rate is not None:
        cfg = replace(cfg, base_rate=args.base_rate)
    result = data_mod.synth_generate(cfg, seed=args.seed if args.seed is not None else 0)
    paths = data_mod.write_dataset(result, args.out or "out")
    log.info("wrote synthetic dataset: %s", ", ".join(str(p) for p in paths.values()))


def cmd_train(args) -> None:
    cfg = build_run_config(args)
    cfg.validate()
    records = load_records(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        model, scaler, history = run_training(cfg, records)
    except NumericalError:
        # Keep whatever history exists; the loop raises before returning it,
        # so there is nothing to write here beyond the error itself.
        raise
    write_history_csv(out / "loss_history.csv", history)
    meta = {
        "features": list(cfg.features),
        "lookback": cfg.lookback,
        "group": cfg.group,
        "seed": cfg.seed,
        "loss": cfg.loss,
        "init": cfg.init,
        "train_span": [cfg.train_start.isoformat(), cfg.train_end.isoformat()],
        "baseline_month": cfg.baseline_month,
        "run_digest": ckpt_io.config_digest(cfg.digest_payload()),
    }
    ckpt_io.save_checkpoint(out / "checkpoint.bin", model, scaler, meta)
    log.info("checkpoint written to %s", out / "checkpoint.bin")


def cmd_forecast(args) -> None:
    cfg = build_run_config(args)
    ckpt = ckpt_io.load_checkpoint(args.checkpoint)
    # The checkpoint drives the network configuration; explicit flags must agree.
    if getattr(args, "features", None):
        ckpt_io.check_compatible(ckpt, features=cfg.features)
    if getattr(args, "lookback", None) is not None:
        ckpt_io.check_compatible(ckpt, lookback=cfg.lookback)
    if getattr(args, "horizon", None) is not None:
        ckpt_io.check_compatible(ckpt, horizon=cfg.horizon)
    cfg.features = tuple(ckpt.meta["features"])
    cfg.lookback = int(ckpt.meta["lookback"])
    cfg.horizon = ckpt.model.horizon
    cfg.group = ckpt.meta.get("group", cfg.group)
    cfg.baseline_month = ckpt.meta.get("baseline_month", cfg.baseline_month)
    cfg.validate(need_spans=False)
    start = _coerce_date(args.start, "start") if args.start else cfg.test_start
    end = _coerce_date(args.end, "end") if args.end else cfg.test_end
    if start is None or end is None:
        raise ConfigError("forecast span is not configured; pass --start/--end")
    records = load_records(cfg)
    forecasts = run_forecast(ckpt.model, ckpt.scaler, records, cfg, start, end)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_predictions_csv(out / "predictions.csv", forecasts)
    write_horizon_csv(out / "horizon.csv", horizon_aggregate(forecasts))
    log.info("wrote %s", out / "predictions.csv")


def cmd_evaluate(args) -> None:
    cfg = build_run_config(args)
    cfg.validate(need_spans=False)
    records = load_records(cfg)
    forecasts = read_predictions_csv(args.predictions)
    rep, _, _, _ = run_evaluation(
        records, forecasts, cfg.group, args.scenario or "", Path(cfg.out)
    )
    log.info("group=%s cc=%.4f mae=%.4f", rep.group, rep.cc, rep.mae)


def _variant_features(base_features, excluded):
    if excluded is None:
        return tuple(base_features)
    if excluded not in base_features:
        raise ConfigError(f"cannot exclude {excluded!r}: not among features {base_features}")
    return tuple(f for f in base_features if f != excluded)


def run_ablation(cfg: RunConfig):
    """Train one variant per excluded feature and score each on the test span."""
    if set(cfg.features) != set(DEFAULT_FEATURES):
        raise ConfigError("ablation requires all four features to be available")
    records = load_records(cfg)
    results = []
    for name, excluded in ABLATION_VARIANTS:
        vcfg = replace(cfg, features=_variant_features(cfg.features, excluded))
        model, scaler, _ = run_training(vcfg, records)
        forecasts = run_forecast(model, scaler, records, vcfg, cfg.test_start, cfg.test_end)
        rep, _, actual_dates, act = run_evaluation(
            records, forecasts, cfg.group, name, Path(cfg.out) / "ablate" / name
        )
        agg = horizon_aggregate(forecasts)
        est = np.array(
            [agg.mean[i] for i, d in enumerate(agg.dates) if d in set(actual_dates)]
        )
        errors = np.abs(act[act != 0] - est[act != 0]) / act[act != 0]
        results.append((name, rep, errors))
        log.info("ablation %-16s cc=%.4f mae=%.4f", name, rep.cc, rep.mae)
    return results


def cmd_ablate(args) -> None:
    cfg = build_run_config(args)
    cfg.validate()
    results = run_ablation(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["variant,cc,mae,mae_skipped"]
    box_lines = ["variant,min,q1,median,q3,max"]
    for name, rep, errors in results:
        lines.append(f"{name},{rep.cc!r},{rep.mae!r},{rep.mae_skipped}")
        q = np.percentile(errors, [0, 25, 50, 75, 100])
        box_lines.append(name + "," + ",".join(repr(float(v)) for v in q))
    atomic_write_text(out / "ablation_report.csv", "\n".join(lines) + "\n")
    atomic_write_text(out / "ablation_box.csv", "\n".join(box_lines) + "\n")


def run_horizon_study(cfg: RunConfig, horizons):
    records = load_records(cfg)
    results = []
    for k in horizons:
        kcfg = replace(cfg, horizon=int(k))
        model, scaler, _ = run_training(kcfg, records)
        forecasts = run_forecast(model, scaler, records, kcfg, cfg.test_start, cfg.test_end)
        rep, agg, actual_dates, act = run_evaluation(
            records, forecasts, cfg.group, f"horizon_{k}", Path(cfg.out) / f"horizon_{k}"
        )
        results.append((int(k), rep, agg, actual_dates, act))
        log.info("horizon K=%-3d cc=%.4f mae=%.4f", k, rep.cc, rep.mae)
    return results


def cmd_horizon(args) -> None:
    cfg = build_run_config(args)
    cfg.validate()
    horizons = (
        [int(v) for v in args.horizons.split(",")] if args.horizons else list(DEFAULT_HORIZONS)
    )
    results = run_horizon_study(cfg, horizons)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["horizon,cc,mae"]
    for k, rep, agg, actual_dates, act in results:
        lines.append(f"{k},{rep.cc!r},{rep.mae!r}")
        write_horizon_csv(out / f"horizon_K{k}.csv", agg)
        date_set = set(actual_dates)
        sel = [i for i, d in enumerate(agg.dates) if d in date_set]
        report_mod.render_band_chart(
            out / f"horizon_K{k}.svg", actual_dates, act,
            agg.mean[sel], agg.min[sel], agg.max[sel],
            f"{k}-day-ahead forecasts (mean with min/max band)",
        )
    atomic_write_text(out / "horizon_report.csv", "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 for usage errors
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file; flags override file values")
    p.add_argument("--weather", type=Path)
    p.add_argument("--ead", type=Path)
    p.add_argument("--mobility", type=Path)
    p.add_argument("--holidays", type=Path)
    p.add_argument("--train-start", dest="train_start")
    p.add_argument("--train-end", dest="train_end")
    p.add_argument("--test-start", dest="test_start")
    p.add_argument("--test-end", dest="test_end")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--group", choices=data_mod.GROUPS)
    p.add_argument("--lookback", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--features", help="comma-separated feature list")
    p.add_argument("--loss", choices=("mse", "xent"))
    p.add_argument("--init", choices=("zeros", "uniform"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument(
        "--eq5-lagged-m", dest="eq5_lagged_m", action="store_true",
        help="use the lagged candidate-vector cell update variant",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eadforecast", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--base-rate", dest="base_rate", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="predict K-day dispatch counts per anchor day")
    _add_common(p)
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--start")
    p.add_argument("--end")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="score predictions against actuals")
    _add_common(p)
    p.add_argument("--predictions", required=True, type=Path)
    p.add_argument("--scenario", default="")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="retrain with single-feature exclusions")
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("horizon", help="train and score multiple forecast horizons")
    _add_common(p)
    p.add_argument("--horizons", help="comma-separated K list (default 3,7,14,28)")
    p.set_defaults(func=cmd_horizon)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
            format="%(levelname)s %(message)s",
            stream=sys.stderr,
        )
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def cli_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_entry()
