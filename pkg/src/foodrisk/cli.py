"""Operator command line: generate, train, evaluate, allocate, serve.

One strict JSON config document drives everything; command-line flags
override config fields, which override built-in defaults. Unknown config
sections or keys are rejected with the offending key named. All outputs
are machine-readable (JSON or CSV) and byte-identical across reruns with
the same inputs and seed, except the wall_seconds history column.

Exit codes: 0 success, 2 input or config error, 3 infeasible floors,
1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import jsonfmt
from .allocate import InfeasibleFloors, build_problem, solve_dp, solve_greedy
from .data import Dataset, load_csv, save_csv, split_dataset
from .fairness import GroupThresholds, calibrate_group_thresholds
from .fusion import Featurizer, FeaturizerConfig
from .metrics import evaluate, save_curves, save_report
from .model import (
    ARCHS,
    ModelArtifact,
    TrainConfig,
    load_artifact,
    predict_scores,
    save_artifact,
    train,
)
from .synth import SynthConfig, emit_embeddings, generate


class ConfigError(ValueError):
    """Malformed run configuration."""


def _fields(cls) -> frozenset[str]:
    return frozenset(f.name for f in dataclasses.fields(cls))


_SECTIONS = {
    "synth": _fields(SynthConfig),
    "featurizer": _fields(FeaturizerConfig),
    "train": _fields(TrainConfig),
    "split": frozenset({"train_fraction", "stratify"}),
    "calibrate": frozenset({"target_gap", "base_threshold"}),
    "allocate": frozenset(
        {"budget", "floors", "utility_mode", "cost_resolution", "solver"}
    ),
    "service": frozenset({"host", "port", "cors_origins"}),
    "paths": frozenset({"data", "train_data", "eval_data", "model", "embeddings"}),
}


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in raw.items():
        if key == "seed":
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"config key 'seed' must be an integer, got {value!r}")
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        unknown = sorted(set(value) - _SECTIONS[key])
        if unknown:
            raise ConfigError(f"unknown config key '{key}.{unknown[0]}'")
    return raw


def _section(config: dict, name: str) -> dict:
    return dict(config.get(name, {}))


def _global_seed(args, config: dict):
    return args.seed if args.seed is not None else config.get("seed")


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve(args, config: dict, attr: str, path_key: str, required_by: str = ""):
    value = getattr(args, attr, None)
    if value is None:
        value = _section(config, "paths").get(path_key)
    if value is None and required_by:
        raise ConfigError(
            f"{required_by} needs --{attr.replace('_', '-')} or paths.{path_key}"
        )
    return value


def parse_floors(spec: str) -> dict[str, int]:
    floors = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, eq, count = part.partition("=")
        if not eq:
            raise ConfigError(f"floors must look like 'rural=2,urban=1', got {part!r}")
        try:
            floors[name.strip()] = int(count)
        except ValueError:
            raise ConfigError(f"floor count for {name.strip()!r} must be an integer") from None
    return floors


def _write_history(path, history) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["epoch", "loss_cls", "loss_fair", "loss_total", "train_acc", "wall_seconds"]
        )
        for i, e in enumerate(history.epochs):
            writer.writerow(
                [
                    i,
                    jsonfmt.format_float(e.loss_cls),
                    jsonfmt.format_float(e.loss_fair),
                    jsonfmt.format_float(e.loss_total),
                    jsonfmt.format_float(e.train_accuracy),
                    jsonfmt.format_float(e.wall_seconds),
                ]
            )


def _emit(obj: dict) -> None:
    print(jsonfmt.dumps(obj))


# -- commands ----------------------------------------------------------------


def cmd_generate(args, config: dict) -> int:
    kwargs = _section(config, "synth")
    seed = _global_seed(args, config)
    if seed is not None:
        kwargs["seed"] = seed
    cfg = SynthConfig(**kwargs)
    ds = generate(cfg)
    out = _out_dir(args)
    save_csv(ds, out / "data.csv")

    split = _section(config, "split")
    if split:
        ds_train, ds_eval = split_dataset(
            ds,
            train_fraction=split.get("train_fraction", 0.8),
            seed=cfg.seed,
            stratify=split.get("stratify", False),
        )
        save_csv(ds_train, out / "train.csv")
        save_csv(ds_eval, out / "eval.csv")

    if args.embeddings_out:
        emit_embeddings(ds, args.embeddings_out, dim=args.embedding_dim, seed=cfg.seed)

    groups = ds.groups()
    _emit(
        {
            "records": len(ds),
            "positive_rate": ds.positive_rate(),
            "group_counts": {
                g: int((groups == g).sum()) for g in sorted(set(groups.tolist()))
            },
            "out": str(out / "data.csv"),
        }
    )
    return 0


def _build_train_config(args, config: dict) -> TrainConfig:
    kwargs = _section(config, "train")
    seed = _global_seed(args, config)
    if seed is not None:
        kwargs["seed"] = seed
    for flag in ("lam", "arch", "epochs"):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[flag] = value
    return TrainConfig(**kwargs)


def _build_featurizer_config(args, config: dict) -> FeaturizerConfig:
    kwargs = _section(config, "featurizer")
    seed = _global_seed(args, config)
    if seed is not None:
        kwargs["seed"] = seed
    emb = _resolve(args, config, "embeddings", "embeddings")
    if emb is not None:
        kwargs["embeddings_path"] = emb
    return FeaturizerConfig(**kwargs)


def cmd_train(args, config: dict) -> int:
    data_path = _resolve(args, config, "data", "data", required_by="train")
    ds = load_csv(data_path)
    tc = _build_train_config(args, config)
    fc = _build_featurizer_config(args, config)
    feat = Featurizer(fc).fit(ds)
    params, history = train(ds, feat, tc)

    thresholds = None
    calibrate = _section(config, "calibrate")
    if args.target_gap is not None:
        calibrate["target_gap"] = args.target_gap
    if "target_gap" in calibrate:
        scored = predict_scores(params, ds, feat)
        scores = [s for _, s in scored]
        th = calibrate_group_thresholds(
            scores,
            ds.groups(),
            target_gap=calibrate["target_gap"],
            base_threshold=calibrate.get("base_threshold", 0.5),
            labels=ds.labels(),
        )
        thresholds = th.to_dict()

    artifact = ModelArtifact(
        params=params, featurizer=feat, train_config=tc, thresholds=thresholds
    )
    out = _out_dir(args)
    save_artifact(out / "model.json", artifact)
    _write_history(out / "history.csv", history)
    last = history.epochs[-1]
    _emit(
        {
            "model": str(out / "model.json"),
            "epochs": len(history),
            "final_loss_total": last.loss_total,
            "final_train_acc": last.train_accuracy,
        }
    )
    return 0


def _evaluate_one(artifact: ModelArtifact, ds: Dataset, out: Path, tag: str) -> dict:
    report = evaluate(artifact, ds)
    suffix = f"-{tag}" if tag else ""
    save_report(report, out / f"report{suffix}.json")
    save_curves(report, out / f"pr{suffix}.csv", out / f"roc{suffix}.csv")
    return {
        "arch": tag or artifact.params.arch,
        "accuracy": report.accuracy,
        "auc": report.auc,
        "parity_gap": report.parity_gap,
        "report": str(out / f"report{suffix}.json"),
    }


def cmd_evaluate(args, config: dict) -> int:
    out = _out_dir(args)
    data_path = _resolve(args, config, "data", "eval_data", required_by="evaluate")
    ds_eval = load_csv(data_path)

    if args.arch:
        train_path = _resolve(
            args, config, "train_data", "train_data", required_by="evaluate --arch"
        )
        ds_train = load_csv(train_path)
        fc = _build_featurizer_config(args, config)
        feat = Featurizer(fc).fit(ds_train)
        base = _section(config, "train")
        seed = _global_seed(args, config)
        if seed is not None:
            base["seed"] = seed

        def run(arch: str) -> dict:
            tc = TrainConfig(**{**base, "arch": arch})
            params, _ = train(ds_train, feat, tc)
            artifact = ModelArtifact(params=params, featurizer=feat, train_config=tc)
            return _evaluate_one(artifact, ds_eval, out, arch)

        # independent read-only sweeps; results printed in arch order
        with ThreadPoolExecutor(max_workers=len(args.arch)) as pool:
            summaries = list(pool.map(run, args.arch))
        _emit({"reports": summaries})
        return 0

    if not args.model:
        raise ConfigError("evaluate needs --model (or --arch for a sweep)")
    artifact = load_artifact(args.model)
    _emit(_evaluate_one(artifact, ds_eval, out, ""))
    return 0


def cmd_allocate(args, config: dict) -> int:
    model_path = _resolve(args, config, "model", "model", required_by="allocate")
    data_path = _resolve(args, config, "data", "data", required_by="allocate")
    artifact = load_artifact(model_path)
    ds = load_csv(data_path)

    section = _section(config, "allocate")
    if args.budget is not None:
        section["budget"] = args.budget
    if args.floors is not None:
        section["floors"] = parse_floors(args.floors)
    if args.solver is not None:
        section["solver"] = args.solver
    if args.utility_mode is not None:
        section["utility_mode"] = args.utility_mode
    if args.cost_resolution is not None:
        section["cost_resolution"] = args.cost_resolution
    if "budget" not in section:
        raise ConfigError("allocate needs --budget or allocate.budget")

    scored = predict_scores(artifact.params, ds, artifact.featurizer)
    rows = [
        (rid, score, rec.group, rec.cost)
        for (rid, score), rec in zip(scored, ds.records)
    ]
    problem = build_problem(
        rows,
        budget=float(section["budget"]),
        floors=section.get("floors"),
        utility_mode=section.get("utility_mode", "score"),
        cost_resolution=float(section.get("cost_resolution", 0.0)),
    )
    solver = section.get("solver", "dp")
    if solver == "dp":
        result = solve_dp(problem)
    elif solver == "greedy":
        result = solve_greedy(problem)
    else:
        raise ConfigError(f"solver must be dp or greedy, got {solver!r}")

    out = _out_dir(args)
    payload = result.to_dict()
    with open(out / "allocation.json", "w", encoding="utf-8") as fh:
        fh.write(jsonfmt.dumps(payload, indent=2) + "\n")
    _emit(payload)
    return 0


def cmd_serve(args, config: dict) -> int:
    import uvicorn

    from .service import create_app

    model_path = _resolve(args, config, "model", "model", required_by="serve")
    data_path = _resolve(args, config, "data", "data", required_by="serve")
    eval_path = _resolve(args, config, "eval_data", "eval_data")
    section = _section(config, "service")
    host = args.host or section.get("host", "127.0.0.1")
    port = args.port if args.port is not None else section.get("port", 8000)

    app = create_app(
        artifact=load_artifact(model_path),
        candidates=load_csv(data_path),
        eval_data=load_csv(eval_path) if eval_path else None,
        cors_origins=tuple(section.get("cors_origins", ())),
    )
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


# -- argument plumbing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="strict JSON run config")
    common.add_argument("--seed", type=int, help="overrides every config seed")
    common.add_argument("--out", help="output directory (default: current)")

    parser = argparse.ArgumentParser(
        prog="foodrisk",
        description="Food insecurity risk pipeline: data, models, allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write synthetic dataset files")
    p.add_argument("--embeddings-out", help="also write hashed text embeddings (JSONL)")
    p.add_argument("--embedding-dim", type=int, default=64)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", parents=[common], help="fit a classifier artifact")
    p.add_argument("--data", help="training dataset CSV")
    p.add_argument("--embeddings", help="external embeddings JSONL")
    p.add_argument("--lam", type=float, help="fairness penalty weight")
    p.add_argument("--arch", choices=ARCHS)
    p.add_argument("--epochs", type=int)
    p.add_argument("--target-gap", type=float, help="calibrate group thresholds after training")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a model on held-out data")
    p.add_argument("--model", help="model artifact JSON")
    p.add_argument("--data", help="evaluation dataset CSV")
    p.add_argument("--train-data", help="training CSV for --arch sweeps")
    p.add_argument("--embeddings", help="external embeddings JSONL")
    p.add_argument(
        "--arch",
        action="append",
        choices=ARCHS,
        help="sweep: train and report per architecture (repeatable)",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("allocate", parents=[common], help="solve the intervention budget problem")
    p.add_argument("--model", help="model artifact JSON")
    p.add_argument("--data", help="candidate dataset CSV")
    p.add_argument("--budget", type=float)
    p.add_argument("--floors", help="per-group minimum counts, e.g. 'rural=2,urban=1'")
    p.add_argument("--solver", choices=("dp", "greedy"))
    p.add_argument("--utility-mode", choices=("score", "score_times_population"))
    p.add_argument("--cost-resolution", type=float)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("serve", parents=[common], help="run the what-if HTTP service")
    p.add_argument("--model", help="model artifact JSON")
    p.add_argument("--data", help="candidate dataset CSV")
    p.add_argument("--eval-data", help="labeled CSV backing /v1/metrics")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {}
        return args.func(args, config)
    except InfeasibleFloors as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
