"""Command-line entry points for every pipeline stage.

Every subcommand writes its artifact plus a machine-readable run report
(seed, effective config, metrics, wall time), even on failure. Exit codes:
0 success, 2 usage error, 3 data error (bad files/values), 4 internal error.
Flags are long-form only; a --config JSON file overrides flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Callable

from . import composition, datagen, embeddings, records, storage
from .errors import WaclexError
from .lexicon import TrainConfig

DEFAULT_SEED = 7

USAGE_EXIT = 2
DATA_EXIT = 3
INTERNAL_EXIT = 4


@dataclass(frozen=True)
class Preset:
    spec_factory: Callable[..., datagen.GenerativeSpec]
    n_scenes: int
    objects_per_scene: int
    tokens_per_expression: int
    episode_mode: str
    train_config: TrainConfig


PRESETS = {
    # Balanced binary point task: one episode per object, 1:1 contrast sets.
    "left-right": Preset(datagen.left_right_spec, 500, 2, 1, "per_object",
                         TrainConfig(neg_ratio=1.0)),
    "color-shape": Preset(datagen.color_shape_spec, 500, 5, 2, "per_scene", TrainConfig()),
    "fast-mapping": Preset(datagen.color_shape_spec, 100, 4, 1, "per_scene", TrainConfig()),
}

_CONFIG_FIELDS = ("learning_rate", "l2_lambda", "max_epochs", "tol", "neg_ratio", "cache_cap")


def _add_train_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--learning-rate", type=float, default=None)
    sub.add_argument("--l2-lambda", type=float, default=None)
    sub.add_argument("--max-epochs", type=int, default=None)
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--neg-ratio", type=float, default=None)
    sub.add_argument("--cache-cap", type=int, default=None)


def _train_config_from_args(args, base: TrainConfig) -> TrainConfig:
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return replace(base, **overrides) if overrides else base


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waclex",
        description="Grounded lexicon toolkit: generate data, train and apply "
                    "word classifiers, fuse embeddings, judge records, teach live.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--config", default=None,
                       help="JSON file whose keys override flags of the same name")
        p.add_argument("--report", default=None, help="run report path")

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    common(p)
    p.add_argument("--preset", choices=sorted(PRESETS), default="color-shape")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-scenes", type=int, default=None)
    p.add_argument("--objects-per-scene", type=int, default=None)
    p.add_argument("--tokens-per-expression", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=0.05)

    p = sub.add_parser("train", help="train a lexicon from scene/episode files")
    common(p)
    p.add_argument("--scenes", required=True)
    p.add_argument("--episodes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="adopt this preset's training defaults")
    _add_train_config_flags(p)

    p = sub.add_parser("eval", help="reference-resolution metrics for a lexicon")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--episodes", required=True)

    p = sub.add_parser("resolve", help="resolve a phrase against one scene")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--scene-id", required=True)
    p.add_argument("--tokens", required=True, help="space-separated referring expression")
    p.add_argument("--out", default=None, help="write object_id<TAB>probability lines here")

    p = sub.add_parser("export-embeddings", help="classifier coefficients as a visual table")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-text-embeddings", help="PPMI + random projection from a corpus")
    common(p)
    p.add_argument("--corpus", required=True, help="one whitespace-tokenized sentence per line")
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fuse", help="combine two embedding tables")
    common(p)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--method", choices=embeddings.FUSE_METHODS, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("judge", help="probabilistic typing judgment for a record")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--record-type", required=True)
    p.add_argument("--record", required=True)
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("serve", help="run the interactive teaching service")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8075)
    p.add_argument("--preset", choices=sorted(k for k in PRESETS if k != "fast-mapping"),
                   default="color-shape")
    p.add_argument("--objects-per-scene", type=int, default=4)
    p.add_argument("--noise-sigma", type=float, default=0.05)
    p.add_argument("--frame-count", type=int, default=10)

    return parser


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if getattr(args, "config", None) is None:
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"--config: {exc}")
    if not isinstance(overrides, dict):
        parser.error("--config: expected a JSON object")
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest) or dest in ("command", "config"):
            parser.error(f"--config: unknown key {key!r} for subcommand {args.command!r}")
        setattr(args, dest, value)


def _default_report_path(args: argparse.Namespace) -> str:
    if getattr(args, "report", None):
        return args.report
    if getattr(args, "out_dir", None):
        return os.path.join(args.out_dir, "run_report.json")
    if getattr(args, "out", None):
        return str(args.out) + ".report.json"
    return f"waclex_{args.command.replace('-', '_')}_report.json"


def _cmd_gen(args) -> dict:
    preset = PRESETS[args.preset]
    spec = preset.spec_factory(noise_sigma=args.noise_sigma, seed=args.seed)
    dataset = datagen.generate(
        spec,
        n_scenes=args.n_scenes or preset.n_scenes,
        objects_per_scene=args.objects_per_scene or preset.objects_per_scene,
        tokens_per_expression=args.tokens_per_expression or preset.tokens_per_expression,
        episode_mode=preset.episode_mode,
    )
    scenes_path = os.path.join(args.out_dir, "scenes.jsonl")
    episodes_path = os.path.join(args.out_dir, "episodes.jsonl")
    storage.save_dataset(dataset, scenes_path, episodes_path)
    return {
        "preset": args.preset,
        "n_scenes": len(dataset.scenes),
        "n_episodes": len(dataset.episodes),
        "vocab_size": len(dataset.vocab),
        "dim": dataset.dim,
        "scenes_path": scenes_path,
        "episodes_path": episodes_path,
    }


def _cmd_train(args) -> dict:
    dataset = storage.load_dataset(args.scenes, args.episodes)
    base = PRESETS[args.preset].train_config if args.preset else TrainConfig()
    config = _train_config_from_args(args, base)
    lexicon = datagen.build_lexicon(dataset, config, seed=args.seed)
    storage.save_lexicon(lexicon, args.out)
    final_losses = {
        w: lexicon.classifier(w).loss_trace[-1] for w in lexicon.vocab_order
    }
    return {
        "vocab_size": len(lexicon),
        "dim": lexicon.dim,
        "mean_final_loss": sum(final_losses.values()) / len(final_losses),
        "lexicon_path": args.out,
    }


def _cmd_eval(args) -> dict:
    lexicon = storage.load_lexicon(args.lexicon)
    dataset = storage.load_dataset(args.scenes, args.episodes)
    metrics = composition.evaluate(lexicon, dataset.resolved_episodes())
    return metrics.as_dict()


def _cmd_resolve(args) -> dict:
    lexicon = storage.load_lexicon(args.lexicon)
    scenes = {s.scene_id: s for s in storage.load_scenes(args.scenes)}
    if args.scene_id not in scenes:
        raise WaclexError(f"scene {args.scene_id!r} not found in {args.scenes}")
    tokens = args.tokens.split()
    dist = composition.resolve(lexicon, tokens, scenes[args.scene_id])
    lines = [f"{oid}\t{prob!r}" for oid, prob in dist.entries]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return {
        "scene_id": args.scene_id,
        "tokens": tokens,
        "distribution": [{"object_id": i, "probability": p} for i, p in dist.entries],
        "argmax": dist.argmax_id(),
    }


def _cmd_export_embeddings(args) -> dict:
    lexicon = storage.load_lexicon(args.lexicon)
    table = embeddings.export_visual_embeddings(lexicon)
    storage.save_embeddings(table, args.out)
    return {"count": len(table), "dim": table.dim, "modality": table.modality,
            "out": args.out}


def _cmd_build_text_embeddings(args) -> dict:
    with open(args.corpus, "r", encoding="utf-8") as fh:
        corpus = [line.split() for line in fh if line.strip()]
    table = embeddings.build_text_embeddings(corpus, args.window, args.dim, args.seed)
    storage.save_embeddings(table, args.out)
    return {"count": len(table), "dim": table.dim, "window": args.window, "out": args.out}


def _cmd_fuse(args) -> dict:
    import warnings as _warnings

    a = storage.load_embeddings(args.a)
    b = storage.load_embeddings(args.b)
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        fused = embeddings.fuse(a, b, args.method)
    storage.save_embeddings(fused, args.out)
    excluded = sorted(set(a.words).symmetric_difference(b.words))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return {
        "method": args.method,
        "count": len(fused),
        "dim": fused.dim,
        "excluded_words": excluded,
        "out": args.out,
    }


def _cmd_judge(args) -> dict:
    lexicon = storage.load_lexicon(args.lexicon)
    rtype = records.load_record_type(args.record_type)
    record = records.load_record(args.record)
    probability = records.judge(record, rtype, lexicon)
    verdict = records.holds(record, rtype, lexicon, args.threshold)
    print(f"judge\t{probability!r}\nholds\t{verdict}")
    return {"probability": probability, "threshold": args.threshold, "holds": verdict}


def _cmd_serve(args) -> dict:
    import uvicorn

    from .service import TeachingService
    from .webapp import create_app

    service = TeachingService(
        default_preset=args.preset,
        default_objects_per_scene=args.objects_per_scene,
        noise_sigma=args.noise_sigma,
        frame_count=args.frame_count,
    )
    app = create_app(service)
    # report is written before blocking; see main()
    args._serve = lambda: uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return {"host": args.host, "port": args.port, "preset": args.preset}


_HANDLERS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "resolve": _cmd_resolve,
    "export-embeddings": _cmd_export_embeddings,
    "build-text-embeddings": _cmd_build_text_embeddings,
    "fuse": _cmd_fuse,
    "judge": _cmd_judge,
    "serve": _cmd_serve,
}


def _public_config(args: argparse.Namespace) -> dict:
    skip = {"command", "report", "config", "_serve"}
    return {k: v for k, v in vars(args).items() if k not in skip and not k.startswith("_")}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT

    report = {
        "subcommand": args.command,
        "seed": getattr(args, "seed", None),
        "config": _public_config(args),
        "status": "ok",
        "metrics": {},
    }
    started = time.perf_counter()
    exit_code = 0
    try:
        report["metrics"] = _HANDLERS[args.command](args)
    except (WaclexError, OSError) as exc:
        report["status"] = "error"
        report["error"] = {"category": "data", "message": str(exc)}
        print(f"error: {exc}", file=sys.stderr)
        exit_code = DATA_EXIT
    except Exception as exc:  # internal invariant violation
        report["status"] = "error"
        report["error"] = {"category": "internal", "message": f"{type(exc).__name__}: {exc}"}
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        exit_code = INTERNAL_EXIT
    finally:
        report["wall_time_s"] = time.perf_counter() - started
        report_path = _default_report_path(args)
        try:
            os.makedirs(os.path.dirname(os.path.abspath(report_path)), exist_ok=True)
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(report, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            print(f"error: could not write run report: {exc}", file=sys.stderr)
            exit_code = exit_code or DATA_EXIT

    serve = getattr(args, "_serve", None)
    if exit_code == 0 and serve is not None:
        serve()
    return exit_code


if __name__ == "__main__":
    raise SystemExit(main())
