"""Command-line entry points: train, generate, serve, fixtures, split, summary."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dataio, server, trainer
from .dataio import SplitManifest
from .inference import cli_generate
from .networks import ModelConfig, architecture_summary


def _add_train(sub):
    p = sub.add_parser("train", help="train one condition experiment")
    p.add_argument("--config", type=Path, help="YAML config file (see init-config for the defaults)")
    p.add_argument("--experiment", choices=sorted(dataio.CONDITION_SETS), required=True)
    p.add_argument("--data", type=Path, required=True, help="dataset root (per-patient directories)")
    p.add_argument("--out", type=Path, required=True, help="output directory for checkpoints and logs")
    p.add_argument("--split", type=Path, help="split manifest file (created with 'split'); "
                   "defaults to <data>/split.yaml")
    p.add_argument("--resume", type=Path, help="checkpoint to resume from")
    p.add_argument("--desk", action="store_true", help="use the reduced desk-scale preset")


def _cmd_train(args) -> int:
    if args.desk:
        train_cfg, model_cfg = trainer.desk_preset(condition_name=args.experiment)
    elif args.config:
        train_cfg, model_cfg = trainer.load_config(args.config)
        train_cfg = trainer.with_condition(train_cfg, args.experiment)
    else:
        train_cfg, model_cfg = trainer.TrainConfig(condition_name=args.experiment), ModelConfig()
    split_path = args.split or (args.data / "split.yaml")
    if not split_path.exists():
        print(f"error: split manifest {split_path} not found; run 'echogen split' first", file=sys.stderr)
        return 1
    manifest = SplitManifest.load(split_path)
    final = trainer.run_experiment(train_cfg, model_cfg, manifest, args.data, args.out, resume=args.resume)
    print(f"final checkpoint: {final}")
    return 0


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate echo frame(s) from mask file(s)")
    p.add_argument("--mask", type=Path, required=True, help="mask PNG or directory of mask PNGs")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output PNG or directory in batch mode")


def _cmd_generate(args) -> int:
    return cli_generate(args.mask, args.checkpoint, args.out)


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--models-dir", type=Path, help="directory of *.pt checkpoints to load")
    p.add_argument("--checkpoint", type=Path, action="append", default=[],
                   help="explicit checkpoint path (repeatable)")


def _cmd_serve(args) -> int:
    paths = list(args.checkpoint)
    if args.models_dir:
        paths += server.discover_checkpoints(args.models_dir)
    if not paths:
        print("error: no checkpoints given (use --models-dir or --checkpoint)", file=sys.stderr)
        return 1
    server.serve(args.host, args.port, paths)
    return 0


def _add_fixtures(sub):
    p = sub.add_parser("fixtures", help="write a synthetic dataset for desk-scale runs")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=128)


def _cmd_fixtures(args) -> int:
    ids = dataio.write_fixture_tree(args.out, args.count, args.seed, args.size)
    print(f"wrote {len(ids)} studies under {args.out}")
    return 0


def _add_split(sub):
    p = sub.add_parser("split", help="create the persistent train/test split manifest")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, help="manifest path (default <data>/split.yaml)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-count", type=int, default=22)


def _cmd_split(args) -> int:
    ids = dataio.list_patient_ids(args.data)
    manifest = dataio.make_split(ids, seed=args.seed, test_count=args.test_count)
    out = args.out or (args.data / "split.yaml")
    manifest.save(out)
    print(f"{len(manifest.train_ids)} train / {len(manifest.test_ids)} test ids -> {out}")
    return 0


def _add_summary(sub):
    p = sub.add_parser("summary", help="print the architecture layer table")
    p.add_argument("--config", type=Path, help="YAML config file; defaults otherwise")
    p.add_argument("--desk", action="store_true")


def _cmd_summary(args) -> int:
    if args.desk:
        _, model_cfg = trainer.desk_preset()
    elif args.config:
        _, model_cfg = trainer.load_config(args.config)
    else:
        model_cfg = ModelConfig()
    print(architecture_summary(model_cfg))
    return 0


def _add_init_config(sub):
    p = sub.add_parser("init-config", help="write a config file with the default hyperparameters")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--desk", action="store_true")


def _cmd_init_config(args) -> int:
    if args.desk:
        train_cfg, model_cfg = trainer.desk_preset()
    else:
        train_cfg, model_cfg = trainer.TrainConfig(), ModelConfig()
    trainer.save_config(args.out, train_cfg, model_cfg)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="echogen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train(sub)
    _add_generate(sub)
    _add_serve(sub)
    _add_fixtures(sub)
    _add_split(sub)
    _add_summary(sub)
    _add_init_config(sub)
    args = parser.parse_args(argv)
    handlers = {
        "train": _cmd_train,
        "generate": _cmd_generate,
        "serve": _cmd_serve,
        "fixtures": _cmd_fixtures,
        "split": _cmd_split,
        "summary": _cmd_summary,
        "init-config": _cmd_init_config,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
