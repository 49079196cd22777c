"""Command-line entry point: preprocess, train, transfer, evaluate, inspect.

Exit codes: 0 success, 1 runtime failure, 2 input or configuration error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import agent, container, data, nn, transfer
from .config import dump_config, load_config
from .errors import (CmdpIdsError, ConfigError, FormatError, IngestError, LabelError, PlanError,
                     SchemaError, ShapeError)
from .evaluation import evaluate, sweep_table
from .losses import DISPLAY_NAMES, LOSS_NAMES

log = logging.getLogger("cmdp_ids")

INPUT_ERRORS = (ConfigError, IngestError, SchemaError, LabelError, FormatError, ShapeError,
                PlanError, FileNotFoundError)


class InputError(CmdpIdsError):
    pass


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _need_file(path, what):
    if not path:
        raise InputError(f"no {what} given")
    if not os.path.isfile(path):
        raise InputError(f"{what} not found: {path}")


def _resolve(args):
    overrides = {
        "run.seed": args.seed,
        "run.out": args.out,
        "agent.algorithm": getattr(args, "algo", None),
    }
    loss = getattr(args, "loss", None)
    if loss is not None and loss != "all":
        overrides["agent.loss"] = loss
    if getattr(args, "dataset", None):
        overrides["data.dataset"] = args.dataset
    return load_config(args.config, overrides)


def _dataset_path(cfg):
    return cfg.data.dataset or os.path.join(cfg.out, "dataset.bin")


def _write_report(report, out, prefix="report"):
    _write(os.path.join(out, f"{prefix}.json"), report.to_json())
    _write(os.path.join(out, f"{prefix}.txt"), report.render())
    name = "confusion.csv" if prefix == "report" else f"{prefix}_confusion.csv"
    _write(os.path.join(out, name), report.confusion_csv())


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_preprocess(cfg):
    schema = cfg.schema()
    if cfg.profile == "synthetic":
        d = cfg.data
        table = data.synthetic_table(d.n_samples, d.n_features, d.n_classes, d.separation, cfg.seed)
    else:
        if not cfg.data.inputs:
            raise InputError("[data] inputs lists no CSV files")
        for path in cfg.data.inputs:
            _need_file(path, "input file")
        tables = [data.load_csv(path, schema) for path in cfg.data.inputs]
        table = data.concat_tables(tables)
    cleaned, report = data.CLEANERS[cfg.profile](table)
    if len(cleaned) == 0:
        raise InputError("no rows survive cleaning")
    train, test = data.prepare(cleaned, cfg.data.split_fraction, cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    path = _dataset_path(cfg)
    data.save_dataset(path, train, test, report, extra={"profile": cfg.profile})
    _write(os.path.join(cfg.out, "cleaning_report.json"),
           json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    _write(os.path.join(cfg.out, "cleaning_report.txt"), report.render() + "\n")
    _write(os.path.join(cfg.out, "config.resolved.ini"), dump_config(cfg))
    print(report.render())
    print(f"train {len(train)} / test {len(test)} samples, {train.n_features} features, "
          f"{train.n_classes} classes -> {path}")
    return 0


def _load_split(cfg):
    path = _dataset_path(cfg)
    _need_file(path, "encoded dataset")
    return data.load_dataset(path)


def _train_one(cfg, train_set, test_set, out):
    os.makedirs(out, exist_ok=True)
    params, trainlog = agent.train(train_set, cfg.agent)
    report = evaluate(params, test_set)
    nn.save_params(params, params.spec, os.path.join(out, "model.bin"),
                   extra={"label_names": list(train_set.label_names),
                          "feature_names": list(train_set.feature_names),
                          "algorithm": cfg.agent.algorithm, "loss": cfg.agent.loss})
    trainlog.to_csv(os.path.join(out, "train_log.csv"))
    _write_report(report, out)
    _write(os.path.join(out, "config.resolved.ini"), dump_config(cfg))
    return params, report


def cmd_train(cfg, sweep=False):
    train_set, test_set, _ = _load_split(cfg)
    if not sweep:
        _, report = _train_one(cfg, train_set, test_set, cfg.out)
        print(report.render(), end="")
        return 0
    reports = {}
    for loss in LOSS_NAMES:
        cfg.agent.loss = loss
        log.info("loss sweep: %s", loss)
        _, reports[DISPLAY_NAMES[loss]] = _train_one(cfg, train_set, test_set, os.path.join(cfg.out, loss))
    table = sweep_table(reports)
    _write(os.path.join(cfg.out, "loss_sweep.txt"), table)
    print(table, end="")
    return 0


def cmd_transfer(cfg, source_model):
    _need_file(source_model, "source model")
    train_set, test_set, _ = _load_split(cfg)
    _, source = nn.load_params(source_model)
    try:
        spec, params = transfer.build_transfer_net(source, train_set.n_classes, train_set.n_features,
                                                   tuple(cfg.transfer.hidden), seed=cfg.seed)
    except ShapeError as exc:
        raise PlanError(f"source model cannot be transferred to this dataset: {exc}") from None
    params, trainlog = agent.train(train_set, cfg.agent, params=params)
    if not transfer.frozen_unchanged(source, params):
        raise RuntimeError("frozen backbone changed during transfer training")
    report = evaluate(params, test_set)
    counts = transfer.accounting(params)
    os.makedirs(cfg.out, exist_ok=True)
    nn.save_params(params, spec, os.path.join(cfg.out, "model.bin"),
                   extra={"label_names": list(train_set.label_names),
                          "transferred_from": os.path.basename(source_model)})
    trainlog.to_csv(os.path.join(cfg.out, "train_log.csv"))
    _write_report(report, cfg.out)
    _write(os.path.join(cfg.out, "parameters.json"), json.dumps(counts, indent=2, sort_keys=True) + "\n")
    _write(os.path.join(cfg.out, "config.resolved.ini"), dump_config(cfg))
    print(report.render(), end="")
    print(f"parameters: {counts['total']} total, {counts['trainable']} trainable "
          f"(published: {counts['published_total']} / {counts['published_trainable']})")
    return 0


def cmd_evaluate(cfg, model_path, split="test", write=False):
    _need_file(model_path, "model")
    train_set, test_set, _ = _load_split(cfg)
    dataset = test_set if split == "test" else train_set
    _, params = nn.load_params(model_path)
    width = params.spec.n_outputs
    if width != dataset.n_classes:
        raise ShapeError(f"model outputs {width} classes but the dataset has {dataset.n_classes}")
    report = evaluate(params, dataset)
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        _write_report(report, cfg.out, prefix=f"evaluate_{split}")
    print(report.render(), end="")
    return 0


def cmd_inspect(path):
    _need_file(path, "artifact")
    meta, arrays = container.read(path)
    kind = meta.get("artifact")
    if kind == "model":
        spec, params = nn.model_from_container(meta, arrays)
        shapes = nn.infer_shapes(spec)
        print(f"model: input {spec.input_channels}x{spec.input_length}")
        for i, (layer, shape) in enumerate(zip(spec.layers, shapes)):
            p = params.layers.get(i)
            flag = "" if p is None else ("  trainable" if p.trainable else "  frozen")
            n = "" if p is None else f"  params={p.weights.size + p.biases.size}"
            print(f"  {i:2d} {layer!r:<40} -> {shape}{n}{flag}")
        total, trainable = nn.param_count(params)
        print(f"parameters: {total} total, {trainable} trainable")
        for k, v in sorted(meta.get("extra", {}).items()):
            print(f"{k}: {v}")
    elif kind == "dataset":
        names = meta["label_names"]
        for part in ("train", "test"):
            y = arrays[f"{part}.labels"]
            counts = np.bincount(y, minlength=len(names))
            desc = ", ".join(f"{n}={c}" for n, c in zip(names, counts))
            print(f"{part}: {len(y)} samples x {arrays[f'{part}.matrix'].shape[1]} features ({desc})")
        if meta.get("report"):
            print(f"cleaning: rows_in={meta['report']['rows_in']} rows_out={meta['report']['rows_out']}")
    else:
        raise InputError(f"unknown artifact kind {kind!r}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="cmdp-ids", description=__doc__.splitlines()[0])
    p.add_argument("-q", "--quiet", action="store_true", help="only warnings on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, agent_flags=False):
        sp.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--config", help="INI run configuration")
        sp.add_argument("--seed", type=int, help="overrides [run] seed")
        sp.add_argument("--out", help="output directory (overrides [run] out)")
        if agent_flags:
            sp.add_argument("--algo", choices=["dqn", "ddqn"])
            sp.add_argument("--loss", choices=[*LOSS_NAMES, "all"],
                            help="'all' runs the four-loss sweep")
        return sp

    common(sub.add_parser("preprocess", help="clean, encode and split raw CSVs"))
    t = common(sub.add_parser("train", help="train a DQN/DDQN agent"), agent_flags=True)
    t.add_argument("--dataset", help="encoded dataset (default OUT/dataset.bin)")
    tr = common(sub.add_parser("transfer", help="freeze a backbone and retrain a new head"),
                agent_flags=True)
    tr.add_argument("--source", help="source model file (overrides [transfer] source_model)")
    tr.add_argument("--dataset", help="encoded target dataset")
    ev = common(sub.add_parser("evaluate", help="evaluate a model on a dataset"))
    ev.add_argument("--model", required=True)
    ev.add_argument("--dataset", help="encoded dataset (default OUT/dataset.bin)")
    ev.add_argument("--split", choices=["train", "test"], default="test")
    ins = sub.add_parser("inspect", help="describe a model or dataset artifact")
    ins.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)
    ins.add_argument("path")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "inspect":
            return cmd_inspect(args.path)
        cfg = _resolve(args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg)
        if args.command == "train":
            return cmd_train(cfg, sweep=args.loss == "all")
        if args.command == "transfer":
            if args.loss == "all":
                raise InputError("--loss all is only meaningful for train")
            return cmd_transfer(cfg, args.source or cfg.transfer.source_model)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.model, args.split, write=args.out is not None)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort exit code contract
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
