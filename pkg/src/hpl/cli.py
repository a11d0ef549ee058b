"""Command-line entry point.

Exit codes: 0 success, 1 domain error, 2 usage error. Machine-readable
output is JSON on stdout; human tables (train/eval) also go to stdout;
everything diagnostic goes to stderr, gated by HPL_LOG.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import classifier, dataset, pipeline, playground
from .classifier import TrainingConfig, format_metrics_table
from .compiler import classify_sheet, command_to_json_dict, compile_program, parse_symbols
from .dataset import SplitConfig
from .errors import DomainError
from .imaging import load_pgm
from .symbols import SymbolClass

log = logging.getLogger("hpl")


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("HPL_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(message)s")


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _positive_float(value: str) -> float:
    x = float(value)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {x}")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="generate synthetic arrow images")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=300)

    p = sub.add_parser("train", help="split 60/40, train the MLP, report test metrics")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=_positive_int, default=100)
    p.add_argument("--lr", type=_positive_float, default=0.01)

    p = sub.add_parser("eval", help="evaluate a model on a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)

    p = sub.add_parser("classify", help="recognize the symbols on one image")
    p.add_argument("--image", required=True)
    p.add_argument("--model", required=True)

    p = sub.add_parser("compile", help="compile a symbol list to motion commands")
    p.add_argument("--symbols", required=True)

    p = sub.add_parser("simulate", help="compile a program file and run it on a map")
    p.add_argument("--map", dest="map_path")
    p.add_argument("--program", required=True)
    p.add_argument("--out")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--model", required=True)
    p.add_argument("--map", dest="map_path")
    p.add_argument("--static-dir")
    p.add_argument("--allow-origin")

    return parser


def _cmd_gen_dataset(args) -> int:
    data = dataset.gen_dataset(args.per_class, seed=args.seed, size=args.size)
    dataset.save_dir(data, args.out)
    for cls in SymbolClass:
        n = sum(1 for item in data if item.label is cls)
        print(f"{cls.canonical_name}: {n}", file=sys.stderr)
    log.info("wrote %d images to %s", len(data), args.out)
    return 0


def _load_model_file(path: str) -> classifier.MlpModel:
    return classifier.load_model(Path(path).read_bytes())


def _cmd_train(args) -> int:
    images = dataset.load_dir(args.data)
    train_set, test_set = dataset.split(images, SplitConfig(seed=args.seed))
    cfg = TrainingConfig(seed=args.seed, max_epochs=args.epochs, learning_rate=args.lr)
    model = pipeline.train_on_images(train_set, cfg)
    report = pipeline.evaluate_on_images(model, test_set)
    Path(args.model).write_bytes(classifier.save_model(model))
    print(f"final validation loss: {model.val_loss:.6f}")
    print(format_metrics_table(report))
    log.info("model written to %s", args.model)
    return 0


def _cmd_eval(args) -> int:
    images = dataset.load_dir(args.data)
    model = _load_model_file(args.model)
    report = pipeline.evaluate_on_images(model, images)
    print(format_metrics_table(report))
    return 0


def _cmd_classify(args) -> int:
    img = load_pgm(Path(args.image).read_bytes())
    model = _load_model_file(args.model)
    result = classify_sheet(img, model)
    print(json.dumps(result.program.to_json_dict()))
    for rej in result.rejected:
        log.info("rejected glyph at %s with confidence %.2f", rej.box, rej.confidence)
    return 0


def _cmd_compile(args) -> int:
    program = parse_symbols(args.symbols)
    commands = compile_program(program)
    print(json.dumps([command_to_json_dict(c) for c in commands]))
    return 0


def _cmd_simulate(args) -> int:
    doc = json.loads(Path(args.program).read_text(encoding="utf-8"))
    program = parse_symbols(",".join(doc.get("symbols", [])))
    commands = compile_program(program)
    if args.map_path:
        pmap = playground.load_map(Path(args.map_path).read_text(encoding="utf-8"))
    else:
        pmap = playground.default_map()
    result = playground.run(commands, pmap)
    doc_out = playground.result_to_json_dict(result)
    if args.out:
        Path(args.out).write_text(json.dumps(doc_out), encoding="utf-8")
        print(json.dumps({"status": result.status.value, "final_energy": result.trajectory[-1].energy}))
    else:
        print(json.dumps(doc_out))
    return 0


def _cmd_serve(args) -> int:
    from . import service

    model = _load_model_file(args.model)
    if args.map_path:
        pmap = playground.load_map(Path(args.map_path).read_text(encoding="utf-8"))
    else:
        pmap = playground.default_map()
    server = service.create_server(
        model,
        pmap,
        port=args.port,
        static_dir=args.static_dir,
        allow_origin=args.allow_origin,
    )
    print(f"serving on port {server.server_address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_HANDLERS = {
    "gen-dataset": _cmd_gen_dataset,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "classify": _cmd_classify,
    "compile": _cmd_compile,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except DomainError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
