"""Command-line entry points: generate, simulate, compare, serve.

Configuration is JSON with every default embedded here; flags override file
values. Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import datastore, loop, synth
from .acquisition import Strategy
from .annotate import CostModel
from .detector import NoiseConfig
from .loop import LoopConfig

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    return LoopConfig().to_json()


def load_config(path: str | None, overrides: dict) -> LoopConfig:
    raw = default_config()
    if path is not None:
        try:
            file_values = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        unknown = set(file_values) - set(raw)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        raw.update(file_values)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    tuple_keys = {"aux_objects_range", "extent", "world_objects_range", "class_weights"}
    for f in dataclass_fields(LoopConfig):
        value = raw[f.name]
        if f.name == "strategy":
            value = Strategy(value)
        elif f.name == "noise":
            value = NoiseConfig(**value) if isinstance(value, dict) else value
        elif f.name == "cost":
            value = CostModel(**value) if isinstance(value, dict) else value
        elif f.name in tuple_keys and isinstance(value, list):
            value = tuple(value)
        kwargs[f.name] = value
    try:
        return LoopConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))


def write_manifest(out_dir: Path, command: str, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_path": getattr(args, "config", None),
        "seeds": getattr(args, "seeds", None) or [getattr(args, "seed", None)],
        "out": str(out_dir),
        "version": "alod-0.1.0",
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def cmd_generate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    out = Path(args.out)
    write_manifest(out, "generate", args)
    root = np.random.SeedSequence(config.seed)
    world_ss, a0_ss, aux_ss, _ = root.spawn(4)
    world = synth.generate_world(
        config.n_images,
        config.num_classes,
        np.random.default_rng(world_ss),
        class_weights=config.class_weights,
        extent=config.extent,
        objects_range=config.world_objects_range,
    )
    datastore.save_dataset(out / "world.jsonl", world)
    a0_rng = np.random.default_rng(a0_ss)
    ids = sorted(r.id for r in world)
    by_id = {r.id: r for r in world}
    a0_ids = [ids[i] for i in a0_rng.choice(len(ids), size=config.a0_size, replace=False)]
    from dataclasses import replace as dc_replace

    a0_records = [
        dc_replace(by_id[i], label=by_id[i].ground_truth) for i in sorted(a0_ids)
    ]
    aux = synth.generate_auxiliary(
        a0_records,
        loop.make_backgrounds(config),
        n_real=config.n_images,
        multiplier=config.multiplier,
        rng=np.random.default_rng(aux_ss),
        objects_range=config.aux_objects_range,
    )
    datastore.save_dataset(out / "auxiliary.jsonl", aux)
    print(f"wrote {len(world)} world records and {len(aux)} auxiliary records to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    out = Path(args.out)
    write_manifest(out, "simulate", args)
    state = loop.run_simulation(config)
    loop.write_reports(out, state)
    final = state.reports[-1]
    print(
        f"simulated {config.cycles} cycles (strategy {config.strategy.value}): "
        f"final AP50 {final.ap50:.4f}, AP {final.ap:.4f}, "
        f"annotation cost {final.cumulative_seconds:.1f} s"
    )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    if len(args.strategies) < 2:
        raise ConfigError("compare needs at least two strategies")
    try:
        strategies = [Strategy(s) for s in args.strategies]
    except ValueError as exc:
        raise ConfigError(str(exc))
    config = load_config(args.config, _overrides(args))
    seeds = args.seeds or [config.seed]
    out = Path(args.out)
    write_manifest(out, "compare", args)
    results = loop.run_comparison(
        config, strategies, seeds, progress=print if args.verbose else None
    )
    loop.write_comparison_csv(out / "comparison.csv", results)
    lines = ["strategy,mean_final_ap50"]
    for strategy in strategies:
        finals = [results[strategy][seed][-1].ap50 for seed in seeds]
        mean_final = sum(finals) / len(finals)
        lines.append(f"{strategy.value},{mean_final!r}")
        print(f"{strategy.value}: mean final AP50 {mean_final:.4f}")
    (out / "summary.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config, _overrides(args))
    app = create_app(
        config,
        simulate_annotator=args.simulate_annotator,
        static_dir=args.static_dir,
    )
    out = Path(args.out)
    write_manifest(out, "serve", args)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        write_manifest(out, "serve-finished", args)
    return EXIT_OK


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "strategy", None) is not None:
        out["strategy"] = args.strategy
    if getattr(args, "cycles", None) is not None:
        out["cycles"] = args.cycles
    if getattr(args, "budget", None) is not None:
        out["budget"] = args.budget
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alod", description=__doc__)
    parser.add_argument(
        "--print-config", action="store_true", help="dump the default config and exit"
    )
    sub = parser.add_subparsers(dest="command")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="runs/latest")
        p.add_argument("--strategy", default=None, choices=[s.value for s in Strategy])
        p.add_argument("--cycles", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)

    gen = sub.add_parser("generate", help="write world and auxiliary dataset files")
    common(gen)

    sim = sub.add_parser("simulate", help="run a full simulated AL loop")
    common(sim)

    cmp_ = sub.add_parser("compare", help="run several strategies on shared seeds")
    common(cmp_)
    cmp_.add_argument("--strategies", nargs="+", default=["product", "uniform"])
    cmp_.add_argument("--seeds", nargs="+", type=int, default=None)
    cmp_.add_argument("--verbose", action="store_true")

    srv = sub.add_parser("serve", help="host the live annotation service")
    common(srv)
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--simulate-annotator", action="store_true")
    srv.add_argument("--static-dir", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        print(json.dumps(default_config(), indent=2, sort_keys=True))
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    handlers = {
        "generate": cmd_generate,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
