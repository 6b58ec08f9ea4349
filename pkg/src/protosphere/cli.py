"""Command-line interface.

Subcommands: prototypes, train, eval, inspect, bench-assign, gen-data.
Every value a command actually used (flags, config file, or defaults) is
persisted next to the outputs as a resolved-config artifact, so runs are
reproducible from their artifacts alone. Exit codes: 0 success, 1 runtime or
IO failure, 2 usage or validation error.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from protosphere import _core, assignment, data, hypersphere, model, trainer
from protosphere.errors import ArtifactError


class UsageError(Exception):
    pass


def _read_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _resolve(args, spec):
    """Merge flag values, config-file values, and defaults (in that order).

    spec: list of (name, type, default). Returns the materialized dict.
    """
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for name, conv, default in spec:
        flag = getattr(args, name)
        if flag is not None:
            resolved[name] = flag
        elif name in file_values:
            raw = file_values[name]
            try:
                resolved[name] = conv(raw) if conv is not bool else raw.lower() == "true"
            except ValueError as exc:
                raise UsageError(f"config key {name}: {exc}") from exc
        else:
            resolved[name] = default
    return resolved


def _write_resolved(resolved, path):
    lines = [f"{key}={_plain(value)}" for key, value in sorted(resolved.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _plain(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def _print_report(report):
    print(f"apad={report.apad:.6f} rad")
    print(f"min_cos={report.min_cos:.6f}")
    print(f"max_cos={report.max_cos:.6f}")
    print(f"min_pairwise_distance={report.min_pairwise_distance:.6f}")
    print(f"etf_gap={report.etf_gap:.6f}")


def cmd_prototypes(args):
    spec = [
        ("d", int, None),
        ("c", int, None),
        ("temperature", float, 2.0),
        ("lr", float, 0.1),
        ("iterations", int, 1000),
        ("subset_size", int, None),
        ("seed", int, 0),
        ("closed_form", bool, False),
    ]
    cfg = _resolve(args, spec)
    if cfg["closed_form"] and cfg["d"] is None:
        cfg["d"] = 2
    if cfg["c"] is None or cfg["d"] is None:
        raise UsageError("--d and --c are required")
    if cfg["closed_form"]:
        if cfg["d"] != 2:
            raise UsageError("--closed-form requires --d 2")
        protos = hypersphere.circle_prototypes(cfg["c"])
    else:
        uni = hypersphere.UniformityConfig(
            temperature=cfg["temperature"],
            learning_rate=cfg["lr"],
            iterations=cfg["iterations"],
            subset_size=cfg["subset_size"],
            seed=cfg["seed"],
        )
        try:
            protos = hypersphere.estimate_prototypes(cfg["d"], cfg["c"], uni)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    hypersphere.save_prototypes(
        protos, args.out, temperature=cfg["temperature"], seed=cfg["seed"]
    )
    _write_resolved(cfg, str(args.out) + ".config")
    _print_report(hypersphere.geometry_report(protos))
    print(f"wrote {args.out}")
    return 0


def cmd_gen_data(args):
    spec = [
        ("classes", int, None),
        ("input_dim", int, None),
        ("per_class", int, 30),
        ("spread", float, 0.1),
        ("min_angle", float, 0.3),
        ("seed", int, 0),
        ("imbalance_factor", float, None),
        ("max_per_class", int, None),
    ]
    cfg = _resolve(args, spec)
    if cfg["classes"] is None or cfg["input_dim"] is None:
        raise UsageError("--classes and --input-dim are required")
    dataset = data.generate_gaussian_mixture(
        cfg["classes"],
        cfg["input_dim"],
        cfg["per_class"],
        cfg["spread"],
        cfg["seed"],
        min_angle=cfg["min_angle"],
    )
    if cfg["imbalance_factor"] is not None:
        max_per_class = cfg["max_per_class"] or cfg["per_class"]
        tail = data.LongTailSpec(cfg["imbalance_factor"], max_per_class)
        dataset = data.apply_long_tail(dataset, tail, cfg["seed"])
    data.save_dataset(dataset, args.out)
    _write_resolved(cfg, str(args.out) + ".config")
    counts = ",".join(str(int(x)) for x in dataset.per_class_counts)
    print(f"wrote {args.out} (n={dataset.n}, per-class counts {counts})")
    return 0


def cmd_train(args):
    spec = [
        ("epochs", int, 100),
        ("batch_size", int, 32),
        ("lr", float, 0.1),
        ("momentum", float, 0.9),
        ("alpha", float, 0.9),
        ("tau_prime", float, 1.0),
        ("class_weighting", str, "none"),
        ("loss", str, "lipm"),
        ("seed", int, 0),
        ("hidden", str, ""),
        ("identity_init", bool, False),
        ("freeze_assignment", bool, False),
        ("assignment_init", str, "identity"),
    ]
    cfg = _resolve(args, spec)
    dataset = data.load_dataset(args.data)
    protos = hypersphere.load_prototypes(args.prototypes)
    if dataset.class_count != protos.count:
        raise UsageError(
            f"dataset {args.data} has c={dataset.class_count} classes but"
            f" prototype file {args.prototypes} holds c={protos.count}"
        )
    hidden = tuple(int(h) for h in cfg["hidden"].split(",") if h.strip())
    config = trainer.TrainConfig(
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        learning_rate=cfg["lr"],
        sgd_momentum=cfg["momentum"],
        alpha=cfg["alpha"],
        tau_prime=cfg["tau_prime"],
        class_weighting=cfg["class_weighting"],
        loss_mode=cfg["loss"],
        seed=cfg["seed"],
        hidden_dims=hidden,
        identity_init=cfg["identity_init"],
        dynamic_assignment=not cfg["freeze_assignment"],
        assignment_init=cfg["assignment_init"],
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = trainer.train(dataset, protos, config)
    model.save_checkpoint(state.params, out_dir / "checkpoint.txt")
    assignment.save_assignment(state.assignment, out_dir / "assignment.txt")
    trainer.write_metrics(state.history, out_dir / "metrics.jsonl")
    _write_resolved(cfg, out_dir / "resolved.config")
    final = state.history[-1]
    print(f"epochs={len(state.history)} train_loss={final.train_loss:.6f}")
    print(f"final accuracy {final.eval_accuracy:.2f}")
    return 0


def cmd_eval(args):
    dataset = data.load_dataset(args.data)
    protos = hypersphere.load_prototypes(args.prototypes)
    params = model.load_checkpoint(args.checkpoint)
    mapping = assignment.load_assignment(args.assignment)
    if len(mapping) != protos.count or dataset.class_count != protos.count:
        raise UsageError(
            f"artifact mismatch: dataset c={dataset.class_count},"
            f" prototypes c={protos.count}, assignment c={len(mapping)}"
        )
    acc = trainer.evaluate(params, protos, mapping, dataset)
    print(f"accuracy {acc:.4f}")
    return 0


def cmd_inspect(args):
    with Path(args.artifact).open(encoding="utf-8") as fh:
        header = fh.readline()
    if header.startswith("# protosphere-prototypes"):
        protos = hypersphere.load_prototypes(args.artifact)
        print(f"prototypes d={protos.dim} c={protos.count}")
        _print_report(hypersphere.geometry_report(protos))
    elif header.startswith("# protosphere-assignment"):
        mapping = assignment.load_assignment(args.artifact)
        cycles = mapping.cycles()
        cycle_text = "".join(
            "(" + " ".join(str(j) for j in cyc) + ")" for cyc in cycles if len(cyc) > 1
        )
        print(f"assignment c={len(mapping)}")
        print(f"fixed points: {len(mapping.fixed_points())}")
        print(f"cycles: {cycle_text or 'none'}")
    else:
        raise ArtifactError(f"unrecognized artifact header: {header.strip()!r}")
    return 0


def cmd_bench_assign(args):
    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    if not sizes or any(c < 2 for c in sizes):
        raise UsageError("--sizes needs comma-separated values >= 2")
    if args.backend:
        available = _core.backends()
        if args.backend not in available:
            raise UsageError(f"backend {args.backend!r} is not built")
        solver = available[args.backend]
    else:
        solver = _core.lapjv
    rows = ["c,mean_ms"]
    for c in sizes:
        rng = np.random.default_rng(args.seed)
        cost = rng.uniform(-1.0, 1.0, size=(c, c))
        elapsed = []
        for _ in range(args.repeats):
            tic = time.perf_counter()
            solver(cost)
            elapsed.append((time.perf_counter() - tic) * 1000.0)
        rows.append(f"{c},{np.mean(elapsed):.3f}")
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="protosphere",
        description="Fixed hyperspherical prototypes with dynamic"
        " label-to-prototype assignment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prototypes", help="estimate or construct a prototype set")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--subset-size", dest="subset_size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--closed-form", dest="closed_form", action="store_const", const=True,
        default=None, help="equal circle slices (d=2 only)",
    )
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prototypes)

    p = sub.add_parser("gen-data", help="generate a synthetic labeled dataset")
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--input-dim", dest="input_dim", type=int, default=None)
    p.add_argument("--per-class", dest="per_class", type=int, default=None)
    p.add_argument("--spread", type=float, default=None)
    p.add_argument("--min-angle", dest="min_angle", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--imbalance-factor", dest="imbalance_factor", type=float, default=None,
        help="apply the exponential long-tail profile with this min/max ratio",
    )
    p.add_argument("--max-per-class", dest="max_per_class", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a backbone against fixed prototypes")
    p.add_argument("--data", required=True)
    p.add_argument("--prototypes", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--momentum", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tau-prime", dest="tau_prime", type=float, default=None)
    p.add_argument(
        "--class-weighting", dest="class_weighting",
        choices=("none", "inverse"), default=None,
    )
    p.add_argument("--loss", choices=trainer.LOSS_MODES, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--hidden", default=None, help="comma-separated hidden widths")
    p.add_argument(
        "--identity-init", dest="identity_init", action="store_const", const=True,
        default=None,
    )
    p.add_argument(
        "--freeze-assignment", dest="freeze_assignment", action="store_const",
        const=True, default=None, help="never re-solve the assignment",
    )
    p.add_argument(
        "--assignment-init", dest="assignment_init",
        choices=("identity", "random"), default=None,
    )
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--prototypes", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--assignment", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="summarize a prototype or assignment file")
    p.add_argument("artifact")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench-assign", help="time the assignment solver")
    p.add_argument("--sizes", default="250,500,1000", help="comma-separated c values")
    p.add_argument("--repeats", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("cython", "python"), default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_assign)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArtifactError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
