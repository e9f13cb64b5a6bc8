"""Command-line experiment runner: gen, discover, analyze, augment-eval.

Configuration is flat ``key = value`` text. Keys are dotted
(``train.lam = 0.01``); an INI section ``[train]`` prefixes its keys the
same way. Precedence: defaults < task preset < config file < ``--set``
overrides < dedicated flags (``--seed``, ``--epochs``, ``--k``, ``--count``).

Every command writes ``manifest.json`` with the resolved configuration and
SHA-256 checksums of the files it produced.
"""

import argparse
import configparser
import csv
import hashlib
import json
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__, algebras
from .analysis import (MetricSolveConfig, NumericError, SolverError, augmentation_benefit,
                       compare_bases, fit_linear, fit_mlp, invariance_residual, solve_metric)
from .datasets import (CLASSIFICATION, GENERATORS, TRAJECTORY, ParseError, angular_split,
                       gen_two_body, load_csv, save_csv)
from .discriminator import Discriminator
from .generator import (GaussianCoefficients, IntegerGridCoefficients, LieBasis,
                        RepresentationSpec, load_basis, save_basis)
from .linalg import DomainError, ShapeError, dumps_matrix
from .trainer import TrainingConfig, TrainingDivergence, config_dict, train

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": 0,
    "task.name": "",
    "task.csv": "",
    "task.n": 0,
    "task.m": 0,
    "task.kind": "regression",
    "task.field": "real",
    "task.header": False,
    "task.num_classes": 0,
    "task.t_in": 5,
    "task.t_out": 5,
    "task.step_dim": 8,
    "task.count": 20000,
    "task.k": 7,
    "generator.channels": 1,
    "generator.dim": 0,
    "generator.block_size": 0,
    "generator.complex": False,
    "generator.init_std": 0.2,
    "generator.dist": "gaussian",
    "generator.sigma": 1.0,
    "generator.learn_sigma": False,
    "generator.lo": -10,
    "generator.hi": 10,
    "generator.in_blocks": 1,
    "generator.out_blocks": 0,
    "disc.hidden": 512,
    "disc.depth": 3,
    "disc.slope": 0.2,
    "disc.embed_dim": 8,
    "train.lam": 1.0,
    "train.eta": 0.0,
    "train.lr_d": 2e-4,
    "train.lr_g": 1e-3,
    "train.epochs": 100,
    "train.batch_size": 256,
    "train.d_steps": 1,
    "train.minimax": False,
    "train.snapshot_every": 10,
    "analysis.basis": "",
    "analysis.truth": "",
    "analysis.channels": "",
    "analysis.metric": True,
    "metric.a": 5e-4,
    "metric.lr": 1e-5,
    "metric.steps": 200_000,
    "metric.norm": "max",
    "eval.basis": "",
    "eval.count": 1000,
    "eval.split": 0.8,
    "eval.copies": 1,
    "eval.predictor": "mlp",
    "eval.mlp_epochs": 50,
    "eval.mlp_hidden": 64,
}

# per-task generator settings for the built-in datasets
PRESETS = {
    "two_body": {"task.count": 5000, "generator.dim": 8, "generator.block_size": 2,
                 "generator.in_blocks": 5, "generator.out_blocks": 5, "train.lam": 1.0},
    "discrete_rotation": {"generator.dim": 3, "generator.dist": "int_grid", "train.lam": 0.01},
    "partial_permutation": {"generator.dim": 5, "generator.dist": "int_grid", "train.lam": 0.01},
    "su2": {"generator.channels": 3, "generator.dim": 2, "generator.complex": True,
            "generator.in_blocks": 2, "train.eta": 0.1},
    "lorentz_invariant": {"generator.channels": 7, "generator.dim": 4, "train.eta": 0.1},
}


# -- configuration -------------------------------------------------------------

def _convert(key, raw):
    default = DEFAULTS[key]
    text = str(raw).strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    return text


def _set(cfg, key, value):
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    cfg[key] = _convert(key, value)


def read_config_file(path):
    """Dotted ``key = value`` pairs from a config file (sections prefix keys)."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        with open(path) as f:
            parser.read_string("[__root__]\n" + f.read())
    except (OSError, configparser.Error) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    out = {}
    for section in parser.sections():
        prefix = "" if section == "__root__" else section + "."
        for key, value in parser[section].items():
            out[prefix + key] = value
    return out


def resolve_config(args, task=None):
    cfg = dict(DEFAULTS)
    file_vals = read_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    name = task or overrides.get("task.name") or file_vals.get("task.name") or ""
    if name:
        if name not in GENERATORS:
            raise ConfigError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
        for k, v in PRESETS.get(name, {}).items():
            cfg[k] = v
    for source in (file_vals, overrides):
        for k, v in source.items():
            _set(cfg, k, v)
    if name:
        cfg["task.name"] = name
    for flag, key in (("seed", "seed"), ("epochs", "train.epochs"), ("k", "task.k"),
                      ("count", "task.count")):
        value = getattr(args, flag, None)
        if value is not None:
            _set(cfg, key, value)
    return cfg


def write_config(path, cfg):
    with open(path, "w") as f:
        for key in sorted(cfg):
            value = cfg[key]
            if isinstance(value, float):
                value = f"{value:.17g}"
            f.write(f"{key} = {value}\n")


# -- outputs -------------------------------------------------------------------

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out, command, cfg, files, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg["seed"],
        "config": cfg,
        "artifacts": {name: _sha256(out / name) for name in files},
    }
    if extra:
        manifest.update(extra)
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
    return manifest


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _json_dump(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)


# -- building blocks -------------------------------------------------------------

def make_dataset(cfg):
    name = cfg["task.name"]
    seed = cfg["seed"]
    if cfg["task.csv"]:
        kind = cfg["task.kind"]
        if cfg["task.n"] < 1 or cfg["task.m"] < 1:
            raise ConfigError("CSV input needs task.n and task.m")
        extra = {}
        if kind == TRAJECTORY:
            extra = dict(t_in=cfg["task.t_in"], t_out=cfg["task.t_out"],
                         step_dim=cfg["task.step_dim"])
        return load_csv(cfg["task.csv"], cfg["task.n"], cfg["task.m"], task=kind,
                        field=cfg["task.field"], header=cfg["task.header"],
                        num_classes=cfg["task.num_classes"] or None, **extra)
    if not name:
        raise ConfigError("no task: pass a generator name or set task.csv")
    count = cfg["task.count"]
    if name == "discrete_rotation":
        return GENERATORS[name](cfg["task.k"], count, seed=seed)
    return GENERATORS[name](count, seed=seed)


def gen_params(cfg):
    keys = ["task.count", "task.k"] if cfg["task.name"] == "discrete_rotation" else ["task.count"]
    return {k: cfg[k] for k in keys}


def make_generator(cfg, ds, rng):
    c, dim = cfg["generator.channels"], cfg["generator.dim"]
    in_blocks = cfg["generator.in_blocks"]
    if dim < 1:
        dim = ds.x_dim // in_blocks
    block = cfg["generator.block_size"] or None
    basis = LieBasis.random(c, dim, rng, std=cfg["generator.init_std"], block_size=block,
                            complex_field=cfg["generator.complex"])
    if cfg["generator.dist"] == "gaussian":
        dist = GaussianCoefficients.make(c, cfg["generator.sigma"], cfg["generator.learn_sigma"])
    elif cfg["generator.dist"] == "int_grid":
        dist = IntegerGridCoefficients(cfg["generator.lo"], cfg["generator.hi"], c)
    else:
        raise ConfigError(f"unknown generator.dist {cfg['generator.dist']!r}")
    rep = RepresentationSpec(in_blocks, cfg["generator.out_blocks"] or None)
    return basis, dist, rep


def make_discriminator(cfg, ds, rng):
    widen = 2 if ds.is_complex else 1
    num_classes = None
    if ds.task == CLASSIFICATION:
        num_classes = cfg["task.num_classes"] or int(ds.y.max()) + 1
    return Discriminator(ds.x_dim * widen, ds.y_dim * widen, rng, hidden=cfg["disc.hidden"],
                         depth=cfg["disc.depth"], slope=cfg["disc.slope"],
                         num_classes=num_classes, embed_dim=cfg["disc.embed_dim"])


def training_config(cfg):
    return TrainingConfig(lam=cfg["train.lam"], eta=cfg["train.eta"], lr_d=cfg["train.lr_d"],
                          lr_g=cfg["train.lr_g"], epochs=cfg["train.epochs"],
                          batch_size=cfg["train.batch_size"], seed=cfg["seed"],
                          d_steps=cfg["train.d_steps"], minimax=cfg["train.minimax"],
                          snapshot_every=cfg["train.snapshot_every"])


TRUTHS = {
    "so2": algebras.so2,
    "so3": algebras.so3,
    "so13": algebras.so13,
    "su2": algebras.su2,
    "cyclic_permutation": algebras.cyclic_permutation_log,
}


def truth_basis(spec):
    """Built-in ground truth by name (``planar_rotation:7``, ``block_rotation:8:2``)
    or a basis JSON path."""
    name, *params = spec.split(":")
    if name in TRUTHS and not params:
        return TRUTHS[name]()
    if name == "planar_rotation":
        return algebras.planar_rotation(int(params[0]) if params else 7)
    if name == "block_rotation":
        return algebras.block_rotation(*(int(p) for p in params))
    if not os.path.exists(spec):
        raise ConfigError(f"truth {spec!r} is neither a built-in basis nor a file")
    return load_basis(spec)[0].matrices()


def _channels(text):
    if not text.strip():
        return None
    try:
        return [int(c) for c in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad channel list {text!r}") from None


# -- commands --------------------------------------------------------------------

def cmd_gen(args):
    cfg = resolve_config(args, args.generator)
    ds = make_dataset(cfg)
    out = _out_dir(args)
    save_csv(out / "data.csv", ds, header=cfg["task.header"])
    schema = {"n": ds.x_dim, "m": ds.y_dim, "task": ds.task, "field": ds.field}
    if ds.task == TRAJECTORY:
        schema.update(t_in=ds.t_in, t_out=ds.t_out, step_dim=ds.step_dim)
    write_manifest(out, "gen", cfg, ["data.csv"],
                   {"generator": cfg["task.name"], "params": gen_params(cfg),
                    "samples": len(ds), "schema": schema})
    print(f"wrote {len(ds)} rows to {out / 'data.csv'}")
    return 0


def cmd_discover(args):
    cfg = resolve_config(args, args.generator)
    ds = make_dataset(cfg)
    rng = np.random.default_rng(cfg["seed"])
    basis, dist, rep = make_generator(cfg, ds, rng)
    disc = make_discriminator(cfg, ds, rng)
    tcfg = training_config(cfg)
    out = _out_dir(args)
    basis, dist, hist = train(ds, basis, dist, rep, disc, tcfg)
    save_basis(out / "basis.json", basis, dist)
    _json_dump(out / "distribution.json", dist.to_dict())
    hist.to_csv(out / "history.csv")
    write_config(out / "config.txt", cfg)
    files = ["basis.json", "distribution.json", "history.csv", "config.txt"]
    extra = {"training": config_dict(tcfg)}
    if cfg["analysis.truth"]:
        report = compare_bases(basis, truth_basis(cfg["analysis.truth"]))
        _json_dump(out / "report.json", report.to_dict())
        files.append("report.json")
        print(f"subspace score {report.subspace_score:.6f}  mae {report.mae:.6f}")
    write_manifest(out, "discover", cfg, files, extra)
    print(f"final d_loss {hist.d_loss[-1]:.6f}" if len(hist) else "no epochs run")
    return 0


def cmd_analyze(args):
    cfg = resolve_config(args)
    path = args.basis or cfg["analysis.basis"]
    if not path:
        raise ConfigError("analyze needs --basis or analysis.basis")
    if not os.path.exists(path):
        raise ConfigError(f"basis file {path} not found")
    if args.truth:
        cfg["analysis.truth"] = args.truth
    basis, _ = load_basis(path)
    mats = basis.matrices()
    channels = _channels(cfg["analysis.channels"])
    out = _out_dir(args)
    files = []
    summary = {}
    if cfg["analysis.metric"]:
        mcfg = MetricSolveConfig(a=cfg["metric.a"], lr=cfg["metric.lr"], steps=cfg["metric.steps"],
                                 norm=cfg["metric.norm"], seed=cfg["seed"])
        J = solve_metric(basis, mcfg, channels)
        with open(out / "metric.json", "w") as f:
            f.write(dumps_matrix(J))
        with open(out / "residuals.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["channel", "residual"])
            for i, L in enumerate(mats):
                w.writerow([i, f"{invariance_residual(L, J):.17g}"])
        files += ["metric.json", "residuals.csv"]
        summary["metric"] = J.tolist()
        print("J =\n" + np.array2string(J, precision=4, suppress_small=True))
    if cfg["analysis.truth"]:
        report = compare_bases(basis, truth_basis(cfg["analysis.truth"]))
        _json_dump(out / "report.json", report.to_dict())
        files.append("report.json")
        print(f"subspace score {report.subspace_score:.6f}  mae {report.mae:.6f}")
    write_manifest(out, "analyze", cfg, files, {"basis_file": str(path),
                                                "basis_sha256": _sha256(path)})
    return 0


def _predictor(cfg):
    kind = cfg["eval.predictor"]
    if kind == "linear":
        return fit_linear
    if kind == "mlp":
        return lambda x, y: fit_mlp(x, y, hidden=cfg["eval.mlp_hidden"],
                                    epochs=cfg["eval.mlp_epochs"], seed=cfg["seed"])
    raise ConfigError(f"unknown eval.predictor {kind!r}; use mlp or linear")


def cmd_augment_eval(args):
    """2-body predictor with and without augmentation, angular train/test split."""
    cfg = resolve_config(args)
    path = args.basis or cfg["eval.basis"]
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"basis file {path} not found")
        basis, dist = load_basis(path)
        dist = dist or GaussianCoefficients.make(basis.channels)
    else:
        basis = LieBasis(algebras.ROT2[None], 8, block_size=2)
        dist = GaussianCoefficients.make(1, 1.0)
    ds = gen_two_body(cfg["eval.count"], seed=cfg["seed"])
    train_ds, test_ds = angular_split(ds, cfg["eval.split"])
    rep = RepresentationSpec(ds.t_in, ds.t_out)
    rng = np.random.default_rng(cfg["seed"])
    fit = _predictor(cfg)
    plain, aug = augmentation_benefit(train_ds, test_ds, basis, dist, rep, cfg["eval.copies"], rng,
                                      fit=fit)
    out = _out_dir(args)
    _json_dump(out / "eval.json", {"mse_plain": plain, "mse_augmented": aug,
                                   "predictor": cfg["eval.predictor"],
                                   "basis": path or "block_rotation:8:2"})
    write_manifest(out, "augment-eval", cfg, ["eval.json"])
    print(f"test mse plain {plain:.6g}  augmented {aug:.6g}")
    return 0


# -- entry point -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="liesym", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", default="out", help="output directory")

    g = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    g.add_argument("generator", help=", ".join(sorted(GENERATORS)))
    g.add_argument("--k", type=int, help="rotation order for discrete_rotation")
    g.add_argument("--count", type=int)
    common(g)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("discover", help="train a generator/discriminator pair")
    d.add_argument("generator", nargs="?", help="built-in dataset (or set task.csv)")
    d.add_argument("--k", type=int)
    d.add_argument("--count", type=int)
    d.add_argument("--epochs", type=int)
    common(d)
    d.set_defaults(func=cmd_discover)

    a = sub.add_parser("analyze", help="solve the invariant metric and compare with a truth basis")
    a.add_argument("--basis", help="learned basis JSON")
    a.add_argument("--truth", help="built-in basis name or basis JSON path")
    common(a)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("augment-eval", help="2-body prediction with and without augmentation")
    e.add_argument("--basis", help="basis JSON (default: exact planar rotation)")
    common(e)
    e.set_defaults(func=cmd_augment_eval)
    return p


def _thread_limit():
    value = os.environ.get("LIEGAN_THREADS")
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"LIEGAN_THREADS must be an integer, got {value!r}") from None
    return threadpool_limits(limits=max(1, n))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.generator not in GENERATORS:
        parser.error(f"unknown generator {args.generator!r}; choose from {sorted(GENERATORS)}")
    try:
        with _thread_limit():
            return args.func(args)
    except (ConfigError, ParseError, ShapeError, DomainError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingDivergence, SolverError, NumericError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
