"""Command-line front end.

Every command accepts ``--config FILE`` (a flat JSON object) and per-field
flags that override it. The effective configuration is echoed as JSON next
to the results so any run can be repeated by feeding the echo back through
``--config``.

Exit codes: 0 success, 2 bad configuration, 3 a module precondition failed,
1 an invariant was violated (a bug).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from softcomplex import complex as cxmod
from softcomplex.census import census
from softcomplex.experiments import (
    ConfigError,
    InsufficientEvents,
    InvariantViolation,
    RegimeSpec,
    TrialConfig,
    build_trial_complex,
    estimate,
    mu_integral,
    sample_cloud,
    sweep,
    sweep_csv,
)
from softcomplex.homology import betti, full_betti
from softcomplex.morse import build_gradient_field, critical_counts, verify_gradient

TRIAL_KEYS = ("n", "d", "domain", "r", "rho", "model", "k_max", "process", "seed")
REGIME_KEYS = ("regime", "c", "eps", "lam", "gamma")

COMMAND_KEYS = {
    "sample": TRIAL_KEYS + ("trial",),
    "betti": TRIAL_KEYS + ("trial", "load", "thin"),
    "census": TRIAL_KEYS + ("trial", "load", "thin", "k", "m"),
    "morse": TRIAL_KEYS + ("trial", "load", "thin"),
    "dump": TRIAL_KEYS + ("trial", "load", "thin"),
    "estimate": TRIAL_KEYS + ("statistic", "trials"),
    "sweep": tuple(k for k in TRIAL_KEYS if k != "r") + REGIME_KEYS + ("k", "trials"),
    "mu": ("pattern", "d", "samples", "seed"),
}

DEFAULTS = {
    "trial": 0,
    "load": None,
    "thin": True,
    "k": 1,
    "m": "rips",
    "statistic": "beta:1",
    "trials": 200,
    "pattern": "K2",
    "samples": 1_000_000,
    "regime": "subcritical",
    "c": 1.0,
    "eps": 0.1,
    "lam": 1.0,
    "gamma": 0.5,
}


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _number(text: str):
    x = float(text)
    return int(x) if x.is_integer() else x


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softcomplex", description="Soft random simplicial complexes.")
    sub = parser.add_subparsers(dest="command", required=True)
    flag_types = {
        "n": _number,
        "d": int,
        "domain": str,
        "r": float,
        "rho": _float_list,
        "model": str,
        "k_max": int,
        "process": str,
        "seed": int,
        "trial": int,
        "load": str,
        "thin": _bool,
        "k": str,
        "m": str,
        "statistic": str,
        "trials": int,
        "pattern": str,
        "samples": lambda s: int(float(s)),
        "regime": str,
        "c": float,
        "eps": float,
        "lam": float,
        "gamma": float,
    }
    helps = {
        "sample": "sample a point cloud and write it as CSV",
        "betti": "Betti numbers of a sampled or loaded complex",
        "census": "component and pattern counts of a sampled or loaded complex",
        "morse": "critical face counts of the norm-ordered gradient field",
        "dump": "write a sampled complex in the text format",
        "estimate": "Monte Carlo estimate of one statistic",
        "sweep": "regime sweep over a list of n, written as CSV",
        "mu": "Monte Carlo value of a pattern constant",
    }
    for cmd, keys in COMMAND_KEYS.items():
        p = sub.add_parser(cmd, help=helps[cmd])
        p.add_argument("--config", help="JSON file with flat configuration keys")
        p.add_argument("--out", help="output path (default: standard output)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
        for key in keys:
            kind = _float_list if (cmd == "sweep" and key == "n") else flag_types[key]
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=kind, default=None)
    return parser


def _effective(cmd: str, args: argparse.Namespace) -> dict:
    keys = COMMAND_KEYS[cmd]
    conf: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded.pop("command", None)
        unknown = set(loaded) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        conf.update(loaded)
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            conf[key] = val
    for key in keys:
        if key not in conf and key in DEFAULTS:
            conf[key] = DEFAULTS[key]
    if cmd == "sweep" and "n" not in conf:
        raise ConfigError("sweep needs --n with a comma-separated list")
    return conf


def _trial_config(conf: dict, **extra) -> TrialConfig:
    fields_ = {k: conf[k] for k in TRIAL_KEYS if k in conf}
    fields_.update(extra)
    if "rho" not in fields_:
        # unthinned unless asked otherwise, whatever k_max is
        fields_["rho"] = [1.0] * int(fields_.get("k_max", TrialConfig.k_max))
    return TrialConfig.from_dict(fields_)


def _echo(conf: dict, cmd: str) -> dict:
    out = {"command": cmd}
    for k, v in conf.items():
        if isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _complex_for(conf: dict):
    """The complex a single-complex command inspects, plus the cloud if sampled."""
    if conf.get("load"):
        try:
            return cxmod.load(conf["load"]), None
        except OSError as exc:
            raise ConfigError(f"cannot read complex {conf['load']}: {exc}") from exc
    cfg = _trial_config(conf)
    conf.update(cfg.to_dict())
    return build_trial_complex(cfg, conf["trial"], thinned=conf["thin"])


def _report(conf: dict, cmd: str, summary: str, result: dict, out: str | None) -> None:
    doc = json.dumps({"config": _echo(conf, cmd), "result": result}, sort_keys=True)
    print(summary)
    if out is None:
        print(doc)
    else:
        _write(out, doc + "\n")


def _run(cmd: str, conf: dict, args: argparse.Namespace) -> None:
    out = args.out
    threads = max(1, int(args.threads))
    if cmd == "sample":
        cfg = _trial_config(conf)
        conf.update(cfg.to_dict())
        cloud = sample_cloud(cfg, conf["trial"])
        lines = [",".join(f"x{j}" for j in range(cfg.d))]
        lines += [",".join(format(float(v), ".17g") for v in row) for row in cloud.points]
        _write(out, "\n".join(lines) + "\n")
        sidecar = json.dumps(_echo(conf, cmd), sort_keys=True)
        if out is None:
            sys.stderr.write(sidecar + "\n")
        else:
            _write(out + ".json", sidecar + "\n")
        return
    if cmd in ("betti", "census", "morse", "dump"):
        cx, cloud = _complex_for(conf)
        if cmd == "betti":
            if conf.get("load"):
                b = list(full_betti(cx))[: max(cx.dimension, 0) + 1]
            else:
                b = list(betti(cx))
            _report(conf, cmd, "β=(" + ",".join(str(x) for x in b) + ")", {"betti": b}, out)
        elif cmd == "census":
            ks = [int(t) for t in str(conf["k"]).split(",")]
            m = conf["m"]
            rep = census(cx, ks, m_rule=m if m in ("rips", "cech") else int(m))
            _report(conf, cmd, rep.to_json(), rep.to_dict(), out)
        elif cmd == "morse":
            field_ = build_gradient_field(cx, cloud)
            crit = critical_counts(field_)
            ok = verify_gradient(field_, cx)
            if not ok:
                raise InvariantViolation("constructed gradient field failed verification")
            _report(conf, cmd, "C=(" + ",".join(str(x) for x in crit) + ")", {"critical": crit, "verified": ok}, out)
        else:
            _write(out, cxmod.dumps(cx))
            if out is not None:
                _write(out + ".json", json.dumps(_echo(conf, cmd), sort_keys=True) + "\n")
        return
    if cmd == "estimate":
        cfg = _trial_config(conf)
        conf.update(cfg.to_dict())
        res = estimate(conf["statistic"], cfg, conf["trials"], threads=threads)
        _report(conf, cmd, f"{res.statistic}: {res.mean:.6g} ± {res.ci_halfwidth:.3g}", res.to_dict(), out)
        return
    if cmd == "sweep":
        regime = RegimeSpec(**{k: conf[k] for k in REGIME_KEYS})
        n_values = [int(x) if float(x).is_integer() else float(x) for x in conf["n"]]
        conf["n"] = n_values
        k = int(conf["k"])
        conf["k"] = k
        if "k_max" not in conf:
            # b_k needs (k+1)-faces; one more dimension is the documented default
            conf["k_max"] = k + 2
        template = _trial_config(conf, n=n_values[0], r=1.0)
        template_dict = template.to_dict()
        for key in TRIAL_KEYS:
            if key not in ("n", "r"):
                conf[key] = template_dict[key]
        rows = sweep(regime, n_values, template, conf["trials"], k=k, threads=threads)
        text = sweep_csv(rows)
        sidecar = json.dumps(_echo(conf, cmd), sort_keys=True)
        _write(out, text)
        if out is None:
            sys.stderr.write(sidecar + "\n")
        else:
            _write(out + ".json", sidecar + "\n")
        return
    if cmd == "mu":
        d = int(conf.get("d", 2))
        seed = int(conf.get("seed", 0))
        conf.update({"d": d, "seed": seed})
        res = mu_integral(conf["pattern"], d, conf["samples"], seed)
        _report(conf, cmd, f"mu={res.mean:.6f} ± {res.se:.6f} (SE)", res.to_dict(), out)
        return
    raise ConfigError(f"unknown command {cmd!r}")  # pragma: no cover


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cmd = args.command
    try:
        conf = _effective(cmd, args)
        _run(cmd, conf, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except (ValueError, IndexError, InsufficientEvents) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
