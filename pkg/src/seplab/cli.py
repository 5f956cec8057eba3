"""Command line front end: ``seplab <subcommand> [flags]``.

Each subcommand has a flat parameter table.  Values come from the table
defaults, then an optional ``--config`` JSON object, then explicit flags.
Exit codes: 0 ok, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import SeplabError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


def _floats(n=None):
    def conv(value, name):
        if isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = [s for s in str(value).split(",") if s.strip() != ""]
        try:
            out = [float(x) for x in items]
        except (TypeError, ValueError):
            raise ConfigError(f"--{name}: expected comma-separated numbers, got {value!r}")
        if n is not None and len(out) != n:
            raise ConfigError(f"--{name}: expected {n} numbers, got {len(out)}")
        if not all(math.isfinite(x) for x in out):
            raise ConfigError(f"--{name}: values must be finite")
        return out

    return conv


def _scalar(kind):
    def conv(value, name):
        try:
            if kind is int:
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError
                return int(value)
            out = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"--{name}: expected {kind.__name__}, got {value!r}")
        if not math.isfinite(out):
            raise ConfigError(f"--{name}: value must be finite")
        return out

    return conv


def _choice(*options):
    def conv(value, name):
        if value not in options:
            raise ConfigError(f"--{name}: expected one of {', '.join(options)}, got {value!r}")
        return value

    return conv


F, I = _scalar(float), _scalar(int)

_INTEGRATION = {
    "omega": (F, 1.0),
    "phi0": (F, math.pi),
    "ic": (_floats(3), [0.0, 0.0, 1.0]),
    "t-max": (F, 100.0),
    "rtol": (F, 1e-10),
    "atol": (F, 1e-10),
    "escape-bound": (F, 2.0),
}

SCHEMAS = {
    "simulate": {
        "eps": (F, 0.05),
        **_INTEGRATION,
        "saddle-radius": (F, 0.05),
        "dt": (F, 0.01),
    },
    "scan": {
        "eps-min": (F, 0.001),
        "eps-max": (F, 0.1),
        "n": (I, 991),
        "eps-grid": (_floats(), None),
        **_INTEGRATION,
    },
    "melnikov": {
        "omega": (F, 1.0),
        "phi0": (F, 0.0),
    },
    "map": {
        "K": (I, 4),
        "B": (_floats(), None),
        "A": (_floats(), None),
        "Phi": (F, 0.0),
        "eps": (F, 0.01),
        "omega": (F, 1.0),
        "mode": (_choice("full", "leading"), "leading"),
        "normalization": (_choice("oracle", "paper"), "oracle"),
        "max-steps": (I, None),
    },
    "cantor": {
        "N": (I, 3),
        "delta": (_floats(2), None),
        "omega": (F, 1.0),
        "sigma1": (F, -0.1),
        "psi": (F, 0.0),
        "resolution": (F, 1e-3),
        "model": (_choice("leading", "idealized"), "leading"),
    },
    "compare": {
        "eps": (F, 0.002),
        **_INTEGRATION,
        "K": (I, 1),
        "max-steps": (I, 200),
        "mode": (_choice("full", "leading"), "leading"),
        "normalization": (_choice("oracle", "paper"), "oracle"),
    },
}

HELP = {
    "simulate": "integrate one trajectory; writes trajectory.csv and events.csv",
    "scan": "lifetime versus epsilon; writes lifetime.csv",
    "melnikov": "first-order jumps, closed form against quadrature; writes jump.json",
    "map": "iterate the separatrix map; writes trace.csv",
    "cantor": "admissible delta sets by generation; writes cantor.json and cantor_intervals.csv",
    "compare": "map lobe count against the ODE; writes compare.json",
}


def _key(name: str) -> str:
    return name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seplab", description="Near-separatrix dynamics of the forced Duffing oscillator.")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, schema in SCHEMAS.items():
        sp = sub.add_parser(cmd, help=HELP[cmd], argument_default=argparse.SUPPRESS)
        for name, (_, default) in schema.items():
            sp.add_argument(f"--{name}", dest=name, metavar=name.upper().replace("-", "_"),
                            help=f"default: {default}")
        sp.add_argument("--config", dest="config", help="flat JSON object with any of the flags above")
        sp.add_argument("--out-dir", dest="out_dir", default=".", help="directory for output files")
        if cmd == "scan":
            sp.add_argument("--workers", dest="workers", help="process count (default $SEPLAB_WORKERS or 1)")
    return p


_NUMERIC_START = re.compile(r"^-[0-9.]")


def normalize_argv(argv):
    """Glue a negative-number value onto its flag so argparse does not read it as an option."""
    out = []
    for tok in argv:
        if out and _NUMERIC_START.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def resolve(cmd: str, ns: argparse.Namespace) -> dict:
    schema = SCHEMAS[cmd]
    values = {name: default for name, (_, default) in schema.items()}
    if getattr(ns, "config", None):
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: cannot read {ns.config}: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("--config: expected a flat JSON object")
        for k, v in raw.items():
            name = _key(k)
            if name not in schema:
                raise ConfigError(f"--config: unknown key {k!r} for {cmd}")
            values[name] = v
    for name in schema:
        if hasattr(ns, name):
            values[name] = getattr(ns, name)
    resolved = {}
    for name, (conv, _) in schema.items():
        v = values[name]
        resolved[name] = None if v is None else conv(v, name)
    return resolved


def _params(cfg, eps_key="eps"):
    from .core import SystemParams

    try:
        return SystemParams(cfg[eps_key], cfg["omega"], cfg["phi0"])
    except ValueError as exc:
        raise ConfigError(f"--{eps_key}/--omega: {exc}")


def _opts(cfg):
    from .integrator import IntegratorOptions

    try:
        return IntegratorOptions(cfg["rtol"], cfg["atol"], math.inf, cfg["t-max"])
    except ValueError as exc:
        raise ConfigError(f"--rtol/--atol/--t-max: {exc}")


def _ic(cfg):
    from .core import PhaseState

    t, u, v = cfg["ic"]
    return PhaseState(t, u, v)


def cmd_simulate(cfg, out: Path):
    from .integrator import detect_events, integrate

    if cfg["dt"] <= 0:
        raise ConfigError("--dt: must be positive")
    ic = _ic(cfg)
    if abs(ic.u) >= cfg["escape-bound"] or cfg["escape-bound"] <= 1:
        raise ConfigError("--ic/--escape-bound: need 1 < escape bound and |u0| below it")
    traj = integrate(ic, _params(cfg), _opts(cfg), cfg["escape-bound"])
    events = detect_events(traj, cfg["saddle-radius"], cfg["escape-bound"])
    t, u, v, E = traj.sample(cfg["dt"])
    p1 = io.write_csv(out / "trajectory.csv", ["t", "u", "v", "E"], zip(t.tolist(), u.tolist(), v.tolist(), E.tolist()), "simulate", cfg)
    rows = [(e.kind.value, e.t, e.state.u, e.state.v) for e in events]
    p2 = io.write_csv(out / "events.csv", ["kind", "t", "u", "v"], rows, "simulate", cfg)
    print(f"{len(t)} samples, {len(events)} events, escaped={traj.escaped}")
    return [p1, p2]


def cmd_scan(cfg, out: Path, workers: int):
    from .core import SystemParams
    from .integrator import scan_lifetime

    if cfg["eps-grid"] is not None:
        grid = cfg["eps-grid"]
    else:
        if cfg["n"] < 1:
            raise ConfigError("--n: must be at least 1")
        grid = np.linspace(cfg["eps-min"], cfg["eps-max"], cfg["n"]).tolist()
    if any(not 0 < e < 1 for e in grid) or len(set(grid)) != len(grid):
        raise ConfigError("--eps-grid/--eps-min/--eps-max: values must be distinct and in (0, 1)")
    template = _params({**cfg, "eps": grid[0]})
    samples = scan_lifetime(grid, template, _ic(cfg), _opts(cfg), cfg["escape-bound"], workers)
    rows = [(s.epsilon, s.lifetime, s.n_lobes) for s in samples]
    p = io.write_csv(out / "lifetime.csv", ["epsilon", "lifetime", "n_lobes"], rows, "scan", cfg)
    failed = sum(1 for s in samples if s.error)
    print(f"{len(samples)} samples, {failed} failed")
    return [p]


def cmd_melnikov(cfg, out: Path):
    from .melnikov import delta_a1, jump_report

    if cfg["omega"] <= 0:
        raise ConfigError("--omega: must be positive")
    res = jump_report(cfg["omega"], cfg["phi0"])
    payload = {**res.to_dict(), "delta_a1": delta_a1(cfg["omega"], cfg["phi0"])}
    p = io.write_json(out / "jump.json", payload, "melnikov", cfg)
    print(f"closed form {res.closed_form:.12g}, quadrature {res.quadrature:.12g}, rel. discrepancy {res.rel_discrepancy:.3g}")
    return [p]


def cmd_map(cfg, out: Path):
    from .core import SystemParams
    from .separatrix_map import Mode, Normalization, init_map, run_map

    K = cfg["K"]
    if K < 1:
        raise ConfigError("--K: must be at least 1")
    B = cfg["B"] if cfg["B"] is not None else [0.0] * K
    A = cfg["A"] if cfg["A"] is not None else [0.0] * K
    if len(B) != K:
        raise ConfigError(f"--B: expected {K} values, got {len(B)}")
    if len(A) != K:
        raise ConfigError(f"--A: expected {K} values, got {len(A)}")
    cfg = {**cfg, "A": A, "B": B}
    if not 0 < cfg["eps"] < 1:
        raise ConfigError("--eps: must lie in (0, 1)")
    if cfg["omega"] <= 0:
        raise ConfigError("--omega: must be positive")
    mode = Mode(cfg["mode"])
    steps = cfg["max-steps"]
    if steps is None:
        steps = max(K - 1, 1) if mode is Mode.FULL else 50
    cfg = {**cfg, "max-steps": steps}
    state = init_map(B, A, cfg["Phi"], SystemParams(cfg["eps"], cfg["omega"]))
    trace = run_map(state, steps, mode, Normalization(cfg["normalization"]))
    p = io.write_csv(out / "trace.csv", ["n", "sigma1", "psi", "delta_sigma1", "outcome"], trace.rows(), "map", cfg)
    print(f"{trace.n_continued} steps continued; last: {trace.records[-1].outcome if trace.records else 'none'}")
    return [p]


def cmd_cantor(cfg, out: Path):
    from .cantor import IdealizedModel, admissible_sets, default_delta0

    lo, hi = cfg["delta"] if cfg["delta"] is not None else (default_delta0(cfg["omega"]), 15.0)
    if not 0 < lo < hi:
        raise ConfigError("--delta: need 0 < lo < hi")
    if cfg["N"] < 0:
        raise ConfigError("--N: must be non-negative")
    if cfg["resolution"] <= 0:
        raise ConfigError("--resolution: must be positive")
    if cfg["omega"] <= 0:
        raise ConfigError("--omega: must be positive")
    model = IdealizedModel(cfg["omega"]) if cfg["model"] == "idealized" else None
    sets = admissible_sets(cfg["N"], (lo, hi), cfg["omega"], (cfg["sigma1"], cfg["psi"]), cfg["resolution"], model)
    last = sets[-1]
    payload = {**last.to_dict(), "generations": [s.to_dict() for s in sets]}
    p1 = io.write_json(out / "cantor.json", payload, "cantor", cfg)
    rows = [(s.generation, a, b) for s in sets for a, b in s.intervals]
    p2 = io.write_csv(out / "cantor_intervals.csv", ["generation", "lo", "hi"], rows, "cantor", cfg)
    print("measures: " + ", ".join(f"{s.measure():.6g}" for s in sets))
    return [p1, p2]


def cmd_compare(cfg, out: Path):
    from .separatrix_map import Mode, Normalization, predicted_vs_observed

    if cfg["K"] < 1:
        raise ConfigError("--K: must be at least 1")
    ic = _ic(cfg)
    rep = predicted_vs_observed(
        ic, _params(cfg), cfg["K"], cfg["max-steps"], _opts(cfg),
        Mode(cfg["mode"]), Normalization(cfg["normalization"]), cfg["escape-bound"],
    )
    p = io.write_json(out / "compare.json", rep.to_dict(), "compare", cfg)
    print(f"ODE lobes {rep.ode_lobes}, map lobes {rep.map_lobes}, within one: {rep.agree_within_one}")
    return [p]


def _workers(ns) -> int:
    raw = getattr(ns, "workers", None) or os.environ.get("SEPLAB_WORKERS") or "1"
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"--workers: expected an integer, got {raw!r}")
    if w < 1:
        raise ConfigError("--workers: must be at least 1")
    return w


def main(argv=None) -> int:
    argv = normalize_argv(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    cmd = ns.command
    out = Path(ns.out_dir)
    try:
        cfg = resolve(cmd, ns)
        if cmd == "scan":
            cmd_scan(cfg, out, _workers(ns))
        else:
            globals()[f"cmd_{cmd}"](cfg, out)
    except ConfigError as exc:
        print(f"seplab {cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeplabError as exc:
        print(f"seplab {cmd}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"seplab {cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
