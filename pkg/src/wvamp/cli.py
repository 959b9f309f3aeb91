"""Command-line front end for the scaling experiments.

Subcommands: scan-ps, scan-aw, fisher, circuit-check. Flags mirror a flat
key=value config file (--config); explicit flags override file values. Exit
codes: 0 all in-regime rows pass, 2 any tolerance failure, 1 usage or config
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, IoError, RegimeError, WvampError
from .reports import ScanConfig, emit, report_to_csv, run_scan

_EXPERIMENT_BY_COMMAND = {
    "scan-ps": "ps_scaling",
    "scan-aw": "aw_scaling",
    "fisher": "fisher_saturation",
    "circuit-check": "circuit_check",
}

# fisher defaults to |A_w| = 100 so phi*|A_w| stays inside the enforced
# linear-response window at the default phi = 1e-3.
_DEFAULTS = {
    "n_min": 1, "n_max": 6, "epsilon": 0.05, "phi": 1e-3, "aw": 200.0,
    "observable": "sigma_z", "seed": 0, "format": "csv", "out": None,
}
_FISHER_DEFAULTS = {**_DEFAULTS, "aw": 100.0}

_CASTS = {
    "n_min": int, "n_max": int, "seed": int,
    "epsilon": float, "phi": float, "aw": float,
    "observable": str, "format": str, "out": str,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--n-min", dest="n_min", type=int)
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--phi", type=float)
    parser.add_argument("--aw", type=float, help="target weak value magnitude")
    parser.add_argument("--observable", choices=("sigma_z", "projector"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--format", dest="format", choices=("csv", "json"))
    parser.add_argument("--out", help="report path; a PNG figure lands beside it")
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("--no-plot", action="store_true",
                        help="suppress the figure next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wvamp",
                     description="entanglement-assisted weak value amplification scans")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "scan-ps": "postselection-probability scaling vs n",
        "scan-aw": "weak-value scaling at fixed postselection probability",
        "fisher": "postselected Fisher information saturation",
        "circuit-check": "circuit / analytic / scheduler equivalence",
    }
    for name, help_text in helps.items():
        _add_common_flags(sub.add_parser(name, help=help_text))
    return parser


def read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CASTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CASTS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> ScanConfig:
    experiment = _EXPERIMENT_BY_COMMAND[args.command]
    values = dict(_FISHER_DEFAULTS if experiment == "fisher_saturation" else _DEFAULTS)
    if args.config:
        values.update(read_config_file(args.config))
    for key in _CASTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return ScanConfig(
        experiment=experiment,
        n_min=values["n_min"],
        n_max=values["n_max"],
        epsilon=values["epsilon"],
        phi_angle=values["phi"],
        aw_magnitude=values["aw"],
        observable=values["observable"],
        seed=values["seed"],
        out_path=values["out"],
        fmt=values["format"],
    ).validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = resolve_config(args)
        report = run_scan(config)
    except (ConfigError, RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except WvampError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if config.out_path:
        try:
            emit(report, config.fmt, config.out_path)
        except IoError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {config.out_path}")
        if not args.no_plot:
            from .figures import render_report  # deferred: pulls in matplotlib

            png = str(Path(config.out_path).with_suffix(".png"))
            render_report(report, png)
            print(f"wrote {png}")
    else:
        sys.stdout.write(report_to_csv(report))

    flagged = len(report.flagged_rows())
    scored = report.in_regime_rows()
    npass = sum(1 for r in scored if r["passed"])
    print(f"{config.experiment}: {npass}/{len(scored)} rows passed"
          + (f", {flagged} flagged out of regime" if flagged else ""))
    return 0 if report.all_passed() else 2


if __name__ == "__main__":
    raise SystemExit(main())
