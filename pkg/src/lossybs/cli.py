"""Command-line front end.

Exit status: 0 success, 1 usage or configuration error, 2 physically
rejected input (non-passive matrix, empty alpha window), 3 oracle mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as textio
from .config import ConfigError, RunConfig, load_config
from .core_matrix import alpha_window, check_passivity
from .counting import hom_scan, number_moments, outcome_probabilities, parameter_map
from .fock_oracle import equivalence_sweep
from .spectral import CoverageError, coherence_time, normalize, overlap_integral

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_ORACLE = 3
ORACLE_TOL = 1e-10

HOM_HEADER = ("delta_t", "delta_t_over_tauc", "overlap_re", "overlap_im", "p11")
MAP_HEADER = ("t2", "r2", "value", "forbidden")


class Rejected(Exception):
    """Input parses but describes an unphysical device."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    parser.add_argument("--config", default=S, help="JSON run configuration")
    parser.add_argument("--out", default=S, help="output file (default: stdout)")
    parser.add_argument("--format", default=S, choices=("csv", "json"))
    parser.add_argument("--seed", default=S, type=int)
    parser.add_argument("--resolution", default=S, type=int)
    parser.add_argument("--tol", default=S, type=float)
    parser.add_argument("--workers", default=S, type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lossybs", description=__doc__.splitlines()[0])
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    _global_flags(common)
    sub.add_parser("validate", parents=[common], help="passivity report for the configured matrix")
    sub.add_parser("alpha-range", parents=[common], help="allowed alpha window for the configured amplitudes")
    sub.add_parser("probabilities", parents=[common], help="six outcome probabilities and number moments")
    sub.add_parser("hom-scan", parents=[common], help="coincidence probability against delay")
    p_map = sub.add_parser("map", parents=[common], help="symmetric-device maps over (t^2, r^2)")
    p_map.add_argument("kind", nargs="?", choices=("tunability", "max_coincidence", "programmability"))
    p_oracle = sub.add_parser("oracle-check", parents=[common], help="closed form against the Fock oracle")
    p_oracle.add_argument("--samples", type=int, default=None)
    return parser


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _need(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"missing field `{name}` required by this command")


# ---------------------------------------------------------------------------
# commands; each returns an exit status and writes its own output
# ---------------------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    _need(cfg, "matrix")
    report = check_passivity(cfg.matrix, cfg.tol)
    doc = {"matrix": cfg.matrix.to_dict(), "alpha": cfg.matrix.alpha, **report.to_dict()}
    _emit(textio.dumps(doc), cfg.output.path)
    return EXIT_OK if report.passive else EXIT_REJECTED


def cmd_alpha_range(cfg: RunConfig) -> int:
    _need(cfg, "matrix")
    try:
        window = alpha_window(cfg.matrix, cfg.tol)
    except ValueError as exc:
        raise Rejected(str(exc)) from exc
    _emit(textio.dumps({"matrix": cfg.matrix.to_dict(), **window.to_dict()}), cfg.output.path)
    return EXIT_REJECTED if window.empty else EXIT_OK


def _resolve_overlap(cfg: RunConfig) -> complex:
    if cfg.overlap is not None:
        return cfg.overlap
    if cfg.biphoton is None or cfg.grid is None or cfg.delta_t is None:
        raise ConfigError("missing field `overlap` (or `biphoton`, `grid` and `delta_t` to compute it)")
    psi, _ = normalize(cfg.biphoton, cfg.grid)
    return overlap_integral(psi, cfg.delta_t, cfg.grid, workers=cfg.workers).value


def cmd_probabilities(cfg: RunConfig) -> int:
    _need(cfg, "matrix")
    report = check_passivity(cfg.matrix, cfg.tol)
    if not report.passive:
        raise Rejected(f"matrix is not passive (eq6_margin {report.eq6_margin:.6g}, "
                       f"sigma_max {report.sigma_max:.15g})")
    I = _resolve_overlap(cfg)
    doc = {
        "matrix": cfg.matrix.to_dict(),
        "overlap": textio.complex_record(I),
        "distribution": outcome_probabilities(cfg.matrix, I, cfg.tol).to_dict(),
        "moments": number_moments(cfg.matrix, I, cfg.tol).to_dict(),
    }
    _emit(textio.dumps(doc), cfg.output.path)
    return EXIT_OK


def _alpha_path(path: str, index: int) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.alpha-{index}{p.suffix}"))


def cmd_hom_scan(cfg: RunConfig) -> int:
    _need(cfg, "matrix", "biphoton", "grid", "scan")
    fmt = cfg.output.format or "csv"
    psi, _ = normalize(cfg.biphoton, cfg.grid)
    delays = cfg.scan.delta_t
    if cfg.scan.delta_t_unit == "tauc":
        tau_c = coherence_time(psi, cfg.grid)
        delays = tuple(d * tau_c for d in delays)

    if cfg.scan.alpha is None:
        jobs = [(cfg.matrix, cfg.output.path)]
    else:
        if len(cfg.scan.alpha) > 1 and cfg.output.path is None:
            raise ConfigError("field `output.path` is required when `scan.alpha` lists several values")
        jobs = []
        for k, alpha in enumerate(cfg.scan.alpha):
            S = cfg.matrix.with_alpha(alpha)
            path = cfg.output.path if len(cfg.scan.alpha) == 1 else _alpha_path(cfg.output.path, k)
            jobs.append((S, path))

    for S, path in jobs:
        if not check_passivity(S, cfg.tol).passive:
            raise Rejected(f"matrix is not passive at alpha = {S.alpha!r}")
    for S, path in jobs:
        curve = hom_scan(S, psi, cfg.grid, delays, tol=cfg.tol, workers=cfg.workers)
        rows = [(d, d / curve.tau_c, z.real, z.imag, p)
                for d, z, p in zip(curve.delta_t.tolist(), curve.overlap.tolist(), curve.p11.tolist())]
        if fmt == "csv":
            text = textio.csv_text(HOM_HEADER, rows)
        else:
            text = textio.dumps({
                "matrix": S.to_dict(),
                "alpha": S.alpha,
                "amplitude": curve.amplitude,
                "tau_c": curve.tau_c,
                "rows": [dict(zip(HOM_HEADER, row)) for row in rows],
            })
        _emit(text, path)
    return EXIT_OK


def cmd_map(cfg: RunConfig) -> int:
    kind = cfg.map.kind
    if kind is None:
        raise ConfigError("missing field `map.kind` (or give the kind on the command line)")
    result = parameter_map(kind, cfg.map.resolution, cfg.workers)
    if (cfg.output.format or "csv") == "csv":
        text = textio.csv_text(MAP_HEADER, result.rows())
    else:
        text = textio.dumps({
            "kind": kind,
            "resolution": result.resolution,
            "rows": [dict(zip(MAP_HEADER, row)) for row in result.rows()],
        })
    _emit(text, cfg.output.path)
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig, closed_form=None) -> int:
    """Randomized closed-form versus oracle sweep.

    ``closed_form`` swaps in another probability function; tests use it to
    confirm that a corrupted formula is caught. A configured ``matrix``
    replaces the random draw with that single matrix.
    """
    kwargs = {} if closed_form is None else {"closed_form": closed_form}
    if cfg.matrix is not None:
        if not check_passivity(cfg.matrix, cfg.tol).passive:
            raise Rejected("matrix is not passive")
        kwargs["matrices"] = [cfg.matrix]
    result = equivalence_sweep(cfg.oracle.samples, cfg.oracle.seed, workers=cfg.workers,
                               tol=cfg.tol, **kwargs)
    doc = {**result.to_dict(), "threshold": ORACLE_TOL, "passed": result.max_deviation <= ORACLE_TOL}
    _emit(textio.dumps(doc), cfg.output.path)
    if result.max_deviation > ORACLE_TOL:
        worst = result.worst_matrix.to_dict() if result.worst_matrix else {}
        print(f"oracle mismatch: seed={result.seed} deviation={result.max_deviation:.3e} "
              f"I={result.worst_overlap} matrix={worst}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "alpha-range": cmd_alpha_range,
    "probabilities": cmd_probabilities,
    "hom-scan": cmd_hom_scan,
    "map": cmd_map,
    "oracle-check": cmd_oracle_check,
}


def run(argv=None, closed_form=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts = vars(args)
    try:
        cfg = load_config(opts["config"]) if "config" in opts else RunConfig()
        cfg = cfg.with_overrides(
            tol=opts.get("tol"), workers=opts.get("workers"), seed=opts.get("seed"),
            samples=opts.get("samples"), resolution=opts.get("resolution"),
            kind=opts.get("kind"), out=opts.get("out"), format=opts.get("format"),
        )
        if args.command == "oracle-check":
            return cmd_oracle_check(cfg, closed_form)
        return COMMANDS[args.command](cfg)
    except (ConfigError, CoverageError) as exc:
        print(f"lossybs {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Rejected as exc:
        print(f"lossybs {args.command}: rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except ValueError as exc:
        print(f"lossybs {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
