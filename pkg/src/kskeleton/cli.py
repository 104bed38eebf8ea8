"""Command-line front end.

Verbs: ``wind``, ``index``, ``factor``, ``specmap``, ``verify``. Reports go
to stdout as JSON (``wind`` prints a bare integer); files go to ``--out``.
Exit codes: 0 success, 2 not invertible, 3 resolution failure, 4 input
error, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError, KSkeletonError, NotPartialIsometry
from .factorize import (
    RESIDUAL_TOL,
    alternative_factor,
    dilation_skeleton,
    halmos_dilation,
    skeleton_factor,
    verify_factorization,
)
from .index import DEFAULT_SCHEDULE, index_report, numeric_index
from .operators import Block, HardyProjection, TruncationWindow
from .serialize import (
    dumps,
    factor_dump,
    load_factor_dump,
    load_operator,
    load_symbol,
    write_json,
)
from .specmap import GridSpec, auto_grid, winding_map
from .symbol import MARGIN_TOL, winding_number

__all__ = ["RunConfig", "main", "build_parser"]

log = logging.getLogger("kskeleton")
log.addHandler(logging.NullHandler())

EXIT_OK = 0
EXIT_VERIFY = 5


@dataclass
class RunConfig:
    """Tolerances and windows for one run.

    ``factor_window`` and ``factor_pad`` set the truncation window of
    factorizations; ``window_schedule`` drives the numeric index.
    """

    margin_tol: float = MARGIN_TOL
    residual_tol: float = RESIDUAL_TOL
    window_schedule: tuple = DEFAULT_SCHEDULE
    grid: tuple | None = None
    output_dir: str | None = None
    factor_window: int = 128
    factor_pad: int = 32
    p_cut: int = 0

    def __post_init__(self):
        self.window_schedule = tuple(int(n) for n in self.window_schedule)
        s = self.window_schedule
        if len(s) < 3 or any(n <= 0 for n in s) or any(b <= a for a, b in zip(s, s[1:])):
            raise InputError(f"window schedule must be 3 or more strictly increasing positive sizes, got {list(s)}")
        for name in ("margin_tol", "residual_tol"):
            if not float(getattr(self, name)) > 0:
                raise InputError(f"{name} must be positive")
        if self.factor_window <= 0 or self.factor_pad < 0:
            raise InputError("factor window must be positive and pad non-negative")
        if self.grid is not None:
            g = tuple(self.grid)
            if len(g) != 5:
                raise InputError("grid needs remin,remax,immin,immax,res")
            remin, remax, immin, immax, res = g
            if not (remin < remax and immin < immax) or int(res) != res or res < 3:
                raise InputError(f"invalid grid {list(g)}")
            self.grid = (float(remin), float(remax), float(immin), float(immax), int(res))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InputError(f"{path}: {exc}") from exc

    @property
    def projection(self) -> HardyProjection:
        return HardyProjection(self.p_cut)

    @property
    def window(self) -> TruncationWindow:
        return TruncationWindow(self.factor_window, self.factor_pad)

    def grid_spec(self, f) -> GridSpec:
        if self.grid is None:
            return auto_grid(f)
        remin, remax, immin, immax, res = self.grid
        return GridSpec(remin, remax, immin, immax, res, res)

    def out_path(self) -> Path:
        path = Path(self.output_dir or ".")
        path.mkdir(parents=True, exist_ok=True)
        return path


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not invertibility failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(InputError.exit_code, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _grid(text: str) -> tuple:
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected remin,remax,immin,immax,res, got {text!r}")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("grid needs exactly five values")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--p-cut", type=int, help="Hardy projection onto indices >= cut")
    common.add_argument("--window", type=_ints, help="index window schedule, e.g. 64,128,256")
    common.add_argument("--out", help="output directory")

    parser = _Parser(prog="kskeleton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("wind", parents=[common], help="winding number of a symbol")
    p.add_argument("symbol")
    p = sub.add_parser("index", parents=[common], help="index report of an operator")
    p.add_argument("operator")
    p = sub.add_parser("factor", parents=[common], help="factorize an operator")
    p.add_argument("operator")
    p.add_argument("--form", choices=("skeleton", "alternative", "dilation"), default="skeleton")
    p = sub.add_parser("specmap", parents=[common], help="component map of a symbol")
    p.add_argument("symbol")
    p.add_argument("--grid", type=_grid, help="remin,remax,immin,immax,res")
    p = sub.add_parser("verify", parents=[common], help="check a factor dump against an operator")
    p.add_argument("operator")
    p.add_argument("dump")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    updates = {}
    if args.p_cut is not None:
        updates["p_cut"] = args.p_cut
    if args.window is not None:
        updates["window_schedule"] = args.window
    if args.out is not None:
        updates["output_dir"] = args.out
    if getattr(args, "grid", None) is not None:
        updates["grid"] = args.grid
    if updates:
        base = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
        base.update(updates)
        cfg = RunConfig(**base)
    return cfg


def _emit(report: dict, cfg: RunConfig, name: str | None = None) -> None:
    sys.stdout.write(dumps(report))
    if name and cfg.output_dir:
        write_json(report, cfg.out_path() / name)


def cmd_wind(args, cfg: RunConfig) -> int:
    f = load_symbol(args.symbol)
    n = winding_number(f, margin_tol=cfg.margin_tol)
    log.info("winding %d", n)
    print(n)
    return EXIT_OK


def cmd_index(args, cfg: RunConfig) -> int:
    x, _ = load_operator(args.operator)
    rep = index_report(x, cfg.projection, cfg.window_schedule, margin_tol=cfg.margin_tol)
    log.info("index %s after window %d", rep.value, rep.window_used)
    _emit(rep.to_json(), cfg, "index.json")
    return EXIT_OK


def _dilation_report(x, half_line: bool, cfg: RunConfig) -> tuple:
    op = Block(x, cfg.projection, "p", "p") if half_line else x
    try:
        d = dilation_skeleton(op)
        report = {
            "form": "dilation",
            "kind": "index_map",
            "index": d.index,
            "defect_ranks": list(d.defect_ranks),
            "unitarity_defect": d.unitarity_defect,
            "window": d.window.N,
        }
        blocks = d.blocks
    except NotPartialIsometry:
        log.info("not a partial isometry; building the Halmos dilation")
        d = halmos_dilation(op)
        r_q, r_p = d.defect_ranks
        report = {
            "form": "dilation",
            "kind": "halmos",
            "index": r_p - r_q,
            "defect_ranks": [r_q, r_p],
            "unitarity_defect": d.unitarity_defect,
            "two_scale_gap": d.two_scale_gap,
            "window": d.window.N,
        }
        blocks = d.matrix
    dump = {"form": "dilation", "re": blocks.real.tolist(), "im": blocks.imag.tolist()}
    return report, dump


def cmd_factor(args, cfg: RunConfig) -> int:
    x, half_line = load_operator(args.operator)
    p = cfg.projection
    if args.form == "dilation":
        report, dump = _dilation_report(x, half_line, cfg)
    else:
        if half_line:
            raise InputError("half_line operators only support --form dilation")
        kw = dict(schedule=cfg.window_schedule, margin_tol=cfg.margin_tol, residual_tol=cfg.residual_tol)
        if args.form == "alternative":
            alt = alternative_factor(x, p, cfg.window, **kw)
            fact = alt.base
        else:
            fact = skeleton_factor(x, p, cfg.window, **kw)
        check = verify_factorization(fact, x, residual_tol=cfg.residual_tol)
        report = fact.report()
        report["stable_under_doubling"] = check.stable_under_doubling
        if args.form == "alternative":
            report.update(
                form="alternative",
                num_shifts=alt.num_shifts,
                shift_direction=alt.sign,
                zero_index=alt.zero_index,
                direct_sum_residual=alt.residual,
            )
        dump = factor_dump(fact)
    out = cfg.out_path()
    write_json(dump, out / "factor_dump.json")
    _emit(report, cfg, "factor_report.json")
    log.info("factor form=%s written to %s", args.form, out)
    return EXIT_OK


def cmd_specmap(args, cfg: RunConfig) -> int:
    f = load_symbol(args.symbol)
    grid = cfg.grid_spec(f)
    cmap = winding_map(f, grid, margin_tol=cfg.margin_tol)
    out = cfg.out_path()
    cmap.write_csv(out / "grid.csv")
    summary = cmap.summary()
    write_json(summary, out / "components.json")
    write_json({"components": cmap.cyclic_metadata()}, out / "cyclic.json")
    sys.stdout.write(dumps(summary))
    log.info("specmap: %d components", len(cmap.components))
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    x, _ = load_operator(args.operator)
    fact = load_factor_dump(args.dump)
    rep = verify_factorization(fact, x, residual_tol=cfg.residual_tol)
    if fact.p.cut != cfg.p_cut:
        log.info("using the dump's cut %d", fact.p.cut)
    if x.is_laurent:
        independent = -winding_number(x.symbol, margin_tol=cfg.margin_tol)
    else:
        independent = numeric_index(x, fact.p, cfg.window_schedule)[0]
    report = rep.to_json()
    report["n"] = fact.n
    report["independent_index"] = independent
    report["passed"] = bool(rep.passed and independent == fact.n)
    _emit(report, cfg, "verify.json")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {
    "wind": cmd_wind,
    "index": cmd_index,
    "factor": cmd_factor,
    "specmap": cmd_specmap,
    "verify": cmd_verify,
}


def _setup_log(cfg: RunConfig) -> logging.Handler | None:
    if not cfg.output_dir:
        return None
    handler = logging.FileHandler(cfg.out_path() / "run.log")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    return handler


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = None
    try:
        cfg = _config(args)
        handler = _setup_log(cfg)
        log.info("command %s %s", args.verb, vars(args))
        return COMMANDS[args.verb](args, cfg)
    except KSkeletonError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        print(f"kskeleton: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    finally:
        if handler is not None:
            log.removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
