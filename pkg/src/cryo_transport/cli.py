"""Command-line runner: ``cryo-transport {spectrum,simulate,classify,imaging}``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io as _io
import json
import math
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import io
from .config import COMMANDS, FORMATS, ExperimentConfig, dump_config_text, load_config_file
from .errors import (AntipodalPoints, ConvergenceFailure, DomainError, InvalidConfig,
                     NoSpectralGap, OrderExceeded)
from .pipeline import RUNNERS, SPECTRUM_COLUMNS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (NoSpectralGap, ConvergenceFailure, AntipodalPoints, DomainError, OrderExceeded)


# JSON with every float at 17 significant digits ---------------------------------

def to_json(obj, indent: int = 2) -> str:
    out = _io.StringIO()
    _emit(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.write("null")
    elif isinstance(obj, bool):
        out.write("true" if obj else "false")
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(io.fmt(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.write(_quote(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for k, (key, v) in enumerate(obj.items()):
            out.write(f"{pad}{_quote(str(key))}: ")
            _emit(v, out, indent, level + 1)
            out.write(",\n" if k < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.write("[]")
            return
        if all(isinstance(v, (int, float, str)) or v is None for v in obj):
            out.write("[")
            for k, v in enumerate(obj):
                _emit(v, out, indent, level + 1)
                if k < len(obj) - 1:
                    out.write(", ")
            out.write("]")
            return
        out.write("[\n")
        for k, v in enumerate(obj):
            out.write(pad)
            _emit(v, out, indent, level + 1)
            out.write(",\n" if k < len(obj) - 1 else "\n")
        out.write(end + "]")
    elif hasattr(obj, "item"):                  # numpy scalar
        _emit(obj.item(), out, indent, level)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def _quote(s: str) -> str:
    return json.dumps(s)


# argument parsing -------------------------------------------------------------

_PARAMS = {
    # flag: (dest, type, commands, help)
    "--n-frames": ("n_frames", int, ("simulate", "classify", "imaging"), "number of frames/images"),
    "--h": ("h", float, ("simulate", "classify", "imaging"), "cap height h = 1 - cos a"),
    "--n-max": ("n_max", int, ("spectrum",), "eigenvalues n = 1..n_max"),
    "--h-grid": ("h_grid", str, ("spectrum",), "start:stop:step or a comma list"),
    "--k": ("k", int, ("simulate",), "number of top eigenvalues"),
    "--outlier-frac": ("outlier_frac", float, ("classify",), "fraction of outlier edges"),
    "--threshold": ("threshold", str, ("classify", "imaging"), "neighbour cut (default 1 - h)"),
    "--normalization": ("normalization", str, ("classify", "imaging"), "degree or none"),
    "--gap-tol": ("gap_tol", float, ("classify", "imaging"), "relative eigengap required"),
    "--side": ("side", int, ("imaging",), "image side in pixels"),
    "--extent": ("extent", float, ("imaging",), "half-width of the image window"),
    "--n-angles": ("n_angles", int, ("imaging",), "alignment angles"),
    "--snr": ("snr", str, ("imaging",), "signal-to-noise ratio (default: clean)"),
    "--epsilon": ("epsilon", str, ("imaging",), "distance threshold (default: from h)"),
    "--stack-out": ("stack_out", str, ("imaging",), "write the image stack here"),
    "--graph-out": ("graph_out", str, ("imaging",), "write the graph CSV here"),
}
_SWITCHES = {
    "--no-rescale": ("rescale", False, ("classify", "imaging")),
    "--refine": ("refine", True, ("imaging",)),
    "--end-to-end": ("end_to_end", True, ("imaging",)),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="cap BLAS/LAPACK threads; 1 is bit-reproducible")
    parser = argparse.ArgumentParser(prog="cryo-transport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, parents=[common])
        for flag, (dest, typ, cmds, hlp) in _PARAMS.items():
            if cmd in cmds:
                p.add_argument(flag, dest=dest, type=typ, default=argparse.SUPPRESS, help=hlp)
        for flag, (dest, value, cmds) in _SWITCHES.items():
            if cmd in cmds:
                p.add_argument(flag, dest=dest, action="store_const", const=value,
                               default=argparse.SUPPRESS)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Command defaults, then the config file, then flags."""
    values = {}
    if args.config:
        try:
            values.update(load_config_file(args.config))
        except OSError as exc:
            raise InvalidConfig("config", str(exc)) from None
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    values.update(flags)
    return ExperimentConfig.for_command(args.command, **values).validate()


# output -----------------------------------------------------------------------

def _config_comment(cfg: ExperimentConfig) -> str:
    return "".join("# " + line + "\n" for line in dump_config_text(cfg).splitlines())


def render(cfg: ExperimentConfig, result: dict) -> str:
    public = {k: v for k, v in result.items() if not k.startswith("_")}
    if cfg.format == "json":
        if cfg.command == "spectrum":
            public["rows"] = [list(r) for r in public["rows"]]
        return to_json({"config": cfg.to_dict(), **public})
    buf = _io.StringIO()
    buf.write(_config_comment(cfg))
    if cfg.command == "spectrum":
        io.write_rows_csv(buf, SPECTRUM_COLUMNS, result["rows"])
    elif cfg.command == "simulate":
        io.write_rows_csv(buf, ("index", "eigenvalue"), list(enumerate(result["eigenvalues"])))
    elif cfg.command == "classify":
        io.write_rows_csv(buf, ("i", "j", "estimate", "truth"), result["_estimates"])
    else:
        g = result["_graph"]
        io.write_rows_csv(buf, io.GRAPH_COLUMNS,
                          [(int(i), int(j), float(d), float(r.real), float(r.imag))
                           for (i, j), d, r in zip(g.edges, g.distances, g.rotations)])
    return buf.getvalue()


def _side_outputs(cfg: ExperimentConfig, result: dict) -> None:
    if cfg.command == "spectrum" and cfg.format == "csv" and cfg.out:
        Path(cfg.out + ".coefficients.json").write_text(
            to_json({"config": cfg.to_dict(), "exact_coefficients": result["exact_coefficients"]}))
    if cfg.command == "imaging":
        if cfg.stack_out:
            io.write_stack(cfg.stack_out, result["_images"])
        if cfg.graph_out:
            io.write_graph_csv(cfg.graph_out, result["_graph"])


def _fail(code: int, exc: Exception, key=None) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if key is not None:
        err["key"] = key
    sys.stderr.write(to_json(err))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except InvalidConfig as exc:
        return _fail(EXIT_CONFIG, exc, exc.key)
    try:
        with threadpool_limits(limits=cfg.threads):
            result = RUNNERS[cfg.command](cfg)
    except InvalidConfig as exc:
        return _fail(EXIT_CONFIG, exc, exc.key)
    except NUMERIC_ERRORS as exc:
        return _fail(EXIT_NUMERIC, exc)
    text = render(cfg, result)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()        # reader went away (e.g. piped into head)
    _side_outputs(cfg, result)
    if "_failure" in result:
        return _fail(EXIT_NUMERIC, result["_failure"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
