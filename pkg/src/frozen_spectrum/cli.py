"""Command-line interface: ``frozen-spectrum <command> ...``.

Exit codes: 0 success, 1 invalid input (or an inadmissible spectrum for
``check``), 2 numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .basis import compute_z, spare_zero
from .characterization import check_conditions, fit_asymptotics
from .errors import DomainError, NumericError, ValidationError
from .forward import STRIP_HALFWIDTH, compute_spectrum
from .inverse import OUTPUT_SAMPLES, recovery_errors, run_recovery
from .oracle import fd_spectrum

__all__ = ["run", "main"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64

# options that never reach the output files: they must not change them
_NOT_ECHOED = {"threads", "out", "handler", "command"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _threads(k: int) -> int:
    return (os.cpu_count() or 1) if k == 0 else k


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _cmd_forward(args):
    geom = io.load_geometry(args.geometry)
    q = io.load_potential(args.potential, geom)
    spec = compute_spectrum(q, geom, args.N, strip_halfwidth=args.strip_halfwidth, threads=_threads(args.threads))
    diag = {k: spec.diagnostics[k] for k in ("low_radius", "strip_halfwidth") if k in spec.diagnostics}
    io.write_json(args.out, io.envelope("forward", _config(args), {"spectrum": spec.to_dict(geom),
                                                                 "diagnostics": diag}))
    return EXIT_OK


def _recovery_body(rec, geom, samples):
    diag = {k: rec.diagnostics[k] for k in ("n_kappa", "n_xi", "endpoint", "spare_zero", "n_sines",
                                            "q_gamma_left_tail", "u_fit", "gram_condition")
            if k in rec.diagnostics}
    return {
        "potential": rec.potential.to_dict(geom, samples),
        "q_at_gamma": rec.q_at_gamma,
        "uniqueness": rec.uniqueness.to_dict(),
        "coefficients": {"kappa": rec.kappa.values, "xi": rec.xi.values},
        "diagnostics": diag,
    }


def _cmd_inverse(args):
    geom = io.load_geometry(args.geometry)
    spec = io.load_spectrum(args.spectrum)
    rec = run_recovery(spec, geom, args.N, force=args.force, endpoint=args.endpoint, n_samples=args.samples)
    io.write_json(args.out, io.envelope("inverse", _config(args), _recovery_body(rec, geom, args.samples)))
    return EXIT_OK


def _roundtrip(args):
    geom = io.load_geometry(args.geometry)
    q = io.load_potential(args.potential, geom)
    spec = compute_spectrum(q, geom, args.N, threads=_threads(args.threads))
    rec = run_recovery(spec, geom, args.N, force=args.force, endpoint=args.endpoint, n_samples=args.samples)
    return geom, q, rec


def _cmd_roundtrip(args):
    geom, q, rec = _roundtrip(args)
    body = {
        "errors": recovery_errors(rec.potential, q, geom),
        "q_at_gamma": {"true": q.q_at_gamma, "recovered": rec.q_at_gamma},
        "uniqueness": rec.uniqueness.to_dict(),
        "diagnostics": _recovery_body(rec, geom, args.samples)["diagnostics"],
    }
    io.write_json(args.out, io.envelope("roundtrip", _config(args), body))
    return EXIT_OK


def _cmd_zeros(args):
    geom = io.load_geometry(args.geometry)
    z = compute_z(geom, args.N)
    try:
        spare = spare_zero(geom)
    except NumericError:
        spare = None
    body = {"z": z.z, "residuals": z.residuals, "max_residual": float(np.max(np.abs(z.residuals))),
            "spare_zero": spare}
    io.write_json(args.out, io.envelope("zeros", _config(args), body))
    return EXIT_OK


def _cmd_check(args):
    geom = io.load_geometry(args.geometry)
    spec = io.load_spectrum(args.spectrum)
    q = io.load_potential(args.potential, geom) if args.potential else None
    verdict = check_conditions(spec, geom, n_grid=args.grid, potential=q)
    io.write_json(args.out, io.envelope("check", _config(args), verdict.to_dict()))
    return EXIT_OK if verdict.overall else EXIT_INPUT


def _cmd_oracle(args):
    geom = io.load_geometry(args.geometry)
    q = io.load_potential(args.potential, geom)
    spec = fd_spectrum(q, geom, args.h, args.N)
    io.write_json(args.out, io.envelope("oracle", _config(args), {"spectrum": spec.to_dict(geom),
                                                                "diagnostics": dict(spec.diagnostics)}))
    return EXIT_OK


def _cmd_plotdata(args):
    if args.kind == "roundtrip":
        for name in ("potential", "geometry"):
            if getattr(args, name) is None:
                raise _UsageError(f"plotdata --kind roundtrip needs --{name}")
        geom, q, rec = _roundtrip(args)
        rows = []
        for seg, side, lo, hi in (("left", "left", 0.0, geom.gamma), ("right", "right", geom.a, geom.b)):
            t = np.linspace(lo, hi, args.samples)
            true, got = getattr(q, side)(t), getattr(rec.potential, side)(t)
            rows.extend((seg, ti, a, b) for ti, a, b in zip(t, true, got))
        io.write_csv(args.out, ["segment", "t", "q_true", "q_recovered"], rows)
    else:
        for name in ("spectrum", "geometry"):
            if getattr(args, name) is None:
                raise _UsageError(f"plotdata --kind asymptotics needs --{name}")
        geom = io.load_geometry(args.geometry)
        spec = io.load_spectrum(args.spectrum)
        fit = fit_asymptotics(spec, geom)
        rho = np.sqrt(np.asarray(spec.values[1:], dtype=complex))
        rho = np.where(rho.real < 0, -rho, rho)
        rows = [(n, r.real, m.real) for n, r, m in zip(range(1, rho.size + 1), rho, fit.mu.values)]
        io.write_csv(args.out, ["n", "rho_n", "asymptotic_residual"], rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    threads_help = "worker threads, 0 = all cores (never changes the output)"
    p = _Parser(prog="frozen-spectrum", description="Spectra of a two-segment problem with a frozen argument.")
    p.add_argument("--threads", type=int, default=1, help=threads_help)
    # accepted after the subcommand too; SUPPRESS keeps it from overwriting a value given before
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=threads_help)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_):
        s = sub.add_parser(name, help=help_, description=help_, parents=[common])
        s.set_defaults(handler=handler)
        return s

    s = add("forward", _cmd_forward, "eigenvalues of a potential")
    s.add_argument("--potential", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("-N", type=int, required=True)
    s.add_argument("--strip-halfwidth", type=float, default=STRIP_HALFWIDTH)
    s.add_argument("--out", required=True)

    s = add("inverse", _cmd_inverse, "potential from a spectrum")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("-N", type=int, default=None)
    s.add_argument("--endpoint", choices=("fit", "richardson"), default="fit")
    s.add_argument("--force", action="store_true")
    s.add_argument("--samples", type=int, default=OUTPUT_SAMPLES)
    s.add_argument("--out", required=True)

    s = add("roundtrip", _cmd_roundtrip, "forward then inverse, with errors")
    s.add_argument("--potential", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("-N", type=int, required=True)
    s.add_argument("--endpoint", choices=("fit", "richardson"), default="fit")
    s.add_argument("--force", action="store_true")
    s.add_argument("--samples", type=int, default=OUTPUT_SAMPLES)
    s.add_argument("--out", "--report", dest="out", required=True)

    s = add("zeros", _cmd_zeros, "zeros z_n of c2")
    s.add_argument("--geometry", required=True)
    s.add_argument("-N", type=int, required=True)
    s.add_argument("--out", required=True)

    s = add("check", _cmd_check, "admissibility of a spectrum (l = gamma)")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("--potential", default=None, help="compare fitted constants with this potential")
    s.add_argument("--grid", type=int, default=1025)
    s.add_argument("--out", required=True)

    s = add("oracle", _cmd_oracle, "finite-difference eigenvalues")
    s.add_argument("--potential", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("-N", type=int, required=True)
    s.add_argument("--out", required=True)

    s = add("plotdata", _cmd_plotdata, "CSV for plotting")
    s.add_argument("--kind", choices=("roundtrip", "asymptotics"), required=True)
    s.add_argument("--potential")
    s.add_argument("--spectrum")
    s.add_argument("--geometry")
    s.add_argument("-N", type=int, default=200)
    s.add_argument("--endpoint", choices=("fit", "richardson"), default="fit")
    s.add_argument("--force", action="store_true")
    s.add_argument("--samples", type=int, default=201)
    s.add_argument("--out", required=True)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 0:
            raise _UsageError("--threads must be >= 0")
        return args.handler(args)
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())
