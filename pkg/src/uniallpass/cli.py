"""Command-line front end.

Subcommands: design (homogeneous | schroeder | gardner | poletti), complete,
verify, simulate, poles, export.  Systems travel as the canonical JSON schema
of :mod:`uniallpass.serialize`; design and complete outputs embed their
certification report under the ``verify`` key.  The default certification
tolerance (1e-8) can be overridden with the ``UNIALLPASS_TOL`` environment
variable or per-invocation flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import serialize
from .complete import (
    orthogonal_completion,
    random_orthogonal,
    random_uniallpass,
    siso_completion,
)
from .core import impulse_response, is_allpass, poles
from .designs import gardner_nested, poletti_unitary, schroeder_series
from .errors import FdnError, NotCertifiableError, UnstableError
from .homogeneous import design_homogeneous_siso
from .system import DelayVector
from .verify import (
    certify_uniallpass,
    check_minor_condition,
    dsim_from_lyapunov,
)


def _default_tol():
    value = os.environ.get("UNIALLPASS_TOL")
    if value is None:
        return 1e-8
    tol = float(value)
    if tol <= 0:
        raise ValueError("UNIALLPASS_TOL must be positive")
    return tol


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _float_list(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _verify_report(fdn, dsim, tol):
    """Certification summary dict embedded in output JSON."""
    report = {}
    if dsim is None:
        try:
            dsim = dsim_from_lyapunov(fdn.a, fdn.b, tol)
        except (NotCertifiableError, UnstableError) as exc:
            dsim = getattr(exc, "candidate", None)
            report["lyapunov"] = {"ok": False, "detail": str(exc)}
    if dsim is not None:
        cert = certify_uniallpass(fdn, dsim, tol)
        report["certificate"] = {
            "verdict": cert.verdict,
            "residual": cert.residual,
            "dsim": [float(v) for v in cert.dsim],
            "tol": tol,
        }
    try:
        minor = check_minor_condition(fdn, tol)
        report["minor_condition"] = {
            "verdict": minor.verdict,
            "sign": minor.sign,
            "deviation": minor.deviation,
            "sufficient": minor.sufficient,
        }
    except (np.linalg.LinAlgError, ValueError) as exc:
        report["minor_condition"] = {"verdict": False, "detail": str(exc)}
    return report, dsim


def _emit_system(args, fdn, dsim, meta=None, tol=None):
    tol = tol if tol is not None else _default_tol()
    verify, dsim = _verify_report(fdn, dsim, tol)
    text = serialize.dumps_system(fdn, dsim=dsim, meta=meta, verify=verify)
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    cert = verify.get("certificate", {})
    if not cert.get("verdict", False):
        print("warning: output did not certify at the default tolerance", file=sys.stderr)
        return 1
    return 0


def _cmd_design(args):
    tol = args.tol if args.tol is not None else _default_tol()
    if args.kind == "homogeneous":
        delays = DelayVector(args.delays)
        design = design_homogeneous_siso(
            delays, args.gamma, dsim=args.dsim, slack=args.slack, tol=tol
        )
        moduli = np.abs(poles(design.fdn))
        meta = {
            "design": "homogeneous",
            "gamma": args.gamma,
            "pole_modulus_min": float(moduli.min()),
            "pole_modulus_max": float(moduli.max()),
        }
        return _emit_system(args, design.fdn, design.dsim, meta=meta, tol=tol)
    if args.kind == "schroeder":
        fdn, dsim = schroeder_series(args.gains, args.delays)
        return _emit_system(args, fdn, dsim, meta={"design": "schroeder"}, tol=tol)
    if args.kind == "gardner":
        fdn, dsim = gardner_nested(args.gains, args.delays)
        return _emit_system(args, fdn, dsim, meta={"design": "gardner"}, tol=tol)
    if args.kind == "poletti":
        rng = np.random.default_rng(args.seed)
        u = random_orthogonal(args.size, rng)
        delays = args.delays if args.delays else [1] * args.size
        fdn, dsim = poletti_unitary(u, args.gain, delays)
        meta = {"design": "poletti", "gain": args.gain, "seed": args.seed}
        return _emit_system(args, fdn, dsim, meta=meta, tol=tol)
    raise ValueError(f"unknown design kind {args.kind}")


def _read_matrix(path):
    """Feedback matrix from JSON (bare 2-D array or {"A": ...}) or text."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise serialize.SchemaError(
                f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
        if isinstance(data, dict):
            if "A" not in data:
                raise serialize.SchemaError('matrix JSON object needs an "A" field')
            data = data["A"]
        return np.asarray(data, dtype=float)
    return np.atleast_2d(np.loadtxt(path))


def _cmd_complete(args):
    tol = args.tol if args.tol is not None else _default_tol()
    if args.random is not None:
        fdn = random_uniallpass(
            args.random, args.p, args.seed, scaled=args.scaled, delays=args.delays
        )
        dsim = None
        meta = {"source": "random", "seed": args.seed}
    else:
        if args.matrix is None:
            raise ValueError("provide a matrix file or --random N")
        a = _read_matrix(args.matrix)
        delays = args.delays if args.delays else [1] * a.shape[0]
        if args.mode == "siso":
            if args.p != 1:
                raise ValueError(
                    "general completion is implemented for single-channel systems only; "
                    "use --mode orthogonal for P > 1"
                )
            fdn, trace = siso_completion(a, delays=delays, tol=tol)
            dsim = trace.dsim
        else:
            fdn = orthogonal_completion(a, args.p, delays=delays)
            dsim = np.ones(a.shape[0])
        meta = {"source": "completion", "mode": args.mode}
    return _emit_system(args, fdn, dsim, meta=meta, tol=tol)


def _cmd_verify(args):
    tol = args.tol if args.tol is not None else _default_tol()
    fdn, dsim, _ = serialize.load_system(args.input)
    if args.delays:
        fdn = fdn.with_delays(args.delays)
    report, dsim = _verify_report(fdn, dsim, tol)
    cert = report.get("certificate")
    if cert is not None:
        print(
            f"certificate: verdict={cert['verdict']} residual={cert['residual']:.6g} tol={tol:g}"
        )
    else:
        print(f"certificate: no similarity candidate ({report['lyapunov']['detail']})")
    minor = report["minor_condition"]
    if "deviation" in minor:
        label = "" if minor["sufficient"] else " (necessary condition only)"
        print(
            f"minor condition: verdict={minor['verdict']} sign={minor['sign']:+d} "
            f"deviation={minor['deviation']:.6g}{label}"
        )
    else:
        print(f"minor condition: unavailable ({minor['detail']})")
    try:
        rep = is_allpass(fdn, tol)
        print(
            f"allpass for delays {list(fdn.delays)}: verdict={rep.allpass} "
            f"grid={rep.grid_deviation:.6g} reversal={rep.reversal_deviation:.6g} sign={rep.sign:+d}"
        )
        ok = rep.allpass
    except UnstableError as exc:
        worst = max(abs(p) for p in exc.poles)
        print(
            f"allpass for delays {list(fdn.delays)}: verdict=False "
            f"(unstable, max pole modulus {worst:.6g})"
        )
        ok = False
    if not ok:
        print("not allpass")
        return 1
    print("allpass")
    return 0


def _cmd_simulate(args):
    fdn, _, _ = serialize.load_system(args.input)
    response = impulse_response(fdn, args.length)
    if args.csv:
        serialize.impulse_csv(args.csv, response)
    else:
        serialize.impulse_csv(sys.stdout, response)
    if args.wav:
        p_out, p_in, _ = response.shape
        written = []
        if args.multichannel:
            for j in range(p_in):
                path = args.wav if p_in == 1 else _suffixed(args.wav, f"_in{j}")
                scale = serialize.write_wav(path, response[:, j, :], args.rate)
                written.append((path, scale))
        else:
            for i in range(p_out):
                for j in range(p_in):
                    path = (
                        args.wav
                        if p_out == 1 and p_in == 1
                        else _suffixed(args.wav, f"_out{i}_in{j}")
                    )
                    scale = serialize.write_wav(path, response[i, j], args.rate)
                    written.append((path, scale))
        for path, scale in written:
            meta = {"rate": args.rate, "scale": scale, "peak_target_dbfs": -1.0}
            with open(str(path) + ".meta.json", "w", newline="\n") as fh:
                fh.write(serialize.canonical_json(meta))
    return 0


def _suffixed(path, suffix):
    root, ext = os.path.splitext(str(path))
    return root + suffix + ext


def _cmd_poles(args):
    fdn, _, _ = serialize.load_system(args.input)
    values = poles(fdn)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    if args.csv:
        serialize.poles_csv(args.csv, values)
    else:
        serialize.poles_csv(sys.stdout, values)
    return 0


def _cmd_export(args):
    fdn, dsim, payload = serialize.load_system(args.input)
    text = serialize.dumps_system(
        fdn, dsim=dsim, meta=payload.get("meta"), verify=payload.get("verify")
    )
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uniallpass",
        description="Design, complete and verify delay-independent allpass delay networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="construct a certified design")
    design_sub = p_design.add_subparsers(dest="kind", required=True)

    p_homog = design_sub.add_parser("homogeneous", help="uniform pole modulus design")
    p_homog.add_argument("--delays", type=_int_list, required=True)
    p_homog.add_argument("--gamma", type=float, required=True)
    p_homog.add_argument("--dsim", type=_float_list, default=None)
    p_homog.add_argument("--slack", type=float, default=0.9)

    p_sch = design_sub.add_parser("schroeder", help="series allpass chain")
    p_sch.add_argument("--gains", type=_float_list, required=True)
    p_sch.add_argument("--delays", type=_int_list, required=True)

    p_gar = design_sub.add_parser("gardner", help="nested allpass chain")
    p_gar.add_argument("--gains", type=_float_list, required=True)
    p_gar.add_argument("--delays", type=_int_list, required=True)

    p_pol = design_sub.add_parser("poletti", help="unitary multichannel lattice")
    p_pol.add_argument("--size", type=int, required=True)
    p_pol.add_argument("--gain", type=float, required=True)
    p_pol.add_argument("--delays", type=_int_list, default=None)
    p_pol.add_argument("--seed", type=int, default=0)

    for p in (p_homog, p_sch, p_gar, p_pol):
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("-o", "--output", default=None)
    p_design.set_defaults(func=_cmd_design)

    p_comp = sub.add_parser("complete", help="complete a feedback matrix")
    p_comp.add_argument("matrix", nargs="?", default=None, help="matrix file (JSON or text)")
    p_comp.add_argument("--mode", choices=["siso", "orthogonal"], default="siso")
    p_comp.add_argument("--p", type=int, default=1)
    p_comp.add_argument("--delays", type=_int_list, default=None)
    p_comp.add_argument("--random", type=int, default=None, help="generate a random N-line system instead")
    p_comp.add_argument("--scaled", action="store_true", help="hide the random system behind a diagonal similarity")
    p_comp.add_argument("--seed", type=int, default=0)
    p_comp.add_argument("--tol", type=float, default=None)
    p_comp.add_argument("-o", "--output", default=None)
    p_comp.set_defaults(func=_cmd_complete)

    p_ver = sub.add_parser("verify", help="certify a system file")
    p_ver.add_argument("input")
    p_ver.add_argument("--delays", type=_int_list, default=None)
    p_ver.add_argument("--tol", type=float, default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_sim = sub.add_parser("simulate", help="render an impulse response")
    p_sim.add_argument("input")
    p_sim.add_argument("--length", type=int, required=True)
    p_sim.add_argument("--csv", default=None)
    p_sim.add_argument("--wav", default=None)
    p_sim.add_argument("--rate", type=int, default=48000)
    p_sim.add_argument("--multichannel", action="store_true")
    p_sim.set_defaults(func=_cmd_simulate)

    p_pole = sub.add_parser("poles", help="list system poles as CSV")
    p_pole.add_argument("input")
    p_pole.add_argument("--csv", default=None)
    p_pole.set_defaults(func=_cmd_poles)

    p_exp = sub.add_parser("export", help="round-trip a system file to canonical form")
    p_exp.add_argument("input")
    p_exp.add_argument("-o", "--output", default=None)
    p_exp.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FdnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
