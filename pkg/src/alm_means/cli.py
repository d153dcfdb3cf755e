"""Command-line interface: ``alm-means {mean,perron,distance,verify}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import alm, io, metrics, stochastic
from .errors import AlmError, NonConverged

log = logging.getLogger("alm_means")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGED = 2


def _setup_logging():
    level = os.environ.get("ALM_MEANS_LOG", "warn").upper()
    level = {"WARN": "WARNING"}.get(level, level)
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(io.dumps(obj, indent=2) + "\n")


def _error(msg, code=EXIT_INPUT):
    sys.stderr.write(f"error: {msg}\n")
    return code


def _cfg_overrides(args) -> dict:
    out = {}
    if args.tol is not None:
        out["tol"] = args.tol
    if args.max_iter is not None:
        out["max_iter"] = args.max_iter
    if args.eps is not None:
        out["eps_shift"] = args.eps
    if args.force_iterate:
        out["force_iterate"] = True
    if args.unsafe_allow:
        out["unsafe_allow"] = True
    if args.adaptive_tol:
        out["adaptive_tol"] = True
    return out


def _solve_job(path, args):
    """Run one job file; return ``(exit_code, payload)``."""
    try:
        job = io.load_job(path)
        job.config = io.parse_config(_cfg_overrides(args), job.config)
        if args.matrix_file:
            mats = [io.read_matrix(p) for p in args.matrix_file]
            if len(mats) != len(job.matrices):
                raise AlmError(f"--matrix-file given {len(mats)} times, job needs "
                               f"{len(job.matrices)} matrices")
            job.matrices = mats
        outcome = io.run_job(job)
    except NonConverged as exc:
        payload = exc.outcome.to_dict(include_trace=args.trace) if exc.outcome else {}
        payload["error"] = str(exc)
        return EXIT_NONCONVERGED, payload
    except AlmError as exc:
        return EXIT_INPUT, {"error": f"{type(exc).__name__}: {exc}"}
    return EXIT_OK, outcome.to_dict(include_trace=args.trace)


def cmd_mean(args) -> int:
    if args.jobs:
        files = sorted(Path(args.jobs).glob("*.json"))
        if not files:
            return _error(f"no *.json job files in {args.jobs}")
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda p: _solve_job(p, args), files))
        for p, (code, payload) in zip(files, results):
            _emit({"job": p.name, "exit": code, "result": payload})
        return max(code for code, _ in results)
    if not args.job:
        return _error("either --job or --jobs is required")
    code, payload = _solve_job(args.job, args)
    if code == EXIT_INPUT:
        return _error(payload["error"])
    if code == EXIT_NONCONVERGED:
        sys.stderr.write(f"error: {payload['error']}\n")
    _emit(payload)
    return code


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlmError(f"{what}: invalid JSON at column {exc.colno}: {exc.msg}") from exc


def cmd_perron(args) -> int:
    try:
        if args.gamma is not None:
            prof = stochastic.profile(np.asarray(_json_arg(args.gamma, "--gamma"), dtype=float))
        elif args.weight_vectors is not None:
            w = _json_arg(args.weight_vectors, "--weight-vectors")
            prof = stochastic.gamma_from_multimeans(w, unsafe=args.unsafe_allow)
        else:
            rs = list(args.r or [])
            if args.weights is not None:
                rs = list(_json_arg(args.weights, "--weights"))
            if len(rs) != 3:
                raise AlmError("give three weights via --weights or repeated --r")
            prof = stochastic.gamma_from_weights_3(*map(float, rs))
    except AlmError as exc:
        return _error(f"{type(exc).__name__}: {exc}")
    _emit(prof.to_dict())
    return EXIT_OK


def cmd_distance(args) -> int:
    try:
        a = io.read_matrix(args.a)
        b = io.read_matrix(args.b)
        out = {"thompson": metrics.thompson(a, b), "gauge_R": metrics.gauge_R(a, b)}
    except AlmError as exc:
        return _error(f"{type(exc).__name__}: {exc}")
    _emit(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    try:
        report = verify.run_checks(args.filter or ["*"], seed=args.seed, trials=args.trials)
    except AlmError as exc:
        return _error(f"{type(exc).__name__}: {exc}")
    for line in report.lines():
        print(line)
    if args.report:
        Path(args.report).write_text(io.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.ok else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alm-means",
                                     description="Multivariate operator means by ALM iteration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="compute the mean described by a job file")
    p.add_argument("--job", help="job file (JSON)")
    p.add_argument("--jobs", help="directory of job files, processed concurrently")
    p.add_argument("--matrix-file", action="append",
                   help="replace the job's matrices, in order (text or .json); repeatable")
    p.add_argument("--trace", action="store_true", help="include the iteration trace")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--eps", type=float, help="smallest regularization shift")
    p.add_argument("--force-iterate", action="store_true", help="bypass closed forms")
    p.add_argument("--unsafe-allow", action="store_true",
                   help="run even if the convergence hypotheses fail")
    p.add_argument("--adaptive-tol", action="store_true",
                   help="relax tol to the round-off floor of ill-conditioned inputs")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("perron", help="weight matrix and Perron vector")
    p.add_argument("--weights", help="JSON list [r1, r2, r3]")
    p.add_argument("--r", type=float, action="append", help="one weight; repeat three times")
    p.add_argument("--weight-vectors", help="JSON list of n+1 weight vectors of length n")
    p.add_argument("--gamma", help="JSON row-stochastic matrix")
    p.add_argument("--unsafe-allow", action="store_true")
    p.set_defaults(func=cmd_perron)

    p = sub.add_parser("distance", help="Thompson distance of two matrices")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("verify", help="run the property checks")
    p.add_argument("--filter", action="append", help="glob over check names; repeatable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
