"""Command-line driver.

    hybridbf sweep     --config scenario.yaml --out curves.csv
    hybridbf converge  --config scenario.yaml --snr-db 10
    hybridbf duality   --config scenario.yaml --snr-db 10 --json
    hybridbf factorize --config scenario.yaml --snr-db 10 --bits 4

Exit codes: 0 success, 2 configuration error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import experiments as ex
from .errors import ConfigError, HybridBFError
from .factorization import factor, quantize_phases, rate_with_factors, semi_unitary_deviation
from .optimizer import solve
from .rates import SystemDims

log = logging.getLogger("hybridbf")

DEFAULT_SCENARIO = {
    "dims": {"K": 4, "N": 16, "M": 4, "d": 1},
    "L": 15,
    "snr_grid_db": [-10, -5, 0, 5, 10, 15, 20],
    "n_trials": 20,
    "base_seed": 0,
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON scenario file")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--seed", type=int, help="override the scenario base seed")
    common.add_argument("--trials", type=int, help="override the number of trials")
    common.add_argument("--json", action="store_true", help="emit JSON with full detail")
    common.add_argument("--no-half-prefactor", action="store_true",
                        help="report rates without the 1/2 prefactor (doubles every rate)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hybridbf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sw = sub.add_parser("sweep", parents=[common], help="Monte-Carlo sum rate versus SNR")
    sw.add_argument("--overlay", action="append", default=[],
                    help="CSV curve (snr_db,sum_rate) to append to the output")
    for name, hlp in (("converge", "objective trace per outer iteration"),
                      ("duality", "MAC-to-BC duality verification per trial"),
                      ("factorize", "analog/digital factorization of one solution")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--snr-db", type=float, default=10.0)
    sub.choices["factorize"].add_argument("--bits", type=int, help="phase-shifter resolution")
    sub.choices["factorize"].add_argument("--trial", type=int, default=0, help="trial index to factor")
    return p


def load_scenario(args) -> ex.Scenario:
    sc = ex.Scenario.from_file(args.config) if args.config else ex.Scenario.from_dict(DEFAULT_SCENARIO)
    if args.seed is not None:
        sc = replace(sc, base_seed=args.seed)
    if args.trials is not None:
        if args.trials < 0:
            raise ConfigError("--trials must be nonnegative")
        sc = replace(sc, n_trials=args.trials)
    return sc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args, sc: ex.Scenario, scale: float) -> str:
    records = [ex.scale_record(r, scale) for r in ex.run_sweep(sc)]
    for path in args.overlay:
        records.extend(ex.read_overlay(path))
    if args.json:
        return ex.records_to_json(records, {"scenario": sc.to_dict(), "rate_scale": scale}) + "\n"
    return ex.records_to_csv(records)


def cmd_converge(args, sc: ex.Scenario, scale: float) -> str:
    traces = ex.run_convergence(sc, args.snr_db)
    if args.json:
        payload = [{"trial": t, "converged": tr.converged, "iters_used": tr.iters_used,
                    "outer_objective": [scale * v for v in tr.outer_objective],
                    "objective_per_step": [scale * v for v in tr.objective_per_iter]}
                   for t, tr in enumerate(traces)]
        return json.dumps({"snr_db": args.snr_db, "traces": payload}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("trial", "iteration", "objective"))
    for t, tr in enumerate(traces):
        for i, v in enumerate(tr.outer_objective):
            w.writerow((t, i, repr(scale * v)))
    return buf.getvalue()


def cmd_duality(args, sc: ex.Scenario, scale: float) -> str:
    reports = ex.run_duality_check(sc, args.snr_db)
    if args.json:
        return json.dumps({"snr_db": args.snr_db, "reports": [r.to_dict() for r in reports]}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("trial", "max_rate_gap", "power_bc", "power_mac", "power_gap", "truncated_users"))
    for t, r in enumerate(reports):
        w.writerow((t, repr(scale * r.max_gap), repr(r.power_bc), repr(r.power_mac), repr(r.power_gap),
                    " ".join(map(str, r.truncated_users))))
    return buf.getvalue()


def cmd_factorize(args, sc: ex.Scenario, scale: float) -> str:
    dims: SystemDims = sc.dims
    H = ex.trial_channel(sc, args.trial)
    sol = solve(H, dims, ex.snr_to_power(args.snr_db), sc.options, check_duality=False)
    fV = factor(sol.V, dims.n_rf_t)
    fW = [factor(w, dims.n_rf_r) for w in sol.W]
    if args.bits is not None:
        fV = quantize_phases(fV, args.bits, sol.V)
        fW = [quantize_phases(f, args.bits, w) for f, w in zip(fW, sol.W)]
    rate = sol.trace.outer_objective[-1]
    rate_f = rate_with_factors(H, fV, fW, sol.Q)
    payload = {
        "snr_db": args.snr_db,
        "trial": args.trial,
        "bits": args.bits,
        "sum_rate": scale * rate,
        "sum_rate_factored": scale * rate_f,
        "precoder": fV.to_dict(),
        "precoder_semi_unitary_deviation": semi_unitary_deviation(fV.reconstruct()),
        "combiners": [f.to_dict() for f in fW],
    }
    if not args.json:
        # compact summary unless full factors were requested
        payload = {k: v for k, v in payload.items() if k not in ("precoder", "combiners")}
        payload["precoder_reconstruction_error"] = fV.reconstruction_error
        payload["combiner_reconstruction_errors"] = [f.reconstruction_error for f in fW]
    return json.dumps(payload, indent=2) + "\n"


COMMANDS = {"sweep": cmd_sweep, "converge": cmd_converge, "duality": cmd_duality, "factorize": cmd_factorize}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    scale = 2.0 if args.no_half_prefactor else 1.0
    try:
        sc = load_scenario(args)
        text = COMMANDS[args.command](args, sc, scale)
        _emit(text, args.out)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except (HybridBFError, np.linalg.LinAlgError, AssertionError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
