# coding=utf-8
# Copyright (C) 2026 TMSV Development Team.
#
# Permission is hereby granted, free of charge, to any person obtaining a
# copy of this software and associated documentation files (the "Software"),
# to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense,
# and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
# FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.


"""
Command-line front end: tmsv {model,simulate,analyze,locksim,sweep,fit}.
Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from tmsv.core import application_manager, settings
from tmsv.core.application import load_manifest
from tmsv.core.config import ExperimentConfig, config_hash, load_config
from tmsv.core.errors import ConfigError, InvalidArgument
from tmsv.core.version import __version__


logger = logging.getLogger("tmsv")

# Lock durations above this need --long-tests.
max_short_duration_s = 60.0
endurance_duration_s = 900.0


def _config(args) -> ExperimentConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.paper_scale:
        config = config.paper_scale()
    return config


def _out_dir(args, config: ExperimentConfig, command: str) -> str:
    if args.out is not None:
        return args.out
    if config.output_dir is not None:
        return config.output_dir
    return os.path.join(settings.output_root, "%s-%s" % (command, config_hash(config)[:12]))


def _print_matrix(name, matrix):
    print("%s (X_A, P_A, X_B, P_B):" % name)
    for row in np.asarray(matrix):
        print("  " + " ".join("%10.4f" % v for v in row))


def _print_criteria(criteria, stderr=None):
    stderr = stderr or {}
    for label, key, critical in (("Duan", "duan", 4), ("EPR-Reid A|B", "epr_AB", 1),
                                 ("EPR-Reid B|A", "epr_BA", 1)):
        value = getattr(criteria, key)
        se = " +- %.4f" % stderr[key] if key in stderr else ""
        print("%-13s %.4f%s  (critical %d, %.3f dB)"
              % (label, value, se, critical, getattr(criteria, key + "_db")))
    print("entangled: %s" % ("yes" if criteria.entangled else "no"))
    print("EPR steering: %s" % ("yes" if criteria.epr_steering else "no"))


def cmd_model(args, app):
    config = _config(args)
    report = app.model(config)
    _print_matrix("gamma", report.state.cov)
    _print_criteria(report.criteria)
    print("loss budget:")
    print("  %-9s %-24s %10s %10s" % ("stage", "factor", "efficiency", "cumulative"))
    for row in report.budget_table:
        print("  %-9s %-24s %10.4f %10.4f" % (row["stage"], row["label"], row["efficiency"],
                                              row["cumulative"]))
    return 0


def cmd_simulate(args, app):
    if args.from_manifest is not None:
        manifest_dir = args.from_manifest
        if os.path.isfile(manifest_dir):
            manifest_dir = os.path.dirname(manifest_dir)
        config = ExperimentConfig.from_meta(load_manifest(manifest_dir)["config"])
    else:
        config = _config(args)
    out_dir = _out_dir(args, config, "simulate")
    manifest = app.simulate(config, out_dir)
    for run in manifest["runs"]:
        print("%-7s %s  %d samples  sha256 %s" % (run["name"], os.path.join(out_dir, run["file"]),
                                                 run["n_samples"], run["sha256"]))
    print("manifest: %s" % os.path.join(out_dir, "manifest.json"))
    return 0


def cmd_analyze(args, app):
    config = None
    if args.config_given:
        config = _config(args)
    report = app.analyze(args.data, config, args.out)
    _print_matrix("gamma", report.covariance.cov)
    gamma = report.covariance_criteria
    print("from gamma: Duan %.4f, EPR-Reid A|B %.4f, B|A %.4f" % (gamma.duan, gamma.epr_AB,
                                                                 gamma.epr_BA))
    stderr = {name: result.fit_sigma for name, result in report.bootstrap.items()}
    stderr = {"duan": stderr.get("duan"), "epr_AB": stderr.get("epr_reid_AB"),
              "epr_BA": stderr.get("epr_reid_BA")}
    _print_criteria(report.criteria, {k: v for k, v in stderr.items() if v is not None})
    for name, result in report.bootstrap.items():
        print("bootstrap %-12s fit_mean %.5f  fit_sigma %.5f%s"
              % (name, result.fit_mean, result.fit_sigma,
                 "" if result.fit_converged else "  (moments)"))
    for name, path in sorted(report.files.items()):
        print("%-12s %s" % (name, path))
    return 0


def cmd_locksim(args, app):
    config = _config(args)
    duration = config.locks.duration_s
    if args.long_tests:
        duration = endurance_duration_s
    elif duration > max_short_duration_s:
        raise ConfigError("durations above %g s need --long-tests." % max_short_duration_s,
                          "locks.duration_s")
    config = replace(config, locks=replace(config.locks, duration_s=duration))
    out_dir = _out_dir(args, config, "locksim")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "stability_trace.csv")
    trace, degraded = app.locksim(config, path)
    for name, rms in sorted(trace.loop_rms.items()):
        print("loop %-8s rms %.3e rad  saturation events %d"
              % (name, rms, trace.saturation_events[name]))
    print("windows %d of %g s, max deviation %.3f dB (statistical scatter %.3f dB)"
          % (trace.times.size, trace.window, trace.max_deviation_db(),
             trace.predicted_scatter_db()))
    print("flat within 0.3 dB: %s" % ("yes" if trace.is_flat() else "no"))
    print("Duan at residual rms: %.4f (%.3f dB)" % (degraded.duan, degraded.duan_db))
    print("trace: %s" % path)
    return 0


def _values(args):
    if args.values is not None:
        try:
            return [float(v) for v in args.values.split(",")]
        except ValueError:
            raise ConfigError("--values must be comma-separated numbers.")
    start, stop, num = args.range
    if int(num) != num or num < 1:
        raise ConfigError("--range NUM must be a positive integer.")
    return list(np.linspace(start, stop, int(num)))


def cmd_sweep(args, app):
    config = _config(args)
    out_dir = _out_dir(args, config, "sweep")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "sweep_%s.csv" % args.param.replace(".", "_"))
    table = app.sweep(config, args.param, _values(args), path)
    print("%12s %10s %10s %10s %9s" % (args.param.split(".")[-1], "duan", "epr_AB", "epr_BA",
                                       "duan_db"))
    for i in range(table["value"].size):
        print("%12.6g %10.4f %10.4f %10.4f %9.3f" % (table["value"][i], table["duan"][i],
                                                     table["epr_AB"][i], table["epr_BA"][i],
                                                     table["duan_db"][i]))
    print("table: %s" % path)
    return 0


def cmd_fit(args, app):
    config = _config(args)
    fitted, result = app.fit(config)
    report = app.model(fitted)
    print(json.dumps({"sources": fitted.to_meta()["sources"]}, indent=2))
    print("cost %.3e, model Duan %.4f" % (result.cost, report.criteria.duan))
    return 0


commands = {
    "model": cmd_model,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "locksim": cmd_locksim,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="config file, or a shipped config name (desk, paper). "
                             "Default: desk.")
    common.add_argument("--seed", type=int, default=None, help="override the config seed.")
    common.add_argument("--paper-scale", action="store_true",
                        help="use the paper-scale acquisition and bootstrap sizes.")
    common.add_argument("--long-tests", action="store_true",
                        help="allow long runs (15 minute lock endurance).")
    common.add_argument("--out", default=None, help="output directory.")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="tmsv", description="Virtual two-mode squeezed vacuum "
                                                         "experiment.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")
    sub.required = True
    sub.add_parser("model", parents=[common], help="analytic covariance and criteria.")
    simulate = sub.add_parser("simulate", parents=[common], help="write raw-sample records.")
    simulate.add_argument("--from-manifest", default=None,
                          help="re-run the config recorded in a manifest.")
    analyze = sub.add_parser("analyze", parents=[common], help="analyze a simulated dataset.")
    analyze.add_argument("data", help="directory written by simulate.")
    sub.add_parser("locksim", parents=[common], help="phase lock stability trace.")
    sweep = sub.add_parser("sweep", parents=[common], help="model criteria over a parameter.")
    sweep.add_argument("--param", required=True,
                       help="dotted config path, e.g. budget.A.tap.efficiency.")
    values = sweep.add_mutually_exclusive_group(required=True)
    values.add_argument("--values", help="comma-separated values.")
    values.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "NUM"))
    sub.add_parser("fit", parents=[common], help="fit both sources to the reference "
                                                 "covariance.")
    return p


def _configure_logging(verbose: int):
    level = settings.log_level
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors.
        return 1 if e.code == 2 else e.code
    _configure_logging(args.verbose)
    args.config_given = args.config is not None
    if args.config is None:
        args.config = "desk"
    try:
        app = application_manager.instance()
        return commands[args.command](args, app)
    except (ConfigError, InvalidArgument) as e:
        print("tmsv %s: invalid input: %s" % (args.command, e), file=sys.stderr)
        return 1
    except Exception as e:  # pylint: disable=broad-except
        logger.debug("tmsv %s failed.", args.command, exc_info=True)
        print("tmsv %s: %s: %s" % (args.command, type(e).__name__, e), file=sys.stderr)
        return 2
    finally:
        application_manager.destroy()


if __name__ == "__main__":
    sys.exit(main())
