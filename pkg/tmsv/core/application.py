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


import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy

from tmsv.core.analysis.bootstrap import BootstrapResult, bootstrap, duan_statistic, epr_reid_ab, \
    epr_reid_ba
from tmsv.core.analysis.criteria import CriteriaSummary, summarize
from tmsv.core.analysis.tomography import (PartialCovariance, QuadratureSettingRecord,
                                           load_reference_covariance, reconstruct_covariance)
from tmsv.core.config import ExperimentConfig, config_hash, resolve_path, with_value
from tmsv.core.control.loops import LockLoop
from tmsv.core.control.stability import StabilityTrace, jitter_to_entanglement, \
    stability_trace
from tmsv.core.errors import CalibrationFailure, InvalidArgument
from tmsv.core.optics.experiment import fit_sources
from tmsv.core.optics.state import GaussianState
from tmsv.core.signal.dsp import Calibration, demodulate_records, normalize
from tmsv.core.signal.synth import iter_rf_blocks
from tmsv.core.storage.records import RawSampleWriter, write_decimated
from tmsv.core.storage.utils import sha256_file, write_csv, write_json
from tmsv.core.systems.systems import System
from tmsv.core.version import __version__


logger = logging.getLogger(__name__)

manifest_name = "manifest.json"
manifest_version = 1

# Quadrature label to demodulation phase.
_demod_phase = {"X": 0.0, "P": np.pi / 2}

# (run name, setting of channels A and B, optical input, RNG jump index).
# Each run uses two jump indices: quadratures at jump, dark noise at jump + 1.
runs = (
    ("xx", ("X", "X"), "signal", 0),
    ("xp", ("X", "P"), "signal", 2),
    ("px", ("P", "X"), "signal", 4),
    ("pp", ("P", "P"), "signal", 6),
    ("vacuum", ("X", "X"), "vacuum", 8),
    ("dark", ("X", "X"), "blocked", 10),
)


@dataclass
class ModelReport:
    state: GaussianState
    criteria: CriteriaSummary
    budget_table: List[Dict]

    def to_meta(self) -> Dict:
        return {"covariance": self.state.cov, "criteria": self.criteria.to_meta(),
                "budget": self.budget_table}


@dataclass
class AnalysisReport:
    covariance: PartialCovariance
    criteria: CriteriaSummary
    covariance_criteria: CriteriaSummary
    bootstrap: Dict[str, BootstrapResult]
    calibration: Calibration
    subtract_dark: bool
    n_samples: int
    files: Dict[str, str] = field(default_factory=dict)

    def to_meta(self) -> Dict:
        meta = {"covariance": self.covariance.cov, "stderr": self.covariance.stderr,
                "criteria": self.criteria.to_meta(),
                "covariance_criteria": self.covariance_criteria.to_meta(),
                "calibration": self.calibration.to_meta(),
                "subtract_dark": self.subtract_dark, "n_samples": self.n_samples,
                "bootstrap": {}}
        for name, result in self.bootstrap.items():
            meta["bootstrap"][name] = {
                "fit_mean": result.fit_mean, "fit_sigma": result.fit_sigma,
                "fit_converged": result.fit_converged, "excluded": result.excluded,
                "n_values": int(result.values.size), "moments": list(result.moments)}
        return meta


def versions() -> Dict[str, str]:
    return {"tmsv": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


class ExperimentApplication(object):
    """
    Runs virtual experiments described by an ExperimentConfig on a System.
    """

    def __init__(self, system: System):
        self.system: System = system

    def model(self, config: ExperimentConfig) -> ModelReport:
        state = config.experiment().build(jitter=config.model_jitter)
        return ModelReport(state, summarize(state.cov), config.budget.table())

    def fit(self, config: ExperimentConfig, target_cov: Optional[np.ndarray] = None):
        """
        Fits both sources so that config's chain reproduces target_cov, by default the
        reference covariance.
        :return: ExperimentConfig with the fitted sources, and the least-squares result.
        """
        if target_cov is None:
            target_cov = load_reference_covariance().cov
        source_a, source_b, _, result = fit_sources(target_cov, config.budget, config.phi_ent,
                                                    initial=config.sources)
        meta = config.to_meta()
        meta["sources"] = [s.to_meta() for s in (source_a, source_b)]
        return ExperimentConfig.from_meta(meta), result

    def sweep(self, config: ExperimentConfig, path: str, values: Sequence[float],
              out_path: Optional[str] = None) -> Dict[str, np.ndarray]:
        if not path.startswith("model_jitter_rad."):
            resolve_path(config, path)
        columns = {key: [] for key in ("value", "duan", "epr_AB", "epr_BA",
                                       "duan_db", "epr_AB_db", "epr_BA_db")}
        for value in values:
            criteria = self.model(with_value(config, path, value)).criteria
            columns["value"].append(value)
            for key in ("duan", "epr_AB", "epr_BA", "duan_db", "epr_AB_db", "epr_BA_db"):
                columns[key].append(getattr(criteria, key))
        columns = {key: np.asarray(column, dtype=np.float64) for key, column in columns.items()}
        if out_path is not None:
            write_csv(out_path, columns)
            logger.info("sweep: wrote %s", out_path)
        return columns

    def simulate(self, config: ExperimentConfig, out_dir: str) -> Dict:
        """
        Writes the four setting runs plus vacuum and dark calibration runs as raw-sample
        records, and a manifest sufficient to reproduce them.
        """
        os.makedirs(out_dir, exist_ok=True)
        target = self.model(config).state.cov
        manifest = {"manifest_version": manifest_version, "config": config.to_meta(),
                    "config_hash": config_hash(config), "versions": versions(), "runs": []}
        for name, setting, optical, jump in runs:
            synth = config.synth.build(target, optical, config.seed, jump)
            file_name = "%s.tmsv" % name
            path = os.path.join(out_dir, file_name)
            try:
                with RawSampleWriter(path, synth.sample_rate, 2, synth.scale) as writer:
                    for block in iter_rf_blocks(synth, self.system):
                        writer.write(block)
            except OSError as e:
                raise OSError("Writing %s failed: %s" % (path, e)) from e
            digest = sha256_file(path)
            logger.info("simulate: wrote %s (%d samples, sha256 %s)", path, synth.n_samples,
                        digest[:12])
            manifest["runs"].append({"name": name, "file": file_name, "setting": list(setting),
                                     "optical": optical, "seed": config.seed, "jump": jump,
                                     "n_samples": synth.n_samples, "sha256": digest})
        write_json(os.path.join(out_dir, manifest_name), manifest)
        return manifest

    def analyze(self, data_dir: str, config: Optional[ExperimentConfig] = None,
                out_dir: Optional[str] = None) -> AnalysisReport:
        """
        Demodulates, calibrates and reconstructs the covariance of a simulated dataset,
        then bootstraps the criteria.
        """
        manifest = load_manifest(data_dir)
        if config is None:
            config = ExperimentConfig.from_meta(manifest["config"])
        out_dir = data_dir if out_dir is None else out_dir
        os.makedirs(out_dir, exist_ok=True)
        by_name = {run["name"]: run for run in manifest["runs"]}
        if "vacuum" not in by_name:
            raise CalibrationFailure("Dataset %s has no vacuum run." % data_dir)
        settings_runs = [run for run in manifest["runs"] if run["optical"] == "signal"]
        names = [run["name"] for run in settings_runs] + ["vacuum"]
        if "dark" in by_name:
            names.append("dark")
        jobs = []
        for name in names:
            run = by_name[name]
            path = os.path.join(data_dir, run["file"])
            for channel, quadrature in enumerate(run["setting"]):
                demod = config.demod.build(config.synth.carrier_hz, _demod_phase[quadrature])
                jobs.append((path, channel, demod))
        samples = demodulate_records(jobs, self.system)
        by_run = {name: samples[2 * i:2 * i + 2] for i, name in enumerate(names)}

        dark = by_run.get("dark", (None, None))
        calibration = Calibration.from_samples(*by_run["vacuum"], *dark)
        subtract_dark = config.subtract_dark and calibration.dark is not None
        if config.subtract_dark and not subtract_dark:
            logger.warning("analyze: no dark run in %s; dark noise is not subtracted.",
                           data_dir)
        records = []
        files = {}
        for run in settings_runs:
            a, b = (normalize(s, calibration, channel, subtract_dark)
                    for channel, s in enumerate(by_run[run["name"]]))
            records.append(QuadratureSettingRecord(run["setting"][0], run["setting"][1],
                                                   a.values, b.values))
            path = os.path.join(out_dir, "demod_%s.tmsv" % run["name"])
            write_decimated(path, (a.values, b.values), a.effective_rate)
            files["demod_%s" % run["name"]] = path
        dark_norm = {"A": calibration.normalized_dark(0, subtract_dark),
                     "B": calibration.normalized_dark(1, subtract_dark)}
        partial = reconstruct_covariance(records, (dark_norm["A"], dark_norm["B"]))

        by_setting = {record.setting: record for record in records}
        dataset = {"xa": by_setting[("X", "X")].samples_A, "xb": by_setting[("X", "X")].samples_B,
                   "pa": by_setting[("P", "P")].samples_A, "pb": by_setting[("P", "P")].samples_B}
        n = min(len(by_setting[("X", "X")]), len(by_setting[("P", "P")]))
        dataset = {key: value[:n] for key, value in dataset.items()}
        # Joint quadratures from one run; the matrix entries come from separate runs.
        criteria = CriteriaSummary(duan_statistic(dataset, dark_norm),
                                   epr_reid_ab(dataset, dark_norm),
                                   epr_reid_ba(dataset, dark_norm))
        results = {}
        for statistic in config.bootstrap.statistics:
            results[statistic] = bootstrap(dataset, config.bootstrap.build(config.seed, statistic),
                                           self.system, dark_norm)
            files[statistic] = os.path.join(out_dir, "bootstrap_%s.csv" % statistic)
            results[statistic].to_csv(files[statistic])
        report = AnalysisReport(partial, criteria, summarize(partial.cov), results, calibration,
                                subtract_dark, n, files)
        files["covariance"] = os.path.join(out_dir, "covariance.txt")
        partial.to_text(files["covariance"])
        files["report"] = os.path.join(out_dir, "analysis.json")
        write_json(files["report"], report.to_meta())
        logger.info("analyze: wrote %s", sorted(files.values()))
        return report

    def locksim(self, config: ExperimentConfig, out_path: Optional[str] = None):
        """
        Co-simulates the phase locks and the entanglement they leave.
        :return: the StabilityTrace and the criteria at the simulated residual rms.
        """
        loops = config.locks.loops or [LockLoop(name)
                                       for name in ("phi_ent", "phi_A", "phi_B")]
        experiment = config.experiment()
        trace: StabilityTrace = stability_trace(experiment, loops, config.locks.disturbance,
                                                config.locks.duration_s, config.locks.window_s,
                                                config.seed, config.locks.stats_rate_hz)
        residual = {name: rms for name, rms in trace.loop_rms.items() if name != "aux_lo"}
        degraded = jitter_to_entanglement(residual, experiment)
        for name, events in trace.saturation_events.items():
            if events:
                logger.warning("locksim: loop %s saturated %d times.", name, events)
        if out_path is not None:
            trace.to_csv(out_path)
            logger.info("locksim: wrote %s", out_path)
        return trace, degraded


def load_manifest(data_dir: str) -> Dict:
    path = os.path.join(data_dir, manifest_name)
    if not os.path.exists(path):
        raise InvalidArgument("No manifest at %s." % path)
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("manifest_version") != manifest_version:
        raise InvalidArgument("Unsupported manifest version %r."
                              % manifest.get("manifest_version"))
    return manifest
