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


import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Union

import numpy as np

from tmsv.core.analysis.criteria import CriteriaSummary, summarize
from tmsv.core.control.loops import (DisturbanceModel, LockLoop, LockResult, run_cascade,
                                     run_lock)
from tmsv.core.errors import InvalidArgument
from tmsv.core.optics import ops
from tmsv.core.optics.experiment import Experiment, locked_phases
from tmsv.core.optics.state import GaussianState
from tmsv.core.signal.synth import correlated_white
from tmsv.core.storage.utils import write_csv
from tmsv.core.systems.utils import block_rng


logger = logging.getLogger(__name__)


# Jump offset of the per-window quadrature sample streams.
_sample_stream = 1 << 48

ModelState = Union[GaussianState, Experiment]


def degrade(model: ModelState, offsets: Optional[Mapping[str, float]] = None,
            jitter: Optional[Mapping[str, float]] = None) -> GaussianState:
    """
    Detected state with static phase errors and Gaussian jitter on the locked phases.
    For a bare GaussianState, phi_ent acts between the balanced beam splitter's inputs,
    reached by undoing and re-applying the beam splitter.
    """
    offsets = {} if offsets is None else dict(offsets)
    jitter = {} if jitter is None else dict(jitter)
    for name in list(offsets) + list(jitter):
        if name not in locked_phases:
            raise InvalidArgument("Unknown locked phase '%s', expected one of %s."
                                  % (name, locked_phases))
    if isinstance(model, Experiment):
        return model.build(jitter=jitter, offsets=offsets)
    state = model
    if offsets.get("phi_ent", 0.0) or jitter.get("phi_ent", 0.0):
        splitter = ops.beamsplitter_matrix(2, 0, 1, 0.5)
        state = ops.transform(state, splitter.T)
        state = ops.rotate(state, 1, offsets.get("phi_ent", 0.0))
        state = ops.apply_phase_jitter(state, 1, jitter.get("phi_ent", 0.0))
        state = ops.transform(state, splitter)
    for mode, name in ((0, "phi_A"), (1, "phi_B")):
        if offsets.get(name, 0.0):
            state = ops.rotate(state, mode, offsets[name])
        if jitter.get(name, 0.0):
            state = ops.apply_phase_jitter(state, mode, jitter[name])
    return state


def jitter_to_entanglement(residual_rms: Mapping[str, float],
                           base_state: ModelState) -> CriteriaSummary:
    """
    Duan and EPR-Reid values once each locked phase carries Gaussian jitter of the
    given rms (radians).
    """
    if isinstance(base_state, GaussianState):
        base_state.validate(physical=True)
    return summarize(degrade(base_state, jitter=residual_rms).cov)


@dataclass
class StabilityTrace:
    times: np.ndarray
    duan_values: np.ndarray
    var_x_sum_db: np.ndarray
    var_p_diff_db: np.ndarray
    window: float
    samples_per_window: int
    loop_rms: Dict[str, float] = field(default_factory=dict)
    saturation_events: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(self.times), len(self.duan_values), len(self.var_x_sum_db),
                   len(self.var_p_diff_db)}
        if len(lengths) != 1:
            raise InvalidArgument("Trace columns have unequal lengths.")
        if self.window <= 0:
            raise InvalidArgument("window must be positive.")

    def __len__(self):
        return len(self.times)

    def predicted_scatter_db(self) -> float:
        """
        Standard deviation of a windowed variance in dB for uncorrelated samples.
        """
        return float(10 / np.log(10) * np.sqrt(2 / self.samples_per_window))

    def max_deviation_db(self) -> float:
        return float(max(np.max(np.abs(self.var_x_sum_db - np.mean(self.var_x_sum_db))),
                         np.max(np.abs(self.var_p_diff_db - np.mean(self.var_p_diff_db)))))

    def is_flat(self, tolerance_db: float = 0.3) -> bool:
        return self.max_deviation_db() < tolerance_db

    def to_csv(self, path: str):
        write_csv(path, {"time_s": self.times, "var_x_sum_db": self.var_x_sum_db,
                         "var_p_diff_db": self.var_p_diff_db, "duan": self.duan_values})


def simulate_locks(loops: List[LockLoop], disturbance: DisturbanceModel, duration: float,
                   window: float, seed: int) -> Dict[str, LockResult]:
    """
    Runs every loop; a loop named aux_lo is cascaded into the phi_ent loop.
    """
    by_name = {}
    for loop in loops:
        if loop.name in by_name:
            raise InvalidArgument("Duplicate loop name '%s'." % loop.name)
        by_name[loop.name] = loop
    results = {}
    for stream, loop in enumerate(loops):
        if loop.name == "aux_lo":
            continue
        if loop.name == "phi_ent" and "aux_lo" in by_name:
            aux, main = run_cascade(by_name["aux_lo"], disturbance, loop, disturbance, duration,
                                    seed, window=window, record_every=100,
                                    stream=2 * len(loops) + 2 * stream)
            results["aux_lo"], results["phi_ent"] = aux, main
        else:
            results[loop.name] = run_lock(loop, disturbance, duration, seed, window=window,
                                          record_every=100, stream=stream)
    return results


def stability_trace(model_state: ModelState, loops: List[LockLoop],
                    disturbance: DisturbanceModel, duration: float, window: float, seed: int,
                    sample_rate: float = 1e5) -> StabilityTrace:
    """
    Co-simulates the locks and, per window, draws sample_rate * window joint quadrature
    samples from the state degraded by that window's residual mean and spread.
    Variances are reported in dB below the vacuum level of the joint quadrature.
    """
    if not 0 < window < duration:
        raise InvalidArgument("window %s must lie in (0, duration=%s)." % (window, duration))
    for loop in loops:
        if loop.name not in locked_phases + ("aux_lo",):
            raise InvalidArgument("Loop name '%s' is not a locked phase." % loop.name)
    results = simulate_locks(loops, disturbance, duration, window, seed)
    n_windows = int(np.floor(duration / window + 1e-9))
    n_samples = int(round(window * sample_rate))
    if n_samples < 2:
        raise InvalidArgument("window holds fewer than 2 samples at %s Hz." % sample_rate)
    var_x = np.empty(n_windows)
    var_p = np.empty(n_windows)
    for w in range(n_windows):
        offsets, jitter = {}, {}
        for name in locked_phases:
            if name in results and results[name].window_mean is not None:
                offsets[name] = results[name].window_mean[w]
                jitter[name] = results[name].window_std[w]
        cov = degrade(model_state, offsets, jitter).cov
        samples = correlated_white(cov, n_samples, block_rng(seed, _sample_stream + w))
        var_x[w] = np.var(samples[0] + samples[2], ddof=1)
        var_p[w] = np.var(samples[1] - samples[3], ddof=1)
    times = (np.arange(n_windows) + 0.5) * window
    trace = StabilityTrace(times, var_x + var_p, 10 * np.log10(2 / var_x),
                           10 * np.log10(2 / var_p), window, n_samples,
                           {name: r.rms for name, r in results.items()},
                           {name: r.saturation_events for name, r in results.items()})
    logger.info("stability_trace: %d windows, max deviation %.3f dB, loop rms %s",
                n_windows, trace.max_deviation_db(), trace.loop_rms)
    return trace
