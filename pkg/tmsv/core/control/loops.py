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
import math
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numba as nb
import numpy as np

from tmsv.core.errors import InvalidArgument
from tmsv.core.storage.utils import Batch
from tmsv.core.systems.utils import block_rng


logger = logging.getLogger(__name__)


# Disturbance and sensor noise are drawn per segment of this many steps.
segment_steps = 2**20
# Jump offset separating the random streams of different loops.
_stream_stride = 1 << 32


@dataclass(frozen=True)
class LockLoop:
    """
    Phase lock with a sinusoidal discriminant and a PI controller.
    Gains act on the error signal: u = -(p_gain e + i_gain sum(e) dt).
    """
    name: str = "phi_ent"
    setpoint: float = 0.0
    error_gain: float = 1.0
    sensor_noise_rms: float = 1e-3
    p_gain: float = 0.5
    i_gain: float = 6283.0
    actuator_range: float = 20.0
    update_rate: float = 1e5

    def __post_init__(self):
        if self.error_gain <= 0:
            raise InvalidArgument("error_gain must be positive, got %s." % self.error_gain)
        if self.update_rate <= 0:
            raise InvalidArgument("update_rate must be positive, got %s." % self.update_rate)
        if self.actuator_range <= 0:
            raise InvalidArgument("actuator_range must be positive, got %s."
                                  % self.actuator_range)
        if self.sensor_noise_rms < 0:
            raise InvalidArgument("sensor_noise_rms must be non-negative.")

    def to_meta(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class DisturbanceModel:
    random_walk_coeff: float = 0.1
    linear_drift: float = 0.0
    initial_offset: float = 0.0

    def __post_init__(self):
        if self.random_walk_coeff < 0:
            raise InvalidArgument("random_walk_coeff must be non-negative, got %s."
                                  % self.random_walk_coeff)

    def to_meta(self) -> Dict:
        return asdict(self)


def error_signal(phi: float, loop: LockLoop, noise_sample: float = 0.0) -> float:
    return loop.error_gain * (math.sin(phi - loop.setpoint)
                              + loop.sensor_noise_rms * noise_sample)


@nb.njit(nogil=True, cache=True)
def _lock_kernel(disturbance, noise, reference, error_gain, noise_rms, p_gain, i_gain, dt,
                 actuator_range, u, integral, saturated):
    n = disturbance.shape[0]
    residual = np.empty(n)
    actuator = np.empty(n)
    events = 0
    for k in range(n):
        r = disturbance[k] + u
        residual[k] = r
        e = error_gain * (math.sin(r + reference[k]) + noise_rms * noise[k])
        integral += e * dt
        v = -(p_gain * e + i_gain * integral)
        clamped = False
        if v > actuator_range:
            v = actuator_range
            clamped = True
        elif v < -actuator_range:
            v = -actuator_range
            clamped = True
        if clamped and not saturated:
            events += 1
        saturated = clamped
        u = v
        actuator[k] = u
    return residual, actuator, u, integral, saturated, events


class LockSimulator(object):
    """
    Discrete-time state machine of one loop. The residual phi - setpoint at step k is
    disturbance[k] plus the actuator value from step k-1.
    """

    def __init__(self, loop: LockLoop, disturbance: DisturbanceModel, seed: int, stream: int = 0):
        self.loop = loop
        self.disturbance = disturbance
        self.seed = seed
        self.stream = stream
        self.dt = 1 / loop.update_rate
        self.step = 0
        self.segment = 0
        self.walk = 0.0
        self.u = 0.0
        self.integral = 0.0
        self.saturated = False
        self.saturation_events = 0

    def _disturbance(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        model = self.disturbance
        jump = self.stream * _stream_stride + 2 * self.segment
        steps = np.arange(self.step, self.step + n, dtype=np.float64)
        d = model.initial_offset + model.linear_drift * steps * self.dt
        if model.random_walk_coeff > 0:
            increments = block_rng(self.seed, jump).standard_normal(n)
            walk = self.walk + model.random_walk_coeff * np.sqrt(self.dt) * np.cumsum(increments)
            self.walk = walk[-1]
            d = d + walk
        if self.loop.sensor_noise_rms > 0:
            noise = block_rng(self.seed, jump + 1).standard_normal(n)
        else:
            noise = np.zeros(n)
        return d, noise

    def advance(self, n: int, reference: Optional[np.ndarray] = None):
        """
        :return: (residual, disturbance, actuator) for the next n steps.
        """
        assert n <= segment_steps
        d, noise = self._disturbance(n)
        reference = np.zeros(n) if reference is None else np.asarray(reference, dtype=np.float64)
        loop = self.loop
        residual, actuator, self.u, self.integral, self.saturated, events = _lock_kernel(
            d, noise, reference, loop.error_gain, loop.sensor_noise_rms, loop.p_gain,
            loop.i_gain, self.dt, loop.actuator_range, self.u, self.integral, self.saturated)
        if events:
            logger.warning("Loop %s: actuator saturated %d time(s) near t=%.3f s.",
                           loop.name, events, self.step * self.dt)
        self.saturation_events += events
        self.step += n
        self.segment += 1
        return residual, d, actuator


@dataclass
class LockResult:
    name: str
    times: np.ndarray
    residual: np.ndarray
    disturbance: np.ndarray
    actuator: np.ndarray
    rms: float
    saturation_events: int
    n_steps: int
    window_mean: Optional[np.ndarray] = None
    window_std: Optional[np.ndarray] = None


class _Accumulator(object):

    def __init__(self, n_steps: int, rate: float, window: Optional[float], record_every: int,
                 settle_time: float):
        self.n_steps = n_steps
        self.rate = rate
        self.record_every = record_every
        self.settle = int(round(settle_time * rate))
        self.sum_sq = 0.0
        self.count = 0
        self.recorded = ([], [], [], [])
        self.window_steps = None
        if window is not None:
            self.window_steps = int(round(window * rate))
            self.n_windows = n_steps // self.window_steps
            self.w_sum = np.zeros(self.n_windows)
            self.w_sq = np.zeros(self.n_windows)
            self.w_count = np.zeros(self.n_windows)

    def add(self, start: int, residual, disturbance, actuator):
        steps = np.arange(start, start + residual.size)
        settled = steps >= self.settle
        self.sum_sq += float(np.sum(residual[settled] ** 2))
        self.count += int(np.sum(settled))
        keep = steps % self.record_every == 0
        for store, values in zip(self.recorded, (steps, residual, disturbance, actuator)):
            store.append(values[keep])
        if self.window_steps is not None:
            index = steps // self.window_steps
            inside = index < self.n_windows
            n = self.n_windows
            self.w_sum += np.bincount(index[inside], residual[inside], n)
            self.w_sq += np.bincount(index[inside], residual[inside] ** 2, n)
            self.w_count += np.bincount(index[inside], None, n)

    def result(self, name: str, events: int) -> LockResult:
        steps, residual, disturbance, actuator = (np.concatenate(s) for s in self.recorded)
        rms = np.sqrt(self.sum_sq / self.count) if self.count else np.nan
        result = LockResult(name, steps / self.rate, residual, disturbance, actuator,
                            float(rms), events, self.n_steps)
        if self.window_steps is not None:
            mean = self.w_sum / self.w_count
            result.window_mean = mean
            result.window_std = np.sqrt(np.maximum(self.w_sq / self.w_count - mean ** 2, 0))
        return result


def _n_steps(duration: float, rate: float) -> int:
    if duration <= 0:
        raise InvalidArgument("duration must be positive, got %s." % duration)
    return int(round(duration * rate))


def run_lock(loop: LockLoop, disturbance: DisturbanceModel, duration: float, seed: int,
             reference: Optional[np.ndarray] = None, window: Optional[float] = None,
             record_every: int = 1, settle_time: float = 0.01, stream: int = 0) -> LockResult:
    """
    Simulate the loop at loop.update_rate for duration seconds.
    :param reference: phase error added at the sensor, e.g. the residual of an upstream loop.
    :param window: if given, residual mean and std per window are reported.
    :param settle_time: initial time excluded from the rms.
    """
    n_steps = _n_steps(duration, loop.update_rate)
    sim = LockSimulator(loop, disturbance, seed, stream)
    acc = _Accumulator(n_steps, loop.update_rate, window, record_every, settle_time)
    for start, stop in Batch(n_steps, segment_steps).batches:
        ref = None if reference is None else reference[start:stop]
        acc.add(start, *sim.advance(stop - start, ref))
    return acc.result(loop.name, sim.saturation_events)


def run_cascade(aux_loop: LockLoop, aux_disturbance: DisturbanceModel, loop: LockLoop,
                disturbance: DisturbanceModel, duration: float, seed: int,
                window: Optional[float] = None, record_every: int = 1,
                settle_time: float = 0.01, stream: int = 0) -> Tuple[LockResult, LockResult]:
    """
    Two-stage lock: the residual of aux_loop enters the sensor of loop.
    """
    if aux_loop.update_rate != loop.update_rate:
        raise InvalidArgument("Cascaded loops must share an update rate.")
    n_steps = _n_steps(duration, loop.update_rate)
    aux = LockSimulator(aux_loop, aux_disturbance, seed, stream)
    main = LockSimulator(loop, disturbance, seed, stream + 1)
    aux_acc = _Accumulator(n_steps, loop.update_rate, window, record_every, settle_time)
    acc = _Accumulator(n_steps, loop.update_rate, window, record_every, settle_time)
    for start, stop in Batch(n_steps, segment_steps).batches:
        aux_out = aux.advance(stop - start)
        aux_acc.add(start, *aux_out)
        acc.add(start, *main.advance(stop - start, aux_out[0]))
    return aux_acc.result(aux_loop.name, aux.saturation_events), \
        acc.result(loop.name, main.saturation_events)
