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
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import firwin, freqz, upfirdn

from tmsv.core import settings
from tmsv.core.analysis.tomography import QuadratureSettingRecord, effective_sample_size
from tmsv.core.errors import CalibrationFailure, DesignFailure, InvalidArgument
from tmsv.core.signal.synth import carrier_phase
from tmsv.core.storage.records import RawSampleStream, read_header, read_stream


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemodConfig:
    demod_freq: float
    demod_phase: float = 0.0
    lowpass_cutoff: float = 50e3
    filter_taps: int = 2401
    decimation: int = 160

    def __post_init__(self):
        if not 0 < self.lowpass_cutoff < self.demod_freq:
            raise InvalidArgument("lowpass_cutoff %s must lie in (0, demod_freq)."
                                  % self.lowpass_cutoff)
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise InvalidArgument("decimation must be an integer >= 1, got %s." % self.decimation)
        if self.filter_taps < 1 or self.filter_taps % 2 == 0:
            raise InvalidArgument("filter_taps must be odd, got %s." % self.filter_taps)

    def with_phase(self, demod_phase: float) -> "DemodConfig":
        return replace(self, demod_phase=demod_phase)

    @property
    def quadrature(self) -> Optional[str]:
        """
        X for demod_phase 0, P for pi/2 (mod 2 pi), None otherwise.
        """
        phase = np.mod(self.demod_phase, 2 * np.pi)
        for label, target in (("X", 0.0), ("P", np.pi / 2)):
            d = abs(phase - target)
            if min(d, 2 * np.pi - d) < 1e-9:
                return label
        return None

    def same_chain(self, other: "DemodConfig") -> bool:
        return (self.demod_freq, self.lowpass_cutoff, self.filter_taps, self.decimation) == \
            (other.demod_freq, other.lowpass_cutoff, other.filter_taps, other.decimation)


@dataclass
class QuadratureSamples:
    values: np.ndarray
    effective_rate: float
    normalization: str = "raw"
    dark_subtracted: bool = False
    config: Optional[DemodConfig] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.normalization not in ("raw", "vacuum_normalized"):
            raise InvalidArgument("Unknown normalization %s." % self.normalization)
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgument("Quadrature samples must be finite.")

    def __len__(self):
        return self.values.size

    def variance(self) -> float:
        return float(np.var(self.values, ddof=1))


def frequency_response(taps: np.ndarray, freqs, sample_rate: float) -> np.ndarray:
    _, response = freqz(taps, worN=np.atleast_1d(np.asarray(freqs, dtype=np.float64)),
                        fs=sample_rate)
    return response


def stopband_attenuation_db(taps: np.ndarray, stop_freq: float, sample_rate: float,
                            n_points: int = 16384) -> float:
    """
    Minimum attenuation in dB over [stop_freq, sample_rate/2].
    """
    freqs = np.linspace(stop_freq, sample_rate / 2, n_points)
    peak = np.max(np.abs(frequency_response(taps, freqs, sample_rate)))
    return float(-20 * np.log10(max(peak, 1e-300)))


def _blackman(cutoff, sample_rate, taps):
    return firwin(taps, cutoff, window="blackman", fs=sample_rate)


def required_taps(cutoff: float, sample_rate: float, stop_factor: float = 2.0,
                  attenuation_db: float = 60.0) -> int:
    """
    Smallest odd Blackman-window length found meeting attenuation_db beyond
    stop_factor * cutoff.
    """
    stop = stop_factor * cutoff
    if stop >= sample_rate / 2:
        return 3
    # Blackman transition width is about 5.5 fs / N.
    n = int(np.ceil(5.5 * sample_rate / (2 * (stop - cutoff)))) | 1
    for _ in range(200):
        if stopband_attenuation_db(_blackman(cutoff, sample_rate, n), stop,
                                   sample_rate) >= attenuation_db:
            return n
        n = int(n * 1.05) | 1
    raise DesignFailure("No Blackman lowpass meets %.1f dB at %.6g Hz." % (attenuation_db, stop))


def design_lowpass(cutoff: float, sample_rate: float, taps: int,
                   attenuation_db: float = 60.0, stop_factor: float = 2.0) -> np.ndarray:
    """
    Linear-phase windowed-sinc lowpass with unit DC gain and at least attenuation_db
    beyond stop_factor * cutoff.
    """
    if not 0 < cutoff < sample_rate / 2:
        raise InvalidArgument("Cutoff %s Hz must lie in (0, %s)." % (cutoff, sample_rate / 2))
    if taps < 1 or taps % 2 == 0:
        raise InvalidArgument("taps must be odd, got %s." % taps)
    h = _blackman(cutoff, sample_rate, taps)
    stop = stop_factor * cutoff
    if stop < sample_rate / 2:
        attenuation = stopband_attenuation_db(h, stop, sample_rate)
        if attenuation < attenuation_db:
            needed = required_taps(cutoff, sample_rate, stop_factor, attenuation_db)
            raise DesignFailure("%d taps give %.1f dB at %.6g Hz, need %.1f dB; use at least "
                                "%d taps." % (taps, attenuation, stop, attenuation_db, needed),
                                required_taps=needed)
    return h


def input_length(n_outputs: int, taps: int, decimation: int) -> int:
    """
    Raw samples needed for n_outputs demodulated samples after edge discard.
    """
    first = -(-(taps - 1) // decimation)
    return (first + n_outputs - 1) * decimation + taps


class Demodulator(object):
    """
    Streaming IQ demodulator for one channel: mix with 2 cos(2 pi f n/fs + phase),
    lowpass, keep every decimation-th output. Output m is centered on input m*D and is
    emitted once one filter length of input exists on both sides, so the first and last
    filter length of the record are discarded. Outputs do not depend on block sizes.
    """

    def __init__(self, config: DemodConfig, sample_rate: float):
        if config.demod_freq >= sample_rate / 2:
            raise InvalidArgument("demod_freq %s Hz is not below Nyquist of %s Hz."
                                  % (config.demod_freq, sample_rate))
        self.config = config
        self.sample_rate = sample_rate
        self.taps = design_lowpass(config.lowpass_cutoff, sample_rate, config.filter_taps)
        self.half = (config.filter_taps - 1) // 2
        self.decimation = int(config.decimation)
        self._pad = (-(config.filter_taps - 1)) % self.decimation
        self._skip = (config.filter_taps - 1 + self._pad) // self.decimation
        self._position = 0
        self._buffer = np.empty(0)
        self._buffer_start = 0
        self._next = -(-(config.filter_taps - 1) // self.decimation)

    @property
    def effective_rate(self) -> float:
        return self.sample_rate / self.decimation

    def mix(self, block: np.ndarray, start: int) -> np.ndarray:
        phase = carrier_phase(self.config.demod_freq, self.sample_rate, start,
                              start + block.size)
        return block * (2 * np.cos(phase + self.config.demod_phase))

    def process(self, block: np.ndarray) -> np.ndarray:
        block = np.asarray(block, dtype=np.float64)
        mixed = self.mix(block, self._position)
        self._position += block.size
        buf = np.concatenate([self._buffer, mixed])
        end = self._buffer_start + buf.size
        d, h2 = self.decimation, 2 * self.half
        last = (end - 1 - h2) // d
        if last < self._next:
            self._buffer = buf
            return np.empty(0)
        g0 = self._next * d - self.half
        seg = buf[g0 - self._buffer_start:last * d + self.half + 1 - self._buffer_start]
        full = upfirdn(self.taps, np.concatenate([np.zeros(self._pad), seg]), down=d)
        count = last - self._next + 1
        out = full[self._skip:self._skip + count]
        self._next = last + 1
        keep_from = self._next * d - self.half
        self._buffer = buf[keep_from - self._buffer_start:]
        self._buffer_start = keep_from
        return out


def demodulate_blocks(blocks, config: DemodConfig, sample_rate: float) -> np.ndarray:
    demodulator = Demodulator(config, sample_rate)
    parts = [demodulator.process(block) for block in blocks]
    return np.concatenate(parts) if parts else np.empty(0)


def iq_demodulate(stream: RawSampleStream, channel: int, config: DemodConfig,
                  block_samples: int = settings.stream_block_samples) -> QuadratureSamples:
    values = demodulate_blocks(stream.iter_blocks(channel, block_samples), config,
                               stream.sample_rate)
    return QuadratureSamples(values, stream.sample_rate / config.decimation, config=config)


def demodulate_records(jobs: Sequence[Tuple[str, int, DemodConfig]], system=None,
                       block_samples: int = settings.stream_block_samples
                       ) -> List[QuadratureSamples]:
    """
    Demodulate (path, channel, config) jobs read from raw-sample files. With a system,
    all jobs run concurrently.
    """
    rates = [read_header(path)["sample_rate"] for path, _, _ in jobs]
    if system is None:
        values = [demodulate_blocks(read_stream(path).iter_blocks(channel, block_samples),
                                    config, rate)
                  for (path, channel, config), rate in zip(jobs, rates)]
    else:
        oids = [system.call("demod_record", path, channel, config, rate, block_samples)
                for (path, channel, config), rate in zip(jobs, rates)]
        values = system.get(oids)
    return [QuadratureSamples(v, rate / config.decimation, config=config)
            for v, rate, (_, _, config) in zip(values, rates, jobs)]


def _variance_with_se(samples: QuadratureSamples, max_lag: int) -> Tuple[float, float]:
    v = samples.variance()
    ess = effective_sample_size(samples.values, max_lag)
    return v, v * np.sqrt(2 / ess)


def estimate_variance(samples: QuadratureSamples, vacuum_ref: QuadratureSamples,
                      dark_ref: Optional[QuadratureSamples] = None, subtract_dark: bool = False,
                      max_lag: int = 128) -> Tuple[float, float]:
    """
    Variance in vacuum units. With subtract_dark the dark variance is removed from
    both the samples and the vacuum reference.
    :return: (variance, standard error); the error uses effective sample sizes.
    """
    refs = [vacuum_ref] + ([dark_ref] if dark_ref is not None else [])
    for ref in refs:
        if samples.config is not None and ref.config is not None and \
                not samples.config.same_chain(ref.config):
            raise InvalidArgument("Samples and references come from different demodulation "
                                  "chains.")
    if subtract_dark and dark_ref is None:
        raise CalibrationFailure("Dark subtraction requested without a dark reference.")
    v_s, se_s = _variance_with_se(samples, max_lag)
    v_v, se_v = _variance_with_se(vacuum_ref, max_lag) if vacuum_ref is not samples \
        else (v_s, se_s)
    v_d, se_d = (0.0, 0.0)
    if dark_ref is not None:
        v_d, se_d = _variance_with_se(dark_ref, max_lag)
        if v_v <= v_d:
            raise CalibrationFailure("Vacuum variance %.6g does not exceed dark variance %.6g."
                                     % (v_v, v_d))
    if not subtract_dark:
        v_d, se_d = 0.0, 0.0
    denominator = v_v - v_d
    ratio = (v_s - v_d) / denominator
    if vacuum_ref is samples:
        se = 0.0
    else:
        se = np.sqrt(se_s ** 2 + ratio ** 2 * se_v ** 2 + (1 - ratio) ** 2 * se_d ** 2) \
            / denominator
    return float(ratio), float(se)


class Calibration(object):
    """
    Vacuum and dark reference variances per channel.
    """

    def __init__(self, vacuum: Tuple[float, float], dark: Optional[Tuple[float, float]] = None):
        if vacuum is None:
            raise CalibrationFailure("No vacuum reference run.")
        self.vacuum = tuple(float(v) for v in vacuum)
        self.dark = None if dark is None else tuple(float(d) for d in dark)
        for channel in range(len(self.vacuum)):
            if self.vacuum[channel] <= (0 if self.dark is None else self.dark[channel]):
                raise CalibrationFailure("Channel %d: vacuum variance %.6g does not exceed the "
                                         "dark variance." % (channel, self.vacuum[channel]))

    @classmethod
    def from_samples(cls, vacuum_A: QuadratureSamples, vacuum_B: QuadratureSamples,
                     dark_A: Optional[QuadratureSamples] = None,
                     dark_B: Optional[QuadratureSamples] = None):
        dark = None
        if dark_A is not None and dark_B is not None:
            dark = (dark_A.variance(), dark_B.variance())
        return cls((vacuum_A.variance(), vacuum_B.variance()), dark)

    def reference(self, channel: int, subtract_dark: bool) -> float:
        if subtract_dark:
            if self.dark is None:
                raise CalibrationFailure("Dark subtraction requested without a dark run.")
            return self.vacuum[channel] - self.dark[channel]
        return self.vacuum[channel]

    def normalized_dark(self, channel: int, subtract_dark: bool) -> float:
        """
        Dark variance in units of the normalized samples, or 0 without subtraction.
        """
        if not subtract_dark:
            return 0.0
        return self.dark[channel] / self.reference(channel, True)

    def to_meta(self):
        return {"vacuum": list(self.vacuum), "dark": None if self.dark is None else list(self.dark)}


def normalize(samples: QuadratureSamples, calibration: Calibration, channel: int,
              subtract_dark: bool = False) -> QuadratureSamples:
    """
    Scale samples so that the vacuum reference (minus dark noise if subtract_dark)
    has unit variance. The dark variance itself is removed by the estimators.
    """
    reference = calibration.reference(channel, subtract_dark)
    return QuadratureSamples(samples.values / np.sqrt(reference), samples.effective_rate,
                             "vacuum_normalized", subtract_dark, samples.config)


def joint_quadrature_run(stream: RawSampleStream, config_A: DemodConfig,
                         config_B: DemodConfig) -> QuadratureSettingRecord:
    if stream.n_channels != 2:
        raise InvalidArgument("Joint run needs a 2-channel stream, got %d." % stream.n_channels)
    labels = []
    for config in (config_A, config_B):
        if config.quadrature is None:
            raise InvalidArgument("demod_phase %s selects neither X (0) nor P (pi/2)."
                                  % config.demod_phase)
        labels.append(config.quadrature)
    a = iq_demodulate(stream, 0, config_A)
    b = iq_demodulate(stream, 1, config_B)
    return QuadratureSettingRecord(labels[0], labels[1], a.values, b.values)
