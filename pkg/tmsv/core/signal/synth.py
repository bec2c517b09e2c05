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
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.signal import firwin, upfirdn

from tmsv.core import settings
from tmsv.core.errors import FactorizationFailure, InvalidArgument
from tmsv.core.optics.state import GaussianState
from tmsv.core.storage.records import RawSampleStream
from tmsv.core.storage.utils import Batch
from tmsv.core.systems.utils import block_rng


logger = logging.getLogger(__name__)


optical_inputs = ("signal", "vacuum", "blocked")

# Intermediate-rate samples kept beyond both record ends for the interpolator.
_pad = 8
# Interpolator half length in intermediate-rate samples.
_interp_half = 6


def covariance_factor(cov, clamp=1e-10) -> np.ndarray:
    """
    L with L L^T = cov from a symmetric eigendecomposition. Eigenvalues in
    [-clamp, 0) are treated as 0.
    """
    cov = np.asarray(cov, dtype=np.float64)
    eigvals, eigvecs = np.linalg.eigh((cov + cov.T) / 2)
    if np.min(eigvals) < -clamp:
        raise FactorizationFailure("Covariance is not positive semidefinite "
                                   "(min eigenvalue %.3e)." % np.min(eigvals))
    return eigvecs * np.sqrt(np.clip(eigvals, 0, None))


def correlated_white(cov, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    factor = covariance_factor(cov)
    return factor @ rng.standard_normal((factor.shape[1], n_samples))


def _band_limited_white(n_rows: int, n_samples: int, bandwidth: float, sample_rate: float,
                        rng: np.random.Generator) -> np.ndarray:
    white = rng.standard_normal((n_rows, n_samples))
    spectrum = np.fft.rfft(white, axis=1)
    keep = np.fft.rfftfreq(n_samples, d=1 / sample_rate) <= bandwidth
    spectrum[:, ~keep] = 0
    band = np.fft.irfft(spectrum, n_samples, axis=1)
    # Fraction of the n DFT bins kept: DC once, every other kept bin twice.
    kept_fraction = (2 * np.count_nonzero(keep) - 1) / n_samples
    return band / np.sqrt(kept_fraction)


def synthesize_baseband(target_cov, n_samples: int, bandwidth: float, sample_rate: float,
                        seed: int, jump: int = 0) -> np.ndarray:
    """
    Zero-mean jointly Gaussian processes with flat spectrum up to bandwidth.
    :return: (n, n_samples) array, one row per entry of target_cov's ordering.
    """
    if not 0 < bandwidth < sample_rate / 2:
        raise InvalidArgument("bandwidth %s must lie in (0, sample_rate/2)." % bandwidth)
    if n_samples < 2:
        raise InvalidArgument("n_samples must be >= 2, got %s." % n_samples)
    factor = covariance_factor(target_cov)
    band = _band_limited_white(factor.shape[1], n_samples, bandwidth, sample_rate,
                               block_rng(seed, jump))
    return factor @ band


def fold_frequency(frequency: float, sample_rate: float) -> float:
    f = np.mod(frequency, sample_rate)
    return float(sample_rate - f if f > sample_rate / 2 else f)


def paper_spur_tones(carrier_hz: float, amplitude: float = 0.05) -> List[Tuple[float, float]]:
    """
    The analog modulation frequencies of the locking scheme, scaled with the carrier.
    """
    factor = carrier_hz / settings.paper_carrier_hz
    return [(f * factor, amplitude) for f in settings.paper_spur_frequencies]


@dataclass
class SynthConfig:
    target_cov: np.ndarray
    carrier_freq: float
    sample_rate: float
    duration: float
    dark_noise_db: Optional[float] = -20.0
    spur_tones: List[Tuple[float, float]] = field(default_factory=list)
    lo_phase_A: float = 0.0
    lo_phase_B: float = 0.0
    seed: int = 0
    bandwidth: float = 25e3
    gain: float = 1.0
    optical: str = "signal"
    jump: int = 0

    def __post_init__(self):
        self.target_cov = np.asarray(self.target_cov, dtype=np.float64)
        if self.optical not in optical_inputs:
            raise InvalidArgument("optical must be one of %s, got %s."
                                  % (optical_inputs, self.optical))
        if self.optical == "signal":
            GaussianState(self.target_cov).validate(physical=True)
        if self.dark_noise_db is not None and self.dark_noise_db > 0:
            raise InvalidArgument("dark_noise_db must be <= 0, got %s." % self.dark_noise_db)
        if not 0 < self.carrier_freq < self.sample_rate / 2:
            raise InvalidArgument("Carrier %s Hz is not below Nyquist of %s Hz."
                                  % (self.carrier_freq, self.sample_rate))
        if not 0 < self.bandwidth < self.carrier_freq:
            raise InvalidArgument("bandwidth %s must lie below the carrier." % self.bandwidth)
        if self.duration <= 0 or self.n_samples < 2:
            raise InvalidArgument("duration %s s yields fewer than 2 samples." % self.duration)
        if self.gain <= 0:
            raise InvalidArgument("gain must be positive, got %s." % self.gain)

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def dark_variance(self) -> float:
        if self.dark_noise_db is None or np.isneginf(self.dark_noise_db):
            return 0.0
        return 10 ** (self.dark_noise_db / 10)

    @property
    def scale(self) -> float:
        return self.gain ** 2 * (1 + self.dark_variance)


class RfPlan(object):
    """
    Baseband processes are drawn at an intermediate rate sample_rate/U and
    interpolated to the RF rate with a windowed-sinc filter. Every RF sample is a
    fixed function of the intermediate-rate samples, so blocks can be computed
    independently and in any order.
    """

    def __init__(self, config: SynthConfig):
        self.config = config
        fs, bandwidth = config.sample_rate, config.bandwidth
        self.up = max(1, int(fs // (4 * bandwidth)))
        self.intermediate_rate = fs / self.up
        self.n_intermediate = -(-config.n_samples // self.up) + 2 * _pad + 1
        if self.up > 1:
            self.taps = firwin(2 * _interp_half * self.up + 1, self.intermediate_rate / 2,
                               window="blackman", fs=fs) * self.up
        else:
            self.taps = np.ones(1)
        self.tones = self._fold_tones()

    def _fold_tones(self) -> List[Tuple[float, float]]:
        config = self.config
        tones = []
        for frequency, amplitude in config.spur_tones:
            folded = fold_frequency(frequency, config.sample_rate)
            if folded != frequency:
                logger.warning("Spur tone at %.6g Hz lies above Nyquist; folded to %.6g Hz.",
                               frequency, folded)
            if abs(folded - config.carrier_freq) <= 2 * config.bandwidth:
                logger.warning("Config conflict: spur tone at %.6g Hz falls inside the "
                               "analysis band around the %.6g Hz carrier.",
                               folded, config.carrier_freq)
            tones.append((folded, amplitude))
        return tones

    def baseband(self) -> np.ndarray:
        """
        Rows X_A, P_A, X_B, P_B, then dark I_A, Q_A, I_B, Q_B when dark noise is on.
        """
        config = self.config
        n, rate = self.n_intermediate, self.intermediate_rate
        if config.optical == "signal":
            quadratures = synthesize_baseband(config.target_cov, n, config.bandwidth, rate,
                                              config.seed, config.jump)
        elif config.optical == "vacuum":
            quadratures = synthesize_baseband(np.eye(4), n, config.bandwidth, rate,
                                              config.seed, config.jump)
        else:
            quadratures = np.zeros((4, n))
        rows = [quadratures]
        if config.dark_variance > 0:
            rows.append(synthesize_baseband(config.dark_variance * np.eye(4), n,
                                            config.bandwidth, rate, config.seed,
                                            config.jump + 1))
        return np.vstack(rows)

    def params(self) -> Dict:
        config = self.config
        return {
            "carrier_freq": config.carrier_freq,
            "sample_rate": config.sample_rate,
            "lo_phases": (config.lo_phase_A, config.lo_phase_B),
            "gain": config.gain,
            "up": self.up,
            "taps": self.taps,
            "tones": self.tones,
        }


def _interpolate(baseband: np.ndarray, start: int, stop: int, up: int,
                 taps: np.ndarray) -> np.ndarray:
    if up == 1:
        return baseband[:, start + _pad:stop + _pad]
    half = _interp_half * up
    # Intermediate sample k sits at RF index (k - _pad) * up.
    k0 = (start - half) // up + _pad
    k1 = (stop - 1 + half) // up + _pad + 1
    upsampled = upfirdn(taps, baseband[:, k0:k1], up=up, axis=1)
    m0 = start + half - (k0 - _pad) * up
    return upsampled[:, m0:m0 + stop - start]


def carrier_phase(frequency: float, sample_rate: float, start: int, stop: int) -> np.ndarray:
    """
    2*pi*f*n/fs for n in [start, stop), reduced to one cycle before scaling.
    """
    n = np.arange(start, stop, dtype=np.float64)
    return 2 * np.pi * np.mod(n * (frequency / sample_rate), 1.0)


def rf_block(baseband: np.ndarray, start: int, stop: int, params: Dict) -> np.ndarray:
    """
    s = X cos(wt + phi_LO) - P sin(wt + phi_LO) + dark + tones, times gain, per channel.
    """
    fs = params["sample_rate"]
    interp = _interpolate(baseband, start, stop, params["up"], params["taps"])
    wt = carrier_phase(params["carrier_freq"], fs, start, stop)
    tones = np.zeros(stop - start)
    for frequency, amplitude in params["tones"]:
        tones += amplitude * np.cos(carrier_phase(frequency, fs, start, stop))
    out = np.empty((2, stop - start))
    cos_wt, sin_wt = np.cos(wt), np.sin(wt)
    for channel, lo_phase in enumerate(params["lo_phases"]):
        theta = wt + lo_phase
        x, p = interp[2 * channel], interp[2 * channel + 1]
        s = x * np.cos(theta) - p * np.sin(theta) + tones
        if interp.shape[0] > 4:
            s += interp[4 + 2 * channel] * cos_wt - interp[5 + 2 * channel] * sin_wt
        out[channel] = params["gain"] * s
    return out


def iter_rf_blocks(config: SynthConfig, system=None,
                   block_samples: int = settings.stream_block_samples,
                   in_flight: int = 8) -> Iterator[np.ndarray]:
    """
    Yields consecutive (2, n) RF blocks. With a system, up to in_flight blocks are
    computed concurrently.
    """
    plan = RfPlan(config)
    baseband = plan.baseband()
    params = plan.params()
    batches = Batch(config.n_samples, block_samples).batches
    if system is None:
        for start, stop in batches:
            yield rf_block(baseband, start, stop, params)
        return
    baseband_ref = system.put(baseband)
    for i in range(0, len(batches), in_flight):
        oids = [system.call("rf_block", baseband_ref, start, stop, params)
                for start, stop in batches[i:i + in_flight]]
        for block in system.get(oids):
            yield block


def synthesize_rf(config: SynthConfig, system=None,
                  block_samples: int = settings.stream_block_samples) -> RawSampleStream:
    channels = np.hstack(list(iter_rf_blocks(config, system, block_samples)))
    return RawSampleStream(config.sample_rate, channels, config.scale)
