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


import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from tmsv.core.errors import IncompleteTomography, InvalidArgument


quadratures = ("X", "P")
settings = (("X", "X"), ("X", "P"), ("P", "X"), ("P", "P"))

# Index of each quadrature in the (X_A, P_A, X_B, P_B) ordering.
_index = {("A", "X"): 0, ("A", "P"): 1, ("B", "X"): 2, ("B", "P"): 3}

reference_covariance_path = os.path.join(os.path.dirname(os.path.dirname(
    os.path.dirname(os.path.abspath(__file__)))), "data", "reference_covariance.txt")


def load_reference_covariance(path: str = reference_covariance_path) -> "PartialCovariance":
    cov = np.loadtxt(path, comments="#")
    return PartialCovariance(cov, measured_mask())


def measured_mask() -> np.ndarray:
    mask = np.ones((4, 4), dtype=bool)
    for i, j in ((0, 1), (2, 3)):
        mask[i, j] = mask[j, i] = False
    return mask


def effective_sample_size(values: np.ndarray, max_lag: int = 128) -> float:
    """
    Sample count of an uncorrelated record with the same variance-estimator spread:
    N / sum_k rho(k)**2, the sum running over lags -max_lag..max_lag. Squared
    correlations govern second moments; N / sum_k |rho(k)| would suit a mean and is not used.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 2:
        raise InvalidArgument("Need at least 2 samples, got %d." % n)
    x = x - x.mean()
    max_lag = int(min(max_lag, n // 4))
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spectrum = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), nfft)[:max_lag + 1] / n
    if acov[0] <= 0:
        return float(n)
    rho = acov / acov[0]
    return float(n / (1 + 2 * np.sum(rho[1:] ** 2)))


@dataclass
class QuadratureSettingRecord:
    setting_A: str
    setting_B: str
    samples_A: np.ndarray
    samples_B: np.ndarray

    def __post_init__(self):
        if self.setting_A not in quadratures or self.setting_B not in quadratures:
            raise InvalidArgument("Settings must be X or P, got (%s, %s)."
                                  % (self.setting_A, self.setting_B))
        self.samples_A = np.asarray(self.samples_A, dtype=np.float64)
        self.samples_B = np.asarray(self.samples_B, dtype=np.float64)
        if self.samples_A.shape != self.samples_B.shape or self.samples_A.ndim != 1:
            raise InvalidArgument("Sample vectors must be 1-d and of equal length.")
        if self.samples_A.size < 2:
            raise InvalidArgument("Need at least 2 samples per record.")

    @property
    def setting(self) -> Tuple[str, str]:
        return self.setting_A, self.setting_B

    def __len__(self):
        return self.samples_A.size


class PartialCovariance(object):
    """
    Two-mode covariance with a mask of the entries determined by measurement.
    Unmeasured entries are stored as 0.
    """

    def __init__(self, cov, measured_mask, stderr=None):
        self.cov: np.ndarray = np.asarray(cov, dtype=np.float64)
        self.measured_mask: np.ndarray = np.asarray(measured_mask, dtype=bool)
        if self.cov.shape != (4, 4) or self.measured_mask.shape != (4, 4):
            raise InvalidArgument("PartialCovariance needs 4x4 matrices.")
        if not np.array_equal(self.measured_mask, self.measured_mask.T):
            raise InvalidArgument("Mask must be symmetric.")
        if not np.all(self.measured_mask | measured_mask_allowed_gaps()):
            raise InvalidArgument("Only the intra-mode X-P entries may be unmeasured.")
        measured = self.measured_mask
        if not np.allclose(self.cov[measured], self.cov.T[measured], rtol=1e-12, atol=1e-12):
            raise InvalidArgument("Measured entries are not symmetric.")
        self.stderr: Optional[np.ndarray] = None if stderr is None else np.asarray(stderr)

    @property
    def n_measured(self) -> int:
        return int(np.sum(self.measured_mask))

    def to_text(self, path: str):
        header = "Order: X_A P_A X_B P_B. Unmeasured entries (mask false) stored as 0."
        np.savetxt(path, self.cov, fmt="%.6f", header=header)
        if self.stderr is not None:
            np.savetxt(path + ".stderr", self.stderr, fmt="%.6f", header=header)


def measured_mask_allowed_gaps() -> np.ndarray:
    return ~measured_mask()


def _variance(x: np.ndarray) -> float:
    return float(np.var(x, ddof=1))


def _covariance(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.cov(x, y, ddof=1)[0, 1])


def reconstruct_covariance(records: List[QuadratureSettingRecord], dark=None,
                           max_lag: int = 128) -> PartialCovariance:
    """
    Partial tomography from the four joint settings (X,X), (X,P), (P,X), (P,P).
    Variances measured in two settings are averaged. The intra-mode X-P covariances
    are not accessible and stay unmeasured.
    :param dark: optional (dark_A, dark_B) variances, in the records' units, removed
                 from the diagonal.
    """
    by_setting = {}
    for record in records:
        by_setting[record.setting] = record
    missing = [s for s in settings if s not in by_setting]
    if missing:
        raise IncompleteTomography("Missing quadrature settings %s." % missing)

    cov = np.zeros((4, 4))
    var_se = np.zeros((4, 4))
    variances = {key: [] for key in _index}
    for (qa, qb), record in ((s, by_setting[s]) for s in settings):
        ess = min(effective_sample_size(record.samples_A, max_lag),
                  effective_sample_size(record.samples_B, max_lag))
        va, vb = _variance(record.samples_A), _variance(record.samples_B)
        c = _covariance(record.samples_A, record.samples_B)
        i, j = _index[("A", qa)], _index[("B", qb)]
        cov[i, j] = cov[j, i] = c
        var_se[i, j] = var_se[j, i] = (va * vb + c ** 2) / ess
        variances[("A", qa)].append((va, ess))
        variances[("B", qb)].append((vb, ess))

    dark = (0.0, 0.0) if dark is None else dark
    for (mode, q), estimates in variances.items():
        i = _index[(mode, q)]
        v = np.mean([e[0] for e in estimates])
        # Averaged estimates from independent runs.
        var_se[i, i] = np.sum([2 * e[0] ** 2 / e[1] for e in estimates]) / len(estimates) ** 2
        cov[i, i] = v - dark[0 if mode == "A" else 1]
    return PartialCovariance(cov, measured_mask(), np.sqrt(var_se))
