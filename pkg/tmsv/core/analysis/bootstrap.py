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
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.optimize import curve_fit

from tmsv.core import settings
from tmsv.core.errors import (DegenerateDistribution, DegenerateInput, FitFailure,
                              InvalidArgument)
from tmsv.core.storage.utils import Batch
from tmsv.core.systems.utils import block_rng


logger = logging.getLogger(__name__)


# Statistics over a paired quadrature dataset. Keys: xa, xb from the (X, X) setting,
# pa, pb from the (P, P) setting, values for scalar records. dark maps "A"/"B"
# to dark-noise variances removed from each channel's variance.

def _var(x):
    return np.var(x, ddof=1)


def _cov(x, y):
    return np.sum((x - x.mean()) * (y - y.mean())) / (x.size - 1)


def variance_x_sum(data: Mapping, dark: Mapping) -> float:
    return _var(data["xa"] + data["xb"]) - dark["A"] - dark["B"]


def variance_p_diff(data: Mapping, dark: Mapping) -> float:
    return _var(data["pa"] - data["pb"]) - dark["A"] - dark["B"]


def duan_statistic(data: Mapping, dark: Mapping) -> float:
    return variance_x_sum(data, dark) + variance_p_diff(data, dark)


def _inferred_product(xt, xc, pt, pc, dark_t, dark_c):
    var_xc = _var(xc) - dark_c
    var_pc = _var(pc) - dark_c
    if var_xc <= 0 or var_pc <= 0:
        raise DegenerateInput("Conditioning variance is not positive.")
    cond_x = _var(xt) - dark_t - _cov(xt, xc) ** 2 / var_xc
    cond_p = _var(pt) - dark_t - _cov(pt, pc) ** 2 / var_pc
    return cond_x * cond_p


def epr_reid_ab(data: Mapping, dark: Mapping) -> float:
    return _inferred_product(data["xa"], data["xb"], data["pa"], data["pb"], dark["A"], dark["B"])


def epr_reid_ba(data: Mapping, dark: Mapping) -> float:
    return _inferred_product(data["xb"], data["xa"], data["pb"], data["pa"], dark["B"], dark["A"])


def mean_statistic(data: Mapping, dark: Mapping) -> float:
    return np.mean(data["values"])


statistics: Dict[str, Callable] = {
    "duan": duan_statistic,
    "epr_reid_AB": epr_reid_ab,
    "epr_reid_BA": epr_reid_ba,
    "variance_x_sum": variance_x_sum,
    "variance_p_diff": variance_p_diff,
    "mean": mean_statistic,
}

_required_keys = {
    "duan": ("xa", "xb", "pa", "pb"),
    "epr_reid_AB": ("xa", "xb", "pa", "pb"),
    "epr_reid_BA": ("xa", "xb", "pa", "pb"),
    "variance_x_sum": ("xa", "xb"),
    "variance_p_diff": ("pa", "pb"),
    "mean": ("values",),
}


def resolve_statistic(statistic: Union[str, Callable]) -> Callable:
    if callable(statistic):
        return statistic
    if statistic not in statistics:
        raise InvalidArgument("Unknown statistic '%s', expected one of %s."
                              % (statistic, sorted(statistics)))
    return statistics[statistic]


def _dataset_length(dataset: Mapping, statistic) -> int:
    keys = _required_keys.get(statistic, tuple(dataset)) if isinstance(statistic, str) \
        else tuple(dataset)
    lengths = set()
    for key in keys:
        if key not in dataset:
            raise InvalidArgument("Statistic %s needs dataset key '%s'." % (statistic, key))
        lengths.add(len(dataset[key]))
    if len(lengths) != 1:
        raise InvalidArgument("Dataset arrays have unequal lengths %s." % sorted(lengths))
    return lengths.pop()


def chunk_indices(rng: np.random.Generator, n: int, chunk_len: int, mode: str,
                  block_len: int) -> np.ndarray:
    if mode == "iid":
        return rng.integers(0, n, chunk_len)
    if mode == "block":
        block_len = min(block_len, n)
        n_blocks = -(-chunk_len // block_len)
        starts = rng.integers(0, n - block_len + 1, n_blocks)
        return (starts[:, None] + np.arange(block_len)).ravel()[:chunk_len]
    raise InvalidArgument("Unknown bootstrap mode '%s'." % mode)


def evaluate_chunks(dataset: Mapping, statistic, dark: Optional[Mapping], seed: int,
                    start: int, stop: int, chunk_len: int, mode: str = "iid",
                    block_len: int = 1024) -> np.ndarray:
    """
    Statistic of chunks start..stop-1. Chunk i draws from block_rng(seed, i), so values
    do not depend on how chunks are grouped. Undefined statistics yield nan.
    """
    func = resolve_statistic(statistic)
    dark = {"A": 0.0, "B": 0.0} if dark is None else dark
    n = _dataset_length(dataset, statistic)
    arrays = {key: np.asarray(value) for key, value in dataset.items()}
    values = np.empty(stop - start)
    for k, i in enumerate(range(start, stop)):
        idx = chunk_indices(block_rng(seed, i), n, chunk_len, mode, block_len)
        chunk = {key: value[idx] for key, value in arrays.items()}
        try:
            values[k] = func(chunk, dark)
        except (DegenerateInput, ZeroDivisionError, FloatingPointError):
            values[k] = np.nan
    return values


@dataclass
class BootstrapConfig:
    n_chunks: int
    chunk_len: int
    seed: int = 0
    statistic: Union[str, Callable] = "duan"
    mode: str = "iid"
    block_len: int = 1024
    bins: Union[str, int] = "fd"

    def __post_init__(self):
        if self.n_chunks < 2:
            raise InvalidArgument("n_chunks must be >= 2, got %s." % self.n_chunks)
        if self.chunk_len < 2:
            raise InvalidArgument("chunk_len must be >= 2, got %s." % self.chunk_len)
        if self.mode not in ("iid", "block"):
            raise InvalidArgument("mode must be iid or block, got %s." % self.mode)
        resolve_statistic(self.statistic)


@dataclass
class BootstrapResult:
    statistic: str
    values: np.ndarray
    fit_mean: float
    fit_sigma: float
    fit_amplitude: float
    histogram: Tuple[np.ndarray, np.ndarray]
    excluded: int = 0
    fit_converged: bool = True
    moments: Tuple[float, float] = field(default=(np.nan, np.nan))

    def to_csv(self, path: str):
        edges, counts = self.histogram
        centers = (edges[:-1] + edges[1:]) / 2
        fit = gaussian(centers, self.fit_amplitude, self.fit_mean, self.fit_sigma)
        np.savetxt(path, np.column_stack([centers, counts, fit]), delimiter=",",
                   header="bin_center,count,fit_value", comments="", fmt="%.10g")


def gaussian(x, amplitude, mean, sigma):
    return amplitude * np.exp(-(x - mean) ** 2 / (2 * sigma ** 2))


def histogram(values, bins="fd") -> Tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(values, bins=bins)
    return edges, counts


def _moments(edges, counts) -> Tuple[float, float, float]:
    centers = (edges[:-1] + edges[1:]) / 2
    total = np.sum(counts)
    if total == 0:
        return np.nan, np.nan, 0.0
    mean = np.sum(centers * counts) / total
    sigma = np.sqrt(np.sum(counts * (centers - mean) ** 2) / total)
    return float(mean), float(sigma), float(np.max(counts))


def gaussian_fit(hist: Tuple[np.ndarray, np.ndarray],
                 max_evaluations: int = 2000) -> Tuple[float, float, float]:
    """
    Least-squares fit of a*exp(-(x-mu)**2/(2 sigma**2)) to bin centers and counts.
    :return: (mean, sigma, amplitude).
    """
    edges, counts = np.asarray(hist[0], dtype=np.float64), np.asarray(hist[1], dtype=np.float64)
    fallback = _moments(edges, counts)
    if np.count_nonzero(counts) < 5:
        raise FitFailure("Gaussian fit needs at least 5 nonempty bins, got %d."
                         % np.count_nonzero(counts), fallback=fallback)
    centers = (edges[:-1] + edges[1:]) / 2
    mean, sigma, amplitude = fallback
    if not sigma > 0:
        sigma = np.diff(edges).mean()
    try:
        popt, _ = curve_fit(gaussian, centers, counts, p0=(amplitude, mean, sigma),
                            maxfev=max_evaluations)
    except (RuntimeError, ValueError) as e:
        raise FitFailure("Gaussian fit did not converge: %s" % e, fallback=fallback)
    amplitude, mean, sigma = popt
    if not (np.all(np.isfinite(popt)) and sigma != 0):
        raise FitFailure("Gaussian fit returned %s." % popt, fallback=fallback)
    return float(mean), float(abs(sigma)), float(amplitude)


def bootstrap(dataset: Mapping, config: BootstrapConfig, system=None,
              dark: Optional[Mapping] = None) -> BootstrapResult:
    """
    Resample config.n_chunks chunks of config.chunk_len points with replacement,
    evaluate the statistic per chunk and fit a Gaussian to the histogram of values.
    """
    n = _dataset_length(dataset, config.statistic)
    if n < config.chunk_len:
        raise InvalidArgument("Dataset of %d points is shorter than chunk_len %d."
                              % (n, config.chunk_len))
    batches = Batch(config.n_chunks, settings.bootstrap_chunks_per_task).batches
    args = (config.statistic, dark, config.seed)
    if system is None:
        parts = [evaluate_chunks(dataset, *args, start, stop, config.chunk_len,
                                 config.mode, config.block_len) for start, stop in batches]
    else:
        dataset_ref = system.put({key: np.asarray(value) for key, value in dataset.items()})
        oids = [system.call("bootstrap_chunks", dataset_ref, *args, start, stop,
                            config.chunk_len, config.mode, config.block_len)
                for start, stop in batches]
        parts = system.get(oids)
    values = np.concatenate(parts)
    valid = np.isfinite(values)
    excluded = int(np.sum(~valid))
    if excluded:
        logger.warning("bootstrap: excluded %d of %d chunks with undefined %s.",
                       excluded, values.size, config.statistic)
    values = values[valid]
    name = config.statistic if isinstance(config.statistic, str) else \
        getattr(config.statistic, "__name__", "custom")
    if values.size < 2 or np.ptp(values) == 0:
        mean = float(values[0]) if values.size else np.nan
        raise DegenerateDistribution("Bootstrap values of %s have zero spread." % name,
                                     fallback=(mean, 0.0, float(values.size)))
    hist = histogram(values, config.bins)
    moments = (float(np.mean(values)), float(np.std(values, ddof=1)))
    converged = True
    try:
        fit_mean, fit_sigma, amplitude = gaussian_fit(hist)
    except FitFailure as e:
        logger.warning("bootstrap: %s; using moments.", e)
        fit_mean, fit_sigma, amplitude = e.fallback
        converged = False
    return BootstrapResult(name, values, fit_mean, fit_sigma, amplitude, hist,
                           excluded, converged, moments)
