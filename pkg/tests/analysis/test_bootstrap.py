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

import numpy as np
import pytest

from tmsv.core.analysis.bootstrap import BootstrapConfig, bootstrap, evaluate_chunks, \
    gaussian_fit, histogram
from tmsv.core.analysis.tomography import load_reference_covariance
from tmsv.core.errors import DegenerateDistribution, DegenerateInput, FitFailure, \
    InvalidArgument
from tmsv.core.signal.synth import correlated_white
from tmsv.core.systems.utils import block_rng


def golden_dataset(n, seed):
    cov = load_reference_covariance().cov
    xx = correlated_white(cov, n, block_rng(seed, 0))
    pp = correlated_white(cov, n, block_rng(seed, 1))
    return {"xa": xx[0], "xb": xx[2], "pa": pp[1], "pb": pp[3]}


def normal_values(n, seed, loc=0.0, scale=1.0):
    return {"values": block_rng(seed, 0).normal(loc, scale, n)}


def test_degenerate():
    with pytest.raises(DegenerateDistribution) as e:
        bootstrap({"values": np.ones(100)}, BootstrapConfig(20, 10, statistic="mean"))
    assert e.value.fallback[0] == 1.0
    assert e.value.fallback[1] == 0.0


def test_gaussian_fit():
    draws = block_rng(30, 0).standard_normal(10**5)
    mean, sigma, amplitude = gaussian_fit(histogram(draws, 50))
    assert abs(mean) < 0.02
    assert abs(sigma - 1) < 0.02
    assert amplitude > 0
    shifted = block_rng(30, 1).normal(3.5, 0.2, 10**5)
    mean, sigma, _ = gaussian_fit(histogram(shifted, 50))
    assert abs(mean - 3.5) < 0.005
    assert abs(sigma - 0.2) < 0.005
    with pytest.raises(FitFailure) as e:
        gaussian_fit(histogram(np.full(100, 2.0), 50))
    assert np.isclose(e.value.fallback[0], 2.0, atol=0.05)


def test_mean_standard_error():
    data = normal_values(10**4, 31)
    result = bootstrap(data, BootstrapConfig(1000, 1000, seed=31, statistic="mean"))
    assert result.statistic == "mean"
    assert result.values.size == 1000
    assert result.excluded == 0
    assert abs(result.fit_sigma / (1 / np.sqrt(1000)) - 1) < 0.1
    assert abs(result.fit_mean - np.mean(data["values"])) < 3 / np.sqrt(1000 * 1000)


def test_fit_agrees_with_moments():
    data = normal_values(10**4, 32)
    result = bootstrap(data, BootstrapConfig(2000, 500, seed=32, statistic="mean"))
    assert result.fit_converged
    mean, sigma = result.moments
    assert abs(result.fit_mean - mean) < 0.1 * sigma
    assert abs(result.fit_sigma / sigma - 1) < 0.1


def test_partition_independence():
    data = golden_dataset(5000, 33)
    whole = evaluate_chunks(data, "duan", None, 7, 0, 10, 1000)
    split = np.concatenate([evaluate_chunks(data, "duan", None, 7, 0, 4, 1000),
                            evaluate_chunks(data, "duan", None, 7, 4, 10, 1000)])
    assert np.array_equal(whole, split)
    shifted = evaluate_chunks(data, "duan", None, 7, 4, 10, 1000)
    assert np.array_equal(whole[4:], shifted)


def test_system_matches_serial(system):
    data = golden_dataset(5000, 34)
    config = BootstrapConfig(600, 1000, seed=34, statistic="epr_reid_AB")
    serial = bootstrap(data, config)
    distributed = bootstrap(data, config, system=system)
    assert np.array_equal(serial.values, distributed.values)
    assert serial.fit_mean == distributed.fit_mean


def test_golden_duan():
    n, chunk_len = 10**5, 2 * 10**4
    data = golden_dataset(n, 35)
    result = bootstrap(data, BootstrapConfig(1000, chunk_len, seed=35, statistic="duan"))
    v_sum, v_diff = 0.164, 0.195
    sigma = np.sqrt(2 * (v_sum ** 2 + v_diff ** 2) / chunk_len)
    assert abs(result.fit_sigma / sigma - 1) < 0.5
    # The dataset estimate itself scatters by sigma * sqrt(chunk_len / n).
    tolerance = 4 * sigma * np.sqrt(chunk_len / n) + 4 * sigma / np.sqrt(1000)
    assert abs(result.fit_mean - 0.359) < tolerance
    epr = bootstrap(data, BootstrapConfig(1000, chunk_len, seed=35, statistic="epr_reid_AB"))
    assert abs(epr.fit_mean / 0.02997 - 1) < 0.1


def test_inverse_sqrt_scaling():
    data = normal_values(10**5, 36)
    sigmas = []
    for chunk_len in (10**3, 10**4, 10**5):
        result = bootstrap(data, BootstrapConfig(200, chunk_len, seed=36, statistic="mean"))
        sigmas.append(result.moments[1])
    assert abs(sigmas[0] / sigmas[1] / np.sqrt(10) - 1) < 0.2
    assert abs(sigmas[1] / sigmas[2] / np.sqrt(10) - 1) < 0.2


def test_block_mode():
    rng = block_rng(37, 0)
    n, rho = 10**5, 0.9
    noise = rng.standard_normal(n) * np.sqrt(1 - rho ** 2)
    values = np.empty(n)
    values[0] = rng.standard_normal()
    for i in range(1, n):
        values[i] = rho * values[i - 1] + noise[i]
    data = {"values": values}
    iid = bootstrap(data, BootstrapConfig(500, 10**4, seed=37, statistic="mean"))
    block = bootstrap(data, BootstrapConfig(500, 10**4, seed=37, statistic="mean",
                                            mode="block", block_len=256))
    # Correlated samples inflate the spread of the mean by sqrt((1 + rho) / (1 - rho)).
    assert block.moments[1] / iid.moments[1] > 3


def test_excluded_chunks():

    def flaky(data, dark):
        m = np.mean(data["values"])
        if m > 0.5:
            raise DegenerateInput("chunk mean too large")
        return m

    data = normal_values(1000, 38)
    result = bootstrap(data, BootstrapConfig(400, 4, seed=38, statistic=flaky))
    assert result.statistic == "flaky"
    assert result.excluded > 0
    assert result.values.size == 400 - result.excluded
    assert np.all(result.values <= 0.5)


def test_config_errors():
    with pytest.raises(InvalidArgument):
        BootstrapConfig(1, 10)
    with pytest.raises(InvalidArgument):
        BootstrapConfig(10, 1)
    with pytest.raises(InvalidArgument):
        BootstrapConfig(10, 10, mode="jackknife")
    with pytest.raises(InvalidArgument):
        BootstrapConfig(10, 10, statistic="nope")
    with pytest.raises(InvalidArgument):
        bootstrap(normal_values(5, 39), BootstrapConfig(10, 10, statistic="mean"))
    with pytest.raises(InvalidArgument):
        bootstrap({"xa": np.zeros(100)}, BootstrapConfig(10, 10, statistic="duan"))
    with pytest.raises(InvalidArgument):
        bootstrap({"xa": np.zeros(100), "xb": np.zeros(99)},
                  BootstrapConfig(10, 10, statistic="variance_x_sum"))


def test_to_csv(tmp_path):
    result = bootstrap(normal_values(1000, 40), BootstrapConfig(500, 100, seed=40,
                                                                statistic="mean"))
    path = os.path.join(str(tmp_path), "bootstrap.csv")
    result.to_csv(path)
    with open(path) as fh:
        assert fh.readline().strip() == "bin_center,count,fit_value"
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape[1] == 3
    assert np.sum(table[:, 1]) == 500


if __name__ == "__main__":
    # pylint: disable=import-error
    import tempfile
    from tests import conftest

    test_degenerate()
    test_gaussian_fit()
    test_mean_standard_error()
    test_system_matches_serial(conftest.get_system("serial"))
    test_golden_duan()
    test_inverse_sqrt_scaling()
    test_block_mode()
    test_excluded_chunks()
    test_config_errors()
    test_to_csv(tempfile.mkdtemp())
