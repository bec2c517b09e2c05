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

from tmsv.core.analysis.criteria import duan
from tmsv.core.analysis.tomography import PartialCovariance, QuadratureSettingRecord, \
    effective_sample_size, load_reference_covariance, measured_mask, reconstruct_covariance, \
    settings
from tmsv.core.errors import IncompleteTomography, InvalidArgument
from tmsv.core.signal.synth import correlated_white
from tmsv.core.systems.utils import block_rng


_rows = {("A", "X"): 0, ("A", "P"): 1, ("B", "X"): 2, ("B", "P"): 3}


def synthetic_records(cov, n, seed):
    records = []
    for k, (qa, qb) in enumerate(settings):
        samples = correlated_white(cov, n, block_rng(seed, k))
        records.append(QuadratureSettingRecord(qa, qb, samples[_rows[("A", qa)]],
                                               samples[_rows[("B", qb)]]))
    return records


def test_mask():
    mask = measured_mask()
    assert np.sum(mask) == 12
    assert not mask[0, 1] and not mask[1, 0] and not mask[2, 3] and not mask[3, 2]
    reference = load_reference_covariance()
    assert reference.n_measured == 12
    assert np.isclose(duan(reference.cov), 0.359, atol=1e-3)
    assert np.isclose(reference.cov[0, 2], -21.725)


def test_record_validation():
    with pytest.raises(InvalidArgument):
        QuadratureSettingRecord("X", "Q", np.zeros(10), np.zeros(10))
    with pytest.raises(InvalidArgument):
        QuadratureSettingRecord("X", "X", np.zeros(10), np.zeros(9))
    with pytest.raises(InvalidArgument):
        QuadratureSettingRecord("X", "P", np.zeros(1), np.zeros(1))
    record = QuadratureSettingRecord("P", "X", np.zeros(5), np.ones(5))
    assert record.setting == ("P", "X")
    assert len(record) == 5


def test_partial_covariance_validation():
    mask = measured_mask()
    mask[0, 2] = mask[2, 0] = False
    with pytest.raises(InvalidArgument):
        PartialCovariance(np.eye(4), mask)
    cov = np.eye(4)
    cov[0, 2] = 0.3
    with pytest.raises(InvalidArgument):
        PartialCovariance(cov, measured_mask())


def test_reconstruct_reference():
    target = load_reference_covariance().cov
    partial = reconstruct_covariance(synthetic_records(target, 10**6, 20))
    assert partial.n_measured == 12
    mask = partial.measured_mask
    assert np.all(partial.cov[~mask] == 0)
    large = mask & (np.abs(target) > 1)
    assert np.all(np.abs(partial.cov[large] - target[large]) < 0.01 * np.abs(target[large]))
    assert np.all(np.abs(partial.cov[mask] - target[mask]) < 4 * partial.stderr[mask])
    assert np.isclose(duan(partial.cov), duan(target), rtol=0.01)


def test_reconstruct_vacuum():
    n = 10**6
    partial = reconstruct_covariance(synthetic_records(np.eye(4), n, 21))
    assert np.allclose(np.diag(partial.cov), 1, atol=0.01)
    off = partial.cov[~np.eye(4, dtype=bool)]
    assert np.all(np.abs(off) < 0.01)
    assert np.all(np.abs(off) < 3 / np.sqrt(n) * 2)
    # Variance standard error of white samples: sqrt(2 / N) over the two averaged runs.
    assert np.isclose(partial.stderr[0, 0], np.sqrt(2 / n) / np.sqrt(2), rtol=0.05)
    darkened = reconstruct_covariance(synthetic_records(np.eye(4), 10**4, 21), dark=(0.1, 0.2))
    plain = reconstruct_covariance(synthetic_records(np.eye(4), 10**4, 21))
    assert np.allclose(np.diag(plain.cov) - np.diag(darkened.cov), [0.1, 0.1, 0.2, 0.2])


def test_incomplete():
    records = synthetic_records(np.eye(4), 100, 22)
    with pytest.raises(IncompleteTomography):
        reconstruct_covariance(records[:3])
    # A repeated setting does not replace a missing one.
    with pytest.raises(IncompleteTomography):
        reconstruct_covariance(records[:3] + records[:1])


def test_effective_sample_size():
    rng = block_rng(23, 0)
    n = 10**5
    white = rng.standard_normal(n)
    assert abs(effective_sample_size(white) / n - 1) < 0.05
    rho = 0.9
    ar = np.empty(n)
    ar[0] = rng.standard_normal()
    noise = rng.standard_normal(n) * np.sqrt(1 - rho ** 2)
    for i in range(1, n):
        ar[i] = rho * ar[i - 1] + noise[i]
    expected = n * (1 - rho ** 2) / (1 + rho ** 2)
    assert abs(effective_sample_size(ar) / expected - 1) < 0.1
    with pytest.raises(InvalidArgument):
        effective_sample_size(np.zeros(1))


def test_to_text(tmp_path):
    partial = reconstruct_covariance(synthetic_records(np.eye(4), 1000, 24))
    path = os.path.join(str(tmp_path), "cov.txt")
    partial.to_text(path)
    assert np.allclose(np.loadtxt(path), partial.cov, atol=1e-6)
    assert os.path.exists(path + ".stderr")


if __name__ == "__main__":
    # pylint: disable=import-error
    import tempfile
    test_mask()
    test_record_validation()
    test_partial_covariance_validation()
    test_reconstruct_reference()
    test_reconstruct_vacuum()
    test_incomplete()
    test_effective_sample_size()
    test_to_text(tempfile.mkdtemp())
