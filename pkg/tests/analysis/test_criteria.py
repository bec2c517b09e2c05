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


import numpy as np
import pytest

from tmsv.core.analysis.criteria import duan, entangled, epr_reid, epr_reid_at, from_db, \
    summarize, to_db
from tmsv.core.analysis.tomography import load_reference_covariance
from tmsv.core.errors import DegenerateInput, InvalidArgument
from tmsv.core.optics import ops
from tmsv.core.optics.experiment import build_experiment
from tmsv.core.optics.state import LossBudget, SqueezerSetting
from tmsv.core.optics.utils import random_state
from tmsv.core.systems.utils import block_rng


def test_duan():
    assert duan(np.eye(4)) == 4
    assert np.isclose(duan(load_reference_covariance().cov), 0.359, atol=1e-3)
    setting = SqueezerSetting(0.5, 2.0)
    state = build_experiment(setting, setting, np.pi / 2, LossBudget.lossless())
    assert np.isclose(duan(state.cov), 2.0)
    asymmetric = np.eye(4)
    asymmetric[0, 2] = 0.5
    with pytest.raises(InvalidArgument):
        duan(asymmetric)
    with pytest.raises(InvalidArgument):
        duan(np.eye(2))


def test_epr_reid():
    g, h, product = epr_reid(np.eye(4))
    assert g == 0 and h == 0 and product == 1
    cov = load_reference_covariance().cov
    g, h, product = epr_reid(cov, "A_from_B")
    assert np.isclose(product, 0.0300, atol=5e-4)
    assert g < 0 < h
    _, _, product_ba = epr_reid(cov, "B_from_A")
    assert abs(product_ba - product) / product < 0.1
    degenerate = np.diag([1.0, 1.0, 0.0, 1.0])
    with pytest.raises(DegenerateInput):
        epr_reid(degenerate, "A_from_B")
    with pytest.raises(InvalidArgument):
        epr_reid(cov, "A_from_C")


def test_epr_reid_optimal():
    rng = block_rng(10, 0)
    for _ in range(20):
        cov = random_state(2, rng).cov
        g, h, product = epr_reid(cov, "A_from_B")
        assert np.isclose(epr_reid_at(cov, g, h), product)
        for dg, dh in rng.normal(0, 0.5, (100, 2)):
            assert epr_reid_at(cov, g + dg, h + dh) >= product - 1e-12


def test_mode_exchange():
    rng = block_rng(11, 0)
    for _ in range(20):
        state = random_state(2, rng)
        swapped = ops.permute_modes(state, [1, 0]).cov
        assert np.isclose(duan(swapped), duan(state.cov))
        assert np.isclose(epr_reid(swapped, "A_from_B")[2], epr_reid(state.cov, "B_from_A")[2])


def test_loss_degrades():
    rng = block_rng(12, 0)
    for _ in range(20):
        vs = rng.uniform(0.05, 0.9, 2)
        sources = [SqueezerSetting(v, rng.uniform(1, 3) / v) for v in vs]
        state = build_experiment(sources[0], sources[1], np.pi / 2, LossBudget.lossless())
        for eta in (0.99, 0.8, 0.3):
            lossy = ops.loss(ops.loss(state, 0, eta), 1, eta)
            assert duan(lossy.cov) >= duan(state.cov) - 1e-12


def test_db():
    assert to_db(4, 4) == 0
    assert np.isclose(to_db(0.360, 4), 10.458, atol=1e-3)
    assert np.isclose(to_db(2, 4), 3.0103, atol=1e-4)
    for db in (-3.0, 0.0, 10.45, 20.0):
        assert np.isclose(to_db(from_db(db, 4), 4), db, atol=1e-12)
    assert np.isclose(from_db(10 * np.log10(4 / 0.36), 4), 0.36, atol=1e-12)
    with pytest.raises(InvalidArgument):
        to_db(0, 4)
    with pytest.raises(InvalidArgument):
        to_db(1, -4)


def test_summary():
    summary = summarize(load_reference_covariance().cov)
    assert summary.entangled and summary.epr_steering
    assert np.isclose(summary.duan_db, to_db(summary.duan, 4))
    meta = summary.to_meta()
    assert set(meta) >= {"duan", "epr_AB", "epr_BA", "duan_db", "epr_AB_db", "epr_BA_db",
                         "entangled", "epr_steering"}
    vacuum = summarize(np.eye(4))
    assert not vacuum.entangled and not vacuum.epr_steering
    assert not entangled(np.eye(4))
    assert entangled(load_reference_covariance().cov)


if __name__ == "__main__":
    # pylint: disable=import-error
    test_duan()
    test_epr_reid()
    test_epr_reid_optimal()
    test_mode_exchange()
    test_loss_degrades()
    test_db()
    test_summary()
