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

from tmsv.core.analysis.criteria import duan, epr_reid
from tmsv.core.analysis.tomography import load_reference_covariance
from tmsv.core.config import load_config
from tmsv.core.errors import InvalidArgument
from tmsv.core.optics import ops
from tmsv.core.optics.experiment import Experiment, build_experiment, fit_sources, \
    joint_variances
from tmsv.core.optics.state import LossBudget, LossFactor, SqueezerSetting


def symmetric(r):
    return SqueezerSetting(np.exp(-2 * r), np.exp(2 * r))


def test_trivial_sources():
    vac = SqueezerSetting(1.0, 1.0)
    for phi_ent in (0.0, 0.3, np.pi / 2):
        state = build_experiment(vac, vac, phi_ent, LossBudget.lossless())
        assert np.allclose(state.cov, np.eye(4))


def test_closed_forms():
    for r in (0.2, 0.8, 1.5):
        state = build_experiment(symmetric(r), symmetric(r), np.pi / 2, LossBudget.lossless())
        assert np.isclose(duan(state.cov), 4 * np.exp(-2 * r))
    vs = 0.5
    state = build_experiment(SqueezerSetting(vs, 2.0), SqueezerSetting(vs, 2.0), np.pi / 2,
                             LossBudget.lossless())
    assert np.isclose(duan(state.cov), 2.0)
    for eta in (1.0, 0.9, 0.5, 0.1):
        setting = SqueezerSetting(0.1, 20.0)
        state = build_experiment(setting, setting, np.pi / 2, LossBudget.uniform(eta))
        assert np.isclose(duan(state.cov), 4 * (eta * 0.1 + 1 - eta))


def test_sign_structure():
    state = build_experiment(symmetric(1.0), symmetric(1.0), np.pi / 2, LossBudget.lossless())
    # X anti-correlated, P correlated.
    assert state.cov[0, 2] < 0
    assert state.cov[1, 3] > 0
    assert np.isclose(state.cov[0, 1], 0) and np.isclose(state.cov[2, 3], 0)


def test_phi_ent_optimum():
    setting = symmetric(1.0)
    phis = np.linspace(0, np.pi, 181)
    values = [duan(build_experiment(setting, setting, phi, LossBudget.lossless()).cov)
              for phi in phis]
    assert np.isclose(phis[int(np.argmin(values))], np.pi / 2)


def test_complete_loss():
    setting = SqueezerSetting(0.1, 20.0)
    state = build_experiment(setting, setting, np.pi / 2, LossBudget({
        "A": [LossFactor("block", 1e-12)], "B": [LossFactor("block", 1e-12)]}))
    assert np.isclose(duan(state.cov), 4)
    assert np.isclose(epr_reid(state.cov)[2], 1)
    # A single blocked arm leaves the other arm mixed, not vacuum.
    one_arm = build_experiment(setting, setting, np.pi / 2,
                               LossBudget({"A": [LossFactor("block", 1e-12)]}))
    assert one_arm.cov[2, 2] > 1


def test_monotonicity():
    va = 30.0
    previous = -np.inf
    for vs in (0.05, 0.1, 0.2, 0.5):
        value = duan(build_experiment(SqueezerSetting(vs, va), symmetric(1.0), np.pi / 2,
                                      LossBudget.lossless()).cov)
        assert value >= previous
        previous = value
    for stage in LossBudget.stages:
        previous = -np.inf
        for eta in (1.0, 0.95, 0.8, 0.5, 0.2):
            budget = LossBudget({stage: [LossFactor("x", eta)]})
            value = duan(build_experiment(SqueezerSetting(0.05, 30.0), SqueezerSetting(0.08, 25.0),
                                          np.pi / 2, budget).cov)
            assert value >= previous - 1e-12
            previous = value


def test_build_jitter_and_offsets():
    experiment = Experiment(symmetric(1.0), symmetric(1.0))
    ideal = duan(experiment.build().cov)
    assert np.isclose(duan(experiment.build(jitter={"phi_ent": 0.0}).cov), ideal)
    for name in ("phi_ent", "phi_A", "phi_B"):
        assert duan(experiment.build(jitter={name: 0.05}).cov) > ideal
        assert duan(experiment.build(offsets={name: 0.05}).cov) > ideal
    with pytest.raises(InvalidArgument):
        experiment.build(jitter={"phi_C": 0.1})
    # Jitter on phi_ent before the splitter equals jitter on mode 1 of the input.
    state = ops.apply_phase_jitter(ops.rotate(ops.squeeze(ops.squeeze(ops.vacuum(2), 0,
                                                                       symmetric(1.0)), 1,
                                                           symmetric(1.0)), 1, np.pi / 2),
                                   1, 0.05)
    state = ops.beamsplitter(state, 0, 1, 0.5)
    assert np.allclose(state.cov, experiment.build(jitter={"phi_ent": 0.05}).cov)


def test_joint_variances():
    cov = load_reference_covariance().cov
    values = joint_variances(cov)
    assert np.isclose(values[0], 0.164)
    assert np.isclose(values[2], 0.195)
    assert np.isclose(values[0] + values[2], duan(cov))


def test_fit_reference():
    config = load_config("paper")
    target = load_reference_covariance().cov
    source_a, source_b, model, result = fit_sources(target, config.budget)
    assert result.success
    for setting in (source_a, source_b):
        assert setting.vs * setting.va >= 1
    assert np.allclose(np.log(joint_variances(model)), np.log(joint_variances(target)),
                       atol=0.15)
    # The shipped sources reproduce the reference within the budget.
    shipped = config.experiment().build()
    assert abs(duan(shipped.cov) - 0.360) / 0.360 < 0.05
    assert np.isclose(duan(shipped.cov), 0.3743, atol=3e-3)


if __name__ == "__main__":
    # pylint: disable=import-error
    test_trivial_sources()
    test_closed_forms()
    test_sign_structure()
    test_phi_ent_optimum()
    test_complete_loss()
    test_monotonicity()
    test_build_jitter_and_offsets()
    test_joint_variances()
    test_fit_reference()
