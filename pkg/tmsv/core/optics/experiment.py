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
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from tmsv.core.errors import InvalidArgument
from tmsv.core.optics import ops
from tmsv.core.optics.state import GaussianState, LossBudget, SqueezerSetting


logger = logging.getLogger(__name__)


# Phases held by lock loops, in the order they act on the beams.
locked_phases = ("phi_ent", "phi_A", "phi_B")


class Experiment(object):
    """
    The entangling chain: two squeezers, source losses, the relative phase phi_ent on
    mode 1, a balanced beam splitter and the detection losses of arms A (mode 0) and B.
    """

    def __init__(self, source_a: SqueezerSetting, source_b: SqueezerSetting,
                 phi_ent: float = np.pi / 2, budget: Optional[LossBudget] = None):
        self.source_a = source_a
        self.source_b = source_b
        self.phi_ent = phi_ent
        self.budget = LossBudget.lossless() if budget is None else budget

    def build(self, jitter: Optional[Dict[str, float]] = None,
              offsets: Optional[Dict[str, float]] = None) -> GaussianState:
        """
        :param jitter: rms residual per locked phase, averaged as Gaussian phase noise.
        :param offsets: static residual per locked phase.
        """
        jitter = {} if jitter is None else jitter
        offsets = {} if offsets is None else offsets
        for name in list(jitter) + list(offsets):
            if name not in locked_phases:
                raise InvalidArgument("Unknown locked phase '%s', expected one of %s."
                                      % (name, locked_phases))
        state = ops.vacuum(2)
        state = ops.squeeze(state, 0, self.source_a)
        state = ops.squeeze(state, 1, self.source_b)
        for mode, stage in enumerate(LossBudget.source_stages):
            for factor in self.budget.arm(stage):
                state = ops.loss(state, mode, factor.eta)
        state = ops.rotate(state, 1, self.phi_ent + offsets.get("phi_ent", 0.0))
        state = ops.apply_phase_jitter(state, 1, jitter.get("phi_ent", 0.0))
        state = ops.beamsplitter(state, 0, 1, 0.5)
        for mode, stage in enumerate(LossBudget.arm_stages):
            for factor in self.budget.arm(stage):
                state = ops.loss(state, mode, factor.eta)
        for mode, name in ((0, "phi_A"), (1, "phi_B")):
            state = ops.rotate(state, mode, offsets.get(name, 0.0))
            state = ops.apply_phase_jitter(state, mode, jitter.get(name, 0.0))
        return state


def build_experiment(source_a: SqueezerSetting, source_b: SqueezerSetting,
                     phi_ent: float, budget: LossBudget) -> GaussianState:
    return Experiment(source_a, source_b, phi_ent, budget).build()


def joint_variances(cov: np.ndarray) -> np.ndarray:
    """
    Var(XA+XB), Var(XA-XB), Var(PA-PB), Var(PA+PB) of a two-mode covariance.
    """
    xx = cov[0, 0] + cov[2, 2]
    pp = cov[1, 1] + cov[3, 3]
    return np.array([xx + 2 * cov[0, 2], xx - 2 * cov[0, 2],
                     pp - 2 * cov[1, 3], pp + 2 * cov[1, 3]])


def _settings_from_params(params) -> Tuple[SqueezerSetting, SqueezerSetting]:
    # log(vs) <= 0 and log(va*vs) >= 0 keep both settings physical.
    settings = []
    for log_vs, log_excess in np.reshape(params, (2, 2)):
        vs = np.exp(log_vs)
        settings.append(SqueezerSetting(vs, max(1.0, np.exp(log_excess) / vs)))
    return settings[0], settings[1]


def fit_sources(target_cov, budget: LossBudget, phi_ent: float = np.pi / 2,
                initial: Optional[Tuple[SqueezerSetting, SqueezerSetting]] = None):
    """
    Fit (vs, va) of both sources so the modeled joint variances match those of
    target_cov in log space.
    :return: (source_a, source_b, model covariance, least-squares result).
    """
    target = joint_variances(np.asarray(target_cov, dtype=np.float64))
    if np.any(target <= 0):
        raise InvalidArgument("Target joint variances must be positive, got %s." % target)

    def residuals(params):
        source_a, source_b = _settings_from_params(params)
        cov = Experiment(source_a, source_b, phi_ent, budget).build().cov
        return np.log(joint_variances(cov)) - np.log(target)

    if initial is None:
        initial = (SqueezerSetting(0.05, 50.0), SqueezerSetting(0.05, 50.0))
    x0 = []
    for setting in initial:
        x0 += [np.log(setting.vs), np.log(setting.vs * setting.va)]
    lower = [-12.0, 0.0, -12.0, 0.0]
    upper = [0.0, 12.0, 0.0, 12.0]
    x0 = np.clip(x0, lower, upper)
    result = least_squares(residuals, x0, bounds=(lower, upper), x_scale=1.0)
    source_a, source_b = _settings_from_params(result.x)
    model = Experiment(source_a, source_b, phi_ent, budget).build()
    logger.info("fit_sources: cost=%.3e, %s, %s", result.cost, source_a, source_b)
    return source_a, source_b, model.cov, result
