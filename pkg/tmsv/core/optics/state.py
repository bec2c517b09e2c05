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


from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from tmsv.core.errors import InvalidArgument, UnphysicalSetting


def symplectic_form(n_modes: int) -> np.ndarray:
    if n_modes < 1:
        raise InvalidArgument("n_modes must be positive, got %s." % n_modes)
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class GaussianState(object):
    """
    Mean vector and covariance matrix of n optical modes in shot-noise units,
    ordered (X1, P1, X2, P2, ...). The vacuum variance of every quadrature is 1.
    """

    def __init__(self, cov, mean=None, validate=True):
        cov = np.array(cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 != 0:
            raise InvalidArgument("Covariance must be a square matrix of even size, "
                                  "got shape %s." % str(cov.shape))
        self.n_modes: int = cov.shape[0] // 2
        self.cov: np.ndarray = cov
        if mean is None:
            mean = np.zeros(2 * self.n_modes)
        self.mean: np.ndarray = np.array(mean, dtype=np.float64)
        if self.mean.shape != (2 * self.n_modes,):
            raise InvalidArgument("Mean has shape %s, expected (%d,)."
                                  % (str(self.mean.shape), 2 * self.n_modes))
        if validate:
            self.validate(physical=False)

    def copy(self):
        return GaussianState(self.cov.copy(), self.mean.copy(), validate=False)

    def validate(self, physical=True, tol=1e-9):
        scale = max(1.0, np.max(np.abs(self.cov)))
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-12 * scale:
            raise InvalidArgument("Covariance matrix is not symmetric.")
        if np.any(np.diag(self.cov) <= 0):
            raise InvalidArgument("Covariance diagonal must be positive.")
        if physical and not self.is_physical(tol):
            raise UnphysicalSetting("Covariance violates the uncertainty relation: "
                                    "min eigenvalue of cov + i*Omega is %.3e."
                                    % self.uncertainty_margin())
        return self

    def uncertainty_margin(self) -> float:
        omega = symplectic_form(self.n_modes)
        return float(np.min(np.linalg.eigvalsh(self.cov + 1j * omega)))

    def is_physical(self, tol=1e-9) -> bool:
        return self.uncertainty_margin() >= -tol

    def symplectic_eigenvalues(self) -> np.ndarray:
        omega = symplectic_form(self.n_modes)
        eigs = np.abs(np.linalg.eigvals(1j * omega @ self.cov))
        # Eigenvalues come in +/- pairs.
        return np.sort(eigs)[::2]

    def block(self, mode_i: int, mode_j: int) -> np.ndarray:
        return self.cov[2 * mode_i:2 * mode_i + 2, 2 * mode_j:2 * mode_j + 2]

    def reduced(self, modes: List[int]):
        idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
        return GaussianState(self.cov[np.ix_(idx, idx)], self.mean[idx], validate=False)

    def permute(self, order: List[int]):
        if sorted(order) != list(range(self.n_modes)):
            raise InvalidArgument("%s is not a permutation of %d modes." % (order, self.n_modes))
        return self.reduced(order)

    def __repr__(self):
        return "GaussianState(n_modes=%d)" % self.n_modes


@dataclass(frozen=True)
class SqueezerSetting:
    vs: float
    va: float
    angle: float = 0.0

    def __post_init__(self):
        if not (self.vs > 0 and np.isfinite(self.vs) and np.isfinite(self.va)):
            raise InvalidArgument("Squeezed variance must be positive and finite, got %s."
                                  % self.vs)
        if self.vs * self.va < 1 - 1e-12:
            raise UnphysicalSetting("vs*va = %.6g violates the uncertainty bound 1."
                                    % (self.vs * self.va))
        if self.vs > 1 or self.va < 1:
            raise InvalidArgument("Expected vs <= 1 <= va, got vs=%s, va=%s." % (self.vs, self.va))

    @classmethod
    def from_db(cls, squeezing_db: float, antisqueezing_db: float, angle=0.0):
        return cls(10 ** (-squeezing_db / 10), 10 ** (antisqueezing_db / 10), angle)

    def to_meta(self) -> Dict:
        return {"vs": self.vs, "va": self.va, "angle_rad": self.angle}


@dataclass(frozen=True)
class LossFactor:
    """
    One factor of a loss budget. A beam splitter visibility V enters as eta = V**2.
    """
    label: str
    efficiency: Optional[float] = None
    visibility: Optional[float] = None

    def __post_init__(self):
        if (self.efficiency is None) == (self.visibility is None):
            raise InvalidArgument("Loss factor '%s' needs exactly one of efficiency "
                                  "and visibility." % self.label)
        if not 0 < self.eta <= 1:
            raise InvalidArgument("Loss factor '%s' has efficiency %s outside (0, 1]."
                                  % (self.label, self.eta))

    @property
    def eta(self) -> float:
        if self.visibility is not None:
            return self.visibility ** 2
        return self.efficiency

    def to_meta(self) -> Dict:
        meta = {"label": self.label}
        if self.visibility is not None:
            meta["visibility"] = self.visibility
        else:
            meta["efficiency"] = self.efficiency
        return meta


class LossBudget(object):
    """
    Ordered loss factors per stage. Source stages act on the squeezed beams before the
    entangling beam splitter, arm stages on the entangled beams after it.
    """

    source_stages = ("source_1", "source_2")
    arm_stages = ("A", "B")
    stages = source_stages + arm_stages

    @classmethod
    def lossless(cls):
        return cls({})

    @classmethod
    def uniform(cls, eta: float):
        return cls({"A": [LossFactor("arm", eta)], "B": [LossFactor("arm", eta)]})

    @classmethod
    def from_meta(cls, meta: Dict):
        return cls({stage: [LossFactor(**entry) for entry in entries]
                    for stage, entries in meta.items()})

    def __init__(self, factors: Dict[str, List[LossFactor]]):
        for stage in factors:
            if stage not in self.stages:
                raise InvalidArgument("Unknown loss stage '%s', expected one of %s."
                                      % (stage, self.stages))
        self.factors: Dict[str, List[LossFactor]] = {stage: list(factors.get(stage, []))
                                                     for stage in self.stages}

    def to_meta(self) -> Dict:
        return {stage: [f.to_meta() for f in entries]
                for stage, entries in self.factors.items() if entries}

    def arm(self, stage: str) -> List[LossFactor]:
        return self.factors[stage]

    def total(self, stage: str) -> float:
        return float(np.prod([f.eta for f in self.factors[stage]]))

    def table(self) -> List[Dict]:
        rows = []
        for stage in self.stages:
            cumulative = 1.0
            for f in self.factors[stage]:
                cumulative *= f.eta
                rows.append({"stage": stage, "label": f.label,
                             "efficiency": f.eta, "cumulative": cumulative})
        return rows
