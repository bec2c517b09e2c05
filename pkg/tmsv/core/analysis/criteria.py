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


from dataclasses import dataclass, asdict
from typing import Dict, Tuple

import numpy as np

from tmsv.core.errors import DegenerateInput, InvalidArgument


duan_critical = 4.0
epr_critical = 1.0
directions = ("A_from_B", "B_from_A")

# Mode order is (X_A, P_A, X_B, P_B).
XA, PA, XB, PB = 0, 1, 2, 3


def _check_cov(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    if cov.shape != (4, 4):
        raise InvalidArgument("Expected a 4x4 covariance matrix, got shape %s." % str(cov.shape))
    scale = max(1.0, np.max(np.abs(cov)))
    if np.max(np.abs(cov - cov.T)) > 1e-9 * scale:
        raise InvalidArgument("Covariance matrix is not symmetric.")
    return cov


def duan(cov) -> float:
    """
    Var(X_A + X_B) + Var(P_A - P_B). Values below 4 certify inseparability.
    """
    c = _check_cov(cov)
    return float(c[XA, XA] + c[XB, XB] + 2 * c[XA, XB]
                 + c[PA, PA] + c[PB, PB] - 2 * c[PA, PB])


def _conditioning(direction: str):
    if direction == "A_from_B":
        return (XA, XB), (PA, PB)
    if direction == "B_from_A":
        return (XB, XA), (PB, PA)
    raise InvalidArgument("Unknown direction '%s', expected one of %s." % (direction, directions))


def epr_reid_at(cov, g: float, h: float, direction: str = "A_from_B") -> float:
    """
    Var(X_t - g X_c) * Var(P_t - h P_c) for target mode t inferred from mode c.
    """
    c = _check_cov(cov)
    (xt, xc), (pt, pc) = _conditioning(direction)
    var_x = c[xt, xt] - 2 * g * c[xt, xc] + g ** 2 * c[xc, xc]
    var_p = c[pt, pt] - 2 * h * c[pt, pc] + h ** 2 * c[pc, pc]
    return float(var_x * var_p)


def epr_reid(cov, direction: str = "A_from_B") -> Tuple[float, float, float]:
    """
    Product of optimal inferred variances. Values below 1 demonstrate the EPR paradox.
    :return: (g_opt, h_opt, product).
    """
    c = _check_cov(cov)
    (xt, xc), (pt, pc) = _conditioning(direction)
    if c[xc, xc] <= 0 or c[pc, pc] <= 0:
        raise DegenerateInput("Conditioning variance is not positive: Var=%s, %s."
                              % (c[xc, xc], c[pc, pc]))
    g = c[xt, xc] / c[xc, xc]
    h = c[pt, pc] / c[pc, pc]
    product = (c[xt, xt] - c[xt, xc] ** 2 / c[xc, xc]) * (c[pt, pt] - c[pt, pc] ** 2 / c[pc, pc])
    return float(g), float(h), float(product)


def to_db(value: float, critical: float) -> float:
    if value <= 0 or critical <= 0:
        raise InvalidArgument("to_db needs positive arguments, got %s, %s." % (value, critical))
    return float(10 * np.log10(critical / value))


def from_db(db: float, critical: float) -> float:
    if critical <= 0:
        raise InvalidArgument("critical must be positive, got %s." % critical)
    return float(critical * 10 ** (-db / 10))


@dataclass
class CriteriaSummary:
    duan: float
    epr_AB: float
    epr_BA: float

    @property
    def duan_db(self) -> float:
        return to_db(self.duan, duan_critical)

    @property
    def epr_AB_db(self) -> float:
        return to_db(self.epr_AB, epr_critical)

    @property
    def epr_BA_db(self) -> float:
        return to_db(self.epr_BA, epr_critical)

    @property
    def entangled(self) -> bool:
        return self.duan < duan_critical

    @property
    def epr_steering(self) -> bool:
        return min(self.epr_AB, self.epr_BA) < epr_critical

    def to_meta(self) -> Dict:
        meta = asdict(self)
        meta.update(duan_db=self.duan_db, epr_AB_db=self.epr_AB_db, epr_BA_db=self.epr_BA_db,
                    entangled=self.entangled, epr_steering=self.epr_steering)
        return meta


def summarize(cov) -> CriteriaSummary:
    return CriteriaSummary(duan(cov), epr_reid(cov, "A_from_B")[2], epr_reid(cov, "B_from_A")[2])


def entangled(cov) -> bool:
    summary = summarize(cov)
    return summary.entangled or summary.epr_steering
