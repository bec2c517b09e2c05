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

from tmsv.core.errors import InvalidArgument, UnphysicalSetting
from tmsv.core.optics import ops
from tmsv.core.optics.state import GaussianState, LossBudget, LossFactor, SqueezerSetting, \
    symplectic_form


def test_symplectic_form():
    for n in (1, 2, 3):
        omega = symplectic_form(n)
        assert omega.shape == (2 * n, 2 * n)
        assert np.allclose(omega, -omega.T)
        assert np.allclose(omega @ omega, -np.eye(2 * n))
    assert np.allclose(symplectic_form(1), [[0, 1], [-1, 0]])


def test_state_validation():
    with pytest.raises(InvalidArgument):
        GaussianState(np.eye(3))
    with pytest.raises(InvalidArgument):
        GaussianState(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(InvalidArgument):
        GaussianState(np.eye(2), mean=np.zeros(3))
    # Symmetric but below the uncertainty bound.
    state = GaussianState(np.diag([0.5, 0.5]))
    assert not state.is_physical()
    with pytest.raises(UnphysicalSetting):
        state.validate()
    assert GaussianState(np.diag([0.1, 10.0])).validate() is not None


def test_symplectic_eigenvalues():
    state = ops.vacuum(2)
    assert np.allclose(state.symplectic_eigenvalues(), [1, 1])
    thermal = GaussianState(np.diag([2.0, 2.0, 3.0, 3.0]))
    assert np.allclose(thermal.symplectic_eigenvalues(), [2, 3])
    squeezed = ops.squeeze(ops.vacuum(1), 0, SqueezerSetting(0.1, 40.0))
    assert np.allclose(squeezed.symplectic_eigenvalues(), [2.0])


def test_reduced_and_permute():
    cov = np.diag([1.0, 2.0, 3.0, 4.0])
    state = GaussianState(cov)
    assert np.allclose(state.reduced([1]).cov, np.diag([3.0, 4.0]))
    assert np.allclose(state.permute([1, 0]).cov, np.diag([3.0, 4.0, 1.0, 2.0]))
    assert np.allclose(state.block(1, 1), np.diag([3.0, 4.0]))
    with pytest.raises(InvalidArgument):
        state.permute([0, 0])
    copied = state.copy()
    copied.cov[0, 0] = 10
    assert state.cov[0, 0] == 1


def test_squeezer_setting():
    setting = SqueezerSetting(0.1, 10.0)
    assert setting.to_meta() == {"vs": 0.1, "va": 10.0, "angle_rad": 0.0}
    with pytest.raises(UnphysicalSetting):
        SqueezerSetting(0.1, 5.0)
    with pytest.raises(InvalidArgument):
        SqueezerSetting(2.0, 3.0)
    with pytest.raises(InvalidArgument):
        SqueezerSetting(0.0, 3.0)
    # UnphysicalSetting is an InvalidArgument.
    with pytest.raises(InvalidArgument):
        SqueezerSetting(0.5, 1.5)
    db = SqueezerSetting.from_db(10.0, 13.0)
    assert np.isclose(db.vs, 0.1)
    assert np.isclose(db.va, 10 ** 1.3)


def test_loss_factor():
    assert LossFactor("qe", efficiency=0.9).eta == 0.9
    assert np.isclose(LossFactor("hd", visibility=0.995).eta, 0.995 ** 2)
    with pytest.raises(InvalidArgument):
        LossFactor("both", efficiency=0.9, visibility=0.9)
    with pytest.raises(InvalidArgument):
        LossFactor("neither")
    with pytest.raises(InvalidArgument):
        LossFactor("zero", efficiency=0.0)
    with pytest.raises(InvalidArgument):
        LossFactor("gain", efficiency=1.1)


def test_loss_budget():
    budget = LossBudget({
        "source_1": [LossFactor("escape", 0.96)],
        "A": [LossFactor("hd", visibility=0.995), LossFactor("tap", 0.99),
              LossFactor("qe", 0.99)],
    })
    assert np.isclose(budget.total("A"), 0.995 ** 2 * 0.99 * 0.99)
    assert budget.total("B") == 1.0
    assert np.isclose(budget.total("source_1"), 0.96)
    table = budget.table()
    assert [row["stage"] for row in table] == ["source_1", "A", "A", "A"]
    assert np.isclose(table[-1]["cumulative"], budget.total("A"))
    assert np.isclose(table[1]["efficiency"], 0.995 ** 2)
    assert LossBudget.from_meta(budget.to_meta()).to_meta() == budget.to_meta()
    assert np.isclose(LossBudget.uniform(0.8).total("B"), 0.8)
    with pytest.raises(InvalidArgument):
        LossBudget({"C": []})


if __name__ == "__main__":
    # pylint: disable=import-error
    test_symplectic_form()
    test_state_validation()
    test_symplectic_eigenvalues()
    test_reduced_and_permute()
    test_squeezer_setting()
    test_loss_factor()
    test_loss_budget()
