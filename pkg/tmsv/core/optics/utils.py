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

from tmsv.core.optics.state import GaussianState, symplectic_form


def random_symplectic_orthogonal(n_modes: int, rng: np.random.Generator) -> np.ndarray:
    """
    Passive (energy-conserving) symplectic map from a Haar-random unitary.
    """
    z = (rng.standard_normal((n_modes, n_modes))
         + 1j * rng.standard_normal((n_modes, n_modes))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    s = np.empty((2 * n_modes, 2 * n_modes))
    s[0::2, 0::2] = u.real
    s[0::2, 1::2] = -u.imag
    s[1::2, 0::2] = u.imag
    s[1::2, 1::2] = u.real
    return s


def random_state(n_modes: int, rng: np.random.Generator, max_db=12.0,
                 max_thermal=0.5) -> GaussianState:
    """
    Random physical state: thermal modes squeezed and mixed by passive optics.
    """
    nu = 1 + max_thermal * rng.random(n_modes)
    r = rng.random(n_modes) * max_db / (20 * np.log10(np.e))
    diag = np.empty(2 * n_modes)
    diag[0::2] = nu * np.exp(-2 * r)
    diag[1::2] = nu * np.exp(2 * r)
    o = random_symplectic_orthogonal(n_modes, rng)
    cov = o @ np.diag(diag) @ o.T
    cov = (cov + cov.T) / 2
    return GaussianState(cov)


def is_symplectic(s: np.ndarray, tol=1e-10) -> bool:
    omega = symplectic_form(s.shape[0] // 2)
    return np.allclose(s @ omega @ s.T, omega, atol=tol)
