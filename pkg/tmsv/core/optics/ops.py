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
from numpy.polynomial.hermite import hermgauss

from tmsv.core.errors import InvalidArgument
from tmsv.core.optics.state import GaussianState, SqueezerSetting


# Gauss-Hermite order used to average over Gaussian phase jitter.
jitter_quadrature_order = 21


def rotation_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def _check_mode(state: GaussianState, mode: int):
    if not 0 <= mode < state.n_modes:
        raise InvalidArgument("Mode %s out of range for %d modes." % (mode, state.n_modes))


def _embed(n_modes: int, mode: int, block: np.ndarray) -> np.ndarray:
    s = np.eye(2 * n_modes)
    s[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = block
    return s


def transform(state: GaussianState, s: np.ndarray) -> GaussianState:
    """
    Apply the linear quadrature map s: cov <- s cov s^T, mean <- s mean.
    """
    cov = s @ state.cov @ s.T
    # Remove rounding asymmetry.
    cov = (cov + cov.T) / 2
    return GaussianState(cov, s @ state.mean, validate=False)


def vacuum(n_modes: int) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise InvalidArgument("n_modes must be a positive integer, got %s." % n_modes)
    return GaussianState(np.eye(2 * n_modes))


def squeeze(state: GaussianState, mode: int, setting: SqueezerSetting) -> GaussianState:
    """
    Non-minimum-uncertainty squeezer: vacuum input maps to Var(X)=vs, Var(P)=va
    along the setting's angle.
    """
    _check_mode(state, mode)
    if not isinstance(setting, SqueezerSetting):
        setting = SqueezerSetting(*setting)
    mu = np.sqrt(setting.vs * setting.va)
    e_r = (setting.va / setting.vs) ** 0.25
    s_block = rotation_matrix(setting.angle) @ np.diag([1 / e_r, e_r])
    excess = np.zeros_like(state.cov)
    excess[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = (mu - 1) * np.eye(2)
    thermal = GaussianState(state.cov + excess, state.mean, validate=False)
    return transform(thermal, _embed(state.n_modes, mode, s_block))


def rotate(state: GaussianState, mode: int, phi: float) -> GaussianState:
    _check_mode(state, mode)
    return transform(state, _embed(state.n_modes, mode, rotation_matrix(phi)))


def beamsplitter_matrix(n_modes: int, mode_i: int, mode_j: int,
                        transmittance: float) -> np.ndarray:
    t, r = np.sqrt(transmittance), np.sqrt(1 - transmittance)
    s = np.eye(2 * n_modes)
    for q in range(2):
        a, b = 2 * mode_i + q, 2 * mode_j + q
        s[a, a], s[a, b] = t, -r
        s[b, a], s[b, b] = r, t
    return s


def beamsplitter(state: GaussianState, mode_i: int, mode_j: int,
                 transmittance: float) -> GaussianState:
    """
    Real beam splitter: X_i' = t X_i - r X_j, X_j' = r X_i + t X_j, likewise for P.
    """
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise InvalidArgument("Beam splitter needs two distinct modes.")
    if not 0 <= transmittance <= 1:
        raise InvalidArgument("Transmittance %s outside [0, 1]." % transmittance)
    return transform(state, beamsplitter_matrix(state.n_modes, mode_i, mode_j, transmittance))


def loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    _check_mode(state, mode)
    if not 0 <= eta <= 1:
        raise InvalidArgument("Efficiency %s outside [0, 1]." % eta)
    k = _embed(state.n_modes, mode, np.sqrt(eta) * np.eye(2))
    result = transform(state, k)
    sl = slice(2 * mode, 2 * mode + 2)
    result.cov[sl, sl] += (1 - eta) * np.eye(2)
    return result


def apply_phase_jitter(state: GaussianState, mode: int, sigma_phi: float) -> GaussianState:
    """
    Average R(phi) cov R(phi)^T over phi ~ N(0, sigma_phi**2).
    """
    _check_mode(state, mode)
    if sigma_phi < 0:
        raise InvalidArgument("sigma_phi must be non-negative, got %s." % sigma_phi)
    if sigma_phi == 0:
        return state.copy()
    nodes, weights = hermgauss(jitter_quadrature_order)
    weights = weights / np.sqrt(np.pi)
    cov = np.zeros_like(state.cov)
    mean = np.zeros_like(state.mean)
    for x, w in zip(nodes, weights):
        s = _embed(state.n_modes, mode, rotation_matrix(np.sqrt(2) * sigma_phi * x))
        cov += w * (s @ state.cov @ s.T)
        mean += w * (s @ state.mean)
    # Spread of the rotated means.
    for x, w in zip(nodes, weights):
        s = _embed(state.n_modes, mode, rotation_matrix(np.sqrt(2) * sigma_phi * x))
        d = s @ state.mean - mean
        cov += w * np.outer(d, d)
    return GaussianState((cov + cov.T) / 2, mean, validate=False)


def permute_modes(state: GaussianState, order) -> GaussianState:
    return state.permute(list(order))
