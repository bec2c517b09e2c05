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


class TmsvError(Exception):
    pass


class InvalidArgument(TmsvError, ValueError):
    pass


class UnphysicalSetting(InvalidArgument):
    pass


class DegenerateInput(TmsvError, ValueError):
    pass


class IncompleteTomography(TmsvError, ValueError):
    pass


class FactorizationFailure(TmsvError, ValueError):
    pass


class DesignFailure(TmsvError, ValueError):

    def __init__(self, message, required_taps=None):
        super(DesignFailure, self).__init__(message)
        self.required_taps = required_taps


class CalibrationFailure(TmsvError, RuntimeError):
    pass


class FitFailure(TmsvError, RuntimeError):
    """
    Raised when a Gaussian fit does not converge.
    fallback holds moment-based (mean, sigma, amplitude) estimates.
    """

    def __init__(self, message, fallback=None):
        super(FitFailure, self).__init__(message)
        self.fallback = fallback


class DegenerateDistribution(FitFailure):
    pass


class ConfigError(TmsvError, ValueError):

    def __init__(self, message, path=""):
        if path:
            message = "%s: %s" % (path, message)
        super(ConfigError, self).__init__(message)
        self.path = path
