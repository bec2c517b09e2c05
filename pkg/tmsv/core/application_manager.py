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


from tmsv.core import settings
from tmsv.core.systems import numpy_compute
from tmsv.core.systems.systems import System, SerialSystem, RaySystem
from tmsv.core.application import ExperimentApplication


_instance: ExperimentApplication = None


def create(system_name: str = None) -> ExperimentApplication:
    system_name = settings.system_name if system_name is None else system_name
    if system_name == "serial":
        system: System = SerialSystem(compute_module=numpy_compute)
    elif system_name == "ray":
        system: System = RaySystem(compute_module=numpy_compute,
                                   num_cpus=settings.ray_init_default["num_cpus"])
    else:
        raise Exception("Unknown system %s, expected serial or ray." % system_name)
    system.init()
    return ExperimentApplication(system=system)


def instance() -> ExperimentApplication:
    # pylint: disable=global-statement
    global _instance
    if _instance is None:
        _instance = create()
    return _instance


def destroy():
    # pylint: disable=global-statement
    global _instance
    if _instance is not None:
        _instance.system.shutdown()
        _instance = None
