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


import pytest
import ray

from tmsv.core.application import ExperimentApplication
from tmsv.core.systems import numpy_compute
from tmsv.core.systems.systems import System, SerialSystem, RaySystem


def pytest_addoption(parser):
    parser.addoption("--long-tests", action="store_true", default=False,
                     help="run tests marked long (paper scale, lock endurance).")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: paper-scale or endurance test.")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long-tests"):
        return
    skip_long = pytest.mark.skip(reason="needs --long-tests")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip_long)


@pytest.fixture(scope="module", params=["serial", "ray"])
def system(request):
    system = get_system(request.param)
    yield system
    system.shutdown()
    ray.shutdown()


@pytest.fixture(scope="module", params=["serial", "ray"])
def app_inst(request):
    app_inst = get_app(request.param)
    yield app_inst
    app_inst.system.shutdown()
    ray.shutdown()


def get_system(mode) -> System:
    if mode == "serial":
        system: System = SerialSystem(compute_module=numpy_compute)
    elif mode == "ray":
        system: System = RaySystem(compute_module=numpy_compute, num_cpus=4)
    else:
        raise Exception()
    system.init()
    return system


def get_app(mode) -> ExperimentApplication:
    return ExperimentApplication(system=get_system(mode))
