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


import inspect
import logging
from types import ModuleType, FunctionType
from typing import Any, Union, List

import ray

from tmsv.core import settings
from tmsv.core.systems.interfaces import SystemInterface, ComputeInterface
from tmsv.core.systems.utils import check_implementation, extract_functions


logger = logging.getLogger(__name__)


class System(SystemInterface):
    # pylint: disable=abstract-method

    def __init__(self, compute_module):
        self.compute_module: ModuleType = compute_module
        self.compute_imp = compute_module.ComputeCls
        self.remote_functions: dict = {}
        # Check that all of kernel interface is implemented.
        check_implementation(ComputeInterface, self.compute_imp)
        # Collect implemented module functions.
        self.module_functions = extract_functions(self.compute_imp)

    def init(self):
        function_signatures: dict = {}
        required_methods = inspect.getmembers(ComputeInterface(), predicate=inspect.ismethod)
        for name, func in required_methods:
            function_signatures[name] = func
        for name, func in self.module_functions.items():
            remote_params = getattr(function_signatures[name], "remote_params", {})
            self.remote_functions[name] = self.remote(func, remote_params)


class SerialSystem(System):
    # pylint: disable=abstract-method

    def shutdown(self):
        pass

    def put(self, value: Any):
        return value

    def get(self, object_ids: Union[Any, List]):
        return object_ids

    def remote(self, function: FunctionType, remote_params: dict):
        return function

    def call(self, name: str, *args, **kwargs):
        return self.remote_functions[name](*args, **kwargs)


class RaySystem(System):
    # pylint: disable=abstract-method
    """
    Runs kernels as Ray tasks. Ray is started on init unless already running.
    """

    def __init__(self, compute_module, num_cpus: int = None):
        super(RaySystem, self).__init__(compute_module)
        self.num_cpus = num_cpus
        self.manage_ray = True

    def init(self):
        if ray.is_initialized():
            self.manage_ray = False
        if self.manage_ray:
            init_args = dict(settings.ray_init_default)
            if self.num_cpus is not None:
                init_args["num_cpus"] = self.num_cpus
            ray.init(**init_args)
            logger.info("Started ray with %s.", init_args)
        super(RaySystem, self).init()

    def shutdown(self):
        if self.manage_ray:
            ray.shutdown()

    def put(self, value: Any):
        return ray.put(value)

    def get(self, object_ids: Union[Any, List]):
        return ray.get(object_ids)

    def remote(self, function: FunctionType, remote_params: dict):
        r = ray.remote(num_cpus=1, **remote_params)
        return r(function)

    def call(self, name: str, *args, **kwargs):
        return self.remote_functions[name].remote(*args, **kwargs)
