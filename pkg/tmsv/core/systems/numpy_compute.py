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


from tmsv.core.analysis.bootstrap import evaluate_chunks
from tmsv.core.signal.dsp import demodulate_blocks
from tmsv.core.signal.synth import rf_block
from tmsv.core.storage.records import read_stream
from tmsv.core.systems.interfaces import ComputeImp


class ComputeCls(ComputeImp):
    # pylint: disable=no-self-use

    def rf_block(self, baseband, start, stop, params):
        return rf_block(baseband, start, stop, params)

    def demod_record(self, path, channel, config, sample_rate, block_samples):
        blocks = read_stream(path).iter_blocks(channel, block_samples)
        return demodulate_blocks(blocks, config, sample_rate)

    def bootstrap_chunks(self, dataset, statistic, dark, seed, start, stop, chunk_len, mode,
                         block_len):
        return evaluate_chunks(dataset, statistic, dark, seed, start, stop, chunk_len, mode,
                               block_len)
