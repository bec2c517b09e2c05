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


import os
import multiprocessing


pj = lambda *paths: os.path.abspath(os.path.expanduser(os.path.join(*paths)))


# System settings.
system_name = os.environ.get("TMSV_SYSTEM", "serial")
ray_init_default = {
    "num_cpus": int(os.environ.get("TMSV_NUM_CPUS", multiprocessing.cpu_count()))
}


# Logging settings.
log_level = os.environ.get("TMSV_LOG_LEVEL", "WARNING")


# Output settings. Directories are created by the commands writing into them.
output_root = pj(os.environ.get("TMSV_OUTPUT_ROOT", pj("~", ".tmsv", "runs")))


# Streams are synthesized, written and demodulated in blocks of this many samples.
stream_block_samples = 2**20

# Bootstrap chunks evaluated per remote call.
bootstrap_chunks_per_task = 256


# Acquisition presets. Frequencies in Hz.
desk_acquisition = {
    "sample_rate_hz": 16e6,
    "carrier_hz": 1e6,
    "bandwidth_hz": 25e3,
    "cutoff_hz": 50e3,
    "filter_taps": 2401,
    "decimation": 160,
    "n_samples": 2**20,
}

# Exactly 10**6 post-decimation samples once both filter edges are discarded.
paper_acquisition = {
    "sample_rate_hz": 256e6,
    "carrier_hz": 8e6,
    "bandwidth_hz": 100e3,
    "cutoff_hz": 200e3,
    "filter_taps": 8001,
    "decimation": 640,
    "n_samples": 640 * (10**6 + 12) + 8001,
}
paper_bootstrap = {
    "n_chunks": 10**4,
    "chunk_len": 2 * 10**5,
}

# Analog modulation frequencies of the locking scheme, in Hz at an 8 MHz carrier.
paper_spur_frequencies = (33.9e6, 35.5e6, 78e6, 82e6)
paper_carrier_hz = 8e6
