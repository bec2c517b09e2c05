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


from typing import Dict, Iterator, Sequence

import numpy as np

from tmsv.core.errors import InvalidArgument


magic = b"TMSV"
format_version = 1

# Packed little-endian header, 32 bytes. Samples follow as channel-interleaved <f8.
header_dtype = np.dtype([
    ("magic", "S4"),
    ("version", "<u2"),
    ("sample_rate", "<f8"),
    ("n_channels", "<u2"),
    ("n_samples", "<u8"),
    ("scale", "<f8"),
])
sample_dtype = np.dtype("<f8")


class RawSampleStream(object):
    """
    Synchronized multi-channel sample record. scale is the variance a vacuum-only
    input shows after reference demodulation.
    """

    def __init__(self, sample_rate: float, channels, scale: float = 1.0):
        if sample_rate <= 0:
            raise InvalidArgument("sample_rate must be positive, got %s." % sample_rate)
        channels = channels if isinstance(channels, np.ndarray) else np.asarray(channels)
        if channels.ndim != 2:
            raise InvalidArgument("Channels must form a 2-d (n_channels, n_samples) array.")
        self.sample_rate: float = float(sample_rate)
        self.channels: np.ndarray = channels
        self.scale: float = float(scale)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_channels:
            raise InvalidArgument("Channel %s out of range for %d channels."
                                  % (index, self.n_channels))
        return self.channels[index]

    def iter_blocks(self, channel: int, block_samples: int) -> Iterator[np.ndarray]:
        data = self.channel(channel)
        for start in range(0, self.n_samples, block_samples):
            yield np.asarray(data[start:start + block_samples], dtype=np.float64)


def _header(sample_rate, n_channels, n_samples, scale) -> bytes:
    header = np.zeros(1, dtype=header_dtype)
    header["magic"] = magic
    header["version"] = format_version
    header["sample_rate"] = sample_rate
    header["n_channels"] = n_channels
    header["n_samples"] = n_samples
    header["scale"] = scale
    return header.tobytes()


class RawSampleWriter(object):
    """
    Streams (n_channels, n) blocks into a record; n_samples is patched on close.
    """

    def __init__(self, path: str, sample_rate: float, n_channels: int, scale: float = 1.0):
        self.path = path
        self.sample_rate = sample_rate
        self.n_channels = n_channels
        self.scale = scale
        self.n_samples = 0
        self._fh = open(path, "wb")
        self._fh.write(_header(sample_rate, n_channels, 0, scale))

    def write(self, block: np.ndarray):
        block = np.asarray(block)
        if block.ndim != 2 or block.shape[0] != self.n_channels:
            raise InvalidArgument("Expected a (%d, n) block, got %s."
                                  % (self.n_channels, str(block.shape)))
        self._fh.write(np.ascontiguousarray(block.T, dtype=sample_dtype).tobytes())
        self.n_samples += block.shape[1]

    def close(self):
        if self._fh is None:
            return
        self._fh.seek(0)
        self._fh.write(_header(self.sample_rate, self.n_channels, self.n_samples, self.scale))
        self._fh.close()
        self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def write_stream(path: str, stream: RawSampleStream, block_samples: int = 2**20):
    with RawSampleWriter(path, stream.sample_rate, stream.n_channels, stream.scale) as writer:
        for start in range(0, stream.n_samples, block_samples):
            writer.write(stream.channels[:, start:start + block_samples])


def write_decimated(path: str, channels: Sequence[np.ndarray], sample_rate: float,
                    scale: float = 1.0) -> int:
    """
    Writes demodulated channels of equal length as a record at their decimated rate.
    scale is 1 for vacuum-normalized samples.
    :return: samples per channel.
    """
    lengths = {len(c) for c in channels}
    if len(lengths) != 1:
        raise InvalidArgument("Demodulated channels differ in length: %s." % sorted(lengths))
    write_stream(path, RawSampleStream(sample_rate, np.vstack(channels), scale))
    return lengths.pop()


def read_header(path: str) -> Dict:
    with open(path, "rb") as fh:
        raw = fh.read(header_dtype.itemsize)
    if len(raw) != header_dtype.itemsize:
        raise InvalidArgument("%s is too short for a raw-sample header." % path)
    header = np.frombuffer(raw, dtype=header_dtype)[0]
    if header["magic"] != magic:
        raise InvalidArgument("%s is not a raw-sample record (magic %r)." % (path, header["magic"]))
    if header["version"] != format_version:
        raise InvalidArgument("Unsupported record version %d." % header["version"])
    return {"sample_rate": float(header["sample_rate"]),
            "n_channels": int(header["n_channels"]),
            "n_samples": int(header["n_samples"]),
            "scale": float(header["scale"])}


def read_stream(path: str) -> RawSampleStream:
    """
    Memory-maps the payload; channels are strided views into the file.
    """
    header = read_header(path)
    shape = (header["n_samples"], header["n_channels"])
    if header["n_samples"] == 0:
        data = np.empty(shape, dtype=sample_dtype)
    else:
        data = np.memmap(path, dtype=sample_dtype, mode="r",
                         offset=header_dtype.itemsize, shape=shape)
    return RawSampleStream(header["sample_rate"], data.T, header["scale"])
