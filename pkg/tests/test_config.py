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


import copy
import json
import os

import numpy as np
import pytest

from tmsv.core import settings
from tmsv.core.config import ExperimentConfig, config_hash, config_path, load_config, \
    resolve_path, with_value
from tmsv.core.errors import ConfigError
from tmsv.core.signal.synth import paper_spur_tones


def desk_meta():
    with open(config_path("desk")) as fh:
        return json.load(fh)


def error_path(meta) -> str:
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_meta(meta)
    return e.value.path


def test_shipped_configs():
    desk = load_config("desk")
    assert desk.synth.n_samples == 2**20
    assert desk.synth.spur_tones == [(4237500.0, 0.05), (4437500.0, 0.05)]
    # The scaled tones the desk acquisition keeps are exactly those below its Nyquist limit.
    nyquist = desk.synth.sample_rate_hz / 2
    scaled = paper_spur_tones(desk.synth.carrier_hz, 0.05)
    assert np.allclose(desk.synth.spur_tones, [(f, a) for f, a in scaled if f < nyquist])
    assert desk.demod.build(desk.synth.carrier_hz).decimation == 160
    assert [loop.name for loop in desk.locks.loops] == ["aux_lo", "phi_ent", "phi_A", "phi_B"]
    assert desk.locks.update_rate_hz == 1e5
    paper = load_config("paper")
    assert paper.synth.n_samples == settings.paper_acquisition["n_samples"]
    assert paper.bootstrap.n_chunks == 10**4
    assert len(paper.synth.spur_tones) == 4
    assert paper.seed == 20200101
    # Both describe the same optics.
    assert desk.sources == paper.sources
    assert desk.budget.to_meta() == paper.budget.to_meta()


def test_config_path(tmp_path):
    path = os.path.join(str(tmp_path), "mine.json")
    with open(path, "w") as fh:
        json.dump(desk_meta(), fh)
    assert config_path(path) == path
    assert load_config(path).to_meta() == load_config("desk").to_meta()
    with pytest.raises(ConfigError):
        config_path("no-such-config")
    broken = os.path.join(str(tmp_path), "broken.json")
    with open(broken, "w") as fh:
        fh.write("{\"seed\": ")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_error_paths():
    meta = desk_meta()
    meta["sources"][0]["va"] = 10.0
    assert error_path(meta) == "sources.0.va"

    meta = desk_meta()
    meta["sources"][1]["vs"] = -0.1
    assert error_path(meta) == "sources.1.vs"

    meta = desk_meta()
    meta["colour"] = "blue"
    assert error_path(meta) == ""

    meta = desk_meta()
    meta["synth"]["bandwidth_hz"] = 60e3
    assert error_path(meta) == "synth.bandwidth_hz"

    meta = desk_meta()
    meta["synth"]["n_samples"] = 2.5
    assert error_path(meta) == "synth.n_samples"

    meta = desk_meta()
    meta["synth"]["carrier_hz"] = 9e6
    assert error_path(meta) == "synth"

    meta = desk_meta()
    meta["synth"]["spur_tones"][1] = {"frequency_hz": 1e6}
    assert error_path(meta) == "synth.spur_tones.1.amplitude"

    meta = desk_meta()
    meta["demod"]["filter_taps"] = 2400
    assert error_path(meta) == "demod"

    meta = desk_meta()
    meta["budget"]["A"][1]["efficiency"] = 1.5
    assert error_path(meta) == "budget.A.1"

    meta = desk_meta()
    meta["budget"]["C"] = []
    assert error_path(meta) == "budget.C"

    meta = desk_meta()
    meta["locks"]["loops"][2]["name"] = "phi_ent"
    assert error_path(meta) == "locks.loops.2.name"

    meta = desk_meta()
    meta["locks"]["window_s"] = 20.0
    assert error_path(meta) == "locks.window_s"

    meta = desk_meta()
    meta["locks"]["loops"][0]["actuator_range_rad"] = 0
    assert error_path(meta) == "locks.loops.0"

    meta = desk_meta()
    meta["bootstrap"]["statistics"] = ["mean"]
    assert error_path(meta) == "bootstrap.statistics.0"

    meta = desk_meta()
    meta["bootstrap"]["n_chunks"] = 1
    assert error_path(meta) == "bootstrap"

    meta = desk_meta()
    meta["model_jitter_rad"] = {"phi_A": -0.1}
    assert error_path(meta) == "model_jitter_rad.phi_A"

    meta = desk_meta()
    meta["analysis"]["subtract_dark"] = "yes"
    assert error_path(meta) == "analysis.subtract_dark"

    meta = desk_meta()
    del meta["synth"]
    assert error_path(meta) == "synth"

    with pytest.raises(ConfigError):
        ExperimentConfig.from_meta([])


def test_round_trip_and_hash():
    config = load_config("desk")
    meta = config.to_meta()
    again = ExperimentConfig.from_meta(copy.deepcopy(meta))
    assert again.to_meta() == meta
    assert config_hash(again) == config_hash(config)
    assert len(config_hash(config)) == 64
    assert config_hash(config.with_seed(2)) != config_hash(config)
    assert config.with_seed(2).seed == 2


def test_resolve_path():
    config = load_config("desk")
    assert resolve_path(config, "budget.A.tap.efficiency") == 0.99
    assert resolve_path(config, "budget.source_2.1.visibility") == 0.995
    assert resolve_path(config, "sources.1.vs") == 0.0312
    assert resolve_path(config, "locks.loops.phi_A.p_gain") == 0.5
    assert resolve_path(config, "synth.n_samples") == 2**20
    for bad in ("budget.A.nope", "budget.A.tap.efficiency.more", "synth.spur_tones",
                "provenance.sources", "sources.7.vs", "analysis.subtract_dark"):
        with pytest.raises(ConfigError):
            resolve_path(config, bad)


def test_with_value():
    config = load_config("desk")
    changed = with_value(config, "budget.A.tap.efficiency", 0.5)
    assert resolve_path(changed, "budget.A.tap.efficiency") == 0.5
    assert resolve_path(config, "budget.A.tap.efficiency") == 0.99
    jittered = with_value(config, "model_jitter_rad.phi_A", 0.01)
    assert jittered.model_jitter == {"phi_A": 0.01}
    assert config.model_jitter == {}
    assert with_value(config, "bootstrap.n_chunks", 50.0).bootstrap.n_chunks == 50
    with pytest.raises(ConfigError):
        with_value(config, "budget.A.tap.efficiency", 1.5)
    with pytest.raises(ConfigError):
        with_value(config, "model_jitter_rad.phi_C", 0.01)


def test_paper_scale():
    desk = load_config("desk")
    scaled = desk.paper_scale()
    acq = settings.paper_acquisition
    assert scaled.synth.sample_rate_hz == acq["sample_rate_hz"]
    assert scaled.synth.n_samples == acq["n_samples"]
    assert scaled.demod.filter_taps == acq["filter_taps"]
    assert scaled.bootstrap.chunk_len == settings.paper_bootstrap["chunk_len"]
    # Tones keep their offset ratio to the carrier.
    assert np.allclose([f for f, _ in scaled.synth.spur_tones], [33.9e6, 35.5e6])
    assert scaled.sources == desk.sources
    assert scaled.demod.build(scaled.synth.carrier_hz).decimation == 640
    assert ExperimentConfig.from_meta(scaled.to_meta()).to_meta() == scaled.to_meta()


if __name__ == "__main__":
    # pylint: disable=import-error
    import tempfile
    test_shipped_configs()
    test_config_path(tempfile.mkdtemp())
    test_error_paths()
    test_round_trip_and_hash()
    test_resolve_path()
    test_with_value()
    test_paper_scale()
