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


"""
Experiment descriptions. JSON documents whose keys carry their units (_hz, _rad, _s,
_db). Every section converts with from_meta(meta, path) / to_meta(); validation
failures raise ConfigError with the dotted path of the offending field.
"""
import copy
import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from tmsv.core import settings
from tmsv.core.analysis.bootstrap import BootstrapConfig, statistics
from tmsv.core.control.loops import DisturbanceModel, LockLoop
from tmsv.core.errors import ConfigError, TmsvError
from tmsv.core.optics.experiment import Experiment, locked_phases
from tmsv.core.optics.state import LossBudget, LossFactor, SqueezerSetting
from tmsv.core.signal.dsp import DemodConfig
from tmsv.core.signal.synth import SynthConfig


def _join(path: str, key) -> str:
    return "%s.%s" % (path, key) if path else str(key)


def _take(meta: Dict, key: str, path: str, kind=float, default=Ellipsis):
    if not isinstance(meta, dict):
        raise ConfigError("expected an object, got %r." % (meta,), path)
    if key not in meta:
        if default is Ellipsis:
            raise ConfigError("missing required field.", _join(path, key))
        return default
    value = meta[key]
    if value is None:
        return None
    if kind in (list, dict, str):
        if not isinstance(value, kind):
            raise ConfigError("expected %s, got %r." % (kind.__name__, value), _join(path, key))
        return value
    try:
        if kind is int and (isinstance(value, bool) or float(value) != int(value)):
            raise ValueError()
        if kind is bool and not isinstance(value, bool):
            raise ValueError()
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError("expected %s, got %r." % (kind.__name__, value), _join(path, key))


def _unknown(meta: Dict, allowed, path: str):
    extra = sorted(set(meta) - set(allowed))
    if extra:
        raise ConfigError("unknown fields %s." % extra, path)


def _build(path: str, cls, *args, **kwargs):
    try:
        return cls(*args, **kwargs)
    except ConfigError:
        raise
    except TmsvError as e:
        raise ConfigError(str(e), path)


def _list(meta: Dict, key: str, path: str, default=Ellipsis) -> List:
    value = _take(meta, key, path, kind=list, default=default)
    return [] if value is None else value


@dataclass
class SynthSection:
    sample_rate_hz: float
    carrier_hz: float
    n_samples: int
    bandwidth_hz: float
    dark_noise_db: Optional[float] = -20.0
    spur_tones: List[Tuple[float, float]] = field(default_factory=list)
    lo_phase_A_rad: float = 0.0
    lo_phase_B_rad: float = 0.0
    gain: float = 1.0

    keys = ("sample_rate_hz", "carrier_hz", "n_samples", "bandwidth_hz", "dark_noise_db",
            "spur_tones", "lo_phase_A_rad", "lo_phase_B_rad", "gain")

    @classmethod
    def from_meta(cls, meta: Dict, path: str = "synth"):
        _unknown(meta, cls.keys, path)
        tones = []
        for i, tone in enumerate(_list(meta, "spur_tones", path, [])):
            tone_path = _join(_join(path, "spur_tones"), i)
            tones.append((_take(tone, "frequency_hz", tone_path),
                          _take(tone, "amplitude", tone_path)))
        section = cls(_take(meta, "sample_rate_hz", path),
                      _take(meta, "carrier_hz", path),
                      _take(meta, "n_samples", path, int),
                      _take(meta, "bandwidth_hz", path),
                      _take(meta, "dark_noise_db", path, default=-20.0),
                      tones,
                      _take(meta, "lo_phase_A_rad", path, default=0.0),
                      _take(meta, "lo_phase_B_rad", path, default=0.0),
                      _take(meta, "gain", path, default=1.0))
        if section.n_samples < 2:
            raise ConfigError("must be at least 2.", _join(path, "n_samples"))
        section.build(np.eye(4), "vacuum", path=path)
        return section

    def to_meta(self) -> Dict:
        meta = {key: getattr(self, key) for key in self.keys}
        meta["spur_tones"] = [{"frequency_hz": f, "amplitude": a} for f, a in self.spur_tones]
        return meta

    def build(self, target_cov, optical: str = "signal", seed: int = 0, jump: int = 0,
              path: str = "synth") -> SynthConfig:
        return _build(path, SynthConfig, target_cov, self.carrier_hz, self.sample_rate_hz,
                      self.n_samples / self.sample_rate_hz, self.dark_noise_db,
                      list(self.spur_tones), self.lo_phase_A_rad, self.lo_phase_B_rad,
                      seed, self.bandwidth_hz, self.gain, optical, jump)


@dataclass
class DemodSection:
    cutoff_hz: float
    filter_taps: int
    decimation: int

    @classmethod
    def from_meta(cls, meta: Dict, path: str = "demod"):
        _unknown(meta, ("cutoff_hz", "filter_taps", "decimation"), path)
        return cls(_take(meta, "cutoff_hz", path), _take(meta, "filter_taps", path, int),
                   _take(meta, "decimation", path, int))

    def to_meta(self) -> Dict:
        return {"cutoff_hz": self.cutoff_hz, "filter_taps": self.filter_taps,
                "decimation": self.decimation}

    def build(self, demod_freq: float, demod_phase: float = 0.0,
              path: str = "demod") -> DemodConfig:
        return _build(path, DemodConfig, demod_freq, demod_phase, self.cutoff_hz,
                      self.filter_taps, self.decimation)


_loop_keys = {"name": "name", "setpoint_rad": "setpoint", "error_gain": "error_gain",
              "sensor_noise_rms": "sensor_noise_rms", "p_gain": "p_gain", "i_gain": "i_gain",
              "actuator_range_rad": "actuator_range"}
_disturbance_keys = {"random_walk_coeff": "random_walk_coeff",
                     "linear_drift_rad_per_s": "linear_drift",
                     "initial_offset_rad": "initial_offset"}


@dataclass
class LocksSection:
    loops: List[LockLoop]
    disturbance: DisturbanceModel
    duration_s: float = 10.0
    window_s: float = 0.1
    stats_rate_hz: float = 1e5

    @property
    def update_rate_hz(self) -> float:
        return self.loops[0].update_rate if self.loops else LockLoop().update_rate

    @classmethod
    def from_meta(cls, meta: Dict, path: str = "locks"):
        _unknown(meta, ("update_rate_hz", "loops", "disturbance", "duration_s", "window_s",
                        "stats_rate_hz"), path)
        rate = _take(meta, "update_rate_hz", path, default=LockLoop().update_rate)
        loops, names = [], set()
        for i, entry in enumerate(_list(meta, "loops", path, [])):
            loop_path = _join(_join(path, "loops"), i)
            _unknown(entry, _loop_keys, loop_path)
            kwargs = {}
            for key, attr in _loop_keys.items():
                kind = str if key == "name" else float
                value = _take(entry, key, loop_path, kind, default=None)
                if value is not None:
                    kwargs[attr] = value
            name = kwargs.get("name", "phi_ent")
            if name not in locked_phases + ("aux_lo",) or name in names:
                raise ConfigError("loop name '%s' is unknown or repeated." % name,
                                  _join(loop_path, "name"))
            names.add(name)
            loops.append(_build(loop_path, LockLoop, update_rate=rate, **kwargs))
        dist_meta = _take(meta, "disturbance", path, dict, default={})
        dist_path = _join(path, "disturbance")
        _unknown(dist_meta, _disturbance_keys, dist_path)
        dist_kwargs = {attr: _take(dist_meta, key, dist_path)
                       for key, attr in _disturbance_keys.items() if key in dist_meta}
        section = cls(loops, _build(dist_path, DisturbanceModel, **dist_kwargs),
                      _take(meta, "duration_s", path, default=10.0),
                      _take(meta, "window_s", path, default=0.1),
                      _take(meta, "stats_rate_hz", path, default=1e5))
        if section.duration_s <= 0:
            raise ConfigError("must be positive.", _join(path, "duration_s"))
        if not 0 < section.window_s < section.duration_s:
            raise ConfigError("must lie in (0, duration_s).", _join(path, "window_s"))
        return section

    def to_meta(self) -> Dict:
        loops = []
        for loop in self.loops:
            loops.append({key: getattr(loop, attr) for key, attr in _loop_keys.items()})
        return {"update_rate_hz": self.update_rate_hz, "loops": loops,
                "disturbance": {key: getattr(self.disturbance, attr)
                                for key, attr in _disturbance_keys.items()},
                "duration_s": self.duration_s, "window_s": self.window_s,
                "stats_rate_hz": self.stats_rate_hz}


@dataclass
class BootstrapSection:
    n_chunks: int
    chunk_len: int
    mode: str = "iid"
    block_len: int = 1024
    statistics: Tuple[str, ...] = ("duan", "epr_reid_AB", "epr_reid_BA")

    @classmethod
    def from_meta(cls, meta: Dict, path: str = "bootstrap"):
        _unknown(meta, ("n_chunks", "chunk_len", "mode", "block_len", "statistics"), path)
        names = tuple(_list(meta, "statistics", path, list(cls.statistics)))
        for i, name in enumerate(names):
            if name not in statistics or name == "mean":
                raise ConfigError("unknown statistic '%s'." % name,
                                  _join(_join(path, "statistics"), i))
        section = cls(_take(meta, "n_chunks", path, int), _take(meta, "chunk_len", path, int),
                      _take(meta, "mode", path, str, default="iid"),
                      _take(meta, "block_len", path, int, default=1024), names)
        section.build(0, names[0] if names else "duan", path)
        return section

    def to_meta(self) -> Dict:
        return {"n_chunks": self.n_chunks, "chunk_len": self.chunk_len, "mode": self.mode,
                "block_len": self.block_len, "statistics": list(self.statistics)}

    def build(self, seed: int, statistic: str, path: str = "bootstrap") -> BootstrapConfig:
        return _build(path, BootstrapConfig, self.n_chunks, self.chunk_len, seed, statistic,
                      self.mode, self.block_len)


@dataclass
class ExperimentConfig:
    sources: Tuple[SqueezerSetting, SqueezerSetting]
    budget: LossBudget
    synth: SynthSection
    demod: DemodSection
    locks: LocksSection
    bootstrap: BootstrapSection
    phi_ent: float = np.pi / 2
    model_jitter: Dict[str, float] = field(default_factory=dict)
    subtract_dark: bool = True
    output_dir: Optional[str] = None
    seed: int = 0
    provenance: Dict[str, Any] = field(default_factory=dict)

    keys = ("sources", "phi_ent_rad", "budget", "model_jitter_rad", "synth", "demod", "locks",
            "bootstrap", "analysis", "output_dir", "seed", "provenance")

    @classmethod
    def from_meta(cls, meta: Dict, path: str = ""):
        if not isinstance(meta, dict):
            raise ConfigError("config must be a JSON object.", path)
        _unknown(meta, cls.keys, path)
        sources_meta = _list(meta, "sources", path)
        sources_path = _join(path, "sources")
        if len(sources_meta) != 2:
            raise ConfigError("expected 2 sources, got %d." % len(sources_meta), sources_path)
        sources = []
        for i, entry in enumerate(sources_meta):
            source_path = _join(sources_path, i)
            _unknown(entry, ("vs", "va", "angle_rad"), source_path)
            vs, va = _take(entry, "vs", source_path), _take(entry, "va", source_path)
            for key, value in (("vs", vs), ("va", va)):
                if value <= 0:
                    raise ConfigError("must be positive.", _join(source_path, key))
            if vs * va < 1 - 1e-12:
                raise ConfigError("vs*va = %s violates vs*va >= 1." % (vs * va),
                                  _join(source_path, "va"))
            sources.append(_build(source_path, SqueezerSetting, vs, va,
                                  _take(entry, "angle_rad", source_path, default=0.0)))

        budget_path = _join(path, "budget")
        budget_meta = _take(meta, "budget", path, dict, default={})
        factors = {}
        for stage, entries in budget_meta.items():
            stage_path = _join(budget_path, stage)
            if stage not in LossBudget.stages:
                raise ConfigError("unknown stage, expected one of %s." % (LossBudget.stages,),
                                  stage_path)
            factors[stage] = []
            for i, entry in enumerate(_list(budget_meta, stage, budget_path)):
                factor_path = _join(stage_path, i)
                _unknown(entry, ("label", "efficiency", "visibility"), factor_path)
                factors[stage].append(_build(
                    factor_path, LossFactor, _take(entry, "label", factor_path, str, ""),
                    _take(entry, "efficiency", factor_path, default=None),
                    _take(entry, "visibility", factor_path, default=None)))
        budget = LossBudget(factors)

        jitter_path = _join(path, "model_jitter_rad")
        jitter_meta = _take(meta, "model_jitter_rad", path, dict, default={})
        _unknown(jitter_meta, locked_phases, jitter_path)
        jitter = {}
        for name in jitter_meta:
            jitter[name] = _take(jitter_meta, name, jitter_path)
            if jitter[name] < 0:
                raise ConfigError("must be non-negative.", _join(jitter_path, name))

        analysis = _take(meta, "analysis", path, dict, default={})
        _unknown(analysis, ("subtract_dark",), _join(path, "analysis"))
        config = cls(tuple(sources), budget,
                     SynthSection.from_meta(_take(meta, "synth", path, dict),
                                            _join(path, "synth")),
                     DemodSection.from_meta(_take(meta, "demod", path, dict),
                                            _join(path, "demod")),
                     LocksSection.from_meta(_take(meta, "locks", path, dict, default={}),
                                            _join(path, "locks")),
                     BootstrapSection.from_meta(_take(meta, "bootstrap", path, dict),
                                                _join(path, "bootstrap")),
                     _take(meta, "phi_ent_rad", path, default=np.pi / 2),
                     jitter,
                     _take(analysis, "subtract_dark", _join(path, "analysis"), bool, True),
                     _take(meta, "output_dir", path, str, default=None),
                     _take(meta, "seed", path, int, default=0),
                     _take(meta, "provenance", path, dict, default={}))
        config.demod.build(config.synth.carrier_hz, path=_join(path, "demod"))
        if config.synth.bandwidth_hz >= config.demod.cutoff_hz:
            raise ConfigError("bandwidth_hz must lie below demod.cutoff_hz.",
                              _join(_join(path, "synth"), "bandwidth_hz"))
        return config

    def to_meta(self) -> Dict:
        return {
            "sources": [{"vs": s.vs, "va": s.va, "angle_rad": s.angle} for s in self.sources],
            "phi_ent_rad": self.phi_ent,
            "budget": self.budget.to_meta(),
            "model_jitter_rad": dict(self.model_jitter),
            "synth": self.synth.to_meta(),
            "demod": self.demod.to_meta(),
            "locks": self.locks.to_meta(),
            "bootstrap": self.bootstrap.to_meta(),
            "analysis": {"subtract_dark": self.subtract_dark},
            "output_dir": self.output_dir,
            "seed": self.seed,
            "provenance": copy.deepcopy(self.provenance),
        }

    def experiment(self) -> Experiment:
        return Experiment(self.sources[0], self.sources[1], self.phi_ent, self.budget)

    def with_seed(self, seed: int):
        return replace(self, seed=seed)

    def paper_scale(self):
        """
        Acquisition and bootstrap sizes of the paper-scale preset.
        """
        acq = settings.paper_acquisition
        synth = replace(self.synth, sample_rate_hz=acq["sample_rate_hz"],
                        carrier_hz=acq["carrier_hz"], bandwidth_hz=acq["bandwidth_hz"],
                        n_samples=acq["n_samples"],
                        spur_tones=[(f, a) for f, a in _rescale_tones(self.synth,
                                                                      acq["carrier_hz"])])
        demod = DemodSection(acq["cutoff_hz"], acq["filter_taps"], acq["decimation"])
        bootstrap = replace(self.bootstrap, n_chunks=settings.paper_bootstrap["n_chunks"],
                            chunk_len=settings.paper_bootstrap["chunk_len"])
        return replace(self, synth=synth, demod=demod, bootstrap=bootstrap)


def _rescale_tones(synth: SynthSection, carrier_hz: float):
    factor = carrier_hz / synth.carrier_hz
    return [(f * factor, a) for f, a in synth.spur_tones]


shipped_configs_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                   "data", "configs")


def config_path(name: str) -> str:
    """
    A file path, or the name of a shipped config such as desk or paper.
    """
    if os.path.isfile(name):
        return name
    shipped = os.path.join(shipped_configs_dir, "%s.json" % name)
    if os.path.isfile(shipped):
        return shipped
    raise ConfigError("no config file or shipped config named %s." % name)


def canonical_json(meta: Dict) -> str:
    return json.dumps(meta, sort_keys=True, separators=(",", ":"))


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_json(config.to_meta()).encode("utf-8")).hexdigest()


def load_config(name: str) -> ExperimentConfig:
    path = config_path(name)
    try:
        with open(path) as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError("%s is not valid JSON: %s" % (path, e))
    return ExperimentConfig.from_meta(meta)


def _resolve(meta, parts: List[str], path: str):
    """
    Walks meta along parts; list items are addressed by index or by label/name.
    Returns (container, key).
    """
    node = meta
    for depth, part in enumerate(parts):
        here = ".".join(parts[:depth + 1])
        last = depth == len(parts) - 1
        if isinstance(node, dict):
            if part not in node:
                raise ConfigError("no such field.", here)
            key = part
        elif isinstance(node, list):
            if part.lstrip("-").isdigit() and -len(node) <= int(part) < len(node):
                key = int(part)
            else:
                matches = [i for i, item in enumerate(node) if isinstance(item, dict)
                           and part in (item.get("label"), item.get("name"))]
                if len(matches) != 1:
                    raise ConfigError("no unique item '%s'." % part, here)
                key = matches[0]
        else:
            raise ConfigError("cannot descend into %r." % (node,), here)
        if last:
            return node, key
        node = node[key]
    raise ConfigError("empty parameter path.", path)


def resolve_path(config: ExperimentConfig, path: str) -> float:
    container, key = _resolve(config.to_meta(), path.split("."), path)
    value = container[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("field is not numeric (%r)." % (value,), path)
    return float(value)


def with_value(config: ExperimentConfig, path: str, value: float) -> ExperimentConfig:
    """
    Copy of config with the numeric field at path set to value. A path into the
    optional model_jitter_rad block may name a phase not yet present.
    """
    meta = config.to_meta()
    parts = path.split(".")
    if len(parts) == 2 and parts[0] == "model_jitter_rad" and parts[1] in locked_phases:
        meta["model_jitter_rad"][parts[1]] = value
        return ExperimentConfig.from_meta(meta)
    container, key = _resolve(meta, parts, path)
    old = container[key]
    if isinstance(old, bool) or not isinstance(old, (int, float)):
        raise ConfigError("field is not numeric (%r)." % (old,), path)
    container[key] = int(value) if isinstance(old, int) and float(value).is_integer() else value
    return ExperimentConfig.from_meta(meta)
