"""Run configuration: a versioned YAML key-value tree.

Every key is optional; the file is deep-merged over :func:`default_config`.
Unknown keys are rejected so that typos do not silently fall back to
defaults. Numeric values are coerced to the type of their default, which
also accepts YAML spellings such as ``40e6`` that PyYAML reads as strings.
"""

from __future__ import annotations

import copy
import os
from dataclasses import fields
from typing import Any, Optional

import yaml

from .array import SubArrayConfig
from .cell import CellParams, Variant
from .device import ResistanceModel
from .pcspc import calibrate_params
from .perfmodel import FpgaReference, PerfParams
from .protocol import SyntheticProtocolParams
from .system import SystemConfig

CONFIG_VERSION = 1

EXPERIMENTS = ("verify", "margins", "ber-sweep", "perf", "protocol", "trace")


class ConfigError(ValueError):
    pass


def _defaults(cls) -> dict:
    return {f.name: f.default for f in fields(cls)}


def default_config() -> dict:
    pc = calibrate_params()
    return {
        "config_version": CONFIG_VERSION,
        "seed": 0,
        "jobs": 1,
        "format": "json",
        "out": None,
        "device": _defaults(ResistanceModel),
        "cell": _defaults(CellParams),
        "pcspc": {
            "grc_frequency": 40e6,
            "v_th": pc.v_th,
            "v_ref": None,
            "t_d": pc.t_d,
            "v_precharge": None,
            "comparator_noise_sigma": 0.0,
            "time_step": None,
            "c1": None,
        },
        "array": {**_defaults(SubArrayConfig), "subarray_count": 4},
        "system": {"variant": Variant.COMPENSATED.value, "weight_density": 0.5, "input_density": 0.5},
        "experiments": {
            "verify": {"trials": 10},
            "margins": {"trials": 100_000, "variant": Variant.COMPENSATED.value, "cells": None},
            "ber_sweep": {
                "trials": 1_000_000,
                "compute_bits": [3, 5, 7, 9, 11],
                "calibrate": True,
                "target_ber": 1.6e-5,
                "calibration_bits": 9,
                "calibration_samples": 2_000_000,
            },
            "perf": {"params": _defaults(PerfParams), "fpga": _defaults(FpgaReference)},
            "protocol": {
                "trials": 100_000,
                "bers": [0.0, 1.6e-5, 1.6e-4, 1e-3, 1e-2],
                "params": _defaults(SyntheticProtocolParams),
            },
            "trace": {"row": 0},
        },
    }


def _coerce(value, default, path):
    if value is None or default is None:
        return value
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            f = float(value)
            if f != int(f):
                raise TypeError
            return int(f)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            if not isinstance(value, list):
                raise TypeError
            return [_coerce(v, default[0], path) for v in value] if default else value
        if isinstance(default, str):
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: cannot interpret {value!r} as {type(default).__name__}") from None
    return value


# keys whose default is None but which take a number when given
_OPTIONAL_FLOATS = {"pcspc.v_ref", "pcspc.v_precharge", "pcspc.time_step", "pcspc.c1",
                    "cell.stuck_current"}
_OPTIONAL_INTS = {"experiments.margins.cells"}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        p = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise ConfigError(f"unknown configuration key {p!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{p}: expected a mapping")
            out[key] = _merge(base[key], value, p)
        elif value is not None and p in _OPTIONAL_FLOATS:
            out[key] = _coerce(value, 0.0, p)
        elif value is not None and p in _OPTIONAL_INTS:
            out[key] = _coerce(value, 0, p)
        else:
            out[key] = _coerce(value, base[key], p)
    return out


def resolve(overrides: Optional[dict] = None) -> dict:
    cfg = _merge(default_config(), overrides or {})
    if cfg["config_version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported config_version {cfg['config_version']} (expected {CONFIG_VERSION})")
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be 'json' or 'csv'")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg


def load_config(path: Optional[str | os.PathLike] = None) -> dict:
    """Parse and resolve a config file; ``None`` gives the defaults."""
    if path is None:
        return resolve()
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return resolve(data)


def build_system(cfg: dict) -> SystemConfig:
    try:
        device = ResistanceModel(**cfg["device"])
        cell = CellParams(**cfg["cell"])
        pc = cfg["pcspc"]
        extra = {k: pc[k] for k in ("v_ref", "v_precharge", "time_step", "c1") if pc[k] is not None}
        pcspc = calibrate_params(cell.i_unit, pc["grc_frequency"], pc["v_th"], t_d=pc["t_d"],
                                 comparator_noise_sigma=pc["comparator_noise_sigma"], **extra)
        arr = dict(cfg["array"])
        count = arr.pop("subarray_count")
        sysc = cfg["system"]
        return SystemConfig(count, SubArrayConfig(**arr), device, cell, pcspc, Variant(sysc["variant"]),
                            cfg["seed"], sysc["weight_density"], sysc["input_density"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_perf(cfg: dict) -> tuple[PerfParams, FpgaReference]:
    e = cfg["experiments"]["perf"]
    try:
        return PerfParams(**e["params"]), FpgaReference(**e["fpga"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def build_protocol(cfg: dict) -> SyntheticProtocolParams:
    try:
        return SyntheticProtocolParams(**cfg["experiments"]["protocol"]["params"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def dump(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)


def plain(value: Any):
    """Config/report values converted to JSON/YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    if isinstance(value, Variant):
        return value.value
    return value
