"""Scenario configuration: defaults, JSON schema, validation.

Configs are plain dicts merged over the defaults and checked against a strict
schema (unknown keys rejected everywhere). Units are SI; fields named *_db are
in decibels.
"""

from __future__ import annotations

import copy
import json

import jsonschema

DEFAULT_CONFIG: dict = {
    "n_prbs": 50,
    "n_slots": 2000,              # 200 radio frames x 10 slots
    "snr_db": 15.0,
    "jsr_db": 6.0,
    "jhr": 0.4,
    "noise_power": 1.0,
    "jammer": {
        "kind": "constant",
        "enabled": True,
        "constant_set": [],        # empty: drawn from the scenario seed
        "constant_set_size": 3,
    },
    "channel": {
        "alpha_pl": 3.04,
        "c_scaler": -23.29,
        "d_scaler": 4.14,
        "theta0_deg": -3.61,
        "eta0_db": 20.70,
        "a_shadow": -0.41,
        "sigma0_shadow": 8.52,
        "shadowing": "per_slot",   # per_slot | frozen | off
    },
    "geometry": {
        "gbs": [0.0, 0.0, 30.0],
        "jammer": [260.0, -150.0, 30.0],
        "uav_altitude": 60.0,
        "waypoints": [[120.0, 380.0], [220.0, 280.0]],
        "speed_mps": 4.8,
        "slot_duration_s": 0.0005,  # 7 OFDM symbols, 15 kHz spacing, normal CP
    },
    "agent": {
        "kind": "fh",              # ain | ql | fh
        "model_path": None,
        "ain": {
            "kappa": 0.1,
            "gamma_max": 1.0,
            "prob_floor": 1e-4,
            "gamma_jam": 0.5,
        },
        "ql": {
            "alpha_lr": 0.5,
            "gamma_disc": 0.0,
            "epsilon": {"kind": "linear", "t_end": 1400, "rate": 0.995, "floor": 0.01},
        },
    },
    "filter": {"n_particles": 100, "skl_per_component": False},
    "model": {"sigma_w": 1.0, "c2_persistence": 0.6},
    "training": {
        "n_slots": 2000,
        "calib_slots": 2000,
        "laplace_k": 1.0,
        "n_segments": 1,
        "th_margin": 1.5,
        "th_quantile": 1.0,
        "gng": {
            "max_nodes": 10,
            "lambda_steps": 100,
            "eps_b": 0.2,
            "eps_n": 0.006,
            "max_edge_age": 50,
            "insert_error_decay": 0.5,
            "step_error_decay": 0.995,
            "cov_reg": 1e-6,
            "n_passes": 1,
        },
    },
    "seeds": [0],
}


def _num(minimum=None, exclusive_minimum=None, maximum=None) -> dict:
    out: dict = {"type": "number"}
    if minimum is not None:
        out["minimum"] = minimum
    if exclusive_minimum is not None:
        out["exclusiveMinimum"] = exclusive_minimum
    if maximum is not None:
        out["maximum"] = maximum
    return out


SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": sorted(DEFAULT_CONFIG.keys()),
    "properties": {
        "n_prbs": {"type": "integer", "minimum": 2},
        "n_slots": {"type": "integer", "minimum": 1},
        "snr_db": _num(),
        "jsr_db": _num(),
        "jhr": _num(minimum=0.0, maximum=1.0),
        "noise_power": _num(exclusive_minimum=0.0),
        "jammer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["constant", "sweep", "random"]},
                "enabled": {"type": "boolean"},
                "constant_set": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                },
                "constant_set_size": {"type": "integer", "minimum": 1},
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha_pl": _num(minimum=0.0),
                "c_scaler": _num(),
                "d_scaler": _num(),
                "theta0_deg": _num(),
                "eta0_db": _num(),
                "a_shadow": _num(),
                "sigma0_shadow": _num(),
                "shadowing": {"enum": ["per_slot", "frozen", "off"]},
            },
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gbs": {"type": "array", "items": _num(), "minItems": 3, "maxItems": 3},
                "jammer": {"type": "array", "items": _num(), "minItems": 3, "maxItems": 3},
                "uav_altitude": _num(exclusive_minimum=0.0),
                "waypoints": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": _num(), "minItems": 2, "maxItems": 2},
                },
                "speed_mps": _num(minimum=0.0),
                "slot_duration_s": _num(exclusive_minimum=0.0),
            },
        },
        "agent": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["ain", "ql", "fh"]},
                "model_path": {"type": ["string", "null"]},
                "ain": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "kappa": _num(minimum=0.0),
                        "gamma_max": _num(exclusive_minimum=0.0),
                        "prob_floor": _num(minimum=0.0),
                        "gamma_jam": _num(minimum=0.0, maximum=1.0),
                    },
                },
                "ql": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "alpha_lr": _num(exclusive_minimum=0.0, maximum=1.0),
                        "gamma_disc": _num(minimum=0.0, maximum=1.0),
                        "epsilon": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "kind": {"enum": ["linear", "exponential"]},
                                "t_end": {"type": "integer", "minimum": 1},
                                "rate": _num(exclusive_minimum=0.0, maximum=1.0),
                                "floor": _num(minimum=0.0, maximum=1.0),
                            },
                        },
                    },
                },
            },
        },
        "filter": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_particles": {"type": "integer", "minimum": 1},
                "skl_per_component": {"type": "boolean"},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma_w": _num(exclusive_minimum=0.0),
                "c2_persistence": _num(minimum=0.0, exclusive_minimum=None, maximum=0.999),
            },
        },
        "training": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_slots": {"type": "integer", "minimum": 2},
                "calib_slots": {"type": "integer", "minimum": 1},
                "laplace_k": _num(minimum=0.0),
                "n_segments": {"type": "integer", "minimum": 1},
                "th_margin": _num(exclusive_minimum=0.0),
                "th_quantile": _num(minimum=0.0, maximum=1.0),
                "gng": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "max_nodes": {"type": "integer", "minimum": 2},
                        "lambda_steps": {"type": "integer", "minimum": 1},
                        "eps_b": _num(exclusive_minimum=0.0, maximum=1.0),
                        "eps_n": _num(minimum=0.0, maximum=1.0),
                        "max_edge_age": {"type": "integer", "minimum": 1},
                        "insert_error_decay": _num(minimum=0.0, maximum=1.0),
                        "step_error_decay": _num(minimum=0.0, maximum=1.0),
                        "cov_reg": _num(minimum=0.0),
                        "n_passes": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "seeds": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "integer", "minimum": 0},
        },
    },
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(val, dict) and isinstance(base[key], dict):
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(source: str | dict, overrides: dict | None = None) -> dict:
    """Merge a JSON file or dict over the defaults and validate it."""
    if isinstance(source, str):
        with open(source) as f:
            raw = json.load(f)
    else:
        raw = source
    cfg = _merge(DEFAULT_CONFIG, raw)
    if overrides:
        cfg = _merge(cfg, overrides)
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"invalid config: {e.message}") from e
    _extra_checks(cfg)
    return cfg


def _extra_checks(cfg: dict) -> None:
    if cfg["channel"]["d_scaler"] == 0:
        raise ConfigError("channel.d_scaler must be nonzero")
    n = cfg["n_prbs"]
    bad = [p for p in cfg["jammer"]["constant_set"] if p > n]
    if bad:
        raise ConfigError(f"constant_set PRBs {bad} exceed n_prbs={n}")
    if cfg["jammer"]["kind"] == "constant" and cfg["jammer"]["constant_set_size"] > n:
        raise ConfigError("constant_set_size exceeds n_prbs")
    g = cfg["geometry"]
    if g["uav_altitude"] <= max(g["gbs"][2], g["jammer"][2]):
        raise ConfigError("UAV altitude must exceed ground-equipment heights")
