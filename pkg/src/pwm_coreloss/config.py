"""Namespaced run configuration: defaults, presets, TOML file, then flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .io import read_mapping

EXCITATION = {
    "excitation.kind": (str, "spwm"),
    "excitation.vdc": (float, 35.0),
    "excitation.f0_hz": (float, 2500.0),
    "excitation.ratio": (int, 16),
    "excitation.m": (float, 0.8),
    "excitation.inductance_h": (float, 105e-6),
    "excitation.r_series_ohm": (float, 0.0),
    "excitation.cycles": (int, 1),
    "excitation.samples_per_sw_cycle": (int, 1000),
    "excitation.amplitude_v": (float, None),
    "excitation.samples_per_cycle": (int, 10000),
}

CORE = {
    "core.preset": (str, "T300-26D"),
    "core.path": (str, None),
    "core.name": (str, None),
    "core.n1": (float, None),
    "core.n2": (float, None),
    "core.ae_m2": (float, None),
    "core.le_m": (float, None),
    "core.ve_m3": (float, None),
}

BACKEND = {
    "backend.kind": (str, "steinmetz"),
    "backend.path": (str, None),
    "backend.k": (float, None),
    "backend.alpha": (float, None),
    "backend.beta": (float, None),
    "backend.f_min_hz": (float, None),
    "backend.f_max_hz": (float, None),
    "backend.b_min_T": (float, None),
    "backend.b_max_T": (float, None),
    "backend.clamp": (bool, False),
    "backend.datasheet_mw_per_cm3": (float, None),
}

MODEL = {
    "model.preset": (str, "mix26"),
    "model.path": (str, None),
    "model.phase_offset": (float, None),
    "model.rescale": (bool, False),
}

MEASURED = {
    "measured.total_J": (float, None),
    "measured.minor_J": (float, None),
    "measured.datasheet_J": (float, None),
    "measured.emulated_J": (float, None),
}

SCHEMAS = {
    "synth": {**EXCITATION, **CORE,
              "output.waveform": (str, "waveform.csv"),
              "output.current": (bool, False),
              "output.flux": (bool, False)},
    "estimate": {**EXCITATION, **CORE, **BACKEND, **MODEL, **MEASURED,
                 "output.report": (str, "report.csv"),
                 "output.summary": (str, "summary.json")},
    "cancel-sim": {
        "cancel.r_c_ohm": (float, 1.0),
        "cancel.l_m1_h": (float, 100e-6),
        "cancel.l_m2_h": (float, None),
        "cancel.i_pk_a": (float, 0.76),
        "cancel.f_hz": (float, 2500.0),
        "cancel.cycles": (int, 1),
        "cancel.samples_per_cycle": (int, 10000),
        "cancel.sweep_dl_h": (list, None),
        "cancel.input": (str, None),
        "output.trace": (str, "trace.csv"),
        "output.summary": (str, "summary.json"),
        "output.sweep": (str, "sweep.csv"),
    },
    "fit-model": {
        "fit.inputs": (list, None),
        "fit.preset": (str, None),
        "fit.column": (str, None),
        "fit.n_harmonics": (int, 6),
        "fit.material": (str, None),
        "fit.w": (float, None),
        "fit.rescale": (bool, False),
        "fit.r2_threshold": (float, 0.99),
        "fit.samples_per_cycle": (int, 4096),
        "output.model": (str, "model.json"),
    },
    "segment": {**CORE,
                "segment.input": (str, None),
                "segment.column": (str, None),
                "segment.kind": (str, "voltage"),
                "segment.min_delta_b_T": (float, None),
                "output.segments": (str, "segments.csv")},
    "lossmap-gen": {**BACKEND,
                    "lossmap.f_min_hz": (float, 1e3),
                    "lossmap.f_max_hz": (float, 1e6),
                    "lossmap.n_f": (int, 10),
                    "lossmap.db_min_T": (float, 1e-3),
                    "lossmap.db_max_T": (float, 0.5),
                    "lossmap.n_db": (int, 10),
                    "output.lossmap": (str, "lossmap.csv")},
}

PRESETS = {
    "table-v": {
        "excitation.kind": "spwm", "excitation.vdc": 35.0, "excitation.f0_hz": 2500.0,
        "excitation.ratio": 16, "excitation.m": 0.8, "excitation.inductance_h": 105e-6,
        "core.preset": "T300-26D", "backend.kind": "steinmetz",
        "backend.k": 221.0, "backend.alpha": 1.3, "backend.beta": 2.1,
        "backend.datasheet_mw_per_cm3": 109.3, "model.preset": "mix26",
    },
    "table-i": {
        "excitation.kind": "spwm", "excitation.vdc": 20.0, "excitation.f0_hz": 2500.0,
        "excitation.ratio": 8, "excitation.m": 0.8, "excitation.inductance_h": 264e-6,
        "core.preset": "B64290L0084X087",
    },
    "matched-sine": {
        "cancel.r_c_ohm": 1.0, "cancel.i_pk_a": 0.76, "cancel.f_hz": 2500.0,
    },
    "table-vi": {
        "measured.total_J": 5637e-6, "measured.minor_J": 2905e-6,
        "measured.datasheet_J": 2614e-6, "measured.emulated_J": 2658e-6,
    },
}


def _coerce(key: str, typ, value):
    try:
        if typ is bool:
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if typ is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value) if not isinstance(value, str) else int(value.strip())
        if typ is float:
            return float(value)
        if typ is list:
            if isinstance(value, str):
                return [v.strip() for v in value.split(",") if v.strip()]
            return list(value)
        return str(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key}: cannot interpret {value!r} as {typ.__name__}") from None


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def section(self, prefix: str) -> dict:
        return {k[len(prefix) + 1:]: v for k, v in self.values.items()
                if k.startswith(prefix + ".") and v is not None}


def build_config(command: str, path=None, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Layer defaults, preset, config file and overrides; reject unknown keys by name."""
    schema = SCHEMAS[command]
    values = {k: default for k, (_, default) in schema.items()}

    layers = []
    if preset is not None:
        if preset not in PRESETS:
            raise ValidationError(f"--preset {preset!r} is unknown; choose from {sorted(PRESETS)}")
        layers.append({k: v for k, v in PRESETS[preset].items() if k in schema})
    if path is not None:
        layers.append(_flatten(read_mapping(path)))
    if overrides:
        layers.append(overrides)
    for layer in layers:
        for key, value in layer.items():
            if key not in schema:
                raise ValidationError(f"unknown configuration key {key!r} for '{command}'")
            values[key] = None if value is None else _coerce(key, schema[key][0], value)
    return RunConfig(command, values)
