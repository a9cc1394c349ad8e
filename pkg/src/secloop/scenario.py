"""Scenario configuration: one problem instance plus file round-tripping.

Scenario files are flat ``key = value`` text with units spelled out in the
key names, one setting per line, ``#`` comments allowed. The same keys are
the vocabulary for sweep specs, so anything in the schema can be swept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channels import (
    ChannelGains,
    NodeLayout,
    PathLossModel,
    Position3,
    gains_from_geometry,
    n0_from_dbm_per_hz,
)
from .errors import ScenarioFormatError
from .loop import ComputeModel, ResourceLimits, SecurityPolicy


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything defining one problem instance."""

    layout: NodeLayout
    path_loss: PathLossModel
    n0_dbm_per_hz: float
    limits: ResourceLimits
    compute: ComputeModel
    policy: SecurityPolicy

    @property
    def n0(self) -> float:
        return n0_from_dbm_per_hz(self.n0_dbm_per_hz)

    def gains(self) -> ChannelGains:
        return gains_from_geometry(self.layout, self.path_loss, self.n0)

    def with_value(self, key: str, value: float) -> "ScenarioConfig":
        """Copy with one schema key replaced; used by parameter sweeps."""
        mapping = scenario_to_mapping(self)
        if key not in mapping:
            raise ScenarioFormatError(f"unknown scenario key: {key!r}")
        mapping[key] = value
        return scenario_from_mapping(mapping)


_POSITION_KEYS = {
    "sensor": "sensor",
    "eih": "hub",
    "robot": "robot",
    "eve": "eavesdropper",
}

SCENARIO_KEYS = tuple(
    [f"{node}_{axis}_m" for node in _POSITION_KEYS for axis in "xyz"]
    + [
        "kappa_air",
        "eta_air",
        "kappa_ground",
        "eta_ground",
        "n0_dbm_per_hz",
        "p_umax_watts",
        "p_dmax_watts",
        "b_max_hz",
        "t_total_s",
        "f_max_hz",
        "alpha_cycles_per_bit",
        "rho",
        "d_th_bits",
    ]
)


def scenario_to_mapping(sc: ScenarioConfig) -> dict[str, float]:
    out: dict[str, float] = {}
    for file_key, attr in _POSITION_KEYS.items():
        pos: Position3 = getattr(sc.layout, attr)
        out[f"{file_key}_x_m"] = pos.x
        out[f"{file_key}_y_m"] = pos.y
        out[f"{file_key}_z_m"] = pos.z
    out["kappa_air"] = sc.path_loss.kappa_air
    out["eta_air"] = sc.path_loss.eta_air
    out["kappa_ground"] = sc.path_loss.kappa_ground
    out["eta_ground"] = sc.path_loss.eta_ground
    out["n0_dbm_per_hz"] = sc.n0_dbm_per_hz
    out["p_umax_watts"] = sc.limits.p_umax
    out["p_dmax_watts"] = sc.limits.p_dmax
    out["b_max_hz"] = sc.limits.b_max
    out["t_total_s"] = sc.limits.t_total
    out["f_max_hz"] = sc.limits.f_max
    out["alpha_cycles_per_bit"] = sc.compute.alpha
    out["rho"] = sc.compute.rho
    out["d_th_bits"] = sc.policy.d_th
    return out


def scenario_from_mapping(mapping: dict[str, float]) -> ScenarioConfig:
    missing = [k for k in SCENARIO_KEYS if k not in mapping]
    if missing:
        raise ScenarioFormatError(f"missing scenario keys: {', '.join(missing)}")

    def pos(file_key: str) -> Position3:
        return Position3(
            mapping[f"{file_key}_x_m"], mapping[f"{file_key}_y_m"], mapping[f"{file_key}_z_m"]
        )

    try:
        return ScenarioConfig(
            layout=NodeLayout(
                sensor=pos("sensor"),
                hub=pos("eih"),
                robot=pos("robot"),
                eavesdropper=pos("eve"),
            ),
            path_loss=PathLossModel(
                kappa_air=mapping["kappa_air"],
                eta_air=mapping["eta_air"],
                kappa_ground=mapping["kappa_ground"],
                eta_ground=mapping["eta_ground"],
            ),
            n0_dbm_per_hz=mapping["n0_dbm_per_hz"],
            limits=ResourceLimits(
                p_umax=mapping["p_umax_watts"],
                p_dmax=mapping["p_dmax_watts"],
                b_max=mapping["b_max_hz"],
                t_total=mapping["t_total_s"],
                f_max=mapping["f_max_hz"],
            ),
            compute=ComputeModel(
                alpha=mapping["alpha_cycles_per_bit"], rho=mapping["rho"]
            ),
            policy=SecurityPolicy(d_th=mapping["d_th_bits"]),
        )
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ScenarioFormatError(f"line {lineno}: empty key")
        if key in out:
            raise ScenarioFormatError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _to_float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ScenarioFormatError(f"key {key!r}: not a number: {raw!r}") from exc
    if not math.isfinite(value):
        raise ScenarioFormatError(f"key {key!r}: value must be finite")
    return value


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = parse_kv_text(fh.read())
    unknown = sorted(set(raw) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioFormatError(f"unknown scenario keys: {', '.join(unknown)}")
    return scenario_from_mapping({k: _to_float(k, v) for k, v in raw.items()})


def dump_scenario(sc: ScenarioConfig) -> str:
    mapping = scenario_to_mapping(sc)
    return "".join(f"{k} = {mapping[k]!r}\n" for k in SCENARIO_KEYS)


def save_scenario(sc: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_scenario(sc))


def default_scenario() -> ScenarioConfig:
    """Desk-scale default: strong legitimate channels, distant eavesdropper.

    The eavesdropper sits 1 km off the sensor-robot site, so both legitimate
    links outgain their eavesdropping counterparts and the leakage budget of
    300 bits binds.
    """
    return ScenarioConfig(
        layout=NodeLayout(
            sensor=Position3(-500.0, 0.0, 0.0),
            hub=Position3(500.0, 0.0, 100.0),
            robot=Position3(-500.0, 0.0, 0.0),
            eavesdropper=Position3(-500.0, 1000.0, 0.0),
        ),
        path_loss=PathLossModel(),
        n0_dbm_per_hz=-174.0,
        limits=ResourceLimits(p_umax=1.0, p_dmax=1.0, b_max=20e3, t_total=0.1, f_max=1e9),
        compute=ComputeModel(alpha=200.0, rho=0.01),
        policy=SecurityPolicy(d_th=300.0),
    )


def superior_eavesdropper_scenario() -> ScenarioConfig:
    """Variant where the eavesdropper outguns both legitimate links.

    The eavesdropper sits 40 m from the sensor while the robot is pushed far
    from the hub, reversing both channel orderings.
    """
    base = default_scenario()
    return replace(
        base,
        layout=replace(
            base.layout,
            robot=Position3(-800.0, 0.0, 0.0),
            eavesdropper=Position3(-460.0, 0.0, 0.0),
        ),
    )


def eve_scan_scenario() -> ScenarioConfig:
    """Template for the eavesdropper-position scan.

    The hub's ground track is at x = -500 and the sensor/robot site at
    x = +500, so the scanned x axis crosses the hub side first; the
    eavesdropper row is offset 1.1 km in y.
    """
    base = default_scenario()
    return replace(
        base,
        layout=NodeLayout(
            sensor=Position3(500.0, 0.0, 0.0),
            hub=Position3(-500.0, 0.0, 100.0),
            robot=Position3(500.0, 0.0, 0.0),
            eavesdropper=Position3(-500.0, 1100.0, 0.0),
        ),
    )
