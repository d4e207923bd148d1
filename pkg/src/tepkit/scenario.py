"""High/low temperature scenarios and their per-region model coefficients.

A scenario marks each region L (small projected increase) or H (large).
Realizing a scenario turns the marks into a capacity multiplier eta_r via the
thermal model and a demand multiplier gamma_r from the elasticity config.
Temperatures in network and scenario files are Fahrenheit; the thermal module
works in Celsius, so the conversion happens here.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, fields

from . import thermal
from .network import ConductorParams, DRAKE_ACSR, Network

MARK_LOW = "L"
MARK_HIGH = "H"


def _f_to_c(t_f: float) -> float:
    return (t_f - 32.0) * 5.0 / 9.0


def _delta_f_to_c(delta_f: float) -> float:
    return delta_f * 5.0 / 9.0


@dataclass(frozen=True)
class ScenarioCode:
    """Ordered L/H marks, one per region (region id order)."""
    marks: tuple[str, ...]

    def __post_init__(self):
        if not self.marks:
            raise ValueError("a scenario needs at least one mark")
        bad = [m for m in self.marks if m not in (MARK_LOW, MARK_HIGH)]
        if bad:
            raise ValueError(f"marks must be 'L' or 'H', got {bad}")

    def __str__(self) -> str:
        return ",".join(self.marks)

    @classmethod
    def parse(cls, text: str) -> "ScenarioCode":
        return cls(tuple(part.strip().upper() for part in text.split(",")))


@dataclass(frozen=True)
class RegionParams:
    eta: float
    gamma: float
    temp_increase_f: float


@dataclass(frozen=True)
class ScenarioParams:
    """Realized per-region coefficients for one scenario."""
    code: ScenarioCode
    by_region: dict[int, RegionParams]

    def eta(self, region_id: int) -> float:
        return self.by_region[region_id].eta

    def gamma(self, region_id: int) -> float:
        return self.by_region[region_id].gamma

    def scaled_eta(self, factor: float) -> "ScenarioParams":
        """Copy with every region's eta multiplied by ``factor`` (clamped to 1)."""
        return ScenarioParams(self.code, {
            rid: RegionParams(min(1.0, rp.eta * factor), rp.gamma, rp.temp_increase_f)
            for rid, rp in self.by_region.items()
        })


@dataclass(frozen=True)
class DemandElasticityConfig:
    gamma_low: float = 1.02
    gamma_high: float = 1.05

    def __post_init__(self):
        if self.gamma_low < 1.0:
            raise ValueError("gamma_low must be >= 1")
        if self.gamma_high < self.gamma_low:
            raise ValueError("gamma_high must be >= gamma_low")


def enumerate_scenarios(num_regions: int) -> list[ScenarioCode]:
    """All 2^num_regions codes, lexicographic with L before H.

    First code is all-L, last is all-H.
    """
    if num_regions < 1:
        raise ValueError("num_regions must be >= 1")
    return [ScenarioCode(marks)
            for marks in itertools.product((MARK_LOW, MARK_HIGH), repeat=num_regions)]


def realize_scenario(
    code: ScenarioCode,
    net: Network,
    elasticity: DemandElasticityConfig = DemandElasticityConfig(),
    conductors: dict[int, ConductorParams] | None = None,
) -> ScenarioParams:
    """Realize a scenario into per-region (eta, gamma) coefficients.

    Marks are matched to regions in ascending region-id order.  ``conductors``
    optionally overrides the representative conductor per region id; the
    repository default is used otherwise.
    """
    regions = sorted(net.regions, key=lambda r: r.id)
    if len(code.marks) != len(regions):
        raise ValueError(
            f"scenario has {len(code.marks)} marks but the network has {len(regions)} regions")
    conductors = conductors or {}

    by_region: dict[int, RegionParams] = {}
    for region, mark in zip(regions, code.marks):
        if mark == MARK_HIGH:
            increase_f = region.projected_increase_high_f
            gamma = elasticity.gamma_high
        else:
            increase_f = region.projected_increase_low_f
            gamma = elasticity.gamma_low
        cond = conductors.get(region.id, DRAKE_ACSR)
        t_base_c = _f_to_c(region.base_peak_temp_f)
        t_future_c = t_base_c + _delta_f_to_c(increase_f)
        eta = thermal.derating_factor(cond, t_base_c, t_future_c)
        by_region[region.id] = RegionParams(eta=eta, gamma=gamma, temp_increase_f=increase_f)
    return ScenarioParams(code, by_region)


# --------------------------------------------------------------------------
# Scenario configuration file
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    elasticity: DemandElasticityConfig
    conductors: dict[int, ConductorParams]
    base_year: int | None = None
    horizon_year: int | None = None


def load_scenario_config(text: str) -> ScenarioConfig:
    """Parse a scenario configuration document (JSON object).

    Recognized fields: ``elasticity`` {gamma_low, gamma_high}, optional
    ``conductor_overrides`` mapping region id to conductor parameters, and
    optional ``base_year`` / ``horizon_year`` integers.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed scenario config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("scenario config root must be an object")
    unknown = set(doc) - {"elasticity", "conductor_overrides", "base_year", "horizon_year"}
    if unknown:
        raise ValueError(f"scenario config: unknown field(s) {sorted(unknown)}")

    elas_obj = doc.get("elasticity", {})
    if not isinstance(elas_obj, dict) or set(elas_obj) - {"gamma_low", "gamma_high"}:
        raise ValueError("scenario config: elasticity must be an object with gamma_low/gamma_high")
    elasticity = DemandElasticityConfig(
        gamma_low=float(elas_obj.get("gamma_low", DemandElasticityConfig.gamma_low)),
        gamma_high=float(elas_obj.get("gamma_high", DemandElasticityConfig.gamma_high)),
    )

    conductors: dict[int, ConductorParams] = {}
    overrides = doc.get("conductor_overrides", {})
    if not isinstance(overrides, dict):
        raise ValueError("scenario config: conductor_overrides must be an object")
    cond_fields = {f.name for f in fields(ConductorParams)}
    for key, obj in overrides.items():
        if not isinstance(obj, dict) or set(obj) - cond_fields:
            raise ValueError(f"scenario config: bad conductor override for region {key}")
        merged = {f.name: getattr(DRAKE_ACSR, f.name) for f in fields(ConductorParams)}
        merged.update({k: float(v) for k, v in obj.items()})
        conductors[int(key)] = ConductorParams(**merged)

    def _opt_year(name: str):
        value = doc.get(name)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"scenario config: {name} must be an integer")
        return value

    return ScenarioConfig(
        elasticity=elasticity,
        conductors=conductors,
        base_year=_opt_year("base_year"),
        horizon_year=_opt_year("horizon_year"),
    )
