"""Experiment inputs: link scenarios, oscillator descriptions and the technology catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import yaml

# The value used for every Doppler figure; deliberately not the CODATA value.
SPEED_OF_LIGHT = 3e8

KMH_TO_MPS = 1000.0 / 3600.0


class ConfigError(ValueError):
    """Invalid or incomplete scenario configuration."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class TechnologyParams:
    """Transistor/resonator figures that set an oscillator's phase-noise floor."""

    name: str
    v_cd: float  # safe operating voltage [V]
    i_cd: float  # collector/drain current [A]
    q0: float  # unloaded resonator quality factor

    def __post_init__(self):
        for attr in ("v_cd", "i_cd", "q0"):
            value = getattr(self, attr)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{attr} must be positive, got {value!r}")


TECHNOLOGIES: dict[str, TechnologyParams] = {
    t.name: t
    for t in (
        TechnologyParams("Si CMOS", v_cd=1.0, i_cd=5e-3, q0=15.0),
        TechnologyParams("SiGe HBT", v_cd=2.0, i_cd=30e-3, q0=15.0),
        TechnologyParams("InGaP HBT", v_cd=5.0, i_cd=25e-3, q0=40.0),
        TechnologyParams("GaN HEMT", v_cd=20.0, i_cd=40e-3, q0=40.0),
        TechnologyParams("GaAs HEMT", v_cd=4.0, i_cd=25e-3, q0=40.0),
    )
}


def builtin_technology(name: str) -> TechnologyParams:
    """Look up one row of the oscillator technology catalog (case-insensitive)."""
    for key, tech in TECHNOLOGIES.items():
        if key.lower() == name.strip().lower():
            return tech
    known = ", ".join(TECHNOLOGIES)
    raise KeyError(f"unknown technology {name!r}; known: {known}")


@dataclass(frozen=True)
class OscillatorSpec:
    """One way of pinning down the phase-noise innovation variance.

    Exactly one of the variants is populated: an explicit innovation variance,
    an explicit 3-dB bandwidth, a single SSB measurement point, or a technology
    whose floor is used.
    """

    sigma2_zeta: float | None = None
    f3db: float | None = None
    ssb_dbc_hz: float | None = None
    ssb_offset_hz: float | None = None
    technology: TechnologyParams | None = None

    def __post_init__(self):
        variants = [
            self.sigma2_zeta is not None,
            self.f3db is not None,
            self.ssb_dbc_hz is not None or self.ssb_offset_hz is not None,
            self.technology is not None,
        ]
        if sum(variants) != 1:
            raise ValueError("exactly one oscillator variant must be given")
        if self.sigma2_zeta is not None and not self.sigma2_zeta >= 0:
            raise ValueError("sigma2_zeta must be non-negative")
        if self.f3db is not None and not self.f3db > 0:
            raise ValueError("f3db must be positive")
        if variants[2]:
            if self.ssb_dbc_hz is None or self.ssb_offset_hz is None:
                raise ValueError("an SSB point needs both level and offset")
            if not self.ssb_offset_hz > 0:
                raise ValueError("ssb_offset_hz must be positive")

    @property
    def kind(self) -> str:
        if self.sigma2_zeta is not None:
            return "sigma2_zeta"
        if self.f3db is not None:
            return "f3db"
        if self.technology is not None:
            return "technology"
        return "ssb"

    @classmethod
    def from_ssb(cls, level_dbc_hz: float, offset_hz: float) -> OscillatorSpec:
        return cls(ssb_dbc_hz=level_dbc_hz, ssb_offset_hz=offset_hz)

    @classmethod
    def from_technology(cls, tech: TechnologyParams | str) -> OscillatorSpec:
        if isinstance(tech, str):
            tech = builtin_technology(tech)
        return cls(technology=tech)

    def to_dict(self) -> dict[str, Any]:
        kind = self.kind
        if kind == "sigma2_zeta":
            return {"sigma2_zeta": self.sigma2_zeta}
        if kind == "f3db":
            return {"f3db_hz": self.f3db}
        if kind == "technology":
            t = self.technology
            if TECHNOLOGIES.get(t.name) == t:
                return {"technology": t.name}
            return {"technology": {"name": t.name, "v_cd": t.v_cd, "i_cd": t.i_cd, "q0": t.q0}}
        return {"ssb_dbc_hz": self.ssb_dbc_hz, "ssb_offset_hz": self.ssb_offset_hz}


@dataclass(frozen=True)
class LinkScenario:
    """Full configuration of one link experiment.

    ``es`` and ``sigma2_w`` are linear; only their ratio enters the bounds.
    ``bw`` is the symbol rate (1/Ts) and ``velocity`` is in m/s.
    """

    block_len: int
    es: float
    sigma2_w: float
    f0: float
    bw: float
    velocity: float = 0.0
    oscillator: OscillatorSpec | None = field(default=None, compare=True)

    def __post_init__(self):
        if isinstance(self.block_len, bool) or int(self.block_len) != self.block_len or self.block_len < 1:
            raise ValueError(f"block_len must be a positive integer, got {self.block_len!r}")
        object.__setattr__(self, "block_len", int(self.block_len))
        for attr in ("es", "sigma2_w", "f0", "bw"):
            value = getattr(self, attr)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{attr} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.velocity) and self.velocity >= 0):
            raise ValueError(f"velocity must be non-negative, got {self.velocity!r}")
        if not math.isfinite(self.snr_awgn):
            raise ValueError("es/sigma2_w overflows")

    @classmethod
    def from_db(cls, block_len: int, snr_db: float, f0: float, bw: float,
                v_kmh: float = 0.0, oscillator: OscillatorSpec | None = None) -> LinkScenario:
        """Build a scenario with Es = 1 and AWGN variance 10^(-snr_db/10)."""
        return cls(block_len, 1.0, 10.0 ** (-snr_db / 10.0), f0, bw,
                   v_kmh * KMH_TO_MPS, oscillator)

    @property
    def snr_awgn(self) -> float:
        return self.es / self.sigma2_w

    @property
    def snr_awgn_db(self) -> float:
        return 10.0 * math.log10(self.snr_awgn)

    @property
    def doppler(self) -> float:
        return doppler_frequency(self.velocity, self.f0)

    def replace(self, **changes) -> LinkScenario:
        from dataclasses import replace

        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Canonical document; linear keys so that loading it back is exact."""
        doc: dict[str, Any] = {
            "K": self.block_len,
            "es": self.es,
            "sigma2_w": self.sigma2_w,
            "f0_hz": self.f0,
            "bw_hz": self.bw,
            "v_mps": self.velocity,
        }
        if self.oscillator is not None:
            doc["oscillator"] = self.oscillator.to_dict()
        return doc


def doppler_frequency(velocity: float, f0: float) -> float:
    """Maximum Doppler shift v*f0/c in Hz."""
    if velocity < 0:
        raise ValueError("velocity must be non-negative")
    if f0 <= 0:
        raise ValueError("f0 must be positive")
    return velocity * f0 / SPEED_OF_LIGHT


def _number(doc: Mapping[str, Any], key: str, *, required: bool = True) -> float | None:
    if key not in doc:
        if required:
            raise ConfigError(key, "missing required key")
        return None
    raw = doc[key]
    if isinstance(raw, bool):
        raise ConfigError(key, f"expected a number, got {raw!r}")
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"unparseable number {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"non-finite value {raw!r}")
    return value


def _positive(doc, key, *, required=True):
    value = _number(doc, key, required=required)
    if value is not None and value <= 0:
        raise ConfigError(key, f"must be positive, got {value!r}")
    return value


def _oscillator(doc: Any) -> OscillatorSpec:
    if not isinstance(doc, Mapping):
        raise ConfigError("oscillator", "expected a mapping")
    present = [k for k in ("sigma2_zeta", "f3db_hz", "ssb_dbc_hz", "technology") if k in doc]
    if len(present) != 1:
        raise ConfigError("oscillator", "give exactly one of sigma2_zeta, f3db_hz, "
                                        "ssb_dbc_hz (+ ssb_offset_hz), technology")
    kind = present[0]
    if kind == "sigma2_zeta":
        value = _number(doc, "sigma2_zeta")
        if value < 0:
            raise ConfigError("oscillator.sigma2_zeta", "must be non-negative")
        return OscillatorSpec(sigma2_zeta=value)
    if kind == "f3db_hz":
        return OscillatorSpec(f3db=_positive(doc, "f3db_hz"))
    if kind == "ssb_dbc_hz":
        level = _number(doc, "ssb_dbc_hz")
        offset = _positive(doc, "ssb_offset_hz")
        return OscillatorSpec.from_ssb(level, offset)
    tech = doc["technology"]
    if isinstance(tech, str):
        try:
            return OscillatorSpec.from_technology(tech)
        except KeyError as exc:
            raise ConfigError("oscillator.technology", str(exc.args[0])) from None
    if isinstance(tech, Mapping):
        return OscillatorSpec(technology=TechnologyParams(
            name=str(tech.get("name", "custom")),
            v_cd=_positive(tech, "v_cd"),
            i_cd=_positive(tech, "i_cd"),
            q0=_positive(tech, "q0"),
        ))
    raise ConfigError("oscillator.technology", "expected a name or a mapping")


def scenario_from_dict(doc: Mapping[str, Any]) -> LinkScenario:
    """Validate a parsed configuration mapping.

    The AWGN level is given either as ``es_over_sigma2w_db`` (Es normalized to
    1) or as explicit linear ``es`` and ``sigma2_w``. The velocity is given as
    ``v_kmh`` or ``v_mps``; it defaults to zero when neither is present.
    """
    if not isinstance(doc, Mapping):
        raise ConfigError("<document>", "expected a key/value mapping")

    k = _number(doc, "K")
    if k != int(k) or k < 1:
        raise ConfigError("K", f"must be a positive integer, got {doc['K']!r}")

    if "es_over_sigma2w_db" in doc:
        if "es" in doc or "sigma2_w" in doc:
            raise ConfigError("es_over_sigma2w_db", "conflicts with explicit es/sigma2_w")
        snr_db = _number(doc, "es_over_sigma2w_db")
        es, sigma2_w = 1.0, 10.0 ** (-snr_db / 10.0)
    elif "es" in doc or "sigma2_w" in doc:
        es = _positive(doc, "es")
        sigma2_w = _positive(doc, "sigma2_w")
    else:
        raise ConfigError("es_over_sigma2w_db", "missing required key")

    f0 = _positive(doc, "f0_hz")
    bw = _positive(doc, "bw_hz")

    if "v_kmh" in doc and "v_mps" in doc:
        raise ConfigError("v_kmh", "conflicts with v_mps")
    if "v_mps" in doc:
        velocity = _number(doc, "v_mps")
        key = "v_mps"
    else:
        velocity = (_number(doc, "v_kmh", required=False) or 0.0) * KMH_TO_MPS
        key = "v_kmh"
    if velocity < 0:
        raise ConfigError(key, "must be non-negative")

    osc = _oscillator(doc["oscillator"]) if doc.get("oscillator") is not None else None
    try:
        return LinkScenario(int(k), es, sigma2_w, f0, bw, velocity, osc)
    except ValueError as exc:
        raise ConfigError("<document>", str(exc)) from None


def load_scenario(text: str) -> LinkScenario:
    """Parse a YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"not valid YAML: {exc}") from None
    return scenario_from_dict(doc)


def dump_scenario(scenario: LinkScenario) -> str:
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False)
