"""Run configuration: INI-style file with sections, every key overridable by a
command-line flag of the same name (``snr_db`` -> ``--snr-db``)."""
from __future__ import annotations

import configparser
import re
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .geometry import family_bounds
from .model import ScenarioConfig, db_to_linear
from .optimizer import GridSpec
from .scc import BEAMWIDTH_CRITERIA, UncertaintyRegion


class ConfigError(ValueError):
    """Invalid configuration value; the message names the source and field."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in str(text).replace(";", ",").split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


# key -> (section, parser, help)
KEYS = {
    "num_elements": ("scenario", int, "number of movable elements L"),
    "aperture": ("scenario", float, "segment length D in wavelengths"),
    "min_spacing": ("scenario", float, "minimum element spacing d in wavelengths"),
    "wavelength": ("scenario", float, "wavelength (positions are in wavelengths)"),
    "snr_db": ("scenario", float, "SNR K P rho^2 / sigma^2 in dB"),
    "gamma": ("scenario", float, "power fraction on the directional beam"),
    "region": ("region", str, "uncertainty region as min_deg:max_deg:center_deg"),
    "center_deg": ("region", _opt_float, "region centre in degrees (with span_deg)"),
    "span_deg": ("region", _opt_float, "region width in degrees, centred on center_deg"),
    "region_step": ("region", float, "region grid step in degrees"),
    "kappa_scc": ("region", float, "SCC threshold"),
    "a_min": ("grid", _opt_float, "lower bound of a (default d)"),
    "a_max": ("grid", _opt_float, "upper bound of a (default (D-3d)/2)"),
    "b_min": ("grid", _opt_float, "lower bound of b (default d)"),
    "b_max": ("grid", _opt_float, "upper bound of b (default (D-3d)/2)"),
    "grid_step": ("grid", float, "(a, b) grid step in wavelengths"),
    "fine_step": ("run", float, "beamwidth scan step in degrees"),
    "beamwidth_criterion": ("run", str, "main-lobe level applied to |SCC| (amplitude) or |SCC|^2 (power)"),
    "diagnostics": ("run", _bool, "evaluate the CRB of SCC-infeasible cells too"),
    "workers": ("run", int, "worker processes"),
    "seed": ("run", int, "base RNG seed"),
    "spans": ("sweep", _floats, "comma-separated region widths in degrees"),
    "trials": ("simulate", int, "Monte-Carlo trials per APV and SNR"),
    "snr_list": ("simulate", _floats, "comma-separated SNRs in dB"),
    "sim_span": ("simulate", float, "width of the estimation region around the centre"),
    "theta_true": ("simulate", _opt_float, "true AoD in degrees (default: region centre)"),
    "full_domain": ("simulate", _bool, "search the whole +-89.9 deg domain"),
    "out": ("output", str, "output directory"),
    "metadata": ("output", _bool, "write the timestamp comment line"),
}


@dataclass
class RunConfig:
    num_elements: int = 6
    aperture: float = 10.0
    min_spacing: float = 0.5
    wavelength: float = 1.0
    snr_db: float = 0.0
    gamma: float = 0.5
    region: str = "0:20:10"
    center_deg: float | None = None
    span_deg: float | None = None
    region_step: float = 0.1
    kappa_scc: float = 0.5
    a_min: float | None = None
    a_max: float | None = None
    b_min: float | None = None
    b_max: float | None = None
    grid_step: float = 0.05
    fine_step: float = 0.01
    beamwidth_criterion: str = "amplitude"
    diagnostics: bool = True
    workers: int = 1
    seed: int = 0
    spans: tuple = (2.0, 5.0, 8.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    trials: int = 1000
    snr_list: tuple = (0.0, 10.0, 20.0)
    sim_span: float = 0.0
    theta_true: float | None = None
    full_domain: bool = False
    out: str = "results"
    metadata: bool = True

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("spans", "snr_list"):
            d[k] = list(d[k])
        return d

    # -- resolved objects -------------------------------------------------

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(self.num_elements, self.aperture, self.min_spacing, self.wavelength,
                              db_to_linear(self.snr_db), self.gamma)

    def region_bounds(self) -> tuple[float, float, float]:
        if self.span_deg is not None:
            if self.center_deg is None:
                raise ValueError("span_deg needs center_deg")
            c = self.center_deg
            return c - self.span_deg / 2, c + self.span_deg / 2, c
        lo, hi, c = parse_region(self.region)
        return lo, hi, c

    def uncertainty_region(self) -> UncertaintyRegion:
        lo, hi, c = self.region_bounds()
        return UncertaintyRegion.from_bounds(lo, hi, c, self.region_step, self.kappa_scc)

    def grid(self) -> GridSpec:
        cfg = self.scenario()
        lo, hi = family_bounds(cfg)
        g = GridSpec(lo if self.a_min is None else self.a_min, hi if self.a_max is None else self.a_max,
                     lo if self.b_min is None else self.b_min, hi if self.b_max is None else self.b_max,
                     self.grid_step)
        return g.check_bounds(cfg)


def parse_region(text: str) -> tuple[float, float, float]:
    """``min:max[:center]`` in degrees; the centre defaults to the midpoint."""
    parts = [p for p in str(text).split(":")]
    if len(parts) not in (2, 3):
        raise ValueError(f"region must be min_deg:max_deg[:center_deg], got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    c = float(parts[2]) if len(parts) == 3 and parts[2].strip() else (lo + hi) / 2
    if hi < lo:
        raise ValueError(f"region max {hi} below min {lo}")
    return lo, hi, c


def _key_line(path: Path, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]$", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (already typed
    or as strings). Raises :class:`ConfigError` with ``file:line`` context."""
    values: dict = {}
    origin: dict = {}
    if path is not None:
        path = Path(path)
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                line = _key_line(path, section, key)
                where = f"{path}:{line}" if line else str(path)
                if key not in KEYS:
                    raise ConfigError(f"{where}: [{section}] unknown key {key!r}")
                if KEYS[key][0] != section:
                    raise ConfigError(f"{where}: key {key!r} belongs in section [{KEYS[key][0]}], not [{section}]")
                values[key] = raw
                origin[key] = f"{where}: [{section}] {key}"
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in KEYS:
            raise ConfigError(f"unknown option {key!r}")
        values[key] = val
        origin[key] = f"--{key.replace('_', '-')}"
        if key == "region":
            # an explicit region flag replaces a span-based definition
            values["span_deg"] = None
            origin["span_deg"] = origin[key]
    typed = {}
    for key, raw in values.items():
        conv = KEYS[key][1]
        try:
            typed[key] = raw if (raw is None or not isinstance(raw, str)) else conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{origin[key]}: {exc}") from None
    cfg = RunConfig(**typed)
    validate(cfg, origin)
    return cfg


def validate(cfg: RunConfig, origin: dict | None = None) -> RunConfig:
    """Build every derived object once so errors surface at parse time."""
    origin = origin or {}

    def fail(key, msg):
        raise ConfigError(f"{origin.get(key, key)}: {msg}")

    checks = [
        ("num_elements", cfg.scenario),
        ("region", cfg.uncertainty_region),
        ("grid_step", cfg.grid),
    ]
    for key, build in checks:
        try:
            build()
        except ValueError as exc:
            # point at the most specific key named in the message
            named = next((k for k in KEYS if re.search(rf"\b{k}\b", str(exc)) and k in origin), key)
            fail(named, str(exc))
    if cfg.beamwidth_criterion not in BEAMWIDTH_CRITERIA:
        fail("beamwidth_criterion", f"must be one of {BEAMWIDTH_CRITERIA}")
    if not cfg.fine_step > 0:
        fail("fine_step", "must be > 0")
    if cfg.workers < 1:
        fail("workers", "must be >= 1")
    if cfg.trials < 1:
        fail("trials", "must be >= 1")
    if cfg.sim_span < 0:
        fail("sim_span", "must be >= 0")
    if not cfg.spans or min(cfg.spans) < 0:
        fail("spans", "need at least one non-negative span")
    if not cfg.snr_list:
        fail("snr_list", "need at least one SNR")
    if cfg.seed < 0:
        fail("seed", "must be >= 0")
    return cfg


def config_fields():
    return [f.name for f in fields(RunConfig)]
