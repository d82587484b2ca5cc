"""JSON run configuration with unit-suffixed keys.

Example::

    {
      "structural": {"m_kg_m": 27935, "I_kg_m2_m": 2595580,
                     "f_h_hz": 0.1, "f_alpha_hz": 0.25,
                     "xi_h": 0.005, "xi_alpha": 0.005,
                     "B_m": 36, "rho_kg_m3": 1.225},
      "flow": {"U_m_s": 30},
      "simulation": {"duration_s": 2000, "dt_s": 0.01, "fds": "theodorsen",
                     "S_L": 0.001, "S_M": 0.001},
      "bands_hz": [[0.08, 0.12], [0.23, 0.27]],
      "spectral": {"m_segments": 18},
      "sampler": {"n_walkers": 50, "n_steps": 4000},
      "seed": 0
    }

Frequencies accept exactly one of ``f_*_hz`` or ``omega_*_rad_s``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .aeroelastic import FD_NAMES, FlowCondition, FlutterDerivatives, StructuralParams
from .likelihood import EXPECTATIONS, PriorSpec
from .sampler import SamplerConfig
from .theodorsen import flat_plate_fds_at


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def _section(doc, name, required=True):
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section '{name}'")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be an object")
    return sec


def _number(sec, key, where, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"{where}: missing key '{key}'")
        return float(default)
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _check_keys(sec, allowed, where):
    extra = set(sec) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _circular(sec, name, where):
    hz, rad = f"f_{name}_hz", f"omega_{name}_rad_s"
    if (hz in sec) == (rad in sec):
        raise ConfigError(f"{where}: give exactly one of '{hz}' or '{rad}'")
    return 2 * np.pi * _number(sec, hz, where) if hz in sec else _number(sec, rad, where)


STRUCT_KEYS = (
    "m_kg_m", "I_kg_m2_m", "f_h_hz", "omega_h_rad_s", "f_alpha_hz", "omega_alpha_rad_s",
    "xi_h", "xi_alpha", "B_m", "rho_kg_m3",
)


def parse_structural(sec) -> StructuralParams:
    _check_keys(sec, STRUCT_KEYS, "structural")
    try:
        return StructuralParams(
            m=_number(sec, "m_kg_m", "structural"),
            I=_number(sec, "I_kg_m2_m", "structural"),
            omega_h=_circular(sec, "h", "structural"),
            omega_alpha=_circular(sec, "alpha", "structural"),
            xi_h=_number(sec, "xi_h", "structural"),
            xi_alpha=_number(sec, "xi_alpha", "structural"),
            B=_number(sec, "B_m", "structural"),
            rho=_number(sec, "rho_kg_m3", "structural", 1.225),
        )
    except ValueError as exc:
        raise ConfigError(f"structural: {exc}") from exc


@dataclass(frozen=True)
class SimulationConfig:
    duration: float
    dt: float
    sL: float
    sM: float
    # None means flat-plate values at the configured flow
    fds: FlutterDerivatives | None = None


@dataclass(frozen=True)
class PriorConfig:
    fdSpan: float = 50.0
    psdRange: tuple = (1e-8, 1e2)
    explicit: PriorSpec | None = None


@dataclass(frozen=True)
class RunConfig:
    structural: StructuralParams
    flow: FlowCondition
    bands: tuple = ()
    mSegments: int = 18
    expectation: str = "asymptotic"
    dt: float | None = None
    simulation: SimulationConfig | None = None
    prior: PriorConfig = field(default_factory=PriorConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    init: object = "auto"
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def truth_fds(self) -> FlutterDerivatives:
        sim = self.simulation
        if sim is not None and sim.fds is not None:
            return sim.fds
        return flat_plate_fds_at(self.structural, self.flow)

    def record_dt(self):
        if self.dt is not None:
            return self.dt
        if self.simulation is not None:
            return self.simulation.dt
        return None

    def require_bands(self):
        if len(self.bands) != 2:
            raise ConfigError("'bands_hz' must list two [f_lo, f_hi] pairs")
        return self.bands

    def with_seed(self, seed):
        """Copy with ``seed`` replacing the run seed (sampler and simulation)."""
        doc = copy.deepcopy(self.raw)
        doc["seed"] = int(seed)
        return parse_config(doc)

    def echo(self):
        return copy.deepcopy(self.raw)


def _parse_simulation(sec):
    _check_keys(sec, ("duration_s", "dt_s", "S_L", "S_M", "fds"), "simulation")
    fds_spec = sec.get("fds", "theodorsen")
    if fds_spec == "theodorsen":
        fds = None
    elif isinstance(fds_spec, dict):
        _check_keys(fds_spec, FD_NAMES, "simulation.fds")
        try:
            fds = FlutterDerivatives(**{k: float(v) for k, v in fds_spec.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"simulation.fds: {exc}") from exc
    else:
        raise ConfigError("simulation.fds must be 'theodorsen' or an object of FD values")
    sim = SimulationConfig(
        duration=_number(sec, "duration_s", "simulation"),
        dt=_number(sec, "dt_s", "simulation"),
        sL=_number(sec, "S_L", "simulation"),
        sM=_number(sec, "S_M", "simulation"),
        fds=fds,
    )
    if sim.dt <= 0:
        raise ConfigError("simulation.dt_s must be > 0")
    if sim.sL <= 0 or sim.sM <= 0:
        raise ConfigError("simulation force PSDs must be > 0")
    return sim


def _parse_bands(raw):
    if raw is None:
        return ()
    if not isinstance(raw, list) or len(raw) != 2:
        raise ConfigError("'bands_hz' must list two [f_lo, f_hi] pairs")
    bands = []
    for b in raw:
        if not (isinstance(b, list) and len(b) == 2 and all(isinstance(v, (int, float)) for v in b)):
            raise ConfigError(f"band {b!r} must be [f_lo_hz, f_hi_hz]")
        lo, hi = float(b[0]), float(b[1])
        if not 0 < lo < hi:
            raise ConfigError(f"band {b!r} needs 0 < f_lo < f_hi")
        bands.append((lo, hi))
    if bands[0][1] >= bands[1][0]:
        raise ConfigError("bands must be ordered and disjoint")
    return tuple(bands)


SAMPLER_KEYS = {
    "a": "a", "n_walkers": "nWalkers", "n_steps": "nSteps", "thin": "thin",
    "burn_in_fraction": "burnInFraction", "init_spread": "initSpread", "max_lag": "maxLag",
    "total_samples": None, "init": None,
}


def _parse_sampler(sec, seed):
    _check_keys(sec, SAMPLER_KEYS, "sampler")
    kw = {}
    for key, attr in SAMPLER_KEYS.items():
        if attr is None or key not in sec:
            continue
        v = _number(sec, key, "sampler")
        kw[attr] = int(v) if attr in ("nWalkers", "nSteps", "thin", "maxLag") else v
    if "total_samples" in sec:
        if "n_steps" in sec:
            raise ConfigError("sampler: give 'n_steps' or 'total_samples', not both")
        total = int(_number(sec, "total_samples", "sampler"))
        kw["nSteps"] = int(np.ceil(total / kw.get("nWalkers", SamplerConfig.nWalkers)))
    try:
        cfg = SamplerConfig(seed=seed, **kw)
    except ValueError as exc:
        raise ConfigError(f"sampler: {exc}") from exc
    if cfg.nWalkers < 24:
        raise ConfigError("sampler.n_walkers must be >= 24 (twice the 12 parameters)")
    init = sec.get("init", "auto")
    if isinstance(init, list):
        if len(init) != 12:
            raise ConfigError("sampler.init must list 12 values")
        init = np.asarray(init, dtype=float)
    elif init not in ("auto", "midpoint"):
        raise ConfigError("sampler.init must be 'auto', 'midpoint' or a 12-vector")
    return cfg, init


def _parse_prior(sec):
    _check_keys(sec, ("fd_span", "psd_range", "lower", "upper"), "prior")
    if ("lower" in sec) != ("upper" in sec):
        raise ConfigError("prior: 'lower' and 'upper' go together")
    explicit = None
    if "lower" in sec:
        try:
            explicit = PriorSpec(np.asarray(sec["lower"], float), np.asarray(sec["upper"], float))
        except ValueError as exc:
            raise ConfigError(f"prior: {exc}") from exc
        if explicit.ndim != 12:
            raise ConfigError("prior bounds must have 12 entries")
    span = _number(sec, "fd_span", "prior", 50.0)
    rng = sec.get("psd_range", [1e-8, 1e2])
    if not (isinstance(rng, list) and len(rng) == 2 and 0 < rng[0] < rng[1]):
        raise ConfigError("prior.psd_range must be [lo, hi] with 0 < lo < hi")
    if span <= 0:
        raise ConfigError("prior.fd_span must be > 0")
    return PriorConfig(fdSpan=span, psdRange=(float(rng[0]), float(rng[1])), explicit=explicit)


TOP_KEYS = ("structural", "flow", "simulation", "bands_hz", "spectral", "prior", "sampler", "data", "seed")


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(doc, TOP_KEYS, "config")
    structural = parse_structural(_section(doc, "structural"))
    flow_sec = _section(doc, "flow")
    _check_keys(flow_sec, ("U_m_s",), "flow")
    try:
        flow = FlowCondition(_number(flow_sec, "U_m_s", "flow"))
    except ValueError as exc:
        raise ConfigError(f"flow: {exc}") from exc

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")

    spectral = _section(doc, "spectral", required=False)
    _check_keys(spectral, ("m_segments", "expectation"), "spectral")
    m = int(_number(spectral, "m_segments", "spectral", 18))
    if m < 2:
        raise ConfigError("spectral.m_segments must be >= 2")
    expectation = spectral.get("expectation", "asymptotic")
    if expectation not in EXPECTATIONS:
        raise ConfigError(f"spectral.expectation must be one of {EXPECTATIONS}")

    data = _section(doc, "data", required=False)
    _check_keys(data, ("dt_s",), "data")
    dt = _number(data, "dt_s", "data") if "dt_s" in data else None
    if dt is not None and dt <= 0:
        raise ConfigError("data.dt_s must be > 0")

    sim_sec = doc.get("simulation")
    simulation = _parse_simulation(sim_sec) if sim_sec is not None else None
    sampler, init = _parse_sampler(_section(doc, "sampler", required=False), seed)
    return RunConfig(
        structural=structural,
        flow=flow,
        bands=_parse_bands(doc.get("bands_hz")),
        mSegments=m,
        expectation=expectation,
        dt=dt,
        simulation=simulation,
        prior=_parse_prior(_section(doc, "prior", required=False)),
        sampler=sampler,
        init=init,
        seed=seed,
        raw=copy.deepcopy(doc),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(doc)


def bridge_simulation_doc(U=30.0, seed=0):
    """Configuration document for the synthetic bridge-section case."""
    return {
        "structural": {
            "m_kg_m": 27935.0, "I_kg_m2_m": 2595580.0, "f_h_hz": 0.1, "f_alpha_hz": 0.25,
            "xi_h": 0.005, "xi_alpha": 0.005, "B_m": 36.0, "rho_kg_m3": 1.225,
        },
        "flow": {"U_m_s": float(U)},
        "simulation": {"duration_s": 2000.0, "dt_s": 0.01, "fds": "theodorsen", "S_L": 1e-3, "S_M": 1e-3},
        "bands_hz": [[0.08, 0.12], [0.23, 0.27]],
        "spectral": {"m_segments": 18},
        "sampler": {"total_samples": 200000, "n_walkers": 50, "thin": 10, "burn_in_fraction": 0.2},
        "seed": int(seed),
    }


def thin_plate_doc(U=8.6, seed=0):
    """Thin-plate section model driven by flat-plate FDs (1024 Hz, M = 8)."""
    return {
        "structural": {
            "m_kg_m": 6.0, "I_kg_m2_m": 0.7, "f_h_hz": 1.9, "f_alpha_hz": 3.05,
            "xi_h": 0.004, "xi_alpha": 0.003, "B_m": 0.45, "rho_kg_m3": 1.225,
        },
        "flow": {"U_m_s": float(U)},
        "simulation": {"duration_s": 2000.0, "dt_s": 1 / 1024, "fds": "theodorsen", "S_L": 1e-3, "S_M": 1e-3},
        "bands_hz": [[1.7, 2.1], [2.8, 3.2]],
        "spectral": {"m_segments": 8},
        "sampler": {"total_samples": 200000, "n_walkers": 50, "thin": 10, "burn_in_fraction": 0.2},
        "seed": int(seed),
    }
