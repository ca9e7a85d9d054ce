"""Run configuration: YAML schema, validation, and round-trip serialization.

A run is described by one YAML mapping with sections ``crystal``, ``pump``,
``grid`` and ``output`` plus the scalars ``pipeline``, ``pairing_tol`` and
``mehler_terms``.  Parsing applies defaults, rejects unknown keys, and turns
every failure into a :class:`ConfigError` whose message names the offending
field (and the source line for YAML syntax errors).  ``serialize_config``
emits the fully resolved form; parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ..pdc import (
    BBO_SELLMEIER_EXTRAORDINARY,
    BBO_SELLMEIER_ORDINARY,
    CrystalConfig,
    PumpConfig,
    SellmeierSet,
)

__all__ = [
    "PIPELINES",
    "FORMATS",
    "ConfigError",
    "GridSpec",
    "OutputConfig",
    "RunConfig",
    "bundled_configs",
    "parse_config",
    "parse_config_text",
    "config_from_dict",
    "config_to_dict",
    "serialize_config",
]

PIPELINES = ("numerical", "analytic", "compare", "near_degenerate")
FORMATS = ("csv", "json", "both")

_MISSING = object()


class ConfigError(ValueError):
    """Configuration parse or validation failure (CLI exit code 2)."""


@dataclass(frozen=True)
class GridSpec:
    """Detuning-grid sizing: 2m samples over +-half_width.

    Either ``half_width`` (rad/fs) or ``window_T`` (fs, the quantization
    window 2 pi / spacing) may be given.  When both are omitted the pipeline
    sizes the band automatically from the analytic model: half_width =
    omega_s + max(width_factor / tau1, 3 Omega_p).
    """

    m: int = 128
    half_width: float | None = None
    window_T: float | None = None
    width_factor: float = 4.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if self.half_width is not None and not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.window_T is not None and not self.window_T > 0:
            raise ValueError(f"window_T must be positive, got {self.window_T}")
        if not self.width_factor > 0:
            raise ValueError(f"width_factor must be positive, got {self.width_factor}")


@dataclass(frozen=True)
class OutputConfig:
    """Artifact destination and format (``csv``, ``json`` or ``both``)."""

    directory: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(
                f"format must be one of {', '.join(FORMATS)}, got {self.format!r}"
            )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one pipeline run.

    ``fit_pairs`` caps the window of the geometric fit (the tail of the
    numerical spectrum sits at the grid-truncation noise floor and does not
    follow the geometric law); ``null`` uses every pair above the floor.
    """

    crystal: CrystalConfig
    pump: PumpConfig
    grid: GridSpec = field(default_factory=GridSpec)
    pipeline: str = "numerical"
    pairing_tol: float = 1e-2
    fit_pairs: int | None = 15
    mehler_terms: int = 80
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(
                f"pipeline must be one of {', '.join(PIPELINES)}, got {self.pipeline!r}"
            )
        if not 0.0 < self.pairing_tol < 1.0:
            raise ValueError(
                f"pairing_tol must lie strictly between 0 and 1, got {self.pairing_tol}"
            )
        if self.fit_pairs is not None and self.fit_pairs < 3:
            raise ValueError(f"fit_pairs must be at least 3, got {self.fit_pairs}")
        if self.mehler_terms < 1:
            raise ValueError(f"mehler_terms must be at least 1, got {self.mehler_terms}")


def _as_float(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _as_int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _as_bool(value) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"expected true/false, got {value!r}")
    return value


def _as_str(value) -> str:
    if not isinstance(value, str):
        raise ValueError(f"expected a string, got {value!r}")
    return value


def _section(raw: dict, name: str, required: bool = False) -> dict:
    node = raw.get(name)
    if node is None:
        if required:
            raise ConfigError(f"{name}: required section is missing")
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{name}: expected a mapping, got {type(node).__name__}")
    return node


def _reject_unknown(data: dict, where: str, known: tuple[str, ...]) -> None:
    unknown = sorted(k for k in data if k not in known)
    if unknown:
        raise ConfigError(
            f"{where}: unknown key {unknown[0]!r} (known keys: {', '.join(known)})"
        )


def _scalar(data: dict, where: str, key: str, convert, default=_MISSING):
    if key not in data or data[key] is None:
        if default is _MISSING:
            raise ConfigError(f"{where}.{key}: required field is missing")
        return default
    try:
        return convert(data[key])
    except ValueError as err:
        raise ConfigError(f"{where}.{key}: {err}") from None


def _build(where: str, cls, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from None


def _parse_sellmeier(raw: dict, where: str, default: SellmeierSet) -> SellmeierSet:
    node = raw.get(where.rsplit(".", 1)[-1])
    if node is None:
        return default
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(node).__name__}")
    known = ("a", "b", "c", "d", "lambda_min_um", "lambda_max_um")
    _reject_unknown(node, where, known)
    return _build(
        where,
        SellmeierSet,
        a=_scalar(node, where, "a", _as_float),
        b=_scalar(node, where, "b", _as_float),
        c=_scalar(node, where, "c", _as_float),
        d=_scalar(node, where, "d", _as_float),
        lambda_min_um=_scalar(node, where, "lambda_min_um", _as_float, default.lambda_min_um),
        lambda_max_um=_scalar(node, where, "lambda_max_um", _as_float, default.lambda_max_um),
    )


def config_from_dict(raw: dict) -> RunConfig:
    """Build a validated :class:`RunConfig` from a plain nested dict."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config: top level must be a mapping, got {type(raw).__name__}")
    _reject_unknown(
        raw,
        "config",
        (
            "crystal",
            "pump",
            "grid",
            "pipeline",
            "pairing_tol",
            "fit_pairs",
            "mehler_terms",
            "output",
        ),
    )

    crystal_raw = _section(raw, "crystal", required=True)
    _reject_unknown(
        crystal_raw, "crystal", ("length_mm", "theta0_deg", "sellmeier_o", "sellmeier_e")
    )
    crystal = _build(
        "crystal",
        CrystalConfig,
        length_mm=_scalar(crystal_raw, "crystal", "length_mm", _as_float),
        theta0_deg=_scalar(crystal_raw, "crystal", "theta0_deg", _as_float),
        sellmeier_o=_parse_sellmeier(crystal_raw, "crystal.sellmeier_o", BBO_SELLMEIER_ORDINARY),
        sellmeier_e=_parse_sellmeier(crystal_raw, "crystal.sellmeier_e", BBO_SELLMEIER_EXTRAORDINARY),
    )

    pump_raw = _section(raw, "pump", required=True)
    _reject_unknown(
        pump_raw,
        "pump",
        ("lambda_p_nm", "tau_p_fs", "gain", "z0_fraction", "prechirp_compensated"),
    )
    pump = _build(
        "pump",
        PumpConfig,
        lambda_p_nm=_scalar(pump_raw, "pump", "lambda_p_nm", _as_float),
        tau_p_fs=_scalar(pump_raw, "pump", "tau_p_fs", _as_float),
        gain=_scalar(pump_raw, "pump", "gain", _as_float, 1.0),
        z0_fraction=_scalar(pump_raw, "pump", "z0_fraction", _as_float, 0.5),
        prechirp_compensated=_scalar(
            pump_raw, "pump", "prechirp_compensated", _as_bool, True
        ),
    )

    grid_raw = _section(raw, "grid")
    _reject_unknown(grid_raw, "grid", ("m", "half_width", "window_T", "width_factor"))
    grid = _build(
        "grid",
        GridSpec,
        m=_scalar(grid_raw, "grid", "m", _as_int, 128),
        half_width=_scalar(grid_raw, "grid", "half_width", _as_float, None),
        window_T=_scalar(grid_raw, "grid", "window_T", _as_float, None),
        width_factor=_scalar(grid_raw, "grid", "width_factor", _as_float, 4.0),
    )

    output_raw = _section(raw, "output")
    _reject_unknown(output_raw, "output", ("directory", "format"))
    output = _build(
        "output",
        OutputConfig,
        directory=_scalar(output_raw, "output", "directory", _as_str, None),
        format=_scalar(output_raw, "output", "format", _as_str, "csv"),
    )

    return _build(
        "config",
        RunConfig,
        crystal=crystal,
        pump=pump,
        grid=grid,
        pipeline=_scalar(raw, "config", "pipeline", _as_str, "numerical"),
        pairing_tol=_scalar(raw, "config", "pairing_tol", _as_float, 1e-2),
        # an explicit null means "no cap", a missing key means the default
        fit_pairs=None
        if ("fit_pairs" in raw and raw["fit_pairs"] is None)
        else _scalar(raw, "config", "fit_pairs", _as_int, 15),
        mehler_terms=_scalar(raw, "config", "mehler_terms", _as_int, 80),
        output=output,
    )


def parse_config_text(text: str, name: str = "<config>") -> RunConfig:
    """Parse YAML text into a :class:`RunConfig`, with line info on syntax errors."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        problem = getattr(err, "problem", None) or str(err)
        if mark is not None:
            raise ConfigError(
                f"{name}: line {mark.line + 1}, column {mark.column + 1}: {problem}"
            ) from None
        raise ConfigError(f"{name}: {problem}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: top level must be a mapping")
    return config_from_dict(raw)


def bundled_configs() -> tuple[str, ...]:
    """Names of the configuration files shipped inside the package."""
    root = resources.files("twinbeams") / "configs"
    return tuple(sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml")))


def _resolve_source(source):
    """Map a bare bundled-config name to its packaged file, else a filesystem path."""
    text = str(source)
    path = Path(text)
    if path.suffix == "" and path.name == text and not path.exists():
        bundled = resources.files("twinbeams") / "configs" / f"{text}.yaml"
        if bundled.is_file():
            return bundled
    return path


def parse_config(source) -> RunConfig:
    """Parse a config file (filesystem path or bundled name) into a RunConfig."""
    path = _resolve_source(source)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        names = ", ".join(bundled_configs())
        raise ConfigError(
            f"config not found: {source} (bundled configs: {names})"
        ) from None
    except OSError as err:
        raise ConfigError(f"cannot read config {source}: {err}") from None
    return parse_config_text(text, name=str(source))


def config_to_dict(cfg: RunConfig) -> dict:
    """Fully resolved plain-dict form of a config (defaults made explicit)."""
    return {
        "crystal": {
            "length_mm": cfg.crystal.length_mm,
            "theta0_deg": cfg.crystal.theta0_deg,
            "sellmeier_o": dataclasses.asdict(cfg.crystal.sellmeier_o),
            "sellmeier_e": dataclasses.asdict(cfg.crystal.sellmeier_e),
        },
        "pump": {
            "lambda_p_nm": cfg.pump.lambda_p_nm,
            "tau_p_fs": cfg.pump.tau_p_fs,
            "gain": cfg.pump.gain,
            "z0_fraction": cfg.pump.z0_fraction,
            "prechirp_compensated": cfg.pump.prechirp_compensated,
        },
        "grid": {
            "m": cfg.grid.m,
            "half_width": cfg.grid.half_width,
            "window_T": cfg.grid.window_T,
            "width_factor": cfg.grid.width_factor,
        },
        "pipeline": cfg.pipeline,
        "pairing_tol": cfg.pairing_tol,
        "fit_pairs": cfg.fit_pairs,
        "mehler_terms": cfg.mehler_terms,
        "output": {
            "directory": cfg.output.directory,
            "format": cfg.output.format,
        },
    }


def serialize_config(cfg: RunConfig) -> str:
    """YAML text of the fully resolved config; parses back to an equal RunConfig."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
