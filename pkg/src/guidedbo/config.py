"""Campaign configuration: YAML schema, validation, defaults.

The file has four top-level sections: ``simulator``, ``algorithms``,
``campaign`` and ``normalization``.  Validation is strict: unknown keys
are rejected and every diagnostic names the offending field path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .acquisition import AnnealingSchedule
from .errors import ConfigError
from .optimizers import KINDS, TurboParams
from .simulator import (
    DEFAULT_PAIRS,
    DEFAULT_THETA_STAR,
    DriftModel,
    SimulatorConfig,
)
from .objective import NormalizationBounds
from .simulator import max_error_over_box
from .transform import KnobPair


@dataclass(frozen=True)
class AlgorithmConfig:
    """One algorithm entry: kind plus optional schedule overrides."""

    kind: str
    beta0: float | None = None
    c: float | None = None
    acq_budget: int = 2000
    turbo: TurboParams = field(default_factory=TurboParams)

    def schedule(self) -> AnnealingSchedule | None:
        if self.kind == "mobo":
            return None
        reverse = self.kind in ("domain_guided", "annealing_only")
        kind = "reverse_linear" if reverse else "constant"
        beta0 = 1.0 if self.beta0 is None else self.beta0
        c = (0.01 if reverse else 0.0) if self.c is None else self.c
        return AnnealingSchedule(kind, beta0=beta0, c=c)


@dataclass(frozen=True)
class CampaignConfig:
    simulator: SimulatorConfig
    algorithms: tuple[AlgorithmConfig, ...]
    n_trials: int = 25
    budget: int = 150
    n_init: int = 4
    master_seed: int = 2025
    jobs: int | None = None
    output_dir: Path = Path("runs/campaign")
    normalization: NormalizationBounds | None = None

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError(f"campaign.n_trials must be >= 1, got {self.n_trials}")
        if not self.n_init < self.budget:
            raise ConfigError(
                f"campaign.n_init ({self.n_init}) must be < campaign.budget ({self.budget})"
            )
        if self.n_init < 2:
            raise ConfigError(f"campaign.n_init must be >= 2, got {self.n_init}")

    def resolved_normalization(self) -> NormalizationBounds:
        """Explicit bounds, or the simulator's analytic extremes over the box."""
        if self.normalization is not None:
            return self.normalization
        return NormalizationBounds(
            e_min=0.0,
            e_max=max_error_over_box(self.simulator),
            i_min=0.0,
            i_max=self.simulator.peak_intensity,
        )


_DEFAULT_ALGORITHMS = (
    "domain_guided",
    "standard_bo",
    "turbo",
    "mobo",
    "transform_only",
    "annealing_only",
)


def default_config(output_dir: str | Path = "runs/campaign") -> CampaignConfig:
    return CampaignConfig(
        simulator=SimulatorConfig(),
        algorithms=tuple(AlgorithmConfig(kind=k) for k in _DEFAULT_ALGORITHMS),
        output_dir=Path(output_dir),
    )


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key {unknown[0]!r}")


def _get_number(mapping: dict, key: str, path: str, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    v = mapping[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {type(v).__name__}")
    return v


def _get_int(mapping: dict, key: str, path: str, default=None, required=False):
    v = _get_number(mapping, key, path, default, required)
    if v is None or v is default and key not in mapping:
        return default
    if isinstance(v, float) and not v.is_integer():
        raise ConfigError(f"{path}.{key}: expected an integer, got {v}")
    return int(v)


def _vector(value, dim: int, path: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),) * dim
    if isinstance(value, list):
        if len(value) != dim:
            raise ConfigError(f"{path}: expected {dim} values, got {len(value)}")
        out = []
        for j, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{j}]: expected a number")
            out.append(float(v))
        return tuple(out)
    raise ConfigError(f"{path}: expected a number or a list of {dim} numbers")


_SIM_KEYS = {
    "dim", "pairs", "box", "theta_star", "gated_axes", "darwin_widths",
    "gate_order", "diff_weights", "common_weights", "peak_intensity",
    "bpe_target", "noise",
}


def _parse_simulator(raw: dict) -> SimulatorConfig:
    path = "simulator"
    _reject_unknown(raw, _SIM_KEYS, path)
    defaults = SimulatorConfig()
    dim = _get_int(raw, "dim", path, default=defaults.dim)

    if "pairs" in raw:
        if not isinstance(raw["pairs"], list):
            raise ConfigError(f"{path}.pairs: expected a list of [delay, ref] pairs")
        pairs = []
        for j, p in enumerate(raw["pairs"]):
            if not (isinstance(p, list) and len(p) == 2):
                raise ConfigError(f"{path}.pairs[{j}]: expected [delay_index, ref_index]")
            pairs.append(KnobPair(int(p[0]), int(p[1])))
        pairs = tuple(pairs)
    elif dim == defaults.dim:
        pairs = DEFAULT_PAIRS
    else:
        raise ConfigError(f"{path}.pairs: required when dim != {defaults.dim}")

    if "box" in raw:
        box = _require_mapping(raw["box"], f"{path}.box")
        _reject_unknown(box, {"low", "high"}, f"{path}.box")
        if "low" not in box or "high" not in box:
            raise ConfigError(f"{path}.box: missing required field 'low' or 'high'")
        lower = _vector(box["low"], dim, f"{path}.box.low")
        upper = _vector(box["high"], dim, f"{path}.box.high")
    else:
        lower, upper = (-100.0,) * dim, (100.0,) * dim

    if "theta_star" in raw:
        theta = _vector(raw["theta_star"], dim, f"{path}.theta_star")
    elif dim == defaults.dim:
        theta = DEFAULT_THETA_STAR
    else:
        raise ConfigError(f"{path}.theta_star: required when dim != {defaults.dim}")

    gated = raw.get("gated_axes", list(defaults.gated_axes))
    if not isinstance(gated, list) or not all(isinstance(a, int) for a in gated):
        raise ConfigError(f"{path}.gated_axes: expected a list of axis indices")
    gated = tuple(int(a) for a in gated)

    widths = raw.get("darwin_widths", None)
    if widths is None:
        widths = (defaults.darwin_widths[0],) * len(gated) if gated else ()
    else:
        widths = _vector(widths, len(gated), f"{path}.darwin_widths")

    n_pairs = len(pairs)
    diff_w = _vector(raw.get("diff_weights", 1.0), n_pairs, f"{path}.diff_weights")
    common_w = _vector(raw.get("common_weights", 0.0), n_pairs, f"{path}.common_weights")

    noise = None
    if raw.get("noise") is not None:
        nraw = _require_mapping(raw["noise"], f"{path}.noise")
        _reject_unknown(nraw, {"rate_um_per_eval", "jitter_rms_um", "seed"}, f"{path}.noise")
        noise = DriftModel(
            rate_um_per_eval=float(_get_number(nraw, "rate_um_per_eval", f"{path}.noise", 0.05)),
            jitter_rms_um=float(_get_number(nraw, "jitter_rms_um", f"{path}.noise", 0.108)),
            seed=_get_int(nraw, "seed", f"{path}.noise", 0),
        )

    try:
        return SimulatorConfig(
            dim=dim,
            pairs=pairs,
            lower=lower,
            upper=upper,
            theta_star=theta,
            gated_axes=gated,
            darwin_widths=widths,
            gate_order=_get_int(raw, "gate_order", path, defaults.gate_order),
            diff_weights=diff_w,
            common_weights=common_w,
            peak_intensity=float(_get_number(raw, "peak_intensity", path, defaults.peak_intensity)),
            bpe_target=float(_get_number(raw, "bpe_target", path, defaults.bpe_target)),
            noise=noise,
        )
    except Exception as exc:  # invariant violations carry their own message
        raise ConfigError(f"{path}: {exc}") from exc


_ALGO_KEYS = {"kind", "beta0", "c", "acq_budget", "turbo"}
_TURBO_KEYS = {"length_init", "l_min", "l_max", "succ_tol", "fail_tol", "improvement_rtol"}


def _parse_algorithm(raw, index: int) -> AlgorithmConfig:
    path = f"algorithms[{index}]"
    if isinstance(raw, str):
        raw = {"kind": raw}
    raw = _require_mapping(raw, path)
    _reject_unknown(raw, _ALGO_KEYS, path)
    if "kind" not in raw:
        raise ConfigError(f"{path}.kind: missing required field")
    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError(f"{path}.kind: unknown algorithm {kind!r}")
    turbo = TurboParams()
    if "turbo" in raw:
        traw = _require_mapping(raw["turbo"], f"{path}.turbo")
        _reject_unknown(traw, _TURBO_KEYS, f"{path}.turbo")
        turbo = TurboParams(
            length_init=float(_get_number(traw, "length_init", f"{path}.turbo", 0.8)),
            l_min=float(_get_number(traw, "l_min", f"{path}.turbo", 0.5**7)),
            l_max=float(_get_number(traw, "l_max", f"{path}.turbo", 1.6)),
            succ_tol=_get_int(traw, "succ_tol", f"{path}.turbo", 3),
            fail_tol=_get_int(traw, "fail_tol", f"{path}.turbo", None),
            improvement_rtol=float(_get_number(traw, "improvement_rtol", f"{path}.turbo", 1e-3)),
        )
    beta0 = _get_number(raw, "beta0", path, None)
    c = _get_number(raw, "c", path, None)
    return AlgorithmConfig(
        kind=kind,
        beta0=None if beta0 is None else float(beta0),
        c=None if c is None else float(c),
        acq_budget=_get_int(raw, "acq_budget", path, 2000),
        turbo=turbo,
    )


_CAMPAIGN_KEYS = {"n_trials", "budget", "n_init", "master_seed", "output_dir", "jobs"}
_NORM_KEYS = {"e_min", "e_max", "i_min", "i_max"}
_TOP_KEYS = {"simulator", "algorithms", "campaign", "normalization"}


def parse_config(data: dict) -> CampaignConfig:
    data = _require_mapping(data, "config")
    _reject_unknown(data, _TOP_KEYS, "config")
    if "simulator" not in data:
        raise ConfigError("simulator: missing required section")
    sim = _parse_simulator(_require_mapping(data["simulator"], "simulator"))

    if "algorithms" not in data:
        raise ConfigError("algorithms: missing required section")
    if not isinstance(data["algorithms"], list) or not data["algorithms"]:
        raise ConfigError("algorithms: expected a non-empty list")
    algos = tuple(_parse_algorithm(a, i) for i, a in enumerate(data["algorithms"]))

    camp = _require_mapping(data.get("campaign", {}), "campaign")
    _reject_unknown(camp, _CAMPAIGN_KEYS, "campaign")
    if not isinstance(camp.get("output_dir", ""), str):
        raise ConfigError("campaign.output_dir: expected a string path")
    output_dir = Path(camp.get("output_dir", "runs/campaign"))

    norm = None
    if data.get("normalization") is not None:
        nraw = _require_mapping(data["normalization"], "normalization")
        _reject_unknown(nraw, _NORM_KEYS, "normalization")
        for key in ("e_min", "e_max", "i_min", "i_max"):
            if key not in nraw:
                raise ConfigError(f"normalization.{key}: missing required field")
        try:
            norm = NormalizationBounds(
                e_min=float(_get_number(nraw, "e_min", "normalization", required=True)),
                e_max=float(_get_number(nraw, "e_max", "normalization", required=True)),
                i_min=float(_get_number(nraw, "i_min", "normalization", required=True)),
                i_max=float(_get_number(nraw, "i_max", "normalization", required=True)),
            )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"normalization: {exc}") from exc

    return CampaignConfig(
        simulator=sim,
        algorithms=algos,
        n_trials=_get_int(camp, "n_trials", "campaign", 25),
        budget=_get_int(camp, "budget", "campaign", 150),
        n_init=_get_int(camp, "n_init", "campaign", 4),
        master_seed=_get_int(camp, "master_seed", "campaign", 2025),
        jobs=_get_int(camp, "jobs", "campaign", None),
        output_dir=output_dir,
        normalization=norm,
    )


def load_config(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if data is None:
        raise ConfigError(f"{path}: empty config file")
    return parse_config(data)
