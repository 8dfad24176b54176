"""Run configuration: line-oriented `key = value` files plus CLI overrides.

Unset sizes, iteration budgets, and step caps (-1) resolve to per-env
defaults.  `#` starts a comment; unknown keys and out-of-range values
are errors carrying the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


ENV_CHOICES = ("cartpole", "rooms", "oracle-maze")
OBS_MODES = ("blind", "split")


@dataclass
class TrainConfig:
    env: str = "cartpole"
    obs_mode: str = "blind"
    k: int = 2
    room_size: int = 5
    maze_width: int = 9
    maze_height: int = 9
    lam: float = 0.5
    acq_bias: float = 2.0
    epsilon: float = 0.0
    gamma: float = 0.99
    n_x: int = -1
    n_y: int = -1
    n_gru: int = -1
    k_options: int = 0
    option_recurrent: bool = True
    force_full_obs: bool = False
    lr: float = 1e-3
    clip_norm: float = 5.0
    batch: int = 16
    iterations: int = -1
    eval_episodes: int = 100
    entropy_coef: float = 0.0
    seed: int = 0
    max_steps: int = -1
    out_dir: str = "runs/out"


# config-file key -> dataclass field ("lambda" is reserved in Python)
_KEYS = {f.name: f.name for f in fields(TrainConfig) if f.name != "lam"}
_KEYS["lambda"] = "lam"
_FIELD_TO_KEY = {v: k for k, v in _KEYS.items()}
_TYPES = {f.name: f.type for f in fields(TrainConfig)}

# sizes are (n_x, n_y, n_gru); blind pairings feed the raw one-hot
# through unchanged (n_x = 0)
_SIZE_DEFAULTS = {
    ("cartpole", "blind"): (0, 5, 5),
    ("rooms", "blind"): (0, 20, 10),
    ("rooms", "split"): (10, 10, 10),
    ("oracle-maze", "blind"): (10, 0, 5),
}
_ITER_DEFAULTS = {"cartpole": 2000, "rooms": 3000, "oracle-maze": 3000}


def _parse_value(key: str, field_name: str, raw: str, line: int | None):
    kind = _TYPES[field_name]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as e:
        raise ConfigError(f"bad value for {key!r}: {e}", line) from e


def _check_range(key: str, field_name: str, value, line: int | None):
    def fail(msg):
        raise ConfigError(f"{key} {msg} (got {value!r})", line)

    if field_name == "env" and value not in ENV_CHOICES:
        fail(f"must be one of {ENV_CHOICES}")
    elif field_name == "obs_mode" and value not in OBS_MODES:
        fail(f"must be one of {OBS_MODES}")
    elif field_name == "k" and value < 1:
        fail("must be >= 1")
    elif field_name == "room_size" and (value < 3 or value % 2 == 0):
        fail("must be odd and >= 3")
    elif field_name in ("maze_width", "maze_height") and (value < 5 or value % 2 == 0):
        fail("must be odd and >= 5")
    elif field_name == "lam" and value < 0:
        fail("must be >= 0")
    elif field_name == "epsilon" and not 0.0 <= value <= 1.0:
        fail("must be in [0, 1]")
    elif field_name == "gamma" and not 0.0 < value <= 1.0:
        fail("must be in (0, 1]")
    elif field_name == "lr" and value <= 0:
        fail("must be > 0")
    elif field_name == "clip_norm" and value <= 0:
        fail("must be > 0")
    elif field_name == "batch" and value < 1:
        fail("must be >= 1")
    elif field_name == "k_options" and value < 0:
        fail("must be >= 0")
    elif field_name == "entropy_coef" and value < 0:
        fail("must be >= 0")
    elif field_name == "eval_episodes" and value < 0:
        fail("must be >= 0")
    elif field_name == "seed" and value < 0:
        fail("must be >= 0")


def parse_config(text: str, cli_overrides: dict | None = None) -> TrainConfig:
    cfg = TrainConfig()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected `key = value`, got {raw_line.strip()!r}", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        field_name = _KEYS.get(key)
        if field_name is None:
            raise ConfigError(f"unknown key {key!r}", lineno)
        value = _parse_value(key, field_name, raw, lineno)
        _check_range(key, field_name, value, lineno)
        cfg = replace(cfg, **{field_name: value})
    for field_name, value in (cli_overrides or {}).items():
        if field_name not in _TYPES:
            raise ConfigError(f"unknown override {field_name!r}")
        _check_range(_FIELD_TO_KEY[field_name], field_name, value, None)
        cfg = replace(cfg, **{field_name: value})
    return cfg


def resolve(cfg: TrainConfig) -> TrainConfig:
    """Fill env-dependent defaults and validate cross-field constraints."""
    if cfg.env not in ENV_CHOICES:
        raise ConfigError(f"env must be one of {ENV_CHOICES}, got {cfg.env!r}")
    if cfg.obs_mode not in OBS_MODES:
        raise ConfigError(f"obs_mode must be one of {OBS_MODES}, got {cfg.obs_mode!r}")
    if cfg.obs_mode == "split" and cfg.env != "rooms":
        raise ConfigError("split observations only exist for the rooms env")

    sizes = _SIZE_DEFAULTS[(cfg.env, cfg.obs_mode)]
    n_x = cfg.n_x if cfg.n_x >= 0 else sizes[0]
    n_y = cfg.n_y if cfg.n_y >= 0 else sizes[1]
    n_gru = cfg.n_gru if cfg.n_gru >= 1 else sizes[2]
    iterations = cfg.iterations if cfg.iterations >= 0 else _ITER_DEFAULTS[cfg.env]
    if cfg.max_steps >= 1:
        max_steps = cfg.max_steps
    elif cfg.env == "rooms":
        max_steps = 100 if cfg.k <= 2 else 200
    else:
        max_steps = 200
    out = replace(cfg, n_x=n_x, n_y=n_y, n_gru=n_gru,
                  iterations=iterations, max_steps=max_steps)
    _validate_resolved(out)
    return out


def _validate_resolved(cfg: TrainConfig) -> None:
    for field_name in ("k", "room_size", "maze_width", "maze_height", "lam",
                       "epsilon", "gamma", "lr", "clip_norm", "batch",
                       "k_options", "entropy_coef", "eval_episodes", "seed"):
        _check_range(_FIELD_TO_KEY[field_name], field_name, getattr(cfg, field_name), None)
    if cfg.n_gru < 1:
        raise ConfigError(f"n_gru must be >= 1, got {cfg.n_gru}")
    if cfg.iterations < 0:
        raise ConfigError(f"iterations must be >= 0, got {cfg.iterations}")


def write_config(cfg: TrainConfig) -> str:
    lines = []
    for f in fields(TrainConfig):
        value = getattr(cfg, f.name)
        if f.type == "bool":
            value = "true" if value else "false"
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {value}")
    return "\n".join(lines) + "\n"
