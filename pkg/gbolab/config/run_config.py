import json
import logging
import math
from dataclasses import asdict, dataclass, fields

from gbolab.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TWO_PI = 2 * math.pi


def _check_a(a, name='a'):
    if not isinstance(a, (int, float)) or not math.isfinite(a) or not 0.0 <= a <= 1.0:
        raise ConfigurationError(f"{name} must lie in [0, 1], got {a!r}")


def _check_positive(value, name):
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")


def _check_even(value, name):
    if not isinstance(value, int) or value < 2 or value % 2:
        raise ConfigurationError(f"{name} must be an even integer >= 2, got {value!r}")


def _check_sweep(values, name):
    if not values:
        raise ConfigurationError(f"{name} is empty")


@dataclass(frozen=True)
class SimulateConfig:
    a_values: tuple = (0.25, 0.5, 0.75, 1.0)
    n_points: int = 256
    length: float = TWO_PI
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = 'ifrk4'
    dealias_fraction: float = 2.0 / 3.0
    initial_kind: str = 'sine'
    amplitude: float = 0.1
    mode: int = 1
    snapshot_interval: float = 0.1
    scaling_sigma: float = 2.0
    seed: int = 0
    max_drift_I1: float = 1e-10
    max_drift_I2: float = 1e-8
    max_drift_I3: float = 1e-6
    energy_slack: float = 0.05

    def __post_init__(self):
        _check_sweep(self.a_values, 'a_values')
        for a in self.a_values:
            _check_a(a, 'a_values entry')
        _check_even(self.n_points, 'n_points')
        for name in ('length', 'dt', 'snapshot_interval', 'amplitude'):
            _check_positive(getattr(self, name), name)
        if self.t_end < 0:
            raise ConfigurationError(f"t_end must be non-negative, got {self.t_end}")
        if self.scheme not in ('ifrk4', 'etdrk4'):
            raise ConfigurationError(f"scheme must be 'ifrk4' or 'etdrk4', got {self.scheme!r}")
        if self.initial_kind not in ('sine', 'gaussian', 'zero'):
            raise ConfigurationError(f"initial_kind must be sine, gaussian or zero, got {self.initial_kind!r}")
        if self.scaling_sigma is not None:
            _check_positive(self.scaling_sigma, 'scaling_sigma')


@dataclass(frozen=True)
class NormsConfig:
    a: float = 0.5
    n_x: int = 32
    length: float = 4 * TWO_PI
    n_t: int = 256
    period: float = 16.0
    family_size: int = 200
    max_mode: int = 3
    tau: float = 2.0
    seed: int = 0
    max_spread: float = 2.0

    def __post_init__(self):
        _check_a(self.a)
        _check_even(self.n_x, 'n_x')
        _check_even(self.n_t, 'n_t')
        for name in ('length', 'period', 'tau', 'max_spread'):
            _check_positive(getattr(self, name), name)
        if self.family_size < 1:
            raise ConfigurationError(f"family_size must be at least 1, got {self.family_size}")
        if not 1 <= self.max_mode < self.n_x // 3:
            raise ConfigurationError(f"max_mode must lie in [1, {self.n_x // 3}), got {self.max_mode}")
        if self.tau > 0.45 * self.period:
            raise ConfigurationError(f"tau must not exceed 0.45 * period, got {self.tau}")


@dataclass(frozen=True)
class ResonanceConfig:
    a_values: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    n_samples: int = 100_000
    xi_scale: float = 1e3
    n_beta: int = 1000
    seed: int = 0
    levelset_xi1: float = 64.0
    levelset_layers: tuple = (4, 6, 8, 10)

    def __post_init__(self):
        _check_sweep(self.a_values, 'a_values')
        for a in self.a_values:
            _check_a(a, 'a_values entry')
        if self.n_samples < 1:
            raise ConfigurationError(f"n_samples must be positive, got {self.n_samples}")
        _check_positive(self.xi_scale, 'xi_scale')
        _check_positive(self.levelset_xi1, 'levelset_xi1')
        if self.n_beta < 2:
            raise ConfigurationError(f"n_beta must be at least 2, got {self.n_beta}")


@dataclass(frozen=True)
class XfailConfig:
    a_values: tuple = (0.0, 0.5, 1.0)
    recipe: str = 'basic'
    n_values: tuple = (64, 128, 256, 512, 1024, 2048, 4096)
    b: float = 0.5
    smoothing: float = 0.10
    alpha_constant: float = 1.0
    xi_points: int = 64
    output_rows: int = 64
    h_mu: float = None
    layer_fraction: float = 1.0
    slope_tolerance: float = 0.05
    min_box_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        _check_sweep(self.a_values, 'a_values')
        for a in self.a_values:
            _check_a(a, 'a_values entry')
        _check_sweep(self.n_values, 'n_values')
        if self.recipe not in ('basic', 'refined'):
            raise ConfigurationError(f"recipe must be basic or refined, got {self.recipe!r}")
        if len(self.n_values) < 4:
            raise ConfigurationError(f"n_values needs at least 4 points for a fit, got {len(self.n_values)}")
        if not 0.0 <= self.smoothing < 0.5:
            raise ConfigurationError(f"smoothing must lie in [0, 0.5), got {self.smoothing}")
        if not 0 < self.b <= 1:
            raise ConfigurationError(f"b must lie in (0, 1], got {self.b}")
        if not 0 < self.min_box_fraction <= 1:
            raise ConfigurationError(f"min_box_fraction must lie in (0, 1], got {self.min_box_fraction}")


@dataclass(frozen=True)
class PicardConfig:
    a: float = 0.5
    epsilon: float = 0.05
    length: float = 4 * TWO_PI
    n_x: int = 64
    delta: float = 0.25
    theta: float = None
    window_factor: float = 4.0
    n_t: int = 1024
    k_max: int = 30
    tolerance: float = 1e-8
    s_offsets: tuple = (0.0, 1.0)
    perturbations: tuple = (1e-2, 1e-3, 1e-4)
    delta_sweep: tuple = ()
    seed: int = 0
    max_ratio: float = 0.5
    max_residual: float = 1e-4
    max_evolution_gap: float = 1e-3
    max_lipschitz_spread: float = 0.2

    def __post_init__(self):
        _check_a(self.a)
        _check_even(self.n_x, 'n_x')
        _check_even(self.n_t, 'n_t')
        for name in ('length', 'delta', 'window_factor', 'tolerance'):
            _check_positive(getattr(self, name), name)
        if self.epsilon < 0:
            raise ConfigurationError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.delta <= 1:
            raise ConfigurationError(f"delta must lie in (0, 1], got {self.delta}")
        if self.window_factor < 2.5:
            raise ConfigurationError(f"window_factor must be at least 2.5, got {self.window_factor}")
        if self.theta is not None:
            _check_positive(self.theta, 'theta')
        if self.k_max < 1:
            raise ConfigurationError(f"k_max must be positive, got {self.k_max}")
        _check_sweep(self.s_offsets, 's_offsets')
        if self.delta_sweep and len(self.delta_sweep) < 4:
            raise ConfigurationError(f"delta_sweep needs at least 4 points for a fit, got {len(self.delta_sweep)}")
        if any(not 0 < d <= 1 for d in self.delta_sweep):
            raise ConfigurationError(f"delta_sweep entries must lie in (0, 1], got {self.delta_sweep}")


@dataclass(frozen=True)
class CutoffsConfig:
    a: float = 0.5
    n_x: int = 32
    length: float = 4 * TWO_PI
    n_t: int = 8192
    period: float = 4.0
    b_values: tuple = (0.4, 0.75)
    deltas: tuple = (0.125, 0.0625, 0.03125, 0.015625, 0.0078125)
    taus: tuple = (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625)
    lemmas: tuple = ('tilde_x_stability', 'x_half_loss', 'x_gain', 'y_half_loss', 'y_gain', 'z_half_loss',
                     'cdual_stability')
    seed: int = 0
    flat_tolerance: float = 0.10
    slope_tolerance: float = 0.05
    loss_floor: float = -0.05

    def __post_init__(self):
        _check_a(self.a)
        _check_even(self.n_x, 'n_x')
        _check_even(self.n_t, 'n_t')
        _check_positive(self.length, 'length')
        _check_positive(self.period, 'period')
        for name in ('b_values', 'deltas', 'taus', 'lemmas'):
            _check_sweep(getattr(self, name), name)
        if len(self.deltas) < 4:
            raise ConfigurationError(f"deltas needs at least 4 points for a fit, got {len(self.deltas)}")
        if max(self.taus) > 0.45 * self.period:
            raise ConfigurationError(f"taus must not exceed 0.45 * period, got {max(self.taus)}")
        if min(self.taus) > min(self.deltas) / 2:
            raise ConfigurationError("the family must include a tau at or below half the smallest delta")


COMMANDS = {
    'simulate': SimulateConfig,
    'norms': NormsConfig,
    'resonance': ResonanceConfig,
    'xfail': XfailConfig,
    'picard': PicardConfig,
    'cutoffs': CutoffsConfig,
}


def _coerce(value, default):
    # JSON has no tuples
    if isinstance(default, tuple) and isinstance(value, list):
        return tuple(value)
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def parse_run_config(document, command=None, seed=None):
    """Build the command's config dataclass from a JSON document (dict)"""
    if not isinstance(document, dict):
        raise ConfigurationError("a run config must be a JSON object")
    document = dict(document)
    version = document.pop('schema_version', SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    declared = document.pop('command', command)
    if command is not None and declared != command:
        raise ConfigurationError(f"config is for {declared!r}, not {command!r}")
    if declared not in COMMANDS:
        raise ConfigurationError(f"unknown command {declared!r}; expected one of {sorted(COMMANDS)}")
    config_cls = COMMANDS[declared]
    known = {f.name: f for f in fields(config_cls)}
    for key in document:
        if key not in known:
            raise ConfigurationError(f"unknown key {key!r} in {declared} config")
    defaults = config_cls()
    values = {key: _coerce(value, getattr(defaults, key)) for key, value in document.items()}
    if seed is not None:
        values['seed'] = seed
    try:
        return config_cls(**values)
    except TypeError as e:
        raise ConfigurationError(f"malformed {declared} config: {e}") from e


def load_run_config(path, command=None, seed=None):
    """Load and validate a run config JSON file"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config {path} is not valid JSON: {e}") from e
    logger.debug("loaded %s config from %s", command or document.get('command'), path)
    return parse_run_config(document, command=command, seed=seed)


def config_document(command, config):
    """The JSON-ready document for a config, as embedded in manifests"""
    document = {'schema_version': SCHEMA_VERSION, 'command': command}
    document.update({key: list(value) if isinstance(value, tuple) else value
                     for key, value in asdict(config).items()})
    return document
