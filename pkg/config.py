# Configuration settings

"""
Configuration settings for the QRM reconstruction toolkit.
"""

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

VERSION = '1.0.0'

SOLVERS = ('direct', 'iterative')
GRADIENT_WEIGHTS = ('eps_squared', 'eps')
INNER_PRODUCTS = ('trapezoid', 'euclidean')


def _env_flag(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() in ['true', 'on', '1']


class Config:
    """Base configuration class."""

    # Runtime settings
    OUTPUT_DIR = os.environ.get('QRM_OUTPUT_DIR') or 'results'
    LOG_LEVEL = os.environ.get('QRM_LOG_LEVEL') or 'INFO'
    SOLVER = os.environ.get('QRM_SOLVER') or 'direct'
    N_JOBS = int(os.environ.get('QRM_N_JOBS') or 1)
    PROGRESS = _env_flag('QRM_PROGRESS', 'true')

    # Domain and discretization
    R = 2.0
    N_X = 80
    T = 4.0
    N_T = 250
    N_BASIS = 30
    EPSILON = 1e-7

    # Solver settings
    ITERATIVE_TOL = 1e-9
    MAX_ITERATIONS = 20000
    GRADIENT_WEIGHT = 'eps_squared'
    INNER_PRODUCT = 'trapezoid'

    # Letter glyphs for Tests 3 and 4: stroke segments ((x0, y0), (x1, y1))
    LETTER_HALF_WIDTH = 0.15
    LETTER_Y_STROKES = (
        ((0.0, 0.0), (0.0, -1.0)),
        ((0.0, 0.0), (-0.7, 1.0)),
        ((0.0, 0.0), (0.7, 1.0)),
    )
    LETTER_LAMBDA_STROKES = (
        ((-0.7, 1.0), (0.5, -1.0)),
        ((-0.1, 0.0), (0.7, -1.0)),
    )


class FullConfig(Config):
    """Full-resolution parameters: R=2, N_x=80, T=4, N_T=250, N=30, eps=1e-7."""


class QuickConfig(Config):
    """Reduced grid for smoke runs on a laptop."""
    N_X = 40
    N_T = 100
    N_BASIS = 20


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    PROGRESS = False
    N_X = 20
    N_T = 60
    N_BASIS = 8
    EPSILON = 1e-5


# Configuration mapping
config = {
    'full': FullConfig,
    'quick': QuickConfig,
    'testing': TestingConfig,
    'default': FullConfig
}

# Default noise levels per test
DEFAULT_SWEEPS = {
    1: (0.0, 0.25, 0.5, 0.75, 1.0),
    2: (0.0, 0.25, 0.5, 0.75, 1.0),
    3: (0.10, 0.15),
    4: (0.10, 0.15),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a source test, discretization, noise levels and solver.

    The key=value text form produced by ``to_text`` is accepted back by
    ``from_file``, so every run manifest can be replayed.
    """

    test: int = 1
    R: float = Config.R
    nx: int = Config.N_X
    T: float = Config.T
    nt: int = Config.N_T
    n_basis: int = Config.N_BASIS
    epsilon: float = Config.EPSILON
    deltas: Tuple[float, ...] = (0.0,)
    seed: int = 0
    solver: str = Config.SOLVER
    inverse_crime: bool = False
    out: str = Config.OUTPUT_DIR
    gradient_weight: str = Config.GRADIENT_WEIGHT
    inner_product: str = Config.INNER_PRODUCT
    iterative_tol: float = Config.ITERATIVE_TOL
    max_iterations: int = Config.MAX_ITERATIONS
    n_jobs: int = Config.N_JOBS
    dump_matrix: bool = False
    dump_data: bool = False
    progress: bool = field(default=Config.PROGRESS, compare=False)

    def __post_init__(self):
        if self.test not in (1, 2, 3, 4):
            raise ValueError(f"test must be one of 1-4, got {self.test}")
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.nx < 2:
            raise ValueError(f"nx must be at least 2, got {self.nx}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.n_basis < 1 or self.n_basis > self.nt:
            raise ValueError(f"n_basis must be in [1, nt={self.nt}], got {self.n_basis}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if any(delta < 0 for delta in self.deltas):
            raise ValueError(f"noise levels must be non-negative, got {self.deltas}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.gradient_weight not in GRADIENT_WEIGHTS:
            raise ValueError(f"gradient_weight must be one of {GRADIENT_WEIGHTS}, got {self.gradient_weight!r}")
        if self.inner_product not in INNER_PRODUCTS:
            raise ValueError(f"inner_product must be one of {INNER_PRODUCTS}, got {self.inner_product!r}")

    @classmethod
    def from_profile(cls, name: str = 'default', **overrides) -> 'ExperimentConfig':
        """Build a config from one of the profiles in ``config``."""
        if name not in config:
            raise ValueError(f"Unknown profile {name!r}; choose from {sorted(config)}")
        profile = config[name]
        values = {
            'R': profile.R,
            'nx': profile.N_X,
            'T': profile.T,
            'nt': profile.N_T,
            'n_basis': profile.N_BASIS,
            'epsilon': profile.EPSILON,
            'solver': profile.SOLVER,
            'out': profile.OUTPUT_DIR,
            'gradient_weight': profile.GRADIENT_WEIGHT,
            'inner_product': profile.INNER_PRODUCT,
            'iterative_tol': profile.ITERATIVE_TOL,
            'max_iterations': profile.MAX_ITERATIONS,
            'n_jobs': profile.N_JOBS,
            'progress': profile.PROGRESS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path, profile: str = 'default', **overrides) -> 'ExperimentConfig':
        """
        Read a key=value config file (or a run manifest).

        Args:
            path: Path to the text file
            profile: Profile supplying the defaults for absent keys
            **overrides: Values taking precedence over the file (None is ignored)

        Returns:
            ExperimentConfig

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If a line or a value cannot be parsed
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")

        values = parse_key_values(path.read_text(encoding='utf-8').splitlines())
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_profile(profile, **values)

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_text(self) -> str:
        """Render as key=value lines in field order."""
        lines = []
        for f in dataclasses.fields(self):
            if f.name == 'progress':
                continue
            lines.append(f"{f.name}={_format_value(getattr(self, f.name))}")
        return '\n'.join(lines) + '\n'


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ','.join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, text: str):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind in (bool, 'bool'):
            if text.lower() not in ('true', 'false', 'on', 'off', '1', '0'):
                raise ValueError(text)
            return text.lower() in ('true', 'on', '1')
        if kind in (int, 'int'):
            return int(text)
        if kind in (float, 'float'):
            return float(text)
        if key == 'deltas':
            return tuple(float(part) for part in text.split(',') if part.strip())
        return text
    except ValueError:
        raise ValueError(f"Invalid value for {key}: {text!r}")


def parse_key_values(lines: Iterable[str]) -> Dict[str, object]:
    """Parse key=value lines; comments and unknown keys are skipped."""
    values = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValueError(f"Line {number}: expected key=value, got {raw!r}")
        key, text = line.split('=', 1)
        key = key.strip()
        if key in _FIELD_TYPES and key != 'progress':
            values[key] = _parse_value(key, text)
    return values


def letter_strokes(kind: str) -> Optional[tuple]:
    """Stroke polyline for a letter source kind, None for other kinds."""
    return {
        'letter_Y': Config.LETTER_Y_STROKES,
        'letter_lambda': Config.LETTER_LAMBDA_STROKES,
    }.get(kind)
