"""
Configuration for the partially convex sets toolkit.

Defaults can be overridden in a ``.env`` file or the environment
(see ``.env.example``); command line flags override both.
"""
import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

from errors import InputError

# Load environment variables
load_dotenv()


DEFAULT_TOL = 1e-7
DEFAULT_TOL_RATE = 10.0
DEFAULT_EPS_INT = 1e-7
DEFAULT_EPS_RT = 1e-6
DEFAULT_X_BOUND = 10.0
DEFAULT_SEED = 0


def _env_float(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return float(raw)
    except ValueError:
        raise InputError(f"{name}={raw!r} is not a number") from None


def get_seed():
    """
    Seed for randomized runs.

    Returns:
        int: ``PARCONV_SEED`` from the environment, or 0
    """
    raw = os.getenv('PARCONV_SEED')
    if raw is None or raw.strip() == '':
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PARCONV_SEED={raw!r} is not an integer") from None


def get_log_level():
    """Log level name from ``PARCONV_LOG_LEVEL`` (default WARNING)."""
    return os.getenv('PARCONV_LOG_LEVEL', 'WARNING').upper()


@dataclass
class RunConfig:
    """
    Everything one CLI invocation needs.

    Attributes:
        command: subcommand name
        inputs: input paths or ``builtin:NAME`` references
        output: output path, or None for stdout
        tol: validation tolerance for certificates
        tol_rate: Lipschitz-type rate for hemicontinuity surrogates
        eps_int: Chebyshev radius threshold for "nonempty interior"
        eps_rt: allowed round-trip Hausdorff distance
        points_per_axis: grid override for builtin sets
        seed: seed for randomized property runs
    """
    command: str
    inputs: list = field(default_factory=list)
    output: str = None
    tol: float = DEFAULT_TOL
    tol_rate: float = DEFAULT_TOL_RATE
    eps_int: float = DEFAULT_EPS_INT
    eps_rt: float = DEFAULT_EPS_RT
    points_per_axis: int = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in ('tol', 'tol_rate', 'eps_int', 'eps_rt'):
            value = getattr(self, name)
            # tol_rate = 0 is meaningful for constant-slice sets
            if value < 0 or (value == 0 and name != 'tol_rate'):
                raise InputError(f"{name} must be positive, got {value}")
        if self.points_per_axis is not None and self.points_per_axis < 2:
            raise InputError("points_per_axis must be at least 2")

    @classmethod
    def from_args(cls, args):
        """
        Build a RunConfig from parsed argparse arguments.

        Flags left unset fall back to the environment, then to defaults.
        """
        def pick(attr, env_name, default):
            value = getattr(args, attr, None)
            if value is not None:
                return value
            return _env_float(env_name, default)

        seed = getattr(args, 'seed', None)
        return cls(
            command=args.command,
            inputs=[v for v in (getattr(args, 'input', None),
                                getattr(args, 'samples', None)) if v],
            output=getattr(args, 'output', None),
            tol=pick('tol', 'PARCONV_TOL', DEFAULT_TOL),
            tol_rate=pick('tol_rate', 'PARCONV_TOL_RATE', DEFAULT_TOL_RATE),
            eps_int=pick('eps_int', 'PARCONV_EPS_INT', DEFAULT_EPS_INT),
            eps_rt=pick('eps_rt', 'PARCONV_EPS_RT', DEFAULT_EPS_RT),
            points_per_axis=getattr(args, 'points_per_axis', None),
            seed=seed if seed is not None else get_seed(),
        )


def default_x_bound():
    """x-box radius R used when a set definition does not give one."""
    return _env_float('PARCONV_X_BOUND', DEFAULT_X_BOUND)
