"""Configuration management for the wireless network design accuracy toolkit."""

import os
from dataclasses import dataclass
from dotenv import load_dotenv

from src.utils import parse_rational

# Load environment variables from .env file
load_dotenv()

VALID_LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}


@dataclass
class Config:
    """Application configuration loaded from environment variables."""

    log_level: str = 'INFO'
    output_dir: str = './output'

    # Model scaling, kept as text and parsed exactly
    scale_factor: str = '1e12'

    # Tolerances
    feasibility_tol: float = 1e-6
    integrality_tol: float = 1e-6
    serve_tol: float = 1e-6

    # Branch-and-bound limits
    node_limit: int = 2000
    time_limit: float = 300.0
    lp_iteration_limit: int = 20000

    # Iterative refinement
    refine_tol: str = '1e-25'
    refine_max_rounds: int = 10
    refine_scaling_cap: str = '1e12'

    # Experiment suite
    max_workers: int = 4
    brute_force_limit: int = 100000


def load_config() -> Config:
    """
    Load configuration from environment variables.

    Returns:
        Config: Configuration object with all settings

    Raises:
        ValueError: If a numeric setting cannot be parsed
    """
    try:
        config = Config(
            log_level=os.getenv('WND_LOG_LEVEL', 'INFO').upper(),
            output_dir=os.getenv('WND_OUTPUT_DIR', './output'),
            scale_factor=os.getenv('WND_SCALE_FACTOR', '1e12'),
            feasibility_tol=float(os.getenv('WND_FEASIBILITY_TOL', '1e-6')),
            integrality_tol=float(os.getenv('WND_INTEGRALITY_TOL', '1e-6')),
            serve_tol=float(os.getenv('WND_SERVE_TOL', '1e-6')),
            node_limit=int(os.getenv('WND_NODE_LIMIT', '2000')),
            time_limit=float(os.getenv('WND_TIME_LIMIT', '300')),
            lp_iteration_limit=int(os.getenv('WND_LP_ITERATION_LIMIT', '20000')),
            refine_tol=os.getenv('WND_REFINE_TOL', '1e-25'),
            refine_max_rounds=int(os.getenv('WND_REFINE_MAX_ROUNDS', '10')),
            refine_scaling_cap=os.getenv('WND_REFINE_SCALING_CAP', '1e12'),
            max_workers=int(os.getenv('WND_MAX_WORKERS', '4')),
            brute_force_limit=int(os.getenv('WND_BRUTE_FORCE_LIMIT', '100000')),
        )
    except ValueError as e:
        raise ValueError(f"Invalid numeric setting in environment: {e}")

    return config


def validate_config(config: Config) -> None:
    """
    Validate configuration values.

    Args:
        config: Configuration object to validate

    Raises:
        ValueError: If configuration is invalid
    """
    if config.log_level.upper() not in VALID_LOG_LEVELS:
        raise ValueError(
            f"WND_LOG_LEVEL must be one of {sorted(VALID_LOG_LEVELS)}, got: {config.log_level}"
        )

    # Exact-valued settings
    for name, env in (
        ('scale_factor', 'WND_SCALE_FACTOR'),
        ('refine_tol', 'WND_REFINE_TOL'),
        ('refine_scaling_cap', 'WND_REFINE_SCALING_CAP'),
    ):
        value = parse_rational(str(getattr(config, name)))
        if value <= 0:
            raise ValueError(f"{env} must be positive, got: {getattr(config, name)}")

    for name, env in (
        ('feasibility_tol', 'WND_FEASIBILITY_TOL'),
        ('integrality_tol', 'WND_INTEGRALITY_TOL'),
        ('serve_tol', 'WND_SERVE_TOL'),
        ('time_limit', 'WND_TIME_LIMIT'),
        ('node_limit', 'WND_NODE_LIMIT'),
        ('lp_iteration_limit', 'WND_LP_ITERATION_LIMIT'),
        ('refine_max_rounds', 'WND_REFINE_MAX_ROUNDS'),
        ('max_workers', 'WND_MAX_WORKERS'),
        ('brute_force_limit', 'WND_BRUTE_FORCE_LIMIT'),
    ):
        value = getattr(config, name)
        if value <= 0:
            raise ValueError(f"{env} must be positive, got: {value}")

    if config.integrality_tol >= 0.5:
        raise ValueError(f"WND_INTEGRALITY_TOL must be below 0.5, got: {config.integrality_tol}")
