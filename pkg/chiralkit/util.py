"""
Configuration and small shared helpers.

This module reads its settings from environment variables as follows:

Optional:
    APP_NAME:             A name for the tool that will appear in log entries.
    ENV:                  The application environment. One of: dev, test. Used for local development.
    TEXT_LOGGER:          Whether to log in plaintext or JSON. Default: False (JSON).
    LOG_LEVEL:            One of DEBUG, INFO, WARNING, ERROR. Default: INFO.
    CHIRALKIT_OUTPUT_DIR: The directory commands write their outputs to. Default: ./chiralkit-out
    CHIRALKIT_THREADS:    Worker threads for per-seed and per-point loops. Default: available cores.
    CHIRALKIT_SEED:       Seed for every randomized sampling step. Default: 0.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
import logging
import os
from os import environ
import sys

import numpy as np

from chiralkit.exceptions import ConfigurationError


LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

Config = namedtuple(
    'Config', [
        'app_name',
        'env',
        'text_logger',
        'log_level',
        'output_dir',
        'threads',
        'seed'
    ])


def _validated_config(config):
    """Validates the given Config and returns it if so. Raises a
    ConfigurationError if invalid.
    """
    problems = []
    if config.threads is None or config.threads < 1:
        problems.append(f'CHIRALKIT_THREADS must be a positive integer, got {config.threads}')
    if config.seed is None or config.seed < 0:
        problems.append(f'CHIRALKIT_SEED must be a non-negative integer, got {config.seed}')
    if config.log_level not in LOG_LEVELS:
        problems.append(f"LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {config.log_level}")
    if not config.output_dir:
        problems.append('CHIRALKIT_OUTPUT_DIR must not be empty')

    if len(problems) > 0:
        raise ConfigurationError('; '.join(problems))

    logging.getLogger(__name__).debug(config)

    return config


@lru_cache(maxsize=128)
def config(validate=True):
    """
    Returns the Config object with all parameters set to values that were set in the
    process' environment (as environment variables), or to their default values if not
    set.

    Parameters
    ----------
    validate : bool
        Whether to validate the config before returning it. Useful to disable when
        running unit tests.

    Returns
    -------
    chiralkit.util.Config
        The configuration values for this runtime environment.
    """
    def str_envvar(name: str, default: str) -> str:
        value = environ.get(name, default)
        return value.strip('\"') if value is not None else None

    def bool_envvar(name: str, default: bool) -> bool:
        value = environ.get(name)
        return str.lower(value) == 'true' if value is not None else default

    def int_envvar(name: str, default: int) -> int:
        value = environ.get(name)
        try:
            return int(value) if value is not None else default
        except ValueError:
            raise ConfigurationError(f'{name} must be an integer, got {value!r}')

    config = Config(
        app_name=str_envvar('APP_NAME', os.path.basename(sys.argv[0]) or 'chiralkit'),
        env=str_envvar('ENV', ''),
        text_logger=bool_envvar('TEXT_LOGGER', False),
        log_level=str_envvar('LOG_LEVEL', 'INFO').upper(),
        output_dir=str_envvar('CHIRALKIT_OUTPUT_DIR', './chiralkit-out'),
        threads=int_envvar('CHIRALKIT_THREADS', os.cpu_count() or 1),
        seed=int_envvar('CHIRALKIT_SEED', 0)
    )

    if validate:
        return _validated_config(config)
    else:
        return config


def override(cfg, **values):
    """
    Returns a copy of ``cfg`` with every non-None keyword replacing its field,
    then validated. Used to merge CLI flags over environment settings.
    """
    changes = {k: v for k, v in values.items() if v is not None}
    return _validated_config(cfg._replace(**changes))


def rng(seed):
    """The numpy Generator every randomized step derives from."""
    return np.random.default_rng(seed)


def ordered_map(func, items, threads=1):
    """
    Maps ``func`` over ``items`` with up to ``threads`` worker threads,
    returning results in input order so reductions stay deterministic.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
