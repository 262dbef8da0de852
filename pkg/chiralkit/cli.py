"""
======
cli.py
======

Parses ``chiralkit`` CLI arguments and invokes the requested command.
Exit codes: 0 when the command's verdict passes, 2 when it fails, 1 on
errors (with ``error.json`` written to the output directory).
"""

import argparse
import datetime
import json
import logging
from os import makedirs, path
import sys

from chiralkit.command import COMMANDS
from chiralkit.exceptions import ChiralkitException
from chiralkit.logging import build_logger
from chiralkit.util import config, override
from chiralkit.version import get_version

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

COMMANDS_BY_NAME = {c.name: c for c in COMMANDS}


def setup_cli(parser):
    """
    Adds the global flags and one subcommand per chiralkit command to the parser.
    Option abbreviation is turned off: ``--t`` must not resolve to ``--threads``.

    Parameters
    ----------
    parser : argparse.ArgumentParser
        The parser being used to parse CLI arguments
    """
    parser.allow_abbrev = False
    parser.add_argument('--output-dir',
                        help=('directory the command writes its outputs to, overriding '
                              'CHIRALKIT_OUTPUT_DIR'))
    parser.add_argument('--seed',
                        type=int,
                        help='seed for every randomized sampling step, overriding CHIRALKIT_SEED')
    parser.add_argument('--threads',
                        type=int,
                        help='worker threads, overriding CHIRALKIT_THREADS')
    parser.add_argument('--text-logger',
                        action='store_const',
                        const=True,
                        help='log plain text instead of JSON')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    for CommandClass in COMMANDS:
        subparser = subparsers.add_parser(CommandClass.name, help=CommandClass.help, allow_abbrev=False)
        CommandClass.setup_parser(subparser)


def _write_error(output_dir, message, category='Unknown'):
    """
    Writes the given error message to error.json in the provided output dir

    Parameters
    ----------
    output_dir : string
        Directory into which the error should be written
    message : string
        The error message to write
    category : string
        The error category to write
    """
    makedirs(output_dir, exist_ok=True)
    error_data = {'error': message, 'category': category}
    with open(path.join(output_dir, 'error.json'), 'w') as file:
        json.dump(error_data, file, sort_keys=True)


def run_cli(parser, args, cfg=None):
    """
    Runs the chiralkit CLI invocation captured by the given args

    Parameters
    ----------
    parser : argparse.ArgumentParser
        The parser being used to parse CLI arguments, used to provide CLI argument errors
    args : Namespace
        Argument values parsed from the command line, presumably via ArgumentParser.parse_args
    cfg : chiralkit.util.Config
        A configuration instance, by default read from the environment

    Returns
    -------
    int
        The process exit code
    """
    if cfg is None:
        cfg = config()
    if args.command is None:
        parser.error('a command is required')

    try:
        cfg = override(cfg, output_dir=args.output_dir, seed=args.seed, threads=args.threads,
                       text_logger=args.text_logger)
    except ChiralkitException as err:
        build_logger(cfg).error(err, exc_info=1)
        _write_error(args.output_dir or cfg.output_dir, err.message, err.category)
        return EXIT_ERROR

    start_time = datetime.datetime.now()
    command = COMMANDS_BY_NAME[args.command](args, cfg)
    try:
        command.logger.info(f'Invoking {command.name} with chiralkit version {get_version()}')
        verdict = command.invoke()
    except ChiralkitException as err:
        command.logger.error(err, exc_info=1)
        _write_error(cfg.output_dir, err.message, err.category)
        return EXIT_ERROR
    except Exception as err:
        command.logger.error(err, exc_info=1)
        _write_error(cfg.output_dir, f'{command.name} failed with an unexpected error: {err}')
        return EXIT_ERROR
    finally:
        time_diff = datetime.datetime.now() - start_time
        duration_ms = int(round(time_diff.total_seconds() * 1000))
        build_logger(cfg).info(f'timing.{command.name}.end',
                               extra={'command': command.name, 'durationMs': duration_ms})

    if verdict is False:
        command.logger.info('Verdict: FAIL')
        return EXIT_FAIL
    command.logger.info('Verdict: PASS')
    return EXIT_PASS


def main(argv=None):
    """Entry point of the ``chiralkit`` console script."""
    parser = argparse.ArgumentParser(
        prog='chiralkit',
        allow_abbrev=False,
        description='Singular contact structures and Beltrami fields: germs, chirality, fields and orbits')
    setup_cli(parser)
    args = parser.parse_args(argv)
    logging.captureWarnings(True)
    sys.exit(run_cli(parser, args))
