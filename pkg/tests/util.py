import argparse
import sys
from unittest.mock import patch
from contextlib import contextmanager

from chiralkit import cli, util


def cli_test(*cli_args):
    """
    Decorator that takes a list of CLI parameters, patches them into
    sys.argv and passes a parser into the wrapped method
    """
    def cli_test_wrapper(func):
        def wrapper(self):
            with cli_parser(*cli_args) as parser:
                func(self, parser)
        return wrapper
    return cli_test_wrapper


@contextmanager
def cli_parser(*cli_args):
    """
    Returns a parser for the given CLI args

    Returns
    -------
    argparse.ArgumentParser
        the parser for the given CLI args
    """
    with patch.object(sys, 'argv', ['chiralkit'] + list(cli_args)):
        parser = argparse.ArgumentParser(
            prog='chiralkit', description='Run a chiralkit command')
        cli.setup_cli(parser)
        yield parser


def config_fixture(output_dir='/tmp/chiralkit-test-out',
                   text_logger=True,
                   threads=1,
                   seed=0,
                   log_level='INFO',
                   app_name=None):
    c = util.config(validate=False)
    return util.Config(
        # Override
        output_dir=output_dir,
        text_logger=text_logger,
        threads=threads,
        seed=seed,
        log_level=log_level,
        # Default
        env=c.env,
        # Override if provided, else default
        app_name=c.app_name if app_name is None else app_name
    )
