# Main application entry point

"""
QRM command-line application.
Reconstructs initial conditions of parabolic equations from lateral Cauchy data.
"""

import logging

import click
from dotenv import load_dotenv

from config import VERSION, config

# Load environment variables
load_dotenv()

# Import commands
from commands.experiments import run_command, sweep_command, truncation_report_command

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: str):
    """Configure the root logger once; later calls only change the level."""
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format=LOG_FORMAT)
    root.setLevel(level.upper())


def create_app(config_name='default') -> click.Group:
    """Application factory pattern."""
    settings = config.get(config_name, config['default'])

    @click.group(help=__doc__)
    @click.version_option(VERSION, prog_name='qrm')
    @click.option('--log-level', default=settings.LOG_LEVEL, show_default=True,
                  type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
    def cli(log_level):
        configure_logging(log_level)

    # Register commands
    cli.add_command(run_command)
    cli.add_command(sweep_command)
    cli.add_command(truncation_report_command)

    return cli


def main():
    create_app()()


if __name__ == '__main__':
    main()
