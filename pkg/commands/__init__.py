# Commands package
from .experiments import run_command, sweep_command, truncation_report_command

__all__ = ['run_command', 'sweep_command', 'truncation_report_command']
