"""Built-in examples, grid reports, verification suites and the command-line interface."""

from .examples import EXAMPLE_NAMES, ExampleSpec, build_example
from .report import Report, ReportConfig, parse_gamma, run_report
from .verify import run_verify

__all__ = ["EXAMPLE_NAMES", "ExampleSpec", "Report", "ReportConfig", "build_example",
           "parse_gamma", "run_report", "run_verify"]
