"""Structured logging for the command-line entry point.

Library modules use ``logging.getLogger(__name__)``; only the CLI configures
handlers. Reports go to stdout, so the JSON log lines are sent to stderr.
"""

from __future__ import annotations

import logging
import sys

from aws_lambda_powertools import Logger

SERVICE_NAME = "incompat"


def setup_logger(level: str = "INFO") -> Logger:
    # Powertools binds the stdlib logger named after the service, so the
    # package loggers ("incompat.conic", ...) propagate into its JSON handler.
    return Logger(
        service=SERVICE_NAME,
        level=level,
        logger_handler=logging.StreamHandler(sys.stderr),
    )
