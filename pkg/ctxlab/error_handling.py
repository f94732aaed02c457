#!/usr/bin/env python3
"""
Error classification for ctxlab.
Every failure raised by the library maps onto one exit code of the CLI.
"""

import logging
from typing import Any, Callable, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class CtxlabError(Exception):
    """Base exception for ctxlab errors."""
    def __init__(self, message: str, exit_code: int = EXIT_CHECK_FAILED):
        super().__init__(message)
        self.exit_code = exit_code


class ConfigError(CtxlabError):
    """Invalid configuration or command-line usage."""
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_USAGE)


class ArgumentError(CtxlabError, ValueError):
    """A library operation received an out-of-range argument."""
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_USAGE)


class StateValidationError(CtxlabError, ValueError):
    """A vector or matrix violates a quantum-state invariant."""
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_CHECK_FAILED)


class InvariantError(CtxlabError):
    """An internal invariant was broken; indicates a bug or corrupted input."""
    def __init__(self, message: str):
        super().__init__(message, exit_code=EXIT_CHECK_FAILED)


def require(condition: bool, message: str, error: Callable[[str], CtxlabError] = ArgumentError) -> None:
    """
    Raise ``error(message)`` unless ``condition`` holds.

    Args:
        condition: Predicate that must be true
        message: Error message used when it is not
        error: Exception factory (defaults to ArgumentError)
    """
    if not condition:
        raise error(message)


def exit_code_for(error: BaseException) -> int:
    """
    Classify an exception into a CLI exit code.

    Args:
        error: The exception that reached the CLI

    Returns:
        2 for usage problems, 1 for everything else
    """
    if isinstance(error, CtxlabError):
        return error.exit_code
    if isinstance(error, (ValueError, TypeError)):
        return EXIT_USAGE
    return EXIT_CHECK_FAILED


def describe(error: BaseException, context: Optional[Any] = None) -> str:
    """Render an error for the log, prefixed by its class name."""
    prefix = f"[{context}] " if context is not None else ""
    return f"{prefix}{type(error).__name__}: {error}"
