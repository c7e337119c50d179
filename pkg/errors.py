#!/usr/bin/env python3
"""
Exception hierarchy shared by the solver library, the CLI and the HTTP server
"""

from typing import List, Optional, Tuple


class SILWError(Exception):
    """Base class for every error raised by the solver"""


class ConfigError(SILWError):
    """Invalid run configuration; carries (line, message) issues"""

    def __init__(self, message: str, issues: Optional[List[Tuple[int, str]]] = None):
        self.issues = list(issues or [])
        if self.issues:
            details = '; '.join(f"line {line}: {msg}" if line else msg for line, msg in self.issues)
            message = f"{message}: {details}"
        super().__init__(message)


class MeshError(SILWError):
    """Invalid grid parameters"""

    def __init__(self, message: str, location=None):
        self.location = location
        if location is not None:
            message = f"{message} at {location}"
        super().__init__(message)


class GeometryError(MeshError):
    """Foot-point search failed or is ambiguous"""


class NumericalError(SILWError):
    """Non-finite values, nonphysical states, singular closures"""

    def __init__(self, message: str, location=None, stage: Optional[int] = None, step: Optional[int] = None):
        self.location = location
        self.stage = stage
        self.step = step
        parts = [message]
        if location is not None:
            parts.append(f"at {location}")
        if stage is not None:
            parts.append(f"stage {stage}")
        if step is not None:
            parts.append(f"step {step}")
        super().__init__(' '.join(parts))


class BlowUpError(NumericalError):
    """Solution exceeded the blow-up threshold or became NaN"""

    def __init__(self, message: str, step: Optional[int] = None, time: Optional[float] = None, **kwargs):
        self.time = time
        super().__init__(message, step=step, **kwargs)


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def exit_code_for(error: Exception) -> int:
    """Map an exception to the CLI exit status"""
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def http_status_for(error: Exception) -> int:
    """Map an exception to the HTTP status used by the server"""
    if isinstance(error, (ConfigError, MeshError)):
        return 400
    return 500
