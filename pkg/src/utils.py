"""Utility functions for the wireless network design accuracy toolkit."""

import logging
import re
import sys
import time
from datetime import datetime
from fractions import Fraction
from typing import Optional, Union

Rational = Union[Fraction, int, float, str]

_DECIMAL_RE = re.compile(r'^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$')

# Longest exact decimal we emit before switching to num/den notation
MAX_DECIMAL_DIGITS = 40


def setup_logging(log_level: str = 'INFO') -> logging.Logger:
    """
    Configure logging with consistent format.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Logger instance
    """
    logger = logging.getLogger('wnd_accuracy')
    logger.setLevel(getattr(logging, log_level.upper()))

    # Remove existing handlers
    logger.handlers = []

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(getattr(logging, log_level.upper()))

    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)

    return logger


def to_fraction(value: Rational) -> Fraction:
    """
    Convert a number to an exact rational.

    Floats are converted to their exact binary value (every double is a
    rational). Strings are parsed as exact decimals ("1e-9", "0.1") or
    as "num/den".

    Args:
        value: Fraction, int, float or string

    Returns:
        Exact Fraction

    Raises:
        ValueError: If the value cannot be parsed or is not finite
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Boolean is not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float('inf'), float('-inf')):
            raise ValueError(f"Non-finite value cannot be made exact: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ValueError(f"Unsupported numeric type: {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    """
    Parse an exact decimal or "num/den" string.

    Args:
        text: String such as "1e-9", "-0.25" or "3/7"

    Returns:
        Exact Fraction

    Raises:
        ValueError: If the string is not a valid rational literal
    """
    stripped = text.strip()
    if '/' in stripped:
        num, _, den = stripped.partition('/')
        try:
            numerator = int(num.strip())
            denominator = int(den.strip())
        except ValueError:
            raise ValueError(f"Invalid rational literal: {text!r}")
        if denominator == 0:
            raise ValueError(f"Zero denominator in rational literal: {text!r}")
        return Fraction(numerator, denominator)

    if not _DECIMAL_RE.match(stripped):
        raise ValueError(f"Invalid rational literal: {text!r}")
    return Fraction(stripped)


def tolerance_fraction(value: Union[float, str, Fraction]) -> Fraction:
    """
    Convert a user-facing tolerance (1e-6, "1e-25") to the decimal it denotes.

    Unlike to_fraction, a float is read through its shortest repr, so
    1e-6 becomes exactly 1/1000000 rather than the nearest double.

    Args:
        value: Tolerance as float, string or Fraction

    Returns:
        Exact Fraction
    """
    if isinstance(value, float):
        return parse_rational(repr(value))
    return to_fraction(value)


def format_rational(value: Fraction) -> str:
    """
    Format a rational so that parse_rational returns it unchanged.

    Integers are written plainly, terminating decimals of moderate length
    as exact decimals, everything else as "num/den".

    Args:
        value: Exact Fraction

    Returns:
        String representation
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)

    # Terminating decimal iff the denominator has no prime factors but 2 and 5
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1

    if den == 1:
        places = max(twos, fives)
        scaled = abs(value.numerator) * (10 ** places) // value.denominator
        digits = str(scaled).rjust(places + 1, '0')
        if len(digits) <= MAX_DECIMAL_DIGITS:
            sign = '-' if value < 0 else ''
            return f"{sign}{digits[:-places]}.{digits[-places:]}"

    return f"{value.numerator}/{value.denominator}"


def format_sci(value: Optional[Rational], digits: int = 1) -> str:
    """
    Format a number in short scientific notation for tables and logs.

    Args:
        value: Number (exact or float) or None
        digits: Digits after the decimal point

    Returns:
        String like "1.7e-10", or "-" for None
    """
    if value is None:
        return '-'
    as_float = float(value)
    if as_float == 0:
        return '0'
    return f"{as_float:.{digits}e}"


def format_duration(seconds: float) -> str:
    """
    Format duration in human-readable format.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted string (e.g., "0.3s", "2.5m")
    """
    if seconds < 60:
        return f"{seconds:.1f}s"

    minutes = seconds / 60
    if minutes < 60:
        return f"{minutes:.1f}m"

    hours = minutes / 60
    return f"{hours:.1f}h"


def generate_output_filename(prefix: str, extension: str) -> str:
    """
    Generate output filename with timestamp.

    Args:
        prefix: File name prefix (e.g., "accuracy_tables")
        extension: Extension without dot (e.g., "xlsx")

    Returns:
        Filename like "accuracy_tables_20250115_100033.xlsx"
    """
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return f"{prefix}_{timestamp}.{extension}"


class Stopwatch:
    """Measure wall-clock time of a block of work."""

    def __init__(self):
        self.start_time = time.perf_counter()

    def elapsed(self) -> float:
        """Seconds since construction."""
        return time.perf_counter() - self.start_time
