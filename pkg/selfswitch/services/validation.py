"""
Input parsing and validation utilities.
Helpers shared by the parameter models and the scenario loader.
"""
import math
import re
from typing import Union

_COMPLEX_PATTERN = re.compile(r'^[0-9eE.+\-j]+$')
_PARAMETER_NAME = re.compile(r'^[a-z_][a-z0-9_]*$')


def parse_complex(value: Union[str, complex, float, int]) -> complex:
    """
    Parse a complex number written as "re+imj".

    Args:
        value: Number or its text form (spaces are ignored)

    Returns:
        Finite complex value

    Raises:
        ValueError: If the text is not a finite complex literal
    """
    if isinstance(value, (complex, float, int)) and not isinstance(value, bool):
        number = complex(value)
    else:
        text = str(value).strip().replace(' ', '')
        if not text or not _COMPLEX_PATTERN.match(text):
            raise ValueError(f'Not a complex number: "{value}"')
        try:
            number = complex(text)
        except ValueError as e:
            raise ValueError(f'Not a complex number: "{value}"') from e
    if not (math.isfinite(number.real) and math.isfinite(number.imag)):
        raise ValueError(f'Complex value must be finite, got {value}')
    return number


def parse_real(value: Union[str, float, int]) -> float:
    """
    Parse a finite real number.

    Raises:
        ValueError: If the value is not a finite real
    """
    try:
        number = float(str(value).strip()) if isinstance(value, str) else float(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f'Not a real number: "{value}"') from e
    if not math.isfinite(number):
        raise ValueError(f'Value must be finite, got {value}')
    return number


def parse_list(text: str) -> list[str]:
    """Split a comma-separated list, dropping empty items."""
    return [item.strip() for item in str(text).split(',') if item.strip()]


def validate_parameter_name(name: str) -> bool:
    """
    Validate a scenario parameter name.

    Args:
        name: Parameter key from a scenario file or the sweep command

    Returns:
        True if it is a lowercase identifier, False otherwise
    """
    return bool(name and _PARAMETER_NAME.match(name))
