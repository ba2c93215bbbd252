from __future__ import annotations

import re
import logging
from typing import Any, Mapping, Optional, Sequence, Union

from .errors import PipelineError

logger = logging.getLogger(__name__)


class ValidationError(PipelineError):
    """Custom exception for validation errors"""
    pass


class InputValidator:
    """Input validation for PlantWatch files, flags and configuration"""

    # Validation patterns
    PATTERNS = {
        'signal': r'^[A-Za-z_][A-Za-z0-9_.\-]*$',
        'entity': r'^[A-Za-z_][A-Za-z0-9_.\-]*$',
        'iri': r'^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>"{}|\\^`]*$',
        'state_ref': r'^q?(\d+)$',
    }

    POLICIES = ['halt', 'resync']

    # Numeric limits
    LIMITS = {
        'max_signal_value': 255,
        'max_cycle_ms': 60000,
        'max_seed': 2 ** 32 - 1,
        'max_cycles': 100000,
    }

    @classmethod
    def validate_signal_id(cls, signal: str) -> str:
        """Validate a discrete IO signal name"""
        if not signal or not isinstance(signal, str):
            raise ValidationError("Signal id is required")

        signal = signal.strip()

        if not re.match(cls.PATTERNS['signal'], signal):
            raise ValidationError(f"Invalid signal id {signal!r}")

        return signal

    @classmethod
    def validate_entity_id(cls, entity: str) -> str:
        """Validate a plant entity or device id"""
        if not entity or not isinstance(entity, str):
            raise ValidationError("Entity id is required")

        entity = entity.strip()

        if not re.match(cls.PATTERNS['entity'], entity):
            raise ValidationError(f"Invalid entity id {entity!r}")

        return entity

    @classmethod
    def validate_signal_value(cls, value: int) -> int:
        """Validate a discrete signal value (small non-negative integer)"""
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"Signal value must be an integer, got {value!r}")

        if value < 0 or value > cls.LIMITS['max_signal_value']:
            raise ValidationError(f"Signal value {value} out of range 0..{cls.LIMITS['max_signal_value']}")

        return value

    @classmethod
    def validate_timestamp(cls, value: int) -> int:
        """Validate a millisecond timestamp"""
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"Timestamp must be an integer number of milliseconds, got {value!r}")

        if value < 0:
            raise ValidationError("Timestamp cannot be negative")

        return value

    @classmethod
    def validate_positive_int(cls, value: Any, field_name: str = "Value") -> int:
        """Validate a strictly positive integer"""
        try:
            if isinstance(value, bool):
                raise TypeError
            number = int(value)
        except (ValueError, TypeError):
            raise ValidationError(f"{field_name} must be an integer, got {value!r}")

        if number <= 0:
            raise ValidationError(f"{field_name} must be positive")

        return number

    @classmethod
    def validate_non_negative_int(cls, value: Any, field_name: str = "Value") -> int:
        """Validate a non-negative integer"""
        try:
            if isinstance(value, bool):
                raise TypeError
            number = int(value)
        except (ValueError, TypeError):
            raise ValidationError(f"{field_name} must be an integer, got {value!r}")

        if number < 0:
            raise ValidationError(f"{field_name} cannot be negative")

        return number

    @classmethod
    def validate_cycle_ms(cls, value: Any) -> int:
        """Validate the PLC cycle length used for coalescing"""
        cycle = cls.validate_positive_int(value, "Cycle length")

        if cycle > cls.LIMITS['max_cycle_ms']:
            raise ValidationError(f"Cycle length cannot exceed {cls.LIMITS['max_cycle_ms']} ms")

        return cycle

    @classmethod
    def validate_seed(cls, value: Any) -> int:
        """Validate a random seed"""
        seed = cls.validate_non_negative_int(value, "Seed")

        if seed > cls.LIMITS['max_seed']:
            raise ValidationError(f"Seed cannot exceed {cls.LIMITS['max_seed']}")

        return seed

    @classmethod
    def validate_cycles(cls, value: Any) -> int:
        """Validate a number of production cycles"""
        cycles = cls.validate_non_negative_int(value, "Cycle count")

        if cycles > cls.LIMITS['max_cycles']:
            raise ValidationError(f"Cycle count cannot exceed {cls.LIMITS['max_cycles']}")

        return cycles

    @classmethod
    def validate_policy(cls, policy: Optional[str]) -> str:
        """Validate the detector resynchronization policy"""
        if not policy:
            return 'resync'  # Default

        policy = str(policy).strip().lower()

        if policy not in cls.POLICIES:
            raise ValidationError(f"Policy must be one of: {', '.join(cls.POLICIES)}")

        return policy

    @classmethod
    def validate_iri(cls, iri: str) -> str:
        """Validate an absolute IRI"""
        if not iri or not isinstance(iri, str):
            raise ValidationError("IRI is required")

        iri = iri.strip()

        if not re.match(cls.PATTERNS['iri'], iri):
            raise ValidationError(f"Invalid absolute IRI {iri!r}")

        return iri

    @classmethod
    def validate_state_ref(cls, ref: Union[str, int]) -> int:
        """Validate a state reference such as 'q2' or '2' and return its index"""
        match = re.match(cls.PATTERNS['state_ref'], str(ref).strip())
        if not match:
            raise ValidationError(f"Invalid state reference {ref!r} (expected e.g. q0)")

        return int(match.group(1))

    @classmethod
    def validate_vector(cls, values: Union[str, Sequence[int]]) -> tuple[int, ...]:
        """Validate a state vector given as a list or comma separated string"""
        if isinstance(values, str):
            text = values.strip()
            if not text:
                return ()
            try:
                values = [int(part) for part in text.split(',')]
            except ValueError:
                raise ValidationError(f"Invalid state vector {text!r}")

        if not isinstance(values, (list, tuple)):
            raise ValidationError("State vector must be a list of integers")

        return tuple(cls.validate_signal_value(value) for value in values)


def validate_input(field_type: str, value: Any, **kwargs: Any) -> Any:
    """
    Main validation function - validates input based on field type

    Args:
        field_type (str): Type of field to validate
        value: Value to validate
        **kwargs: Additional validation parameters

    Returns:
        Validated value

    Raises:
        ValidationError: If validation fails
    """
    validator = InputValidator()

    validation_methods = {
        'signal': validator.validate_signal_id,
        'entity': validator.validate_entity_id,
        'signal_value': validator.validate_signal_value,
        'timestamp': validator.validate_timestamp,
        'positive_int': validator.validate_positive_int,
        'non_negative_int': validator.validate_non_negative_int,
        'cycle_ms': validator.validate_cycle_ms,
        'seed': validator.validate_seed,
        'cycles': validator.validate_cycles,
        'policy': validator.validate_policy,
        'iri': validator.validate_iri,
        'state_ref': validator.validate_state_ref,
        'vector': validator.validate_vector,
    }

    if field_type not in validation_methods:
        raise ValidationError(f"Unknown field type: {field_type}")

    try:
        method = validation_methods[field_type]
        if field_type in ('positive_int', 'non_negative_int') and 'field_name' in kwargs:
            return method(value, kwargs['field_name'])
        return method(value)
    except ValidationError:
        raise
    except Exception as e:
        logger.error(f"Validation error for {field_type}: {str(e)}")
        raise ValidationError(f"Validation failed for {field_type}")


def validate_record_fields(
    data: Any,
    required_fields: Mapping[str, str],
    optional_fields: Optional[Mapping[str, str]] = None,
) -> dict:
    """
    Validate a decoded JSON record

    Args:
        data (dict): Input data to validate
        required_fields (dict): Required fields with their types
        optional_fields (dict, optional): Optional fields with their types

    Returns:
        dict: Validated data

    Raises:
        ValidationError: If validation fails
    """
    if not isinstance(data, dict):
        raise ValidationError("Record must be a JSON object")

    validated_data = {}

    # Validate required fields
    for field_name, field_type in required_fields.items():
        if field_name not in data:
            raise ValidationError(f"Required field '{field_name}' is missing")

        validated_data[field_name] = validate_input(field_type, data[field_name])

    # Validate optional fields
    if optional_fields:
        for field_name, field_type in optional_fields.items():
            if field_name in data and data[field_name] is not None:
                validated_data[field_name] = validate_input(field_type, data[field_name])

    return validated_data
