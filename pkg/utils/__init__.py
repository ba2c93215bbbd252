"""
Utilities package for PlantWatch
Provides errors, validation, JSON serialization and artifact integrity helpers
"""

from .errors import PipelineError
from .validators import ValidationError, InputValidator, validate_input, validate_record_fields
from .serialization import (
    canonical_dumps,
    read_json,
    write_json,
    read_jsonl,
    write_jsonl,
)
from .integrity import IntegrityError, PipelineManifest, hash_config, hash_file

__all__ = [
    'PipelineError',
    'ValidationError',
    'InputValidator',
    'validate_input',
    'validate_record_fields',
    'canonical_dumps',
    'read_json',
    'write_json',
    'read_jsonl',
    'write_jsonl',
    'IntegrityError',
    'PipelineManifest',
    'hash_config',
    'hash_file',
]
