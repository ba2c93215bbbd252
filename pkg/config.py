from __future__ import annotations

import os
import logging
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


def _optional_int(name: str) -> Optional[int]:
    value = os.environ.get(name, '').strip()
    return int(value) if value else None


class Config:
    # Pipeline Configuration
    PLANTWATCH_ENV = os.environ.get('PLANTWATCH_ENV', 'development')
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO').upper()

    # Event model / learner
    CYCLE_MS = int(os.environ.get('CYCLE_MS', 100))
    CONVERGENCE_WINDOW = _optional_int('CONVERGENCE_WINDOW')  # None = max(50, 3 * |T|)

    # Detector
    DETECTOR_POLICY = os.environ.get('DETECTOR_POLICY', 'resync').lower()
    SYNDROME_WINDOW_MS = int(os.environ.get('SYNDROME_WINDOW_MS', 300000))

    # Knowledge graph
    BASE_IRI = os.environ.get('BASE_IRI', 'http://example.org/')
    PLANT_NAME = os.environ.get('PLANT_NAME', 'fivetank')
    OWNER_ENTITY = os.environ.get('OWNER_ENTITY', 'MixingModule')
    FACTS_DIR = os.environ.get('FACTS_DIR', os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'fivetank'))

    # Simulator
    DEFAULT_SEED = int(os.environ.get('DEFAULT_SEED', 7))

    @classmethod
    def validate_config(cls) -> bool:
        """Validate critical configuration"""
        from utils.validators import validate_input

        validate_input('cycle_ms', cls.CYCLE_MS)
        validate_input('policy', cls.DETECTOR_POLICY)
        validate_input('positive_int', cls.SYNDROME_WINDOW_MS)
        validate_input('seed', cls.DEFAULT_SEED)
        validate_input('iri', cls.BASE_IRI)
        if cls.CONVERGENCE_WINDOW is not None:
            validate_input('positive_int', cls.CONVERGENCE_WINDOW)

        if cls.CYCLE_MS != 100:
            logger.warning(f"CYCLE_MS={cls.CYCLE_MS} differs from the 100 ms PLC sampling period")
        if not cls.BASE_IRI.endswith(('/', '#')):
            logger.warning(f"BASE_IRI {cls.BASE_IRI!r} does not end with '/' or '#'; IRIs will be glued")
        return True


class DevelopmentConfig(Config):
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG').upper()


class ProductionConfig(Config):
    DEBUG = False


class TestingConfig(Config):
    DEBUG = False
    LOG_LEVEL = 'WARNING'
    CONVERGENCE_WINDOW = None
    DEFAULT_SEED = 7


# Configuration selector
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name: Optional[str] = None) -> type[Config]:
    """Return the configuration class for `name` (falls back to PLANTWATCH_ENV)"""
    name = name or os.environ.get('PLANTWATCH_ENV') or 'default'
    return config.get(name, config['default'])
