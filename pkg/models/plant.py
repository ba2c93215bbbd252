"""
Physical plant facts: the ISA88 hierarchy and the sensors/actuators it hosts.

Facts are read from two CSV files with mandatory header rows::

    hierarchy.csv   id,class,parent
    devices.csv     id,kind,host,property,semantic_label
"""

from __future__ import annotations

import os
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import pandas as pd

from utils.errors import PipelineError
from utils.validators import ValidationError, validate_input

logger = logging.getLogger(__name__)

HIERARCHY_FILE = 'hierarchy.csv'
DEVICES_FILE = 'devices.csv'

HIERARCHY_COLUMNS = ['id', 'class', 'parent']
DEVICE_COLUMNS = ['id', 'kind', 'host', 'property', 'semantic_label']

ISA88_LEVELS = (
    'Enterprise',
    'Site',
    'Area',
    'ProcessCell',
    'Unit',
    'EquipmentModule',
    'ControlModule',
)

SENSOR = 'Sensor'
ACTUATOR = 'Actuator'


class InvalidFacts(PipelineError):
    """Raised when a facts file is malformed"""
    pass


class DanglingParent(InvalidFacts):
    """Raised when a parent or host reference does not resolve"""
    pass


class DuplicateEntity(InvalidFacts):
    """Raised when an id is declared twice"""
    pass


@dataclass(frozen=True)
class PlantEntity:
    id: str
    level: str
    parent: Optional[str] = None


@dataclass(frozen=True)
class Device:
    id: str
    kind: str
    host: str
    property: str
    semantic_label: str

    @property
    def is_actuator(self) -> bool:
        return self.kind == ACTUATOR


@dataclass(frozen=True)
class PlantFacts:
    """Validated hierarchy and device facts of one plant"""

    entities: tuple[PlantEntity, ...] = ()
    devices: tuple[Device, ...] = ()
    _entity_index: dict = field(init=False, repr=False, compare=False)
    _device_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'entities', tuple(self.entities))
        object.__setattr__(self, 'devices', tuple(self.devices))
        object.__setattr__(self, '_entity_index', {})
        object.__setattr__(self, '_device_index', {})
        self._validate()

    def _validate(self) -> None:
        seen = set()
        for entity in self.entities:
            self._check_id(entity.id, seen)
            if entity.level not in ISA88_LEVELS:
                raise InvalidFacts(f"Entity {entity.id} has unknown ISA88 class {entity.level!r}")
            self._entity_index[entity.id] = entity

        for entity in self.entities:
            if entity.parent and entity.parent not in self._entity_index:
                raise DanglingParent(f"Entity {entity.id} names unknown parent {entity.parent!r}")
        self._check_acyclic()

        properties = set()
        for device in self.devices:
            self._check_id(device.id, seen)
            if device.kind not in (SENSOR, ACTUATOR):
                raise InvalidFacts(f"Device {device.id} has kind {device.kind!r}, expected Sensor or Actuator")
            if device.host not in self._entity_index:
                raise DanglingParent(f"Device {device.id} is hosted by unknown entity {device.host!r}")
            self._check_id(device.property, properties)
            self._device_index[device.id] = device

    @staticmethod
    def _check_id(identifier: str, seen: set) -> None:
        try:
            validate_input('entity', identifier)
        except ValidationError as e:
            raise InvalidFacts(str(e))
        if identifier in seen:
            raise DuplicateEntity(f"Id {identifier!r} is declared twice")
        seen.add(identifier)

    def _check_acyclic(self) -> None:
        for entity in self.entities:
            path = {entity.id}
            parent = entity.parent
            while parent:
                if parent in path:
                    raise InvalidFacts(f"Hierarchy contains a cycle through {entity.id}")
                path.add(parent)
                parent = self._entity_index[parent].parent

    @classmethod
    def empty(cls) -> PlantFacts:
        return cls()

    def entity(self, entity_id: str) -> Optional[PlantEntity]:
        return self._entity_index.get(entity_id)

    def device(self, device_id: str) -> Optional[Device]:
        return self._device_index.get(device_id)

    def actuator(self, signal: str) -> Optional[Device]:
        """The actuator whose device id is `signal`, if any"""
        device = self._device_index.get(signal)
        return device if device is not None and device.is_actuator else None

    def devices_hosted_by(self, entity_id: str) -> list[Device]:
        return [d for d in self.devices if d.host == entity_id]

    @property
    def actuators(self) -> list[Device]:
        return [d for d in self.devices if d.is_actuator]


def _read_table(path: str, columns: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise InvalidFacts(f"{path}: file is empty, header row is mandatory")
    except pd.errors.ParserError as e:
        raise InvalidFacts(f"{path}: {e}")

    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise InvalidFacts(f"{path}: missing columns {', '.join(missing)}")
    frame = frame[columns].copy()
    for column in columns:
        frame[column] = frame[column].astype(str).str.strip()
    return frame


def facts_from_frames(hierarchy: pd.DataFrame, devices: pd.DataFrame) -> PlantFacts:
    entities = [
        PlantEntity(row['id'], row['class'], row['parent'] or None)
        for row in hierarchy.to_dict('records')
    ]
    hosted = [
        Device(row['id'], row['kind'], row['host'], row['property'], row['semantic_label'])
        for row in devices.to_dict('records')
    ]
    return PlantFacts(tuple(entities), tuple(hosted))


def load_facts(directory: str = None, hierarchy_path: str = None, devices_path: str = None) -> PlantFacts:
    """
    Read and validate the two facts CSV files

    Args:
        directory: Folder holding hierarchy.csv and devices.csv
        hierarchy_path: Explicit hierarchy file (overrides `directory`)
        devices_path: Explicit devices file (overrides `directory`)

    Returns:
        PlantFacts

    Raises:
        InvalidFacts: On malformed files, or a subclass for reference errors
    """
    hierarchy_path = hierarchy_path or os.path.join(directory, HIERARCHY_FILE)
    devices_path = devices_path or os.path.join(directory, DEVICES_FILE)

    facts = facts_from_frames(
        _read_table(hierarchy_path, HIERARCHY_COLUMNS),
        _read_table(devices_path, DEVICE_COLUMNS),
    )
    logger.info(f"Loaded {len(facts.entities)} entities and {len(facts.devices)} devices")
    return facts


def facts_from_rows(hierarchy: Iterable[dict], devices: Iterable[dict]) -> PlantFacts:
    """Build facts from in-memory rows with the CSV column names"""
    return facts_from_frames(
        pd.DataFrame(list(hierarchy), columns=HIERARCHY_COLUMNS).fillna('').astype(str),
        pd.DataFrame(list(devices), columns=DEVICE_COLUMNS).fillna('').astype(str),
    )
