import csv
import io
import json
import logging
import os
import tempfile
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from exceptions import BadKindError, StorageError, UnknownPointError
from managers.metric_manager import MetricManager
from models.atomic import AtomicDecomposition
from models.field import ScalarField
from models.measure import SignedMeasure
from models.metric_space import FiniteMetricSpace, MetricMeasureSpace
from models.run_config import Report
from repositories.repository_interface import IRepository

logger = logging.getLogger(__name__)


SCHEMAS: Dict[str, Any] = {
    'space': {
        'oneOf': [
            {'required': ['dist'], 'properties': {
                'points': {'type': 'array', 'items': {'type': 'string'}},
                'dist': {'type': 'array', 'items': {'type': 'array', 'items': {'type': 'number'}}},
                'weight': {'type': 'array', 'items': {'type': 'number'}}}},
            {'required': ['coords'], 'properties': {
                'points': {'type': 'array', 'items': {'type': 'string'}},
                'coords': {'type': 'array', 'items': {'type': 'array', 'items': {'type': 'number'}}},
                'metric': {'enum': ['euclidean']},
                'alpha': {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 1},
                'weight': {'type': 'array', 'items': {'type': 'number'}}}}
        ]
    },
    'measure': {
        'required': ['mass'],
        'properties': {
            'space': {'oneOf': [{'type': 'string'}, {'$ref': '#/space'}]},
            'mass': {'type': 'object', 'additionalProperties': {'type': 'number'}}}
    },
    'measures': {'required': ['measures'],
                 'properties': {'measures': {'type': 'array', 'items': {'$ref': '#/measure'}}}},
    'field': {
        'required': ['value'],
        'properties': {
            'space': {'oneOf': [{'type': 'string'}, {'$ref': '#/space'}]},
            'value': {'type': 'object', 'additionalProperties': {'type': 'number'}}}
    },
    'fields': {'required': ['fields'],
               'properties': {'fields': {'type': 'array', 'items': {'$ref': '#/field'}}}},
    'decomposition': {
        'required': ['alpha', 'atoms'],
        'properties': {
            'alpha': {'type': 'number'},
            'balanced': {'type': 'boolean'},
            'atoms': {'type': 'array', 'items': {'oneOf': [
                {'properties': {'gamma': {'type': 'number'}, 'kind': {'const': 'dipole'},
                                'x': {'type': 'string'}, 'y': {'type': 'string'}}},
                {'properties': {'gamma': {'type': 'number'}, 'kind': {'const': 'dirac'},
                                'z': {'type': 'string'}, 'sign': {'enum': [-1, 1]}}}]}}}
    },
    'report': {
        'required': ['version', 'config', 'results', 'wall_time_ms'],
        'properties': {'error': {'properties': {'code': {'type': 'string'},
                                                'detail': {'type': 'object'}}}}
    }
}


def read_json(path: str) -> Dict[str, Any]:
    """Parse a JSON document; StorageError on I/O or syntax failures"""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            data = json.load(fh)
    except OSError as e:
        raise StorageError(f"Cannot read {path}: {e.strerror}", {'path': path}) from e
    except json.JSONDecodeError as e:
        raise StorageError(f"Malformed JSON in {path}: {e.msg}",
                           {'path': path, 'line': e.lineno}) from e
    if not isinstance(data, dict):
        raise StorageError(f"Expected a JSON object in {path}", {'path': path})
    return data


def write_atomic(path: str, text: str) -> str:
    """Write text to a temp file beside ``path`` and rename it into place"""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix='.part')
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as e:
        raise StorageError(f"Cannot write {path}: {e.strerror}", {'path': path}) from e
    logger.debug("Wrote %s", path)
    return path


def dumps(data: Any) -> str:
    """Canonical JSON text; floats use the shortest round-trip representation"""
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def unwrap(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    """Accept either a bare document or a report whose results carry ``key``"""
    results = data.get('results')
    if isinstance(results, dict) and isinstance(results.get(key), dict):
        return results[key]
    return data


class SpaceRepository(IRepository[MetricMeasureSpace]):
    """Spaces given by a distance matrix or by coordinates"""

    def __init__(self, metric_manager: Optional[MetricManager] = None):
        """
        Initialize repository

        Args:
            metric_manager: Validates matrices and builds coordinate spaces
        """
        self.metric_manager = metric_manager or MetricManager()

    def load(self, path: str) -> MetricMeasureSpace:
        """Load a space with its weights (uniform when the file has none)"""
        return self.from_dict(unwrap(read_json(path), 'space'), source=path)

    def load_space(self, path: str) -> FiniteMetricSpace:
        return self.load(path).space

    def from_dict(self, data: Dict[str, Any], source: str = '<inline>') -> MetricMeasureSpace:
        """
        Build a space document

        Raises:
            StorageError: If neither 'dist' nor 'coords' is present or shapes are wrong
            ValidationError: If the matrix violates the metric axioms
        """
        points = data.get('points')
        try:
            if 'dist' in data:
                space = self.metric_manager.validate_metric(data['dist'], points)
            elif 'coords' in data:
                metric = data.get('metric', 'euclidean')
                if metric != 'euclidean':
                    raise BadKindError(f"Unsupported metric: {metric}",
                                       {'metric': metric, 'allowed': ['euclidean']})
                space = self.metric_manager.from_coordinates(
                    data['coords'], points, data.get('alpha')
                )
            else:
                raise StorageError(f"Space in {source} needs 'dist' or 'coords'",
                                   {'path': source})
        except (TypeError, ValueError) as e:
            raise StorageError(f"Malformed space in {source}: {e}", {'path': source}) from e

        if data.get('weight') is None:
            return MetricMeasureSpace.uniform(space)
        try:
            weight = np.asarray(data['weight'], dtype=float)
        except (TypeError, ValueError) as e:
            raise StorageError(f"Malformed weight vector in {source}: {e}", {'path': source}) from e
        if weight.shape != (space.n,):
            raise StorageError(f"Weight vector of {source} has shape {weight.shape}, "
                               f"expected ({space.n},)", {'path': source})
        return MetricMeasureSpace(space, weight)

    def save(self, entity: MetricMeasureSpace, path: str) -> str:
        return write_atomic(path, dumps(entity.to_dict()))


class _SpaceBoundRepository:
    """Documents whose 'space' entry is inline or a path relative to the file"""

    def __init__(self, space_repository: Optional[SpaceRepository] = None):
        self.space_repository = space_repository or SpaceRepository()

    def _resolve_space(self, data: Dict[str, Any], path: str,
                       space: Optional[FiniteMetricSpace]) -> FiniteMetricSpace:
        if space is not None:
            return space
        ref = data.get('space')
        if isinstance(ref, dict):
            return self.space_repository.from_dict(ref, source=path).space
        if isinstance(ref, str):
            base = os.path.dirname(os.path.abspath(path))
            return self.space_repository.load_space(os.path.join(base, ref))
        raise StorageError(f"{path} names no space and none was given", {'path': path})

    @staticmethod
    def _points(build, path: str):
        try:
            return build()
        except KeyError as e:
            raise UnknownPointError(f"{path} references unknown point {e.args[0]!r}",
                                    {'path': path, 'point': e.args[0]}) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise StorageError(f"Malformed document {path}: {e}", {'path': path}) from e


class MeasureRepository(_SpaceBoundRepository, IRepository[SignedMeasure]):
    """Signed measures as sparse point -> mass maps"""

    def load(self, path: str, space: Optional[FiniteMetricSpace] = None) -> SignedMeasure:
        data = read_json(path)
        space = self._resolve_space(data, path, space)
        return self._points(lambda: SignedMeasure.from_dict(space, data), path)

    def load_many(self, path: str,
                  space: Optional[FiniteMetricSpace] = None) -> List[SignedMeasure]:
        """A ``{"measures": [...]}`` batch file, or a single measure"""
        data = read_json(path)
        space = self._resolve_space(data, path, space)
        items = data.get('measures', [data])
        return [self._points(lambda item=item: SignedMeasure.from_dict(space, item), path)
                for item in items]

    def save(self, entity: SignedMeasure, path: str) -> str:
        return write_atomic(path, dumps({'space': entity.space.to_dict(), **entity.to_dict()}))


class FieldRepository(_SpaceBoundRepository, IRepository[ScalarField]):
    """Scalar fields as point -> value maps"""

    def load(self, path: str, space: Optional[FiniteMetricSpace] = None) -> ScalarField:
        data = read_json(path)
        space = self._resolve_space(data, path, space)
        return self._points(lambda: ScalarField.from_dict(space, data), path)

    def load_many(self, path: str,
                  space: Optional[FiniteMetricSpace] = None) -> List[ScalarField]:
        """A ``{"fields": [...]}`` file, or a single field"""
        data = read_json(path)
        space = self._resolve_space(data, path, space)
        items = data.get('fields', [data])
        return [self._points(lambda item=item: ScalarField.from_dict(space, item), path)
                for item in items]

    def save(self, entity: ScalarField, path: str) -> str:
        return write_atomic(path, dumps({'space': entity.space.to_dict(), **entity.to_dict()}))


class DecompositionRepository(IRepository[AtomicDecomposition]):
    """Atomic decompositions, bare or inside a decompose report"""

    def load(self, path: str) -> AtomicDecomposition:
        data = unwrap(read_json(path), 'decomposition')
        try:
            return AtomicDecomposition.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise StorageError(f"Malformed decomposition in {path}: {e}", {'path': path}) from e

    def save(self, entity: AtomicDecomposition, path: str) -> str:
        return write_atomic(path, dumps(entity.to_dict()))


class ReportRepository(IRepository[Dict[str, Any]]):
    """Run reports as JSON, with a flat CSV projection for tabular results"""

    def load(self, path: str) -> Dict[str, Any]:
        return read_json(path)

    def save(self, entity, path: str) -> str:
        data = entity.to_dict() if isinstance(entity, Report) else entity
        return write_atomic(path, dumps(data))

    def save_text(self, text: str, path: str) -> str:
        """Write an already rendered report (JSON or CSV)"""
        return write_atomic(path, text)


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    return buffer.getvalue()
