"""
MULTIPOLY Command Helpers
Flag parsing and artifact loading shared by the command modules
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Tuple

import numpy as np

from core.compose import LinearMap, VectorMultiPolynomial
from core.errors import MalformedInput
from core.mpcore import Field, MultiPolynomial, from_dict

logger = logging.getLogger(__name__)


def parse_ints(text: str, name: str) -> Tuple[int, ...]:
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise MalformedInput(f"field '{name}': expected comma-separated integers, got {text!r}")


def parse_floats(text: str, name: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise MalformedInput(f"field '{name}': expected comma-separated numbers, got {text!r}")


def parse_paths(text: str, name: str) -> List[Path]:
    paths = [Path(v.strip()) for v in str(text).split(",") if v.strip()]
    if not paths:
        raise MalformedInput(f"field '{name}': no paths given")
    return paths


def read_json(path: Path, name: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise MalformedInput(f"field '{name}': cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise MalformedInput(f"field '{name}': {path} is not valid JSON: {e}")


def _in_field(P: MultiPolynomial, scalar_field: Field, path: Path) -> MultiPolynomial:
    if P.field is scalar_field:
        return P
    if scalar_field is Field.COMPLEX:
        return MultiPolynomial(Field.COMPLEX, P.multidegree, P.dims, P.terms)
    raise MalformedInput(f"field 'field': {path} is complex but --field real was given")


def load_poly(path: Path, name: str, scalar_field: Field) -> MultiPolynomial:
    try:
        P = from_dict(read_json(path, name))
    except MalformedInput as e:
        raise MalformedInput(f"{path}: {e}")
    return _in_field(P, scalar_field, path)


def load_vector(path: Path, name: str, scalar_field: Field) -> VectorMultiPolynomial:
    try:
        V = VectorMultiPolynomial.from_dict(read_json(path, name))
    except MalformedInput as e:
        raise MalformedInput(f"{path}: {e}")
    return VectorMultiPolynomial(tuple(_in_field(c, scalar_field, path) for c in V.components))


def load_map(path: Path, name: str) -> LinearMap:
    try:
        return LinearMap.from_dict(read_json(path, name))
    except MalformedInput as e:
        raise MalformedInput(f"{path}: {e}")


def load_family(path: Path, name: str) -> List[np.ndarray]:
    """A JSON list of equal-length numeric vectors"""
    data = read_json(path, name)
    if not isinstance(data, list):
        raise MalformedInput(f"field '{name}': {path} must hold a list of vectors")
    try:
        return [np.asarray(v, dtype=float) for v in data]
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"field '{name}': {path}: {e}")


def dump(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"
