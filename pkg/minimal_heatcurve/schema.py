"""Minimal JSON-schema validator used for building, U-value and run-config files.

Supports the subset of draft 2020-12 the shipped schemas use: ``type``,
``enum``, ``required``, ``properties``, ``patternProperties``,
``additionalProperties``, ``minProperties``, ``items``, ``minItems``, ``maxItems``,
``minimum``, ``maximum``, ``exclusiveMinimum`` and ``exclusiveMaximum``.
Errors point at the offending value with a ``$.a.b[0]`` path and, when the key
can be found in the source text, a line and column.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .errors import BuildingValidationError
from .utils.fs import text_position

SCHEMA_DIR = Path(__file__).parent

ErrorFactory = Callable[[str, tuple[str | int, ...] | None, int | None, int | None], Exception]


def load_schema(name: str) -> Mapping[str, Any]:
    return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))


def read_document(path: str | Path, *, error: ErrorFactory = BuildingValidationError) -> str:
    """Decode a UTF-8 JSON document; undecodable bytes raise ``error(...)``."""

    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line, column = text_position(raw, exc.start)
        raise error(f"{path}: invalid UTF-8 byte", None, line, column) from exc


def parse_document(content: str, *, error: ErrorFactory = BuildingValidationError) -> Any:
    try:
        return json.loads(content)
    except json.JSONDecodeError as exc:
        raise error(exc.msg, None, exc.lineno, exc.colno) from exc


def validate_document(
    data: Any,
    schema: Mapping[str, Any],
    content: str = "",
    *,
    error: ErrorFactory = BuildingValidationError,
) -> None:
    """Validate *data* against *schema*; raise ``error(...)`` on the first violation."""

    _Validator(content, error).check(data, schema, ())


def locate_pointer(content: str, path: Sequence[str | int]) -> tuple[int | None, int | None]:
    """Line and column of the deepest element of *path* found in *content*.

    The document is walked segment by segment, so a key repeated in several
    objects resolves to the occurrence under the given path. A missing final
    key resolves to its parent.
    """

    if not path or not content:
        return None, None
    found: int | None = None
    try:
        position = _skip_whitespace(content, 0)
        for part in path:
            located = _find_member(content, position, part)
            if located is None:
                break
            found, position = located
    except (ValueError, IndexError):
        pass
    if found is None:
        return None, None
    line = content.count("\n", 0, found) + 1
    return line, found - (content.rfind("\n", 0, found) + 1) + 1


_DECODER = json.JSONDecoder()
_WHITESPACE = re.compile(r"[ \t\n\r]*")


def _skip_whitespace(content: str, position: int) -> int:
    return _WHITESPACE.match(content, position).end()


def _find_member(content: str, position: int, part: str | int) -> tuple[int, int] | None:
    """Return ``(anchor, value_start)`` of *part* in the container at *position*.

    The anchor is the key for object members and the value for array items.
    """

    opening, closing = ("{", "}") if isinstance(part, str) else ("[", "]")
    if content[position] != opening:
        return None
    position = _skip_whitespace(content, position + 1)
    index = 0
    while content[position] != closing:
        anchor = position
        if isinstance(part, str):
            key, position = _DECODER.raw_decode(content, position)
            position = _skip_whitespace(content, position)
            position = _skip_whitespace(content, position + 1)  # ':'
            if key == part:
                return anchor, position
        elif index == part:
            return anchor, position
        _, position = _DECODER.raw_decode(content, position)
        position = _skip_whitespace(content, position)
        if content[position] == ",":
            position = _skip_whitespace(content, position + 1)
        index += 1
    return None


_PYTHON_TYPES: dict[str, type | tuple[type, ...]] = {
    "object": dict,
    "array": list,
    "string": str,
    "integer": int,
    "number": (int, float),
    "boolean": bool,
    "null": type(None),
}


class _Validator:
    def __init__(self, content: str, error: ErrorFactory) -> None:
        self.content = content
        self.error = error

    def fail(self, message: str, path: Sequence[str | int]) -> Exception:
        line, column = locate_pointer(self.content, path)
        return self.error(message, tuple(path) if path else None, line, column)

    def check(self, data: Any, schema: Mapping[str, Any], path: tuple[str | int, ...]) -> None:
        schema_type = schema.get("type")
        if schema_type:
            self._check_type(data, schema_type, path)

        if isinstance(data, dict):
            self._check_object(data, schema, path)
        elif isinstance(data, list):
            self._check_array(data, schema, path)
        elif isinstance(data, (int, float)) and not isinstance(data, bool):
            self._check_bounds(data, schema, path)

        if "enum" in schema and data not in schema["enum"]:
            allowed = ", ".join(repr(item) for item in schema["enum"])
            raise self.fail(f"Value {data!r} not allowed; expected one of {allowed}", path)

    def _check_type(self, data: Any, schema_type: str | Sequence[str], path: tuple[str | int, ...]) -> None:
        types = (schema_type,) if isinstance(schema_type, str) else tuple(schema_type)
        for name in types:
            expected = _PYTHON_TYPES.get(name)
            if expected is None:
                continue
            # bool is an int subclass; JSON booleans are never numbers
            if isinstance(data, bool) and name in {"integer", "number"}:
                continue
            if isinstance(data, expected):
                return
        raise self.fail(f"Expected type {', '.join(types)}", path)

    def _check_object(self, data: Mapping[str, Any], schema: Mapping[str, Any], path: tuple[str | int, ...]) -> None:
        min_props = schema.get("minProperties")
        if min_props is not None and len(data) < int(min_props):
            raise self.fail(f"Expected at least {min_props} properties", path)

        for key in schema.get("required", []):
            if key not in data:
                raise self.fail(f"Missing required property '{key}'", path + (key,))

        properties: Mapping[str, Any] = schema.get("properties", {})
        pattern_props: Mapping[str, Any] = schema.get("patternProperties", {})
        additional = schema.get("additionalProperties", True)

        for key, value in data.items():
            if key in properties:
                self.check(value, properties[key], path + (key,))
                continue

            matched = False
            for pattern, pattern_schema in pattern_props.items():
                if re.fullmatch(pattern, key):
                    matched = True
                    self.check(value, pattern_schema, path + (key,))
                    break
            if matched:
                continue

            if isinstance(additional, Mapping):
                self.check(value, additional, path + (key,))
            elif additional is False:
                raise self.fail(f"Unexpected property '{key}'", path + (key,))

    def _check_array(self, data: Sequence[Any], schema: Mapping[str, Any], path: tuple[str | int, ...]) -> None:
        min_items = schema.get("minItems")
        if min_items is not None and len(data) < int(min_items):
            raise self.fail(f"Expected at least {min_items} items", path)
        max_items = schema.get("maxItems")
        if max_items is not None and len(data) > int(max_items):
            raise self.fail(f"Expected at most {max_items} items", path)

        item_schema = schema.get("items")
        if item_schema:
            for index, item in enumerate(data):
                self.check(item, item_schema, path + (index,))

    def _check_bounds(self, value: float, schema: Mapping[str, Any], path: tuple[str | int, ...]) -> None:
        if "minimum" in schema and value < schema["minimum"]:
            raise self.fail(f"Value {value} below minimum {schema['minimum']}", path)
        if "maximum" in schema and value > schema["maximum"]:
            raise self.fail(f"Value {value} above maximum {schema['maximum']}", path)
        if "exclusiveMinimum" in schema and value <= schema["exclusiveMinimum"]:
            raise self.fail(f"Value {value} must be greater than {schema['exclusiveMinimum']}", path)
        if "exclusiveMaximum" in schema and value >= schema["exclusiveMaximum"]:
            raise self.fail(f"Value {value} must be less than {schema['exclusiveMaximum']}", path)


__all__ = ["load_schema", "locate_pointer", "parse_document", "read_document", "validate_document"]
