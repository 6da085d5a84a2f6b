"""
JSON Schema validation for device and scenario documents.
"""

from functools import lru_cache
from typing import Any, Dict

import jsonschema

from .datasets import load_json
from .errors import SchemaError


@lru_cache(maxsize=None)
def _validator(schema_name: str) -> jsonschema.Draft7Validator:
    schema = load_json(schema_name)
    jsonschema.Draft7Validator.check_schema(schema)
    return jsonschema.Draft7Validator(schema)


def validate_document(document: Dict[str, Any], schema_name: str) -> None:
    """Raise SchemaError for the first violation, naming its field path"""
    errors = sorted(
        _validator(schema_name).iter_errors(document),
        key=lambda err: [str(p) for p in err.absolute_path],
    )
    if errors:
        first = errors[0]
        path = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise SchemaError(first.message, path=path)
