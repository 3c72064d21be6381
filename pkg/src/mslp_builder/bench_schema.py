from jsonschema import validate, SchemaError, ValidationError

from mslp_builder import constants
from mslp_builder.exceptions import DefinitionError


TYPE_IntOrListOfInts = {
    "anyOf": [
        {"type": "integer", "minimum": 2},
        {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "integer",
                "minimum": 2,
            }
        }
    ]
}


############
# Version 1
############

schema_v1 = {
    "type": "object",
    "additionalProperties": False,
    "required": ["cases"],
    "properties": {
        "version": {
            "description": "The bench definition schema version number",
            "type": "number",
        },

        "seed": {
            "description": "Seed of the first trial; later trials count up from it",
            "type": "integer",
        },

        "cases": {
            "description": "Every (d, q) pair of a case runs 'trials' random matrices",
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["d", "q"],
                "properties": {
                    "d": TYPE_IntOrListOfInts,
                    "q": TYPE_IntOrListOfInts,
                    "trials": {
                        "type": "integer",
                        "minimum": 1,
                    },
                },
            },
        },

        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "evaluate_programs": {
                    "description": "Re-evaluate emitted programs; null picks by dimension",
                    "type": ["boolean", "null"],
                },
                "check_invariants": {
                    "type": "boolean",
                },
                "assert_bounds": {
                    "description": "Treat a failed bound check as a failed trial",
                    "type": "boolean",
                },
            },
        },
    },
}


def validate_schema(bench_def: dict):
    schema_version = 1
    if 'version' in bench_def:
        try:
            schema_version = int(bench_def['version'])
        except (TypeError, ValueError) as e:
            raise DefinitionError(f"Schema version not an integer: {bench_def['version']}") from e

    if schema_version != 1:
        raise DefinitionError(f"Unsupported schema version: {schema_version}")

    try:
        validate(instance=bench_def, schema=schema_v1)
    except (SchemaError, ValidationError) as e:
        raise DefinitionError(msg=e.message, path=list(e.absolute_schema_path)) from e

    _handle_defaults(bench_def)


def _handle_defaults(bench_def: dict):
    """
    JSONSchema can document a "default" value, but it isn't used for validation.
    Fill in the values the bench runner expects to find.
    """
    bench_def.setdefault('seed', constants.default_seed)
    for case in bench_def['cases']:
        case.setdefault('trials', constants.default_bench_trials)
        for key in ('d', 'q'):
            if isinstance(case[key], int):
                case[key] = [case[key]]

    options = bench_def.setdefault('options', {})
    options.setdefault('evaluate_programs', None)
    options.setdefault('check_invariants', False)
    options.setdefault('assert_bounds', True)
