import logging
import textwrap

from dataclasses import dataclass
from typing import Iterator

import yaml

from . import constants
from .exceptions import DefinitionError
from .bench_schema import validate_schema

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchCase:
    d: int
    q: int
    trials: int


class BenchDefinition:
    """
    Class representing a benchmark sweep file.
    """

    def __init__(self, filename):
        """
        Initialize the BenchDefinition object.

        :param str filename: Path to the sweep file.
        """
        self.filename = filename

        # A dict that is the raw representation of the sweep file.
        self.raw = {}

        try:
            with open(filename, 'r') as bench_file:
                data = yaml.safe_load(bench_file)
                self.raw = data if data else {}
        except FileNotFoundError as exc:
            raise DefinitionError(textwrap.dedent(
                f"""
                Could not detect '{filename}' file in this directory.
                Use -f to specify a different location.
                """)) from exc
        except (yaml.parser.ParserError, yaml.scanner.ScannerError) as exc:
            raise DefinitionError(f"An error occurred while parsing the definition file:\n{str(exc)}") from exc

        if not isinstance(self.raw, dict):
            raise DefinitionError(f"Definition must be a dictionary, not {type(self.raw).__name__}")

    @classmethod
    def from_args(cls, d: int, q: int, trials: int, seed: int) -> 'BenchDefinition':
        """A single-case definition built from command line flags."""
        definition = cls.__new__(cls)
        definition.filename = None
        definition.raw = {'version': 1, 'seed': seed, 'cases': [{'d': d, 'q': q, 'trials': trials}]}
        return definition

    @property
    def version(self):
        return self.raw.get('version', 1)

    @property
    def seed(self) -> int:
        return self.raw.get('seed', constants.default_seed)

    @property
    def options(self):
        return self.raw.get('options', {})

    @property
    def evaluate_programs(self):
        return self.options.get('evaluate_programs')

    @property
    def check_invariants(self) -> bool:
        return self.options.get('check_invariants', False)

    @property
    def assert_bounds(self) -> bool:
        return self.options.get('assert_bounds', True)

    def cases(self) -> Iterator[BenchCase]:
        for case in self.raw.get('cases', []):
            for d in case['d']:
                for q in case['q']:
                    yield BenchCase(d=d, q=q, trials=case['trials'])

    def validate(self):
        """
        Check that all specified keys in the definition file are valid.

        :raises: DefinitionError exception if any errors are found.
        """
        validate_schema(self.raw)

        for case in self.cases():
            if case.d < constants.min_dimension:
                raise DefinitionError(f"Dimension {case.d} is below the minimum of {constants.min_dimension}")
            if case.q > constants.max_field_order:
                raise DefinitionError(f"Field order {case.q} exceeds the maximum of {constants.max_field_order}")
            if case.d > constants.eval_dim_limit and self.evaluate_programs:
                logger.warning(
                    "Re-evaluating programs for d=%d is slow; set 'evaluate_programs' to null to skip it.", case.d)
