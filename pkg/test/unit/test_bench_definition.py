import os

import pytest

from mslp_builder import constants
from mslp_builder.bench_definition import BenchCase, BenchDefinition
from mslp_builder.exceptions import DefinitionError


@pytest.fixture
def definition_file(tmp_path):

    def _write(text):
        path = tmp_path / 'sweep.yml'
        path.write_text(text)
        return str(path)

    return _write


class TestBenchDefinition:

    def test_definition_syntax_error(self, data_dir):
        path = os.path.join(data_dir, 'definition_files/bad.yml')

        with pytest.raises(DefinitionError) as error:
            BenchDefinition(path)

        assert 'An error occurred while parsing the definition file:' in str(error.value.args[0])

    def test_missing_file(self, tmp_path):
        with pytest.raises(DefinitionError, match='Could not detect'):
            BenchDefinition(str(tmp_path / 'nope.yml'))

    @pytest.mark.parametrize('yaml_text,expect', [
        ('1', 'Definition must be a dictionary, not int'),
        ("['a', 'b']", 'Definition must be a dictionary, not list'),
    ])
    def test_not_a_dictionary(self, definition_file, yaml_text, expect):
        with pytest.raises(DefinitionError) as error:
            BenchDefinition(definition_file(yaml_text))
        assert expect in str(error.value.args[0])

    @pytest.mark.parametrize('yaml_text,expect', [
        ("{'version': 1}", "'cases' is a required property"),
        ("{'cases': 'all'}", "'all' is not of type 'array'"),
        ("{'cases': [{'d': 3}]}", "'q' is a required property"),
        ("{'cases': [{'d': 'three', 'q': 5}]}", "'three' is not valid"),
        ("{'cases': [{'d': 3, 'q': 5, 'trials': 0}]}", "0 is less than the minimum of 1"),
        ("{'cases': [{'d': 3, 'q': 5, 'size': 2}]}", "Additional properties are not allowed ('size' was unexpected)"),
        ("{'cases': [{'d': 3, 'q': 5}], 'options': {'fast': true}}",
         "Additional properties are not allowed ('fast' was unexpected)"),
        ("{'cases': [{'d': 3, 'q': 5}], 'options': {'check_invariants': 'yes'}}", "'yes' is not of type 'boolean'"),
        ("{'version': 2, 'cases': [{'d': 3, 'q': 5}]}", 'Unsupported schema version: 2'),
        ("{'version': 'one', 'cases': [{'d': 3, 'q': 5}]}", 'Schema version not an integer: one'),
    ])
    def test_yaml_error(self, definition_file, yaml_text, expect):
        definition = BenchDefinition(definition_file(yaml_text))
        with pytest.raises(DefinitionError) as error:
            definition.validate()
        assert expect in str(error.value.args[0])

    def test_schema_error_keeps_the_path(self, definition_file):
        definition = BenchDefinition(definition_file("{'cases': [{'d': 3, 'q': 5, 'trials': 0}]}"))
        with pytest.raises(DefinitionError) as error:
            definition.validate()
        assert 'trials' in error.value.path

    @pytest.mark.parametrize('yaml_text,expect', [
        ("{'cases': [{'d': [2, 3], 'q': 5}]}", 'Dimension 2 is below the minimum of 3'),
        ("{'cases': [{'d': 3, 'q': 2097152}]}", 'Field order 2097152 exceeds the maximum'),
    ])
    def test_case_limits(self, definition_file, yaml_text, expect):
        with pytest.raises(DefinitionError, match=expect):
            BenchDefinition(definition_file(yaml_text)).validate()

    def test_defaults(self, definition_file):
        definition = BenchDefinition(definition_file("{'cases': [{'d': 3, 'q': 5}]}"))
        definition.validate()
        assert definition.version == 1
        assert definition.seed == constants.default_seed
        assert definition.evaluate_programs is None
        assert definition.check_invariants is False
        assert definition.assert_bounds is True
        assert list(definition.cases()) == [BenchCase(3, 5, constants.default_bench_trials)]

    def test_cases_expand_lists(self, data_dir):
        definition = BenchDefinition(os.path.join(data_dir, 'definition_files/good.yml'))
        definition.validate()
        assert definition.seed == 7
        assert definition.evaluate_programs is True
        assert [(case.d, case.q, case.trials) for case in definition.cases()] == [
            (3, 5, 2), (3, 8, 2), (4, 5, 2), (4, 8, 2), (5, 9, constants.default_bench_trials),
        ]

    def test_from_args(self):
        definition = BenchDefinition.from_args(4, 9, 3, 11)
        definition.validate()
        assert definition.filename is None
        assert definition.seed == 11
        assert list(definition.cases()) == [BenchCase(4, 9, 3)]

    def test_warns_about_slow_evaluation(self, definition_file, caplog):
        text = "{'cases': [{'d': 80, 'q': 2}], 'options': {'evaluate_programs': true}}"
        BenchDefinition(definition_file(text)).validate()
        assert 'Re-evaluating programs for d=80 is slow' in caplog.text
