import pytest


pytestmark = pytest.mark.run_command


def test_random_gen_eval(cli, tmp_path):
    g = tmp_path / 'g.txt'
    prog = tmp_path / 'prog.txt'
    result = tmp_path / 'w.txt'
    cli(f'mslp-builder random --d 5 --q 8 --seed 4 --out {g}')

    gen = cli(f'mslp-builder gen --in {g} --out {prog} --result {result}')
    assert 'total_length=' in gen.stdout
    assert prog.read_text().startswith('MSLP v1\n')

    stats = cli(f'mslp-builder stats --in {prog}')
    assert 'inputs=' in stats.stdout

    evaluated = cli(f'mslp-builder eval --in {prog}')
    last = evaluated.stdout.strip().split('\n\n')[-1]
    assert last.startswith('5 8')


def test_random_to_stdout_and_verify(cli, tmp_path):
    g = tmp_path / 'g.txt'
    random = cli('mslp-builder random --d 4 --q 9 --seed 1')
    g.write_text(random.stdout)
    assert random.stdout == cli('mslp-builder random --d 4 --q 9 --seed 1').stdout

    report = cli(f'mslp-builder verify --in {g}')
    assert 'PASS product' in report.stdout
    assert 'FAIL' not in report.stdout


def test_gen_from_stdin(cli):
    result = cli('mslp-builder random --d 3 --q 2 | mslp-builder gen --in - --mode step2')
    assert result.stdout.startswith('MSLP v1\n')
    assert 'length=' in result.stdout


@pytest.mark.parametrize('matrix,code', [
    ('2 5\n1 0\n0 1\n', 3),
    ('3 5\n2 0 0\n0 1 0\n0 0 1\n', 2),
    ('3 6\n1 0 0\n0 1 0\n0 0 1\n', 1),
])
def test_exit_codes(cli, tmp_path, matrix, code):
    g = tmp_path / 'g.txt'
    g.write_text(matrix)
    result = cli(f'mslp-builder gen --in {g}', allow_error=True)
    assert result.rc == code


def test_bench(cli):
    result = cli('mslp-builder bench --d 3 --q 4 --trials 2')
    lines = result.stdout.splitlines()
    assert lines[0].startswith('d\tq\tseed')
    assert lines[-1].startswith('# d=3 q=4: 2 trials')


def test_bench_definition(cli, data_dir):
    result = cli(f"mslp-builder bench -f {data_dir / 'definition_files' / 'good.yml'} --no-eval")
    assert result.stdout.count('\tok') == 13


def test_bench_bad_definition(cli, data_dir):
    result = cli(f"mslp-builder bench -f {data_dir / 'definition_files' / 'bad.yml'}", allow_error=True)
    assert result.rc == 1
    assert 'An error occurred while parsing the definition file' in result.stderr
