import json

import pytest
from click.testing import CliRunner

from conftest import spec_path


def lines(result):
    assert result.exit_code == 0, result.output
    return result.output.splitlines()


@pytest.mark.parametrize('args, expected', [
    (('normalize', 'c a b'), ['b c a']),
    (('normalize', 'b a'), ['a b']),
    (('normalize', 'a a'), ['e']),
    (('normalize', '--check', 'c b a b'), ['c a']),
    (('mul', 'a b', 'b c'), ['a c']),
    (('inv', 'a b c'), ['b c a']),
    (('len', 'c a b'), ['3']),
    (('dist', 'a', 'c'), ['2']),
    (('descents', 'b c a'), ['{b,c}']),
    (('descents', '--right', 'b c a'), ['{a,b}']),
    (('project', '--types', '{a,b}', 'c a'), ['e']),
    (('project', '--types', '{a,b}', 'b c a'), ['b']),
    (('project', '--base', 'c', '--types', '{a}', 'c b'), ['c']),
    (('walls', 'e', 'a b'), ['a,e', 'b,e']),
    (('dial', '--wall', 'a,e', 'a'), ['1']),
    (('dial', '--wall', 'a,e', 'b'), ['0']),
    (('intersect', '--p1', 'e,{a,b}', '--p2', 'c,{a,b}'), ['conjugator=e types={b}']),
    (('intersect', '--p1', 'e,{a}', '--p2', 'e,{c}'), ['conjugator=e types={}']),
    (('cplus', '--types-i', '{a,b}', '--gamma', 'c', '--types-j', '{a,b}'), ['base=e types={b}']),
])
def test_path_queries(run_cli, args, expected):
    assert lines(run_cli(*args)) == expected


def test_dial_in_higher_order_vertex_group(run_cli):
    assert lines(run_cli('dial', '--wall', 'b,e', 'b^2 a', spec='z2_z3')) == ['2']


def test_recognize(run_cli, tmp_path):
    ball = tmp_path / 'ball.txt'
    ball.write_text('# radius one\ne\na\nb\n')
    assert lines(run_cli('recognize', '--chambers', str(ball))) == ['base=e types={a,b} radius=1']
    scattered = tmp_path / 'scattered.txt'
    scattered.write_text('e\na c\n')
    assert lines(run_cli('recognize', '--chambers', str(scattered))) == ['none']


def test_verify_instances(run_cli, tmp_path):
    instances = tmp_path / 'instances.txt'
    instances.write_text('e,{a,b} c,{a,b}\n')
    assert lines(run_cli('verify', '--radius', '2', '--instances', str(instances))) == [
        'INSTANCE path_abc {a,b} c {a,b} 2 OK']


def test_verify_campaign(run_cli):
    output = lines(run_cli('verify', '--radius', '2', '--trials', '5', '--seed', '3', spec='k3'))
    assert len(output) == 5
    assert all(line.startswith('INSTANCE k3 ') and line.endswith(' OK') for line in output)


def test_verify_rejects_malformed_instance(run_cli, tmp_path):
    instances = tmp_path / 'instances.txt'
    instances.write_text('e,{a,b}\n')
    result = run_cli('verify', '--instances', str(instances))
    assert result.exit_code == 2


def test_export_ball_dot(run_cli):
    assert lines(run_cli('export-ball', '--radius', '1')) == [
        'graph chambers {',
        '  v0 [label="e"];',
        '  v1 [label="a"];',
        '  v2 [label="b"];',
        '  v3 [label="c"];',
        '  v0 -- v1 [label="a^1"];',
        '  v0 -- v2 [label="b^1"];',
        '  v0 -- v3 [label="c^1"];',
        '}',
    ]


def test_export_ball_json(run_cli):
    result = run_cli('export-ball', '--radius', '1', '--format', 'json', '--wall', 'a,e')
    payload = json.loads(result.output)
    assert [v['id'] for v in payload['vertices']] == [0, 1, 2, 3]
    assert [e['dst'] for e in payload['edges']] == [1, 2, 3]
    assert payload['vertices'][1]['dial'] == 1


@pytest.mark.parametrize('args, expected', [
    (('cox', 'normalize', 't s t'), ['s t s']),
    (('cox', 'len', 's t s t'), ['2']),
    (('cox', 'inv', 's t'), ['t s']),
    (('cox', 'mul', 's t', 't'), ['s']),
    (('cox', 'dist', 's', 't'), ['2']),
    (('cox', 'descents', 's t'), ['{s}']),
    (('cox', 'descents', '--right', 's t'), ['{t}']),
    (('cox', 'walls', 'e', 's t'), ['s', 's t s']),
    (('cox', 'intersect', '--p1', 'e,{s}', '--p2', 's t,{t}'), ['conjugator=s types={}']),
])
def test_coxeter_queries(run_cli, args, expected):
    assert lines(run_cli(*args, spec='s3')) == expected


def test_coxeter_verify(run_cli, tmp_path):
    instances = tmp_path / 'instances.txt'
    instances.write_text('{s1} s2.s1.s3.s2 {s3}\n{s1,s2} e {s2,s3}\n')
    output = lines(run_cli('cox', 'verify', '--radius', '6', '--instances', str(instances), spec='s4'))
    assert output == sorted(output)
    assert 'INSTANCE s4 {s1} s2.s1.s3.s2 {s3} 6 OK' in output
    assert len(lines(run_cli('cox', 'verify', '--radius', '4', '--trials', '3', spec='b3'))) == 3


def test_coxeter_commands_accept_order_two_graph_products(run_cli):
    assert lines(run_cli('cox', 'normalize', 'c a b')) == ['b c a']
    result = run_cli('cox', 'export-ball', '--radius', '1', '--format', 'json')
    assert len(json.loads(result.output)['vertices']) == 4


def test_domain_errors_exit_with_code(run_cli):
    result = run_cli('normalize', 'a x')
    assert result.exit_code == 1
    assert 'error: E_WORD_SYNTAX' in result.output

    result = run_cli('walls', 'e', 'a', spec='s3')
    assert result.exit_code == 1
    assert 'error: E_SPEC_MISMATCH' in result.output

    result = run_cli('cox', 'normalize', 'b', spec='mixed_abc')
    assert result.exit_code == 1
    assert 'error: E_SPEC_MISMATCH' in result.output


def test_ball_cap_from_environment(cli_module, monkeypatch):
    monkeypatch.setenv('PARABOLICS_BALL_CAP', '10')
    result = CliRunner().invoke(cli_module.create_cli(),
                                ['--spec', str(spec_path('path_abc')), 'export-ball', '--radius', '3'])
    assert result.exit_code == 1
    assert 'error: E_BALL_CAP' in result.output


def test_spec_from_environment(cli_module):
    result = CliRunner().invoke(cli_module.create_cli(), ['normalize', 'c a b'],
                                env={'PARABOLICS_SPEC': str(spec_path('path_abc'))})
    assert result.output.splitlines() == ['b c a']


def test_missing_spec_is_a_usage_error(run_cli):
    result = run_cli('normalize', 'a', spec=None)
    assert result.exit_code == 2


def test_version(run_cli):
    result = run_cli('--version', spec=None)
    assert result.output.strip() == 'parabolics, version 1.0.0'


def test_transcripts_are_byte_identical_across_runs(run_cli):
    commands = [
        ('normalize', 'c a b'),
        ('walls', 'e', 'b c a'),
        ('export-ball', '--radius', '2', '--format', 'json'),
        ('verify', '--radius', '2', '--trials', '4', '--seed', '9'),
    ]
    for args in commands:
        first, second = run_cli(*args), run_cli(*args)
        assert first.exit_code == second.exit_code == 0
        assert first.stdout_bytes == second.stdout_bytes


def test_undecodable_spec_file_is_a_domain_error(cli_module, tmp_path):
    path = tmp_path / 'broken.grp'
    path.write_bytes(b"generator \xff 2\n")
    result = CliRunner().invoke(cli_module.create_cli(), ['--spec', str(path), 'len', 'a'])
    assert result.exit_code == 1
    assert 'error: E_SPEC_SYNTAX: line 1, column 11' in result.output
