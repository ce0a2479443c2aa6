import json

import pytest

from controllers.command_controller import EXIT_DOMAIN, EXIT_OK, EXIT_STORAGE, CommandController
from main import build_parser, config_from_args, main
from models.enums import Command
from models.run_config import RunConfig


def _write(path, data):
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])['error']


@pytest.fixture
def files(tmp_path):
    return {
        'space': _write(tmp_path / 'space.json', {'points': ['a', 'b'], 'dist': [[0, 1], [1, 0]]}),
        'dipole': _write(tmp_path / 'dipole.json', {'space': 'space.json', 'mass': {'a': 1, 'b': -1}}),
        'step': _write(tmp_path / 'step.json', {'space': 'space.json', 'value': {'a': 0, 'b': 1}}),
        'grid': _write(tmp_path / 'grid.json', {'coords': [[k / 8] for k in range(9)]}),
        'ramp': _write(tmp_path / 'ramp.json',
                       {'space': 'grid.json', 'value': {str(k): k / 8 for k in range(9)}}),
    }


def test_kr_norm_of_dirac_difference(files, tmp_path):
    out = str(tmp_path / 'kr.json')
    assert main(['kr', '--space', files['space'], '--measure', files['dipole'], '--out', out]) == EXIT_OK
    report = json.loads(open(out, encoding='utf-8').read())
    results = report['results']
    assert results['primal'] == pytest.approx(1.0, abs=1e-12)
    assert results['dual'] == pytest.approx(1.0, abs=1e-12)
    assert results['gap'] <= 1e-8
    assert results['certificate']['feasible']
    assert report['config']['command'] == 'kr'
    assert report['version']


def test_kr_balanced_and_snowflaked(files, capsys):
    assert main(['kr', '--space', files['space'], '--measure', files['dipole'],
                 '--balanced-only', '--alpha', '0.5']) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results['primal'] == pytest.approx(1.0)
    assert results['restricted_plan'] == pytest.approx(1.0)


def test_validate_rejects_asymmetric_matrix(tmp_path, capsys):
    path = _write(tmp_path / 'asym.json', {'dist': [[0, 1], [2, 0]]})
    assert main(['validate', '--space', path]) == EXIT_DOMAIN
    assert _error(capsys)['code'] == 'AsymmetricMatrix'


def test_missing_file_is_a_storage_error(tmp_path, capsys):
    assert main(['validate', '--space', str(tmp_path / 'absent.json')]) == EXIT_STORAGE
    assert _error(capsys)['code'] == 'StorageError'


def test_missing_parameter(files, capsys):
    assert main(['decompose', '--space', files['space'], '--measure', files['dipole']]) == EXIT_DOMAIN
    error = _error(capsys)
    assert error['code'] == 'ParameterOutOfRange'
    assert error['detail']['missing'] == 'alpha'


def test_decompose_then_verify(files, tmp_path, capsys):
    dec = str(tmp_path / 'dec.json')
    assert main(['decompose', '--space', files['space'], '--measure', files['dipole'],
                 '--alpha', '0.5', '--out', dec]) == EXIT_OK
    assert main(['decompose', 'verify', '--space', files['space'], '--measure', files['dipole'],
                 '--decomposition', dec]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results['upper_bound_holds'] and results['lower_bound_holds']
    assert results['realized_C'] == pytest.approx(1.0)


def test_lip_modulus_as_csv(files, capsys):
    assert main(['lip', 'modulus', '--space', files['grid'], '--field', files['ramp'],
                 '--format', 'csv']) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'delta,omega'
    assert len(lines) == 12
    assert all(float(line.split(',')[1]) == pytest.approx(1.0) for line in lines[1:4])


def test_csv_needs_a_table(files, capsys):
    assert main(['lip', 'seminorm', '--space', files['grid'], '--field', files['ramp'],
                 '--format', 'csv']) == EXIT_DOMAIN
    assert _error(capsys)['code'] == 'BadKind'


def test_lip_extend_on_net(files, capsys):
    assert main(['lip', 'extend', '--space', files['grid'], '--field', files['ramp'],
                 '--depth', '2']) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results['holds']
    assert results['net_radius'] is not None


def test_hajlasz_and_besov(files, capsys):
    assert main(['hajlasz', '--space', files['space'], '--field', files['step'], '--s', '0.5']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['results']['seminorm'] == pytest.approx(0.5)
    assert main(['besov', 'seminorm', '--space', files['space'], '--field', files['step'],
                 '--s', '0.5', '--p', '2']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['results']['seminorm'] == pytest.approx(0.5 ** 0.5)


def test_doubling_with_nets(files, capsys):
    assert main(['doubling', '--space', files['grid'], '--depth', '2']) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results['doubling_constant'] >= 1
    assert set(results['lower_mass_bound']) == {'C', 'Q'}
    assert len(results['nets']['covering_radii']) == 3


def test_gen_and_schema(capsys):
    assert main(['gen', '--kind', 'cantor', '--n', '2']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['results']['n'] == 4
    assert main(['--schema']) == EXIT_OK
    assert 'decomposition' in json.loads(capsys.readouterr().out)


def test_embed_trials_are_seeded(files, capsys):
    args = ['embed', '--kind', 'lip-besov', '--space', files['grid'], '--s', '0.4',
            '--p', '2', '--alpha', '0.8', '--trials', '5', '--seed', '3']
    assert main(args) == EXIT_OK
    first = json.loads(capsys.readouterr().out)['results']
    assert main(args) == EXIT_OK
    second = json.loads(capsys.readouterr().out)['results']
    assert first == second
    assert len(first['ratios']) == 5 and first['holds']


def test_embed_morrey(files, capsys):
    assert main(['embed', '--kind', 'morrey', '--space', files['grid'], '--s', '0.5',
                 '--p', '8', '--trials', '2']) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert len(results['reports']) == 2
    assert all(r['C_star'] >= 0 for r in results['reports'])


def test_config_from_args_echoes_options():
    args = build_parser().parse_args(['lip', 'dist', '--space', 's.json', '--field', 'f.json',
                                      '--delta-schedule', '0.5,0.25'])
    config = config_from_args(args)
    assert config.command is Command.LIP
    assert config.delta_schedule == (0.5, 0.25)
    assert config.to_dict()['delta_schedule'] == [0.5, 0.25]
    assert 'measure' not in config.to_dict()


def test_controller_run_without_cli(files):
    config = RunConfig(command=Command.BESOV, action='norm', space=files['space'],
                       field=files['step'], s=0.5, p=2.0)
    code, payload = CommandController().run(config)
    assert code == EXIT_OK
    assert payload['results']['norm'] == pytest.approx(2 * 0.5 ** 0.5)


def test_malformed_weight_is_a_storage_error(tmp_path, capsys):
    path = _write(tmp_path / 'w.json', {'dist': [[0, 1], [1, 0]], 'weight': ['x', 1]})
    assert main(['validate', '--space', path]) == EXIT_STORAGE
    assert _error(capsys)['code'] == 'StorageError'


@pytest.mark.parametrize('args', [
    ['besov', 'seminorm', '--field', 'zero.json', '--s', '0.5', '--p', '2'],
    ['doubling'],
])
def test_zero_weight_is_rejected(tmp_path, capsys, args):
    space = _write(tmp_path / 'space.json', {'points': ['a', 'b', 'c'], 'weight': [0.0, 0.5, 0.5],
                                             'dist': [[0, 1, 2], [1, 0, 1], [2, 1, 0]]})
    _write(tmp_path / 'zero.json', {'space': 'space.json', 'value': {'a': 0, 'b': 1, 'c': 0}})
    args = [str(tmp_path / a) if a.endswith('.json') else a for a in args]
    assert main(args + ['--space', space]) == EXIT_DOMAIN
    error = _error(capsys)
    assert error['code'] == 'NonpositiveWeight'
    assert error['detail']['point'] == 'a'


def test_unexpected_failure_becomes_an_error_object(files, monkeypatch):
    controller = CommandController()

    def broken(space, mu):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setattr(controller.transport_manager, 'kr_norm', broken)
    config = RunConfig(command=Command.KR, space=files['space'], measure=files['dipole'])
    code, payload = controller.run(config)
    assert code == EXIT_DOMAIN
    assert payload['error']['code'] == 'Unexpected'
    assert 'ZeroDivisionError' in payload['error']['detail']['message']
    assert payload['error']['detail']['type'] == 'ZeroDivisionError'


def test_kr_report_lists_capped_pairs(tmp_path, capsys):
    space = _write(tmp_path / 'far.json', {'points': ['a', 'b'], 'dist': [[0, 3], [3, 0]]})
    measure = _write(tmp_path / 'dipole.json', {'space': 'far.json', 'mass': {'a': 1, 'b': -1}})
    assert main(['kr', '--space', space, '--measure', measure]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)['results']
    assert results['primal'] == pytest.approx(2.0)
    assert results['capped_pairs'] == [['a', 'b']]
