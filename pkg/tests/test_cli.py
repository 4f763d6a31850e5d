import io
import math
import pandas as pd
import pytest
import pinching.cli as cli

def _run(*argv: str):
    stream = io.StringIO()
    status = cli.run_cli(list(argv), stream)
    return status, stream.getvalue()

def test_se_centralized():
    status, text = _run('se', '--strategy', 'centralized', '--pt-dbm', '0')
    assert status == cli.EXIT_OK
    frame = pd.read_csv(io.StringIO(text))
    assert list(frame.columns) == ['strategy', 'pt_dbm', 'seed', 'sinr_1', 'sinr_2',
                                   'sinr_3', 'sinr_4', 'sinr_5', 'total_se']
    row = frame.iloc[0]
    assert row['strategy'] == 'centralized' and row['pt_dbm'] == 0 and row['seed'] == 0
    assert row['total_se'] > 0

@pytest.mark.parametrize('beamformer', ('mrt', 'zf'))
def test_se_distributed(beamformer: str):
    status, text = _run('se', '--beamformer', beamformer, '--n', '3', '--seed', '4',
                        '--independent-y')
    assert status == cli.EXIT_OK
    row = pd.read_csv(io.StringIO(text)).iloc[0]
    assert row['strategy'] == f'distributed-{beamformer}' and row['seed'] == 4

def test_se_general():
    status, text = _run('se', '--strategy', 'general', '--i', '1', '--q', '5')
    assert status == cli.EXIT_OK
    assert pd.read_csv(io.StringIO(text)).iloc[0]['strategy'] == 'general-I1-Q5'

@pytest.mark.parametrize('argv', (
    ('se', '--strategy', 'general', '--i', '2', '--q', '3'),
    ('se', '--strategy', 'general', '--i', '2'),
    ('se', '--n', '0'),
    ('se', '--d', '-1'),
    ('sweep', '--figure', 'spacing', '--drops', '0'),
    ('sweep', '--axis', 'pt_dbm'),
    ('sweep', '--axis', 'pt_dbm=a,b'),
    ('sweep', '--axis', 'pt_dbm=0', '--strategies', 'nope'),
    ('sweep', '--axis', 'pt_dbm=0', '--plot-script', 'plot.py'),
    ('oracle', '--max-step', '1.0'),
))
def test_precondition_exit(argv):
    status, _ = _run(*argv)
    assert status == cli.EXIT_PRECONDITION, "incorrect exit status"

@pytest.mark.parametrize('argv', (
    ('se', '--no-such-flag'),
    ('se', '--strategy', 'nope'),
    ('sweep',),
    ('sweep', '--figure', 'spacing', '--axis', 'n=1'),
    (),
))
def test_usage_exit(argv):
    status, _ = _run(*argv)
    assert status == 2, "usage errors exit with 2"

def test_config_file(tmp_path):
    path = tmp_path / 'system.cfg'
    path.write_text('n=2\npt_dbm=10\nseed=9\n')
    status, text = _run('se', '--config', str(path), '--strategy', 'centralized')
    row = pd.read_csv(io.StringIO(text)).iloc[0]
    assert status == cli.EXIT_OK and row['seed'] == 9 and row['pt_dbm'] == 10
    assert 'sinr_2' in row and 'sinr_3' not in row
    missing = tmp_path / 'missing.cfg'
    assert _run('se', '--config', str(missing))[0] == cli.EXIT_FAILURE
    path.write_text('colour=blue\n')
    assert _run('se', '--config', str(path))[0] == cli.EXIT_PRECONDITION

def test_sweep_custom_deterministic(tmp_path):
    argv = ('sweep', '--axis', 'pt_dbm=0,20', '--strategies', 'distributed-mrt,upper',
            '--drops', '3', '--seed', '2')
    a, b = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert _run(*argv, '--out', str(a))[0] == cli.EXIT_OK
    assert _run(*argv, '--out', str(b), '--threads', '3')[0] == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes(), "sweep output not reproducible"
    status, text = _run(*argv)
    assert status == cli.EXIT_OK and text.encode() == a.read_bytes()

def test_sweep_replay(tmp_path):
    out = tmp_path / 'approx.csv'
    status, _ = _run('sweep', '--figure', 'approx-vs-sim', '--drops', '3', '--step', '35',
                     '--out', str(out))
    assert status in (cli.EXIT_OK, cli.EXIT_CHECK)
    again = tmp_path / 'again.csv'
    _run('sweep', '--replay', str(out), '--out', str(again))
    assert again.read_bytes() == out.read_bytes(), "replay differs"

def test_sweep_companion_tables(tmp_path):
    out = tmp_path / 'tradeoff.csv'
    script = tmp_path / 'tradeoff.py'
    _run('sweep', '--figure', 'deployment-tradeoff', '--n', '2', '--drops', '2',
         '--step', '60', '--out', str(out), '--plot-script', str(script))
    ee = tmp_path / 'tradeoff-ee.csv'
    assert out.exists() and ee.exists(), "EE table not written next to the SE table"
    assert '# part=ee' in ee.read_text(encoding='utf-8')
    assert script.exists() and (tmp_path / 'tradeoff-ee.py').exists()
    assert 'tradeoff.csv' in script.read_text(encoding='utf-8')

def test_sweep_strict():
    # a custom sweep carries no checks
    status, _ = _run('sweep', '--axis', 'd=1,2', '--strategies', 'lower', '--drops', '2',
                     '--strict')
    assert status == cli.EXIT_OK

def test_lemma1():
    status, text = _run('lemma1', '--n', '3')
    assert status == cli.EXIT_OK
    frame = pd.read_csv(io.StringIO(text))
    assert len(frame) == 6
    assert list(frame.columns[:2]) == ['k_from', 'k_to']

def test_oracle(tmp_path):
    out = tmp_path / 'oracle.csv'
    status, _ = _run('oracle', '--out', str(out))
    assert status == cli.EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 9 * 5
    stationary = frame[frame['kind'] == 'stationary']
    assert (stationary['phase_error'] <= 0.3).all(), "stationary phase off in the audit"
    assert not math.isnan(frame['quadrature'].sum())

def test_verbose_logging(tmp_path, caplog):
    caplog.set_level('INFO')
    out = tmp_path / 'n.csv'
    status, _ = _run('sweep', '--axis', 'n=2', '--strategies', 'upper', '--drops', '1',
                     '--out', str(out), '-v')
    assert status == cli.EXIT_OK
    assert 'Wrote 1 rows of custom' in caplog.text
