import pytest

from sublinfrechet.config import DEFAULT_SEED, DEFAULT_TRIALS, load_settings, resolve_seed
from sublinfrechet.errors import BadParam
from sublinfrechet.utils import curves_dir, debug, log
from sublinfrechet.utils.stats import percentile, quartiles, wilson_interval, wilson_lower


def test_default_settings():
    s = load_settings()
    assert s.seed is None
    assert s.trials == DEFAULT_TRIALS
    assert s.data_dir is None
    assert not s.debug


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("SUBLINFRECHET_TRIALS", "12")
    monkeypatch.setenv("SUBLINFRECHET_DATA_DIR", str(tmp_path))
    monkeypatch.setenv("SUBLINFRECHET_DEBUG", "1")
    s = load_settings()
    assert s.trials == 12
    assert s.data_dir == tmp_path
    assert s.debug


def test_malformed_integer_setting(monkeypatch):
    monkeypatch.setenv("SEED", "twelve")
    with pytest.raises(BadParam):
        load_settings()


def test_seed_resolution(monkeypatch):
    assert resolve_seed(None) == DEFAULT_SEED
    assert resolve_seed(5) == 5
    monkeypatch.setenv("SEED", "7")
    assert resolve_seed(5) == 7


def test_curves_dir_lives_under_the_data_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("SUBLINFRECHET_DATA_DIR", str(tmp_path))
    target = curves_dir()
    assert target == tmp_path / "curves"
    assert target.is_dir()


def test_logging_goes_to_stderr(monkeypatch, capsys):
    log("hello")
    debug("hidden")
    monkeypatch.setenv("SUBLINFRECHET_DEBUG", "1")
    debug("shown")
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err == "[sublinfrechet] hello\n[sublinfrechet] shown\n"


def test_wilson_interval():
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(320, 400)
    assert 0.75 < lo < 0.77
    assert 0.83 < hi < 0.85
    assert wilson_lower(400, 400) > 0.99
    assert wilson_lower(0, 400) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


def test_percentiles():
    assert quartiles([]) == (0.0, 0.0, 0.0)
    assert quartiles([1, 2, 3, 4, 5]) == (2.0, 3.0, 4.0)
    assert percentile([10, 20], 50) == 15.0
    assert percentile([], 90) == 0.0
