import math

import pytest

from invpershadow.errors import ConfigError
from invpershadow.experiment_config import ExperimentConfig, load_config, parse_config_text, parse_scalar


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.system == "cat"
    assert cfg.L == 10
    assert cfg.d_values == [1e-3, 1e-4]


def test_parse_full_file():
    cfg = parse_config_text(
        "# Jordan drift run\n"
        "lemma = 3\n"
        "theta = pi/2   # quarter turn\n"
        "chi = 2*pi\n"
        "w = 0, 1\n"
        "d_values = 1e-3, 5e-4\n"
        "\n"
        "L = 5\n"
    )
    assert cfg.lemma == 3
    assert cfg.theta == pytest.approx(math.pi / 2)
    assert cfg.chi == pytest.approx(2 * math.pi)
    assert cfg.w == [0.0, 1.0]
    assert cfg.d_values == [1e-3, 5e-4]
    assert cfg.L == 5
    assert cfg.line_of("L") == 8


@pytest.mark.parametrize("text, expected", [("pi", math.pi), ("-pi/4", -math.pi / 4), ("0.5*pi", math.pi / 2)])
def test_pi_multiples(text, expected):
    assert parse_scalar(text) == pytest.approx(expected)


def test_plain_values_are_left_for_validation():
    assert parse_scalar(" 1e-3 ") == "1e-3"


def test_unknown_field_reports_its_line():
    with pytest.raises(ConfigError, match=r"line 2: field 'lemmas'"):
        parse_config_text("system = cat\nlemmas = 2\n")


def test_bad_type_reports_its_line():
    with pytest.raises(ConfigError, match=r"line 1: field 'L'"):
        parse_config_text("L = ten\n")


def test_unknown_lemma_number():
    with pytest.raises(ConfigError, match=r"field 'lemma'.*2, 3 or 4"):
        parse_config_text("lemma = 5\n")


def test_matrix_must_be_square():
    with pytest.raises(ConfigError, match=r"line 2: field 'matrix'"):
        parse_config_text("system = toral\nmatrix = 1, 2, 3\n")
    cfg = parse_config_text("system = toral\nmatrix = 2, 1, 1, 1\n")
    assert cfg.matrix_rows() == [[2.0, 1.0], [1.0, 1.0]]


def test_missing_matrix_points_at_system_line():
    cfg = parse_config_text("system = linear\n")
    with pytest.raises(ConfigError, match="needs a matrix"):
        cfg.matrix_rows()


def test_duplicate_key():
    with pytest.raises(ConfigError, match="line 3: field 'd': already set on line 1"):
        parse_config_text("d = 1e-3\nL = 2\nd = 2e-3\n")


def test_line_without_assignment():
    with pytest.raises(ConfigError, match="line 1: expected 'key = value'"):
        parse_config_text("lemma 2\n")


def test_negative_defect_rejected():
    with pytest.raises(ConfigError, match="field 'd_values'"):
        parse_config_text("d_values = 1e-3, -1e-4\n")


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("system = perturbed-cat\nkappa = 0.1\n")
    cfg = load_config(path)
    assert cfg.system == "perturbed-cat"
    assert cfg.kappa == 0.1
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")
