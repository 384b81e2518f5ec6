import subprocess
import sys

import pytest

from hotspot_cdma.cli import ConfigError, format_number, main, parse_budget, parse_config, Budget


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_df_builtin(capsys):
    code, out, _ = run(capsys, "df", "tu")
    assert code == 0
    assert float(out) == pytest.approx(4.0, abs=0.05)


def test_df_file(capsys, tmp_path):
    f = tmp_path / "two.txt"
    f.write_text("0 0\n100 0\n")
    code, out, _ = run(capsys, "df", str(f))
    assert code == 0 and out.strip() == "2.0000"


def test_df_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "df", str(tmp_path / "nope.txt"))
    assert code == 2 and "nope.txt" in err


def test_capacity_ceiling(capsys):
    code, out, _ = run(capsys, "capacity", "--outage", "1.0", "--budget", "5", "--F", "inf")
    assert code == 0
    header, row = out.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["N_star_sim"] == "52"
    assert fields["N_star_analytic"] == "52"


def test_estimate_v_cache_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(capsys, "estimate-v", "--seed", "3", "-o", str(a))[0] == 0
    assert run(capsys, "estimate-v", "--seed", "3", "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.txt"
    run(capsys, "estimate-v", "--seed", "4", "-o", str(c))
    assert c.read_bytes() != a.read_bytes()


def test_stats_cache_is_reused(capsys, tmp_path):
    cache = tmp_path / "s.txt"
    run(capsys, "estimate-v", "--seed", "2", "-o", str(cache))
    _, direct, _ = run(capsys, "capacity", "--seed", "2", "--budget", "40")
    _, cached, _ = run(capsys, "capacity", "--seed", "2", "--budget", "40", "--stats", str(cache))
    assert direct == cached


def test_config_error_line_number(capsys, tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[params]\nF = 1\nsigma_macro = lots\n")
    code, _, err = run(capsys, "capacity", "--config", str(cfg))
    assert code == 2
    assert "bad.ini:3" in err


def test_unknown_key_line_number(tmp_path):
    with pytest.raises(ConfigError, match=":4:"):
        parse_config("[params]\nF = 1\n[budget]\nplacments = 3\n", "x.ini")


def test_unknown_section():
    with pytest.raises(ConfigError, match=":2: unknown section"):
        parse_config("\n[plot]\nstyle = x\n", "x.ini")


def test_invalid_param_value():
    with pytest.raises(ConfigError):
        parse_config("[params]\nF = -1\n")


def test_sweep_values_must_be_positive():
    with pytest.raises(ConfigError, match="positive"):
        parse_config("[sweep]\naxis = F\nvalues = 1, 0\n")


def test_parse_config_full():
    cfg = parse_config("""
[params]
F = inf
sigma_macro = 12   # heavy shadowing
[profile]
spec = uniform:4
[sweep]
axis = L_p
values = 2, 4, inf
[budget]
placements = 50
[run]
seed = 7
""")
    assert cfg.params.sigma_macro == 12 and cfg.params.F == float("inf")
    assert cfg.values == [2, 4, float("inf")]
    assert cfg.budget.placements == 50 and cfg.seed == 7 and cfg.profile == "uniform:4"


def test_missing_profile_file(capsys, tmp_path):
    code, _, err = run(capsys, "capacity", "--profile", str(tmp_path / "gone.txt"))
    assert code == 2


def test_budget_parsing():
    b = parse_budget("100x50x8", Budget())
    assert (b.placements, b.fading_draws, b.selections) == (100, 50, 8)
    assert parse_budget("30", Budget()).fading_draws == Budget().fading_draws
    with pytest.raises(ConfigError):
        parse_budget("ax2", Budget())


def test_infinity_token():
    assert format_number(float("inf")) == "inf"
    assert format_number(3.0) == "3"
    assert format_number(0.25) == "0.25"


def test_unknown_subcommand():
    proc = subprocess.run([sys.executable, "-m", "hotspot_cdma", "plot"], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage" in proc.stderr


def test_unknown_flag():
    proc = subprocess.run([sys.executable, "-m", "hotspot_cdma", "capacity", "--colour"],
                          capture_output=True, text=True)
    assert proc.returncode != 0 and "usage" in proc.stderr


def test_sweep_axis_l_rejected_for_two_cell(capsys):
    code, _, err = run(capsys, "sweep", "--axis", "F")
    assert code == 2


def test_multicell_sweep(capsys):
    code, out, _ = run(capsys, "multicell-sweep", "-m", "1", "-n", "3", "--values", "0,1",
                       "--budget", "20x1x2", "--seed", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[:2] == ["L", "N_star_sim"]
    assert len(lines) == 3
