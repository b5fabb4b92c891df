import math

import pytest

from ltmor.config import ConfigError, load_config, parse_int_list, parse_number, profile_text

MINIMAL = """
[mesh]
n = 8
[source]
x0 = 0.25, -0.15
zeta = 0.05
[wavelet]
alpha = 2*pi
t0 = 2.5
[sampling]
M = 10
[rom]
R = 2, 4
[time]
T = 1
N_t = 100
"""


def test_parse_number():
    assert parse_number("5*pi/2") == pytest.approx(2.5 * math.pi)
    assert parse_number("-1e-3") == -1e-3
    for bad in ("__import__('os')", "pi pi", "1/0", "x"):
        with pytest.raises(ConfigError):
            parse_number(bad)


def test_parse_int_list():
    assert parse_int_list("2:10:4") == [2, 6, 10]
    assert parse_int_list("3, 5,8") == [3, 5, 8]


def test_minimal_defaults():
    cfg = load_config(text=MINIMAL, environ={})
    assert cfg.n == 8 and cfg.alpha == pytest.approx(2 * math.pi)
    assert cfg.R_values == (2, 4) and cfg.mu is None and cfg.beta == 0.25
    assert cfg.dt == pytest.approx(0.01)


def drop_key(text, section, name):
    out, current = [], None
    for line in text.splitlines():
        if line.startswith("["):
            current = line.strip("[]")
        elif current == section and line.split("=")[0].strip() == name:
            continue
        out.append(line)
    return "\n".join(out)


@pytest.mark.parametrize("key", ["mesh.n", "source.x0", "wavelet.t0", "sampling.M", "time.N_t"])
def test_missing_key_is_named(key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(text=drop_key(MINIMAL, *key.split(".")), environ={})


@pytest.mark.parametrize("patch, msg", [("R = 2, 40", "exceeds"), ("R = 0", "positive"),
                                        ("gram = l2", "gram")])
def test_validation(patch, msg):
    text = MINIMAL.replace("R = 2, 4", patch if patch.startswith("R") else "R = 2\n" + patch)
    with pytest.raises(ConfigError, match=msg):
        load_config(text=text, environ={})


def test_env_override():
    cfg = load_config(text=MINIMAL, environ={"LTMOR_MESH_N": "12", "LTMOR_TIME_N_T": "50",
                                             "LTMOR_SAMPLING_MU": "1.5", "OTHER_MESH_N": "3"})
    assert cfg.n == 12 and cfg.N_t == 50 and cfg.mu == 1.5


def test_bad_env_value():
    with pytest.raises(ConfigError, match="mesh.n"):
        load_config(text=MINIMAL, environ={"LTMOR_MESH_N": "abc"})


def test_profiles_load():
    desk = load_config(text=profile_text("desk"), environ={})
    assert (desk.n, desk.M, desk.N_t, desk.T) == (32, 40, 2000, 10.0)
    assert desk.R_values == tuple(range(2, 25, 2))
    full = load_config(text=profile_text("full"), environ={})
    assert (full.n, full.M, full.N_t) == (86, 100, 20000)
    with pytest.raises(ConfigError):
        profile_text("nope")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.cfg", environ={})


def test_piecewise_blocks():
    text = MINIMAL + "[coefficient]\nkind = piecewise\nblocks = -0.5, 0, -0.5, 0.5, 4; 0, 0.5, 0, 0.5, 2\n"
    cfg = load_config(text=text, environ={})
    assert cfg.coefficient_blocks == ((-0.5, 0.0, -0.5, 0.5, 4.0), (0.0, 0.5, 0.0, 0.5, 2.0))
