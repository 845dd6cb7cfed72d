import json
import math
from pathlib import Path

import numpy as np
import pytest

from cpforge import cli

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

CONFIGS = sorted(cli.SHIPPED_CONFIGS.glob("*.toml"))

SMALL = """
[units]
frequency = 1.0e15

[materials.wall]
electric = [[0.75, 1.03, 0.001]]
magnetic = [[2.0, 1.0, 0.001]]

[atoms.probe]
omega10 = 1.0
beta = 1.0e-7

[stacks.hs]
kind = "half-space"
material = "wall"

[scenarios.scan]
kind = "potential"
atom = "probe"
stack = "hs"
z = [0.1, 0.3, 1.0]
"""


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list(tmp_path, capsys):
    assert run(["list", write(tmp_path, SMALL)], capsys)[:2] == (0, "scan\n")
    assert cli.list_scenarios(write(tmp_path, "", "empty.toml")) == []
    code, _, err = run(["list", write(tmp_path, "[scenarios\nx = 1", "bad.toml")], capsys)
    assert code == 2 and "malformed" in err


def test_run_csv_and_json(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    code, out, _ = run(["run", cfg, "scan"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "z [(c/w10)],U[hs] [(hbar w10 beta)],F[hs] [(hbar w10 beta) (c/w10)^-1]"
    assert len(lines) == 4
    code, out, _ = run(["run", cfg, "scan", "--format", "json", "--normalize", "si"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["metadata"]["normalization"] == "si"
    assert doc["flags"] == [] and len(doc["rows"]) == 3
    assert doc["columns"][1] == "U[hs] [J]"
    assert math.isclose(doc["rows"][0][0], 0.1 * 299792458 / 1e15)


def test_output_is_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["run", cfg, "scan", "--out", str(a)]) == 0
    assert cli.main(["run", cfg, "scan", "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "patch,needle",
    [
        (("z = [0.1, 0.3, 1.0]", "z = []"), "scenarios.scan.z: grid must be non-empty"),
        (("z = [0.1, 0.3, 1.0]", "z = { start = 0.1, stop = 1.0, num = 0 }"), "scenarios.scan.z.num"),
        (("z = [0.1, 0.3, 1.0]", "z = [0.3, 0.1]"), "strictly increasing"),
        (('kind = "potential"', 'kind = "sideways"'), "scenarios.scan.kind: unknown kind"),
        (('kind = "half-space"', 'kind = "sphere"'), "stacks.hs.kind: unknown stack kind"),
        (('stack = "hs"', 'stack = "nope"'), "scenarios.scan.stacks[0]: unknown stack"),
        (('material = "wall"', 'material = "glass"'), "stacks.hs.material: unknown material"),
        (("beta = 1.0e-7", ""), "atoms.probe"),
        (("omega10 = 1.0", "omega10 = -1.0"), "atoms.probe"),
    ],
)
def test_config_errors_exit_2_with_key_paths(tmp_path, capsys, patch, needle):
    cfg = write(tmp_path, SMALL.replace(*patch))
    code, out, err = run(["run", cfg, "scan"], capsys)
    assert code == 2 and out == ""
    assert needle in err


def test_unknown_scenario_and_missing_file(tmp_path, capsys):
    code, _, err = run(["run", write(tmp_path, SMALL), "other"], capsys)
    assert code == 2 and "scenarios.other: no such scenario" in err
    code, _, err = run(["run", str(tmp_path / "missing.toml"), "scan"], capsys)
    assert code == 2 and "file not found" in err


def test_bad_flags_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert run(["run", cfg, "scan", "--rel-tol", "2"], capsys)[0] == 2
    assert run(["run", cfg, "scan", "--threads", "0"], capsys)[0] == 2


def test_flagged_results_exit_3_unless_allowed(tmp_path, capsys):
    text = '[scenarios.b]\nkind = "border"\neps = [1.0, 10.0]\nmu_max = 2.0\n'
    cfg = write(tmp_path, text)
    code, out, err = run(["run", cfg, "b"], capsys)
    assert code == 3 and "flagged" in err and out.count("\n") == 3
    assert run(["run", cfg, "b", "--allow-flags"], capsys)[0] == 0


def test_wall_scan_has_one_potential_column_per_material(capsys):
    sc = tomllib.loads((cli.SHIPPED_CONFIGS / "fig2.toml").read_text())["scenarios"]["wall-scan"]
    assert sc["stacks"] == ["hs20", "hs25", "hs30", "hs35"]
    cfg = cli.load_config(cli.SHIPPED_CONFIGS / "fig2.toml")
    sc = dict(cfg.scenarios["wall-scan"], z=[0.1, 0.4])
    cfg.scenarios["wall-scan"] = sc
    table, atom = cli.run_scenario(cfg, "wall-scan")
    names = [col.name for col in table.columns]
    assert [n for n in names if n.startswith("U[")] == ["U[hs20]", "U[hs25]", "U[hs30]", "U[hs35]"]


def test_border_with_eps_max(capsys):
    code, out, _ = run(["run", "border.toml", "border", "--eps-max", "50"], capsys)
    assert code == 0
    rows = np.array([[float(v) for v in line.split(",")] for line in out.splitlines()[1:]])
    assert out.splitlines()[0] == "eps0 [1],mu0 [1],mu0_weak [1],mu0_strong [1]"
    assert rows[-1, 0] <= 50 and rows[-1, 0] > 40
    assert np.all(np.diff(rows[:, 1]) > 0)
    # the weak asymptote is tangent at eps0 = 1, the strong one takes over for large eps0
    assert rows[1, 2] == pytest.approx(rows[1, 1], rel=0.05)
    assert rows[-1, 3] == pytest.approx(rows[-1, 1], rel=0.05)


def _shrink(sc):
    out = dict(sc)
    for key in ("z", "omega10", "t", "eps"):
        if key in out:
            g = out[key]
            if isinstance(g, dict):
                g = np.linspace(g["start"], g["stop"], 3) if g.get("spacing", "linear") == "linear" else np.geomspace(g["start"], g["stop"], 3)
                out[key] = [float(v) for v in g]
            elif isinstance(g, list) and len(g) > 3:
                out[key] = [g[0], g[len(g) // 2], g[-1]]
    if "variants" in out:
        out["variants"] = ["shift-only", "perturbative"]
        out["omega10"] = [1.0, 1.3]
    return out


@pytest.mark.parametrize("config", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_configs_run(config):
    names = cli.list_scenarios(config)
    assert names
    cfg = cli.load_config(config)
    for name in names:
        cfg.scenarios[name] = _shrink(cfg.scenarios[name])
        table, atom = cli.run_scenario(cfg, name, cli.RunOptions(rel_tol=1e-6))
        assert table.rows and not table.flags, (config.name, name, table.flags)
        text = cli.render(table, atom, "csv", "dimensionless")
        assert text.count("\n") == len(table.rows) + 1
        # short-distance wall estimates exist for half spaces only
        keep = [i for i, col in enumerate(table.columns) if not col.name.endswith("_short")]
        assert all(np.isfinite(row[i]) for row in table.rows for i in keep if isinstance(row[i], float))


def test_shipped_config_resolves_by_bare_name():
    assert cli.resolve_config("fig7.toml") == cli.SHIPPED_CONFIGS / "fig7.toml"
    assert cli.resolve_config("elsewhere/fig7.toml") == Path("elsewhere/fig7.toml")
