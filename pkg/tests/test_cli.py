"""Command-line front end: spec parsing, exit codes, emitted files, and
byte-determinism of the text reports."""

import pytest

from su2kam import cli

SOBOLEV_SPEC = """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = sobolev
sigma = 1.0
depth = 12
"""

STABLE_SPEC = """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = stable
depth = 8
"""

DUE_SPEC = """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = due
m_max = 4
depth = 8
"""

EXPLICIT_SPEC = """\
[frequency]
alpha = surd:(-1,1,2,1)

[constant]
angle = 0.23

[perturbation]
band = 3
coeffs =
    z 1 1e-4 0.0
    z -2 5e-5 1e-5
    t 0 2e-5 0.0
"""


def write(path, text):
    path.write_text(text)
    return str(path)


def test_analyze_sobolev_plan(tmp_path):
    cfg = write(tmp_path / "sob.spec", SOBOLEV_SPEC)
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--config", cfg, "--out", str(out)])
    assert rc == 0
    report = (out / "report.txt").read_text()
    assert "verdict = SobolevReducible" in report
    assert "[trace]" in report and "[conditions]" in report
    assert (out / "fig_norms.png").exists()


def test_analyze_report_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path / "sob.spec", SOBOLEV_SPEC)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = cli.main(["analyze", "--config", cfg, "--out", str(out),
                       "--emit", "series"])
        assert rc == 0
        outs.append(out)
    for fname in ("report.txt", "norms.csv", "delta.csv"):
        a = (outs[0] / fname).read_bytes()
        b = (outs[1] / fname).read_bytes()
        assert a == b


def test_analyze_emit_series_and_trace(tmp_path):
    cfg = write(tmp_path / "sob.spec", SOBOLEV_SPEC)
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--config", cfg, "--out", str(out),
                   "--emit", "trace", "--emit", "series"])
    assert rc == 0
    assert (out / "trace.txt").exists()
    rows = (out / "norms.csv").read_text().splitlines()
    assert rows[0] == "n,norm_before,norm_after"
    assert len(rows) == 13           # header + 12 synthetic steps


def test_analyze_explicit_cocycle(tmp_path):
    cfg = write(tmp_path / "c.spec", EXPLICIT_SPEC)
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--config", cfg, "--out", str(out)])
    assert rc == 0
    report = (out / "report.txt").read_text()
    assert "alpha_descriptor = surd:(-1,1,2,1)" in report


def test_construct_then_analyze_round_trip(tmp_path):
    cfg = write(tmp_path / "chain.spec", """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = resonant_chain
depth = 2
""")
    built = tmp_path / "built"
    rc = cli.main(["construct", "--config", cfg, "--out", str(built)])
    assert rc == 0
    assert (built / "plan.txt").exists()
    spec_text = (built / "cocycle.spec").read_text()
    assert "[perturbation]" in spec_text
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--config", str(built / "cocycle.spec"),
                   "--out", str(out), "--eps0", "0.5"])
    assert rc == 0
    assert (out / "report.txt").exists()


def test_conditions_on_stable_family(tmp_path):
    cfg = write(tmp_path / "st.spec", STABLE_SPEC)
    out = tmp_path / "out"
    rc = cli.main(["conditions", "--config", cfg, "--out", str(out)])
    assert rc == 0
    text = (out / "conditions.txt").read_text()
    assert "stability = StableOrthogonal" in text
    assert (out / "fig_conditions.png").exists()


def test_conditions_without_resonances_is_precondition_error(tmp_path):
    cfg = write(tmp_path / "flat.spec", """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = resonant_chain
depth = 0
""")
    rc = cli.main(["conditions", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_PRECONDITION


def test_cohomology_residual_series(tmp_path):
    cfg = write(tmp_path / "due.spec", DUE_SPEC)
    phi = write(tmp_path / "phi.txt", "\n".join(
        f"{k} 2 0 {p} 0.1 0.05" for k in (-2, 1, 3) for p in (0, 1, 2)))
    out = tmp_path / "out"
    rc = cli.main(["cohomology", "--config", cfg, "--phi", phi,
                   "--out", str(out), "--stages", "5"])
    assert rc == 0
    rows = (out / "residuals.csv").read_text().splitlines()
    assert rows[0] == "stage,residual"
    assert len(rows) == 6
    vals = [float(r.split(",")[1]) for r in rows[1:]]
    assert vals == sorted(vals, reverse=True)
    assert (out / "psi.txt").exists()
    assert (out / "fig_residuals.png").exists()


def test_cohomology_zero_input(tmp_path):
    cfg = write(tmp_path / "st.spec", STABLE_SPEC)
    phi = write(tmp_path / "phi.txt", "# empty\n")
    out = tmp_path / "out"
    rc = cli.main(["cohomology", "--config", cfg, "--phi", phi,
                   "--out", str(out), "--stages", "4"])
    assert rc == 0
    rows = (out / "residuals.csv").read_text().splitlines()
    assert rows[1:] == [f"{i},0.0" for i in range(1, 5)]


def test_cohomology_budget_guard_is_numeric_abort(tmp_path):
    cfg = write(tmp_path / "st.spec", STABLE_SPEC)
    phi = write(tmp_path / "phi.txt", "1 2 0 0 1.0 0.0\n")
    rc = cli.main(["cohomology", "--config", cfg, "--phi", phi,
                   "--out", str(tmp_path / "out"), "--m-max", "2",
                   "--k-band", "4"])
    assert rc == cli.EXIT_NUMERIC


@pytest.mark.parametrize("mutate", [
    lambda s: s.replace("[frequency]", "[frequency]\nbogus = 1"),
    lambda s: s.replace("alpha = surd:(-1,1,2,1)", "alpha = surd:(-1,1,2"),
    lambda s: s.replace("z 1 1e-4 0.0", "q 1 1e-4 0.0"),
    lambda s: s.replace("band = 3", "band = 3\ncoeffs2 = x"),
])
def test_parse_errors(tmp_path, mutate):
    cfg = write(tmp_path / "bad.spec", mutate(EXPLICIT_SPEC))
    rc = cli.main(["analyze", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_PARSE


def test_t_channel_symmetry_rejected(tmp_path):
    bad = EXPLICIT_SPEC.replace(
        "    t 0 2e-5 0.0",
        "    t 1 2e-5 1e-5\n    t -1 2e-5 1e-5")
    cfg = write(tmp_path / "bad.spec", bad)
    rc = cli.main(["analyze", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_PARSE


def test_missing_config_is_parse_error(tmp_path):
    rc = cli.main(["analyze", "--config", str(tmp_path / "nope.spec"),
                   "--out", str(tmp_path)])
    assert rc == cli.EXIT_PARSE


def test_infeasible_plan_is_precondition_error(tmp_path):
    cfg = write(tmp_path / "deep.spec", """\
[frequency]
alpha = surd:(-1,1,2,1)

[plan]
family = resonant_chain
depth = 5
""")
    rc = cli.main(["construct", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_PRECONDITION


def test_params_flags_override_spec(tmp_path):
    cfg = write(tmp_path / "c.spec", EXPLICIT_SPEC + """
[params]
n_max = 3
eps0 = 0.01
""")
    out = tmp_path / "out"
    rc = cli.main(["analyze", "--config", cfg, "--out", str(out),
                   "--eps0", "0.02"])
    assert rc == 0
    report = (out / "report.txt").read_text()
    assert "n_max = 3" in report
    assert "eps0 = 0.02" in report
