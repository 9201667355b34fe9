import filecmp
import os

import numpy as np
import pytest

from cominkowski import cli
from cominkowski.fuchsian2 import build_octagon_group
from cominkowski.measures import NormReport

SMALL = ["--nr", "48", "--ntheta", "128", "--nboundary", "256"]
ELL = 2 * np.arccosh(1 + np.sqrt(2))


def run(argv):
    out = []
    code = cli.main(argv, echo=out.append)
    return code, "\n".join(out)


def kv(text):
    return dict(line.split(" ", 1) for line in text.splitlines() if line and not line.startswith("#"))


@pytest.fixture
def lam_file(tmp_path):
    def make(curves, coboundary=None, name="lam.txt"):
        p = tmp_path / name
        cli.write_lamination(curves, p, coboundary)
        return str(p)
    return make


def test_validate_default_group():
    code, text = run(["validate"])
    assert code == cli.EXIT_OK
    rec = kv(text)
    assert rec["status"] == "pass"
    assert float(rec["area_rel_error"]) < 1e-10
    assert float(rec["relator_defect"]) < 1e-8


def test_group_file_roundtrip(tmp_path):
    G = build_octagon_group()
    p = tmp_path / "g.txt"
    cli.write_group(G, p)
    H = cli.read_group(p)
    assert H.relator == G.relator and H.genus == 2
    for a, b in zip(G.generators, H.generators):
        assert np.array_equal(a.A, b.A)
    assert run(["validate", "--group", str(p)])[0] == cli.EXIT_OK


def test_validate_corrupted_matrix(tmp_path):
    G = build_octagon_group()
    p = tmp_path / "g.txt"
    cli.write_group(G, p)
    lines = p.read_text().splitlines()
    tok = lines[4].split()
    tok[3] = repr(float(tok[3]) + 1e-3)
    lines[4] = " ".join(tok)
    p.write_text("\n".join(lines) + "\n")
    code, text = run(["validate", "--group", str(p)])
    assert code == cli.EXIT_INVALID
    assert "generator_a2_form_defect" in text
    assert "A^T J A - J defect" in text


def test_validate_overlapping_curves(lam_file):
    p = lam_file([("a1", 1.0), ("a2", 1.0)])
    code, text = run(["validate", "--lamination", p])
    assert code == cli.EXIT_INVALID
    assert "status fail" in text


def test_validate_lamination_pass(lam_file):
    code, text = run(["validate", "--lamination", lam_file([("a1", 1.0)])])
    assert code == cli.EXIT_OK
    assert float(kv(text)["lamination_length"]) == pytest.approx(ELL, rel=1e-12)


def test_parse_error_reports_line(tmp_path, capsys):
    p = tmp_path / "lam.txt"
    p.write_text("# cominkowski lamination v1\ncurve 1.0 a1\ncurve -2 a3\n")
    code, text = run(["validate", "--lamination", str(p)])
    assert code == cli.EXIT_INVALID
    assert "lam.txt:3: weight must be positive" in text
    assert run(["norm", "--lamination", str(p)])[0] == cli.EXIT_INVALID
    assert "lam.txt:3:" in capsys.readouterr().err
    p.write_text("# cominkowski group v0\n")
    assert run(["validate", "--group", str(p)])[0] == cli.EXIT_INVALID
    assert "expected header" in capsys.readouterr().err


def test_bad_parameters(capsys):
    assert run(["norm", "--ntheta", "63"])[0] == cli.EXIT_INVALID
    assert run(["norm", "--nr", "48", "--ntheta", "128", "--nboundary", "200"])[0] == cli.EXIT_INVALID
    assert run(["export"])[0] == cli.EXIT_INVALID
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        cli.main(["nosuchcommand"])


def test_norm_coboundary_is_zero(lam_file):
    p = lam_file([], coboundary=[0.2, -0.5, 0.3])
    code, text = run(["norm", "--lamination", p] + SMALL)
    assert code == cli.EXIT_OK
    rep = NormReport.from_text(text + "\n")
    assert abs(rep.s1_plus) < 1e-6 and abs(rep.s1_minus) < 1e-6 and abs(rep.volume) < 1e-6
    assert rep.lam_length == 0.0
    assert abs(rep.area_check - 4 * np.pi) < 0.005 * 4 * np.pi


def test_norm_single_curve_and_scaling(lam_file):
    _, t1 = run(["norm", "--lamination", lam_file([("a1", 1.0)], name="one.txt")] + SMALL)
    _, t2 = run(["norm", "--lamination", lam_file([("a1", 2.0)], name="two.txt")] + SMALL)
    r1, r2 = NormReport.from_text(t1 + "\n"), NormReport.from_text(t2 + "\n")
    assert r1.lam_length == pytest.approx(ELL)
    assert abs(r1.s1_plus - ELL) < max(r1.error_bar, 0.05 * ELL)
    assert abs(r2.s1_plus - 2 * r1.s1_plus) < r2.error_bar + 2 * r1.error_bar
    assert r1.symmetrization_gap() < r1.error_bar


def test_anosov_reports(lam_file):
    code, text = run(["anosov", "--lamination", lam_file([("a1", 1.0)])])
    assert code == cli.EXIT_OK
    rec = kv(text)
    assert float(rec["b_residual"]) < 1e-4
    assert 0.9 <= float(rec["contraction_a"]) <= 1.1
    assert float(rec["delta_minus_defect"]) < 1e-6
    code, text = run(["anosov"])
    assert code == cli.EXIT_OK
    assert float(kv(text)["b_residual"]) < 1e-12


def test_export_deterministic(tmp_path, lam_file):
    p = lam_file([("a1", 1.0)])
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["export", "--lamination", p, "--out", str(a)] + SMALL)[0] == cli.EXIT_OK
    assert run(["export", "--lamination", p, "--out", str(b)] + SMALL)[0] == cli.EXIT_OK
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    assert {"h_minus.grid", "h_plus.grid", "h_mean.grid", "mean_curvature.grid",
            "domain_mask.grid", "lower_envelope.mesh", "upper_envelope.mesh", "export.txt"} <= set(names)
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors
    man = kv((a / "export.txt").read_text())
    assert man["n_r"] == "48" and man["n_theta"] == "128" and man["n_boundary"] == "256"
    assert float(man["mean_curvature_max"]) < 1e-9 * 10
    head = (a / "h_mean.grid").read_text().splitlines()[:4]
    assert head[1] == "name h_mean" and head[2] == "n_r 48" and head[3] == "n_theta 128"
