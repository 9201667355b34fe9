"""Command-line entry point: validate, norm, anosov, export, acceptance.

Input files are line-oriented text with a versioned first line.

Group file::

    # cominkowski group v1
    genus 2
    relator a1 a2^-1 a3 a4^-1 a1^-1 a2 a3^-1 a4
    generator a1 m00 m01 m02 m10 m11 m12 m20 m21 m22
    ...

Lamination file::

    # cominkowski lamination v1
    curve 1.0 a1
    curve 0.5 a3 a4^-1
    coboundary 0.1 0.2 0.3        (optional, adds A -> A v - v)

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""
import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import acceptance
from . import anosov_flow as af
from .envelope import write_mesh
from .fuchsian2 import SurfaceGroup, build_octagon_group, form_defect, format_word, parse_word
from .isometry_group import Isometry
from .lamination import SERIES_TOL, Cocycle, SimplicialLamination, boundary_value
from .mean_solver import PolarGrid, ScalarField, mean_curvature_field, write_grid
from .measures import AREA_TOL, compute_surfaces, norm_report
from .mink_linalg import GeometryError

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
GROUP_HEADER = "# cominkowski group v1"
LAMINATION_HEADER = "# cominkowski lamination v1"
ANOSOV_HEADER = "# cominkowski anosov report v1"
VALIDATION_HEADER = "# cominkowski validation v1"
EXPORT_HEADER = "# cominkowski export v1"
FORM_TOL = 1e-8


class InputError(ValueError):
    """Malformed input file or out-of-range parameter (exit code 2)."""


# -- file formats -------------------------------------------------------------

def _rows(path, header):
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise InputError("%s: %s" % (path, exc.strerror)) from exc
    if not lines or lines[0].strip() != header:
        raise InputError("%s:1: expected header %r" % (path, header))
    for n, line in enumerate(lines[1:], start=2):
        text = line.split("#", 1)[0].strip()
        if text:
            yield n, text.split()


def write_group(G, path):
    lines = [GROUP_HEADER, "genus %d" % G.genus, "relator %s" % format_word(G.relator)]
    for k, g in enumerate(G.generators):
        lines.append("generator a%d %s" % (k + 1, " ".join("%.17g" % v for v in g.A.ravel())))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_group(path):
    """SurfaceGroup from a group file; the matrices are not checked here."""
    genus, relator, gens = None, None, {}
    for n, tok in _rows(path, GROUP_HEADER):
        try:
            if tok[0] == "genus":
                genus = int(tok[1])
            elif tok[0] == "relator":
                relator = parse_word(" ".join(tok[1:]))
            elif tok[0] == "generator":
                idx = parse_word(tok[1])
                if len(idx) != 1 or idx[0][1] != 1:
                    raise ValueError("bad generator name %r" % tok[1])
                vals = [float(t) for t in tok[2:]]
                if len(vals) != 9:
                    raise ValueError("expected 9 matrix entries, got %d" % len(vals))
                gens[idx[0][0]] = np.array(vals).reshape(3, 3)
            else:
                raise ValueError("unknown keyword %r" % tok[0])
        except (ValueError, IndexError) as exc:
            raise InputError("%s:%d: %s" % (path, n, exc)) from exc
    if genus is None or relator is None or not gens:
        raise InputError("%s: genus, relator and generators are required" % path)
    if sorted(gens) != list(range(len(gens))):
        raise InputError("%s: generators must be a1..a%d" % (path, len(gens)))
    if any(i >= len(gens) for i, _ in relator):
        raise InputError("%s: relator uses an undefined generator" % path)
    return SurfaceGroup([Isometry.linear(gens[k]) for k in range(len(gens))], relator, genus)


def write_lamination(curves, path, coboundary=None):
    lines = [LAMINATION_HEADER]
    lines += ["curve %.17g %s" % (w, word) for word, w in curves]
    if coboundary is not None:
        lines.append("coboundary %s" % " ".join("%.17g" % v for v in coboundary))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_lamination(path):
    """([(word text, weight)], coboundary vector)."""
    curves, cob = [], np.zeros(3)
    for n, tok in _rows(path, LAMINATION_HEADER):
        try:
            if tok[0] == "curve":
                w = float(tok[1])
                if not w > 0:
                    raise ValueError("weight must be positive")
                word = " ".join(tok[2:])
                if not parse_word(word):
                    raise ValueError("empty curve word")
                curves.append((word, w))
            elif tok[0] == "coboundary":
                if len(tok) != 4:
                    raise ValueError("coboundary takes 3 numbers")
                cob = cob + np.array([float(t) for t in tok[1:]])
            else:
                raise ValueError("unknown keyword %r" % tok[0])
        except (ValueError, IndexError) as exc:
            raise InputError("%s:%d: %s" % (path, n, exc)) from exc
    return curves, cob


# -- configuration --------------------------------------------------------------

@dataclass
class RunConfig:
    group: str = None
    lamination: str = None
    nr: int = 192
    ntheta: int = 512
    nboundary: int = 2048
    wordlen: int = 8
    tol: float = SERIES_TOL
    out: str = None
    seed: int = 0

    def check(self):
        if self.nr < 8:
            raise InputError("--nr must be at least 8")
        if self.ntheta < 8 or self.ntheta % 2:
            raise InputError("--ntheta must be even and at least 8")
        if self.nboundary < 16:
            raise InputError("--nboundary must be at least 16")
        if self.nboundary % self.ntheta and self.ntheta % self.nboundary:
            raise InputError("--nboundary and --ntheta must divide one another")
        if not 1 <= self.wordlen <= 12:
            raise InputError("--wordlen must lie in 1..12")
        if not 0 < self.tol <= 1e-3:
            raise InputError("--tol must lie in (0, 1e-3]")
        return self

    @property
    def grid(self):
        return PolarGrid(self.nr, self.ntheta)


def load_inputs(cfg):
    """(group, lamination or None, cocycle)."""
    G = build_octagon_group() if cfg.group is None else read_group(cfg.group)
    problems = group_problems(G)
    if problems:
        raise InputError("; ".join(problems))
    lam, tau = None, Cocycle.from_coboundary(G, np.zeros(3))
    if cfg.lamination is not None:
        curves, cob = read_lamination(cfg.lamination)
        if curves:
            try:
                lam = SimplicialLamination(G, [(G.word(parse_word(w)), wt) for w, wt in curves],
                                           seed=cfg.seed, word_len=cfg.wordlen)
            except IndexError as exc:
                raise InputError("lamination: a curve uses an undefined generator") from exc
            except GeometryError as exc:
                raise InputError("lamination: %s" % exc) from exc
            tau = Cocycle.from_lamination(lam)
        tau = tau + Cocycle.from_coboundary(G, cob)
    return G, lam, tau


def group_problems(G):
    out = []
    for k, g in enumerate(G.generators):
        d = form_defect(g.A)
        if d > FORM_TOL * max(1.0, float(np.max(np.abs(g.A))) ** 2):
            out.append("generator a%d: A^T J A - J defect %.3e" % (k + 1, d))
        elif g.A[2, 2] <= 0:
            out.append("generator a%d does not preserve the upper sheet" % (k + 1))
    if out:
        return out
    rd = G.relator_defect()
    if rd > FORM_TOL:
        out.append("relator defect %.3e" % rd)
    return out


# -- commands -------------------------------------------------------------------

def cmd_validate(cfg, echo):
    G = build_octagon_group() if cfg.group is None else read_group(cfg.group)
    lines = [VALIDATION_HEADER]
    for k, g in enumerate(G.generators):
        lines.append("generator_a%d_form_defect %.3e" % (k + 1, form_defect(g.A)))
    problems = group_problems(G)
    if not problems:
        lines.append("relator_defect %.3e" % G.relator_defect())
        try:
            area = G.polygon.hyperbolic_area()
        except GeometryError as exc:
            problems.append("Dirichlet polygon: %s" % exc)
        else:
            exact = 4 * np.pi * (G.genus - 1)
            lines.append("dirichlet_area %.12g" % area)
            lines.append("area_rel_error %.3e" % (abs(area - exact) / exact))
            if abs(area - exact) > AREA_TOL * exact:
                problems.append("Dirichlet area %.6f is not 4 pi (g - 1) = %.6f" % (area, exact))
    if not problems and cfg.lamination is not None:
        try:
            _, lam, _ = load_inputs(cfg)
        except InputError as exc:
            problems.append(str(exc))
        else:
            if lam is not None:
                lines.append("lamination_lifts %d" % len(lam.lines))
                lines.append("lamination_length %.12g" % lam.total_length)
    lines += ["problem %s" % p for p in problems]
    lines.append("status %s" % ("fail" if problems else "pass"))
    echo("\n".join(lines))
    return EXIT_INVALID if problems else EXIT_OK


def _norm(cfg):
    G, lam, tau = load_inputs(cfg)
    rep = norm_report(tau, lam, cfg.grid, cfg.nboundary, tol=cfg.tol)
    rep.settings["wordlen"] = cfg.wordlen
    rep.settings["seed"] = cfg.seed
    return tau, rep


def cmd_norm(cfg, echo):
    tau, rep = _norm(cfg)
    text = rep.to_text()
    echo(text.rstrip("\n"))
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "norm_report.txt"), "w") as f:
            f.write(text)
        export_fields(tau, cfg)
    return EXIT_OK


def anosov_report(tau, cfg, count=64):
    rng = np.random.default_rng(cfg.seed)
    theta = np.sort(rng.uniform(0, 2 * np.pi, count))
    frames = af.frames_from_ideal(theta)
    sec = af.fixed_point_section(tau, frames)
    b_fixed = -af.section_heights(sec)[1]
    b_series = boundary_value(tau, theta, cfg.tol)
    C, a, hist = af.contraction_rate(*af.probe_sections(
        af.frames_from_ideal(theta, rng.uniform(-0.5, 0.5, (count, 2)))))
    lines = [ANOSOV_HEADER,
             "frames %d" % count,
             "fixed_point_iterations %d" % sec.info["iterations"],
             "delta_minus_defect %.3e" % af.delta_minus_defect(sec),
             "b_residual %.3e" % float(np.max(np.abs(b_fixed - b_series))),
             "contraction_C %.10g" % C,
             "contraction_a %.10g" % a]
    lines += ["cauchy_%d %.3e" % (k + 1, d) for k, d in enumerate(sec.info["history"])]
    lines += ["D_%g %.10g" % (t, d) for t, d in hist]
    return "\n".join(lines) + "\n"


def cmd_anosov(cfg, echo):
    _, _, tau = load_inputs(cfg)
    text = anosov_report(tau, cfg)
    echo(text.rstrip("\n"))
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "anosov_report.txt"), "w") as f:
            f.write(text)
    return EXIT_OK


def export_fields(tau, cfg):
    """Grid dumps of h-, h+, h_mean, Mean(h_mean) and the domain mask, and the envelope meshes."""
    grid = cfg.grid
    surf = compute_surfaces(tau, grid, cfg.nboundary, cfg.tol)
    ring = surf.mean.values[-1]
    lower = ScalarField.from_function(grid, surf.lower, boundary=ring)
    upper = ScalarField.from_function(grid, surf.upper, boundary=ring)
    mean_vals = np.vstack([mean_curvature_field(surf.mean, edge="dirichlet"),
                           np.zeros((1, grid.n_theta))])
    P = tau.group.polygon
    X = grid.nodes()
    X[-1] *= 1 - 1e-12
    mask = P.contains(X.reshape(-1, 2)).reshape(X.shape[:2]).astype(float)
    os.makedirs(cfg.out, exist_ok=True)
    files = {
        "h_minus.grid": lambda p: write_grid(lower, p, "h_minus"),
        "h_plus.grid": lambda p: write_grid(upper, p, "h_plus"),
        "h_mean.grid": lambda p: write_grid(surf.mean, p, "h_mean"),
        "mean_curvature.grid": lambda p: write_grid(ScalarField(grid, mean_vals), p,
                                                    "mean_of_h_mean"),
        "domain_mask.grid": lambda p: write_grid(ScalarField(grid, mask), p, "dirichlet_mask"),
        "lower_envelope.mesh": lambda p: write_mesh(surf.lower, p),
        "upper_envelope.mesh": lambda p: write_mesh(surf.upper, p),
    }
    for name, writer in files.items():
        writer(os.path.join(cfg.out, name))
    manifest = [EXPORT_HEADER, "n_r %d" % cfg.nr, "n_theta %d" % cfg.ntheta,
                "n_boundary %d" % cfg.nboundary, "wordlen %d" % cfg.wordlen,
                "tol %.3g" % cfg.tol, "seed %d" % cfg.seed,
                "mean_curvature_max %.3e" % float(np.max(np.abs(mean_vals)))]
    manifest += ["file %s" % name for name in files]
    with open(os.path.join(cfg.out, "export.txt"), "w") as f:
        f.write("\n".join(manifest) + "\n")
    return sorted(files)


def cmd_export(cfg, echo):
    if not cfg.out:
        raise InputError("export needs --out")
    _, _, tau = load_inputs(cfg)
    for name in export_fields(tau, cfg):
        echo(os.path.join(cfg.out, name))
    return EXIT_OK


def cmd_acceptance(cfg, echo):
    results = acceptance.run_all(echo=echo)
    failed = [r.number for r in results if not r.passed]
    echo("acceptance: %d/%d passed" % (len(results) - len(failed), len(results)))
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"validate": cmd_validate, "norm": cmd_norm, "anosov": cmd_anosov,
            "export": cmd_export, "acceptance": cmd_acceptance}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", help="group file (default: the regular octagon group)")
    common.add_argument("--lamination", help="lamination file")
    common.add_argument("--nr", type=int, default=192, help="radial rings of the polar grid")
    common.add_argument("--ntheta", type=int, default=512, help="angular nodes per ring")
    common.add_argument("--nboundary", type=int, default=2048, help="boundary samples of b_tau")
    common.add_argument("--wordlen", type=int, default=8, help="word length for lift searches")
    common.add_argument("--tol", type=float, default=SERIES_TOL, help="series tail tolerance")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    p = argparse.ArgumentParser(prog="cominkowski",
                                description="Mean surfaces and S1 norms of surface-group cocycles.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None, echo=print):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.group, args.lamination, args.nr, args.ntheta, args.nboundary,
                    args.wordlen, args.tol, args.out, args.seed)
    try:
        cfg.check()
        return COMMANDS[args.command](cfg, echo)
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INVALID
    except (GeometryError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
