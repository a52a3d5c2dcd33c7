"""Command-line entry point: ``anisored <command> [--config path] ...``.

Exit status is 0 iff every executed check passed, 2 if some check failed,
and the error's own code (3-9, see ``errors``) when a module raises.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import algebra2 as alg
from . import checkers as ck
from . import gridlab as gl
from .config import load_field_file, validate
from .errors import (EXIT_CHECK_FAILED, EXIT_INTERNAL, EXIT_OK, AnisoredError,
                     GridTooCoarse, HypothesisViolated, ParseError, ValidationError)
from .fields import PolyField
from .quadpoly import is_simple, residue_moments, right_divisor
from .reduction import GridReduction, PointReduction, quadratic_residual
from .report import Report

COMMANDS = ("check", "factorize", "reduce", "verify", "example5", "carleman", "vanish")
MOMENT_TOL = 1e-9
SPECTRUM_TOL = 1e-8
GAP_TOL = 1e-6
CONJ_TOL = 1e-9
DET_FACTOR_TOL = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(ValidationError.exit_code)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}") from None


def build_parser():
    p = _Parser(prog="anisored", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--grid-n", type=int, help="grid nodes per axis (odd, >= 9)")
    p.add_argument("--tau", type=_floats, help="comma list of Carleman tau values")
    p.add_argument("--nu", type=float, help="flat-weight exponent nu")
    for k in "abcf":
        p.add_argument(f"--{k}", type=float, help=f"example5 parameter {k}")
    p.add_argument("--field", help="grid field file for vanish")
    p.add_argument("--radii", type=_floats, help="comma list of radii for vanish")
    p.add_argument("--dump", help="reduce: also write the ReductionData JSON here")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    return p


def _load(args):
    """Config file merged with command-line overrides."""
    obj, base = {}, Path(".")
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise ParseError(f"cannot read config: {e}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("config must be a JSON object", line=1)
        base = Path(args.config).resolve().parent
    if args.grid_n is not None:
        obj.setdefault("grid", {})["n"] = args.grid_n
    if args.tau is not None:
        obj.setdefault("carleman", {})["tau"] = args.tau
    if args.nu is not None:
        obj.setdefault("carleman", {})["nu"] = args.nu
        obj["nu"] = args.nu
    if args.radii is not None:
        obj.setdefault("vanish", {})["radii"] = args.radii
    flags = {k: getattr(args, k) for k in "abcf"}
    if any(v is not None for v in flags.values()):
        e5 = dict(obj.get("example5", {}))
        e5.update({k: v for k, v in flags.items() if v is not None})
        obj["example5"] = e5
    return validate(obj, base)


def _sample_points(t, cfg):
    if t.mode == "constant":
        return np.array([cfg.center])
    return t.sample_points(cfg.grid)


def _first_bad(points, flags):
    for x, ok in zip(points, flags):
        if not ok:
            return list(x)
    return None


# -- commands --------------------------------------------------------------

def cmd_check(cfg, rep, t=None):
    t = cfg.tensor() if t is None else t
    pts = _sample_points(t, cfg)
    sym = ck.check_symmetries(t, pts)
    rep.below("major_symmetry", sym.major_defect, ck.SYM_TOL, identity="A^{jl}_{ab} = A^{lj}_{ba}")
    rep.below("minor_symmetry", sym.minor_defect, ck.SYM_TOL, identity="A^{jl}_{ab} = A^{jb}_{al}")
    ell = ck.check_strong_ellipticity(t, points=pts)
    rep.results["ellipticity"] = ell
    rep.check("strong_ellipticity", ell.strong_elliptic, ell.delta_est, location=list(ell.worst_point),
              identity="sum A^{jl}_{ab} a_a b_j a_b b_l >= delta |a|^2 |b|^2")
    if not ell.strong_elliptic:
        rep.skip("simple_characteristics", "not elliptic", identity="det P has four distinct roots")
        return
    tol = cfg["tolerances"]["sep_tol"]
    sd = ck.check_simple_domain(t, pts, tol)
    rep.results["simple_characteristics"] = {"min_separation": sd.min_separation,
                                             "n_points": len(sd.points)}
    rep.check("simple_characteristics", sd.simple, sd.min_separation, tol,
              location=_first_bad([p.x for p in sd.points], [p.simple for p in sd.points]),
              identity="det P has four distinct roots")


def _factorize_point(rep, p, cfg, where):
    f = right_divisor(p)
    rep.results["factorization"] = {
        "x_div": f.x_div, "moment0": f.moment0, "moment1": f.moment1,
        "circles": [{"center": c, "radius": r} for c, r in f.circles],
        "upper_roots": list(f.split.upper), "lower_roots": list(f.split.lower),
        "separation": f.split.separation, "im_margin": f.split.im_margin,
        "eig_x": alg.eigvals2(f.x_div), "residual": f.residual, "at": list(where)}
    rep.below("factorization_residual", f.residual, cfg["tolerances"]["factor_res"],
              location=list(where), identity="P(lam) = (lam - X^*) L11 (lam - X)")
    ev = alg.eigvals2(f.x_div)
    rep.check("spectrum_upper_half_plane", bool(np.all(ev.imag > 0)), float(np.min(ev.imag)),
              0.0, location=list(where), identity="Spec(X) in C+")
    rep.below("quadratic_equation", quadratic_residual(p, -f.x_div), cfg["tolerances"]["factor_res"],
              location=list(where), identity="T^2 - L11^{-1} L12 T + L11^{-1} L22 = 0, T = -X")
    if is_simple(p, cfg["tolerances"]["sep_tol"], split=f.split).simple:
        r0, r1 = residue_moments(p, f.split)
        dev = max(float(alg.norm2(f.moment0 - r0) / alg.norm2(r0)),
                  float(alg.norm2(f.moment1 - r1) / alg.norm2(r1)))
        rep.below("moments_vs_residues", dev, MOMENT_TOL, location=list(where),
                  identity="oint zeta^m P^{-1} = 2 pi i sum Res")
    else:
        rep.skip("moments_vs_residues", "repeated upper roots",
                 identity="oint zeta^m P^{-1} = 2 pi i sum Res")
    return f


def cmd_factorize(cfg, rep):
    t = cfg.tensor()
    x = cfg.center if t.mode != "grid" else tuple(float(v) for v in t.grid.center)
    _factorize_point(rep, t.quadpoly_at(x), cfg, x)


def _reduction(cfg, t):
    if t.mode == "grid":
        return GridReduction(t, t.grid)
    return PointReduction(t, cfg.center)


def _reduction_checks(rep, data, cfg):
    res = data.residuals()
    rep.results["residuals"] = res
    rep.below("quadratic_equation", res["quadratic"], cfg["tolerances"]["factor_res"],
              identity="T^2 - L11^{-1} L12 T + L11^{-1} L22 = 0")
    rep.below("sylvester", res["sylvester"], cfg["tolerances"]["sylvester_res"],
              identity="Psi T - S Psi + M = 0")
    rep.below("spectrum_conjugacy", res["spectrum_conjugacy"], SPECTRUM_TOL,
              identity="Spec(S) = conj Spec(T)")
    rep.check("spectra_disjoint", res["spectrum_gap"] > GAP_TOL, res["spectrum_gap"], GAP_TOL,
              identity="Spec(T) and Spec(S) disjoint")
    rep.below("diagonal_conjugacy", res["diagonal_conjugacy"], CONJ_TOL,
              identity="(tr S, det S) = conj (tr T, det T)")


def cmd_reduce(cfg, rep, dump=None):
    t = cfg.tensor()
    data = _reduction(cfg, t).data()
    rep.results["reduction"] = data.to_json()
    _reduction_checks(rep, data, cfg)
    if dump:
        Path(dump).write_text(data.dumps())


def random_poly(rng, degree, ncomp, complex_=False):
    """Random polynomial field of total degree <= degree."""
    c = rng.normal(size=(degree + 1, degree + 1, ncomp))
    if complex_:
        c = c + 1j * rng.normal(size=c.shape)
    i, j = np.indices((degree + 1, degree + 1))
    c[i + j > degree] = 0
    return PolyField(c)


def manufactured_u(x1, x2):
    """Smooth non-polynomial displacement for refinement studies."""
    return np.stack([np.sin(x1 + 2 * x2), np.cos(x1 * x2) + x1 ** 3], axis=-1)


def cmd_verify(cfg, rep):
    t = cfg.tensor()
    tol = cfg["tolerances"]["identity_res"]
    v = cfg["verify"]
    ident_block = "d1 W + M1 d2 W - M0 W = [0, L11^{-1}(Lu + Fu)]"
    ident_diag = "P W - sum K_a D^a W = (-d1 - Ccof d2)(d1 W + M1 d2 W - M0 W)"
    if t.mode != "grid":
        red = PointReduction(t, cfg.center)
        rng = np.random.default_rng(v["seed"])
        row1 = row2 = diag_u = diag_w = 0.0
        for _ in range(v["n_random"]):
            u = random_poly(rng, v["degree"], 2)
            b = gl.block_residual(red, u)
            row1, row2 = max(row1, b.row1), max(row2, b.row2)
            diag_u = max(diag_u, gl.diagonal_residual(red, u=u))
            w = random_poly(rng, v["degree"], 4, complex_=True)
            diag_w = max(diag_w, gl.diagonal_residual(red, w=w))
        rep.results["exact"] = {"n_random": v["n_random"], "block_row1": row1, "block_row2": row2,
                                "diagonal_from_u": diag_u, "diagonal_random_w": diag_w}
        rep.below("block_row1_exact", row1, tol, identity=ident_block)
        rep.below("block_row2_exact", row2, tol, identity=ident_block)
        rep.below("diagonal_identity_exact", max(diag_u, diag_w), tol, identity=ident_diag)
        study = gl.refinement_study(t, manufactured_u, cfg.grid, v["levels"])
        rep.results["refinement"] = study
        min_order = cfg["tolerances"]["min_order"]
        for key, ident in (("block_row2", ident_block), ("diagonal", ident_diag)):
            ok, order, exact = gl.order_ok(study, key, min_order, tol)
            rep.check(f"{key}_grid_order", ok, order, min_order,
                      location={"discretely_exact": exact}, identity=ident)
    else:
        red = GridReduction(t, t.grid)
        b = gl.block_residual(red, manufactured_u)
        d = gl.diagonal_residual(red, u=manufactured_u)
        rep.results["grid"] = {"n": t.grid.n, "block_row1": b.row1, "block_row2": b.row2,
                               "diagonal": d}
        rep.skip("block_row2_grid_order", "sampled coefficients cannot be refined", identity=ident_block)
        rep.skip("diagonal_grid_order", "sampled coefficients cannot be refined", identity=ident_diag)


def cmd_example5(cfg, rep):
    if "example5" not in cfg.raw:
        raise ValidationError("example5 needs --a --b --c --f or an 'example5' config section")
    e = cfg["example5"]
    params = ck.Example5Params(e["a"], e["b"], e["c"], e["f"])
    ident = "a, c, ac - b^2 > 0; f > max(b^2c/a^2, (2ab^2c - b^4)/a^3); f != c^2/a"
    try:
        t, r = ck.example5(params)
    except HypothesisViolated as err:
        rep.check("hypotheses", False, err.inequality, identity=ident)
        rep.results["violation"] = {"inequality": err.inequality, "message": str(err)}
        raise
    rep.check("hypotheses", True, None, identity=ident)
    a, b, c, f = r.params
    rep.results["example5"] = {
        "e": r.e, "d": r.d, "factor_coefficient": r.factor_coefficient,
        "det_scale": (a * c - b * b) / (a * a),
        "factor_quadratics": [[a, 2 * b, c], [a, 2 * b, r.factor_coefficient]],
        "lam11": r.lam11, "lam12": r.lam12, "lam22": r.lam22}
    rep.below("det_factorization", r.det_factor_residual, DET_FACTOR_TOL,
              identity="det P = (a l^2 + 2b l + c)(ac - b^2)/a^2 (a l^2 + 2b l + g)")
    cmd_check(cfg, rep, t)


def cmd_carleman(cfg, rep):
    t = cfg.tensor()
    if t.mode != "constant":
        t = t.at(cfg.center)
    c = cfg["carleman"]
    grid = cfg.grid
    r_max = c.get("r_max") or grid.half_width
    r_min = c["r_min"] if c["r_min"] is not None else max(2 * grid.h, 0.05 * r_max)
    if r_min < 2 * grid.h - 1e-12:
        raise GridTooCoarse(f"carleman.r_min = {r_min} is below 2h = {2 * grid.h:.6g}; raise grid.n")
    data = PointReduction(t, grid.center).data()
    probe = gl.CarlemanProbe(c["tau"], c["nu"], r_min, c.get("r_max"), c["weight_mode"])
    w = gl.flat_state(grid, c["nu"], PolyField(np.array([[0.0], [1.0]])))
    rows = gl.carleman_ratio(data, w, probe, grid)
    rep.results["carleman"] = {"grid_n": grid.n, "h": grid.h, "r_min": r_min, "rows": rows}
    ident = "|e^phi r^-1 grad w| + tau |e^phi r^(-nu-2) w| vs |e^phi P w|, phi = (tau/nu) r^-nu"
    defined = all(r.defined for r in rows)
    rep.check("ratio_defined", defined, None, identity=ident)
    if defined:
        ratios = [r.ratio for r in rows]
        spread = max(ratios) / min(ratios)
        rep.below("ratio_spread", spread, c["max_spread"], identity=ident)
        rep.check("lhs_monotone_in_tau", all(b.log_lhs >= a.log_lhs for a, b in zip(rows, rows[1:])),
                  None, identity=ident)
    tau0 = rows[0].tau
    if probe.weight_mode == "log" and (tau0 / probe.nu) * probe.r_min ** (-probe.nu) <= gl.DIRECT_EXPONENT_MAX:
        direct = gl.carleman_ratio(data, w, gl.CarlemanProbe([tau0], probe.nu, probe.r_min,
                                                             probe.r_max, "direct"), grid)[0]
        dev = max(abs(np.expm1(rows[0].log_lhs - direct.log_lhs)),
                  abs(np.expm1(rows[0].log_rhs - direct.log_rhs)))
        rep.below("log_vs_direct", float(dev), 1e-10, location={"tau": tau0}, identity=ident)
    else:
        rep.skip("log_vs_direct", "direct weights overflow at the smallest tau", identity=ident)
    _nu_window(cfg, rep, c["nu"])


def _nu_window(cfg, rep, nu):
    sigma, nu0 = cfg["sigma"], cfg["nu0"]
    ident = "nu0 < nu < 1/(sigma - 1)"
    if sigma is None and nu0 is None:
        rep.skip("nu_window", "neither sigma nor nu0 configured", identity=ident)
        return
    f = gl.FlatFn(nu=nu, sigma=sigma, nu0=nu0)
    rep.check("nu_window", f.nu_admissible(), nu, identity=ident)


def cmd_vanish(cfg, rep, field_path):
    if not field_path:
        raise ValidationError("vanish needs --field <file>")
    grid, values = load_field_file(field_path)
    fit = gl.vanishing_order(values, grid, cfg["vanish"]["radii"])
    rep.results["vanish"] = fit
    rep.check("slope_finite", bool(np.isfinite(fit.slope)), fit.slope,
              identity="int_{B_r} |u|^2 = O(r^N)")


def _mark_failed(rep, err):
    """Keep exit 0 <=> no failed check when a command aborts."""
    if not rep.n_failed:
        rep.check("completed", False, type(err).__name__)


def run(args):
    """Execute one command; returns (report or None, exit code)."""
    try:
        cfg = _load(args)
    except AnisoredError as e:
        print(f"anisored: {e}", file=sys.stderr)
        return None, e.exit_code
    rep = Report(args.command, cfg.echo())
    try:
        if args.command == "check":
            cmd_check(cfg, rep)
        elif args.command == "factorize":
            cmd_factorize(cfg, rep)
        elif args.command == "reduce":
            cmd_reduce(cfg, rep, args.dump)
        elif args.command == "verify":
            cmd_verify(cfg, rep)
        elif args.command == "example5":
            cmd_example5(cfg, rep)
        elif args.command == "carleman":
            cmd_carleman(cfg, rep)
        else:
            cmd_vanish(cfg, rep, args.field)
    except AnisoredError as e:
        rep.error = {"type": type(e).__name__, "message": str(e), "exit_code": e.exit_code}
        _mark_failed(rep, e)
        print(f"anisored: {type(e).__name__}: {e}", file=sys.stderr)
        return rep, e.exit_code
    except Exception as e:  # anything else is a bug
        rep.error = {"type": type(e).__name__, "message": str(e), "exit_code": EXIT_INTERNAL}
        _mark_failed(rep, e)
        print(f"anisored: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return rep, EXIT_INTERNAL
    return rep, (EXIT_CHECK_FAILED if rep.n_failed else EXIT_OK)


def main(argv=None):
    args = build_parser().parse_args(argv)
    rep, code = run(args)
    if rep is not None:
        text = rep.dumps(timestamp=not args.no_timestamp)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
