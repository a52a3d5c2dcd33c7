"""The twelve acceptance criteria, each printing one PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -s`` to see the
lines inline; a normal run repeats them in the terminal summary.
"""
import json
import time

import numpy as np
import pytest

from anisored import algebra2 as alg
from anisored import checkers as ck
from anisored import cli
from anisored import gridlab as gl
from anisored import quadpoly as qp
from anisored import reduction as rd
from anisored.errors import HypothesisViolated
from anisored.fields import Grid2, PolyField
from helpers import ACCEPTANCE, SQ2, ex5, iso_tensor, random_poly, varying_tensor

PI = np.pi


def record(n, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def corpus():
    t0 = time.perf_counter()
    tensors = ck.random_corpus(100, seed=0) + [ex5(2, 1, 1, 2), ex5(2, 0, 1, 1)]
    polys = [qp.QuadMatPoly.from_tensor(t.a) for t in tensors]
    facts = [qp.right_divisor(p) for p in polys]
    return polys, facts, time.perf_counter() - t0


def test_1_factorization(corpus):
    polys, facts, elapsed = corpus
    worst = max(qp.verify_factorization(p, f) for p, f in zip(polys, facts))
    record(1, worst <= 1e-9 and elapsed < 10,
           f"factorization residual {worst:.2e} <= 1e-9 over {len(polys)} tensors, {elapsed:.2f} s < 10 s")


def test_2_quadratic_equation(corpus):
    polys, facts, _ = corpus
    worst = 0.0
    for p, f in zip(polys, facts):
        t = -f.x_div
        inv = alg.inverse2(p.lam11)
        r = np.linalg.norm(t @ t - inv @ p.lam12 @ t + inv @ p.lam22, 2)
        worst = max(worst, r / (1 + np.linalg.norm(t, 2) ** 2))
    record(2, worst <= 1e-9, f"|T^2 - L11^-1 L12 T + L11^-1 L22| / (1 + |T|^2) = {worst:.2e} <= 1e-9")


def test_3_spectrum_structure(corpus):
    polys, _, _ = corpus
    conj, gap_ok, n_simple = 0.0, True, 0
    for p in polys:
        t, s = rd.compute_t_s(p)
        et, es = np.sort_complex(np.linalg.eigvals(t)), np.linalg.eigvals(s)
        d = max(min(abs(z - np.conj(w)) for w in es) for z in et)
        conj = max(conj, d / (1 + np.max(np.abs(et))))
        if qp.is_simple(p).simple:
            n_simple += 1
            gap = min(abs(z - w) for z in et for w in es)
            gap_ok = gap_ok and gap > 1e-6
    record(3, conj <= 1e-8 and gap_ok,
           f"Spec(S) vs conj Spec(T) {conj:.2e} <= 1e-8; gap > 1e-6 on all {n_simple} simple tensors")


def test_4_sylvester(corpus):
    polys, _, _ = corpus
    rng = np.random.default_rng(4)
    worst = 0.0
    for p in polys:
        t, s = rd.compute_t_s(p)
        m = rd.compute_m(p, rng.normal(size=(2, 2)), rng.normal(size=(2, 2)), t,
                         np.zeros((2, 2)), np.zeros((2, 2)))
        psi = rd.solve_sylvester(t, s, m)
        worst = max(worst, rd.sylvester_residual(psi, t, s, m))
    a = np.diag([1j, 2j])
    psi = rd.solve_sylvester(a, -a, np.eye(2))
    diag_err = float(np.max(np.abs(psi - np.diag([1j / 2, 1j / 4]))))
    record(4, worst <= 1e-10 and diag_err <= 1e-12,
           f"Sylvester residual {worst:.2e} <= 1e-10; analytic case error {diag_err:.1e} <= 1e-12")


def test_5_conjugate_diagonal(corpus):
    polys, _, _ = corpus
    worst = 0.0
    for p in polys:
        t, s = rd.compute_t_s(p)
        p1, p2 = rd.assemble_diagonal(t, s, tol=np.inf)
        worst = max(worst, max(abs(b - np.conj(a)) for a, b in zip(p1, p2)))
    record(5, worst <= 1e-9, f"|P2 coefficients - conj P1 coefficients| = {worst:.2e} <= 1e-9")


def test_6_operator_identities():
    rng = np.random.default_rng(6)
    systems = [ex5(2, 0, 1, 1), ex5(2, 1, 1, 2),
               ex5(2, 1, 1, 2, rng.normal(size=(2, 2, 2)), rng.normal(size=(2, 2)))]
    row2 = diag = 0.0
    for t in systems:
        red = rd.PointReduction(t, (0.0, 0.0))
        for _ in range(50):
            u = random_poly(rng, 3, 2)
            b = gl.block_residual(red, u)
            row2 = max(row2, b.row1, b.row2)
            diag = max(diag, gl.diagonal_residual(red, u=u))
    study = gl.refinement_study(varying_tensor(np.random.default_rng(1)), cli.manufactured_u,
                                Grid2(0.25, 17), levels=3)
    orders = {k: gl.order_ok(study, k) for k in ("block_row2", "diagonal")}
    ok = row2 <= 1e-10 and diag <= 1e-10 and all(o[0] for o in orders.values())
    record(6, ok, f"block {row2:.1e}, diagonal {diag:.1e} <= 1e-10 (exact, 3 x 50 u); grid orders "
                  + ", ".join(f"{k} {o[1]:.2f}" for k, o in orders.items()) + " >= 1.8")


def test_7_contour_vs_residue():
    worst = 0.0
    for params in ((2, 0, 1, 1), (2, 1, 1, 2)):
        p = qp.QuadMatPoly.from_tensor(ck.example5_tensor(*params))
        s = qp.split_spectrum(p)
        m0, m1, _ = qp.contour_moments(p, s)
        r0, r1 = qp.residue_moments(p, s)
        worst = max(worst, alg.norm2(m0 - r0) / alg.norm2(r0), alg.norm2(m1 - r1) / alg.norm2(r1))
        if params == (2, 0, 1, 1):
            c0 = np.diag([PI / SQ2, PI])
            c1 = np.diag([1j * PI / 2, 1j * PI])
            closed = max(alg.norm2(m0 - c0) / alg.norm2(c0), alg.norm2(m1 - c1) / alg.norm2(c1))
    record(7, worst <= 1e-9 and closed <= 1e-9,
           f"contour vs residue {worst:.1e}, closed forms {closed:.1e} (relative, <= 1e-9)")


def test_8_family_hypotheses():
    ok, notes = True, []
    for params in ((2, 1, 1, 2), (2, 0, 1, 1)):
        t, _ = ck.example5(ck.Example5Params(*params))
        good = ck.check_strong_ellipticity(t).strong_elliptic and ck.check_simple_domain(t).simple
        ok = ok and good
    for params, needle in (((2, 1, 1, 0.3), "3/8"), ((2, 0, 1, 0.5), "c^2/a")):
        try:
            ck.example5(ck.Example5Params(*params))
            ok = False
        except HypothesisViolated as e:
            ok = ok and needle in str(e) + e.inequality
            notes.append(str(e))
    record(8, ok, "accepts (2,1,1,2), (2,0,1,1) as elliptic and simple; rejects: " + "; ".join(notes))


def test_9_simple_detector():
    iso = ck.check_simple_domain(iso_tensor()).simple
    fam = [ck.check_simple_domain(ex5(*p)).simple for p in ((2, 0, 1, 1), (2, 1, 1, 2))]
    record(9, not iso and all(fam), f"isotropic simple={iso}; family instances simple={fam}")


def test_10_vanishing_order():
    g = Grid2(0.5, 129)
    radii = [0.4, 0.2, 0.1, 0.05]
    x1, x2 = g.nodes()
    s_const = gl.vanishing_order(np.ones_like(x1), g, radii).slope
    s_r2 = gl.vanishing_order(x1 ** 2 + x2 ** 2, g, radii).slope
    local = gl.vanishing_order(gl.flat_state(g, 1.0, ncomp=1)[..., 0], g, radii).local_slopes
    shrinking = local[::-1]
    mono = all(b > a for a, b in zip(shrinking, shrinking[1:]))
    record(10, abs(s_const - 2) <= 0.1 and abs(s_r2 - 6) <= 0.1 and mono,
           f"slopes const {s_const:.3f}, |x|^2 {s_r2:.3f}; flat slopes as r shrinks "
           + ", ".join(f"{v:.1f}" for v in shrinking))


def test_11_carleman():
    t0 = time.perf_counter()
    g = Grid2(0.5, 129)
    data = rd.PointReduction(ex5(2, 0, 1, 1), (0.0, 0.0)).data()
    w = gl.flat_state(g, 1.0, PolyField.from_monomials([(1, 0, 1.0)]))
    rows = gl.carleman_ratio(data, w, gl.CarlemanProbe([20, 40, 80, 160], 1.0, 0.05), g)
    direct = gl.carleman_ratio(data, w, gl.CarlemanProbe([20], 1.0, 0.05, weight_mode="direct"), g)[0]
    ratios = [r.ratio for r in rows]
    spread = max(ratios) / min(ratios)
    dev = max(abs(rows[0].lhs / direct.lhs - 1), abs(rows[0].rhs / direct.rhs - 1))
    elapsed = time.perf_counter() - t0
    record(11, all(np.isfinite(ratios)) and spread <= 10 and dev <= 1e-10 and elapsed < 30,
           "ratios " + ", ".join(f"{v:.3g}" for v in ratios)
           + f"; spread {spread:.2f} <= 10; log vs direct {dev:.1e}; {elapsed:.2f} s < 30 s")


def test_12_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "coefficients": {"mode": "constant", "A": ck.example5_tensor(2, 1, 1, 2).tolist(),
                         "B": np.full((2, 2, 2), 0.2).tolist()},
        "verify": {"n_random": 10}}))
    same = True
    for cmd in ("check", "factorize", "reduce", "verify", "carleman"):
        outs = []
        for k in range(2):
            out = tmp_path / f"{cmd}{k}.json"
            cli.main([cmd, "--config", str(cfg), "--grid-n", "33", "--out", str(out), "--no-timestamp"])
            outs.append(out.read_bytes())
        same = same and outs[0] == outs[1]
    record(12, same, "check, factorize, reduce, verify, carleman reports byte-identical across runs")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
