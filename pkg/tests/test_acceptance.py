"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are written to the
terminal even when output capture is on.
"""

import math
import time

import numpy as np
import pytest

from zermelo.cli import main
from zermelo.core import fd_check, jacobian, log
from zermelo.hypersurfaces import (
    catalog,
    induced_metric,
    unit_normals,
    verify_shift,
)
from zermelo.isoparametric import (
    ISOPARAMETRIC,
    NEITHER,
    Setting,
    assess,
    builtin_field,
    check_transfer,
    homogeneous_field,
    parsed_field,
    sphere_setting,
    survey,
)
from zermelo.randers import randers_from
from zermelo.riemannian import (
    SpaceForm,
    affine_field,
    chart_to_sphere,
    custom_field,
    projective_field,
    sphere_rotation_field,
)
from zermelo.scenario import shipped_scenarios

SEED = 20240601


def rot(dim, pairs):
    Q = np.zeros((dim, dim))
    for (i, j), v in pairs.items():
        Q[i, j], Q[j, i] = v, -v
    return Q


def emit(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def admissible(m, rng, count, radius, margin=0.05):
    out = []
    while len(out) < count:
        for x in m.nav.space.sample(rng, 2 * count, radius):
            if m.nav.admissible(x, margin):
                out.append(x)
                if len(out) == count:
                    break
    return np.array(out)


def metric_scenarios():
    """Five navigation data sets covering every chart and wind family."""
    s2 = SpaceForm(2)
    s3 = SpaceForm(3)
    hyp = SpaceForm(3, -1.0, "poincare_ball")
    sph = SpaceForm(3, 1.0, "stereographic")
    bel = SpaceForm(2, -1.0, "beltrami")
    hyp_wind = custom_field(3, lambda z: np.array([0.2 + 0.1 * z[1], -0.15 * z[0] * z[2], 0.05 + 0.1 * z[0] ** 2]))
    return {
        "homothetic disk": (randers_from(s2, affine_field(2, k0=0.25)), 1.5),
        "rotating constant wind": (randers_from(s3, affine_field(3, Q=rot(3, {(0, 1): 0.2, (1, 2): -0.1}), e=[0.5, 0, 0.1])), 1.0),
        "hyperbolic custom wind": (randers_from(hyp, hyp_wind), 0.7),
        "sphere rotation": (randers_from(sph, sphere_rotation_field(sph, rot(4, {(0, 1): 0.3, (2, 3): 0.4}))), 2.0),
        "hyperbolic projective": (randers_from(bel, projective_field(2, -1.0, Q=rot(2, {(0, 1): 0.2}), e=[0.2, -0.1])), 0.8),
    }


# 1 -------------------------------------------------------------------------------------

def test_navigation_algebra(capsys):
    rng = np.random.default_rng(SEED)
    worst = [0.0, 0.0, 0.0]
    total = 0
    for name, (m, radius) in metric_scenarios().items():
        X = admissible(m, rng, 1000, radius)
        Y = rng.normal(size=X.shape)
        nb = m.evaluate_batch(X, Y)
        n = m.dim
        worst[0] = max(worst[0], float(np.max(np.abs(nb.F_nav - nb.F_ab) / nb.F_nav)))
        worst[1] = max(worst[1], float(np.max(np.abs(nb.det_a * nb.lam ** (n + 1) / nb.det_h - 1.0))))
        worst[2] = max(worst[2], float(np.max(np.abs(nb.sigma_bh - np.sqrt(nb.det_h)))))
        total += len(X)
    ok = worst[0] < 1e-12 and worst[1] < 1e-10 and worst[2] < 1e-10
    emit(capsys, 1, ok, f"{total} points in 5 scenarios; F forms {worst[0]:.1e}, det(a) {worst[1]:.1e}, sigma {worst[2]:.1e}")
    assert ok


# 2 -------------------------------------------------------------------------------------

def field_corpus(dim):
    texts = ["x1", "x1^2 + x2^2", "x1^2 - x2", "x1*x2 + 0.3*x2^3 + exp(0.2*x1)", "sqrt(1 + x1^2 + x2^2) - 0.5*x1"]
    if dim == 3:
        texts.append("x1*x3 - x2^2 + 0.2*x3")
    return [parsed_field(t, dim) for t in texts]


def corpus_for(name, m):
    fields = field_corpus(m.dim)
    if name == "sphere rotation":
        quad = homogeneous_field("x1^2 + x2^2 - x3^2 - x4^2", 2, 4)
        fields.append(lambda z, q=quad, sp=m.nav.space: q(chart_to_sphere(sp, z)))
    return fields


def test_calculus_identities(capsys):
    rng = np.random.default_rng(SEED + 2)
    err = dict(g=0.0, N=0.0, leg=0.0, dual=0.0, lap=0.0)
    for name, (m, radius) in metric_scenarios().items():
        fields = corpus_for(name, m)
        for x in admissible(m, rng, 4, 0.8 * radius):
            y = rng.normal(size=m.dim)
            err["g"] = max(err["g"], float(np.max(np.abs(m.fundamental_tensor(x, y) - m.fundamental_tensor_autodiff(x, y)))))
            _, dG = jacobian(lambda z: m.spray_generic(x, z), y)
            err["N"] = max(err["N"], float(np.max(np.abs(m.nonlinear_connection(x, y) - np.asarray(dG, dtype=float)))))
            err["leg"] = max(err["leg"], float(np.max(np.abs(m.legendre_inv(x, m.legendre(x, y)) - y))))
            for f in fields:
                _, df = jacobian(f, x)
                df = np.asarray(df, dtype=float)
                err["dual"] = max(err["dual"], abs(m.F(x, m.gradient(f, x)) - m.dual(x, df)))
                err["lap"] = max(err["lap"], abs(m.laplacian_divergence(f, x) - m.laplacian_trace(f, x)))
    ok = err["g"] < 1e-9 and err["N"] < 1e-8 and err["leg"] < 1e-10 and err["dual"] < 1e-10 and err["lap"] < 1e-6
    emit(capsys, 2, ok, ", ".join(f"{k} {v:.1e}" for k, v in err.items()))
    assert ok


# 3 -------------------------------------------------------------------------------------

def test_s_curvature(capsys):
    rng = np.random.default_rng(SEED + 3)
    worst = {}
    for k0 in (0.0, 0.25, 0.45):
        m = randers_from(SpaceForm(2), affine_field(2, k0=k0, Q=rot(2, {(0, 1): 0.2}), e=[0.1, -0.05]))
        X = admissible(m, rng, 500, 0.7)
        worst[k0] = max(abs(m.s_curvature(x, y) - 3 * k0 * m.F(x, y)) for x, y in zip(X, rng.normal(size=X.shape)))
    sp = SpaceForm(2, 1.0, "stereographic")
    m = randers_from(sp, sphere_rotation_field(sp, rot(3, {(0, 1): 0.3, (0, 2): -0.2, (1, 2): 0.25})))
    X = admissible(m, rng, 500, 2.0)
    killing = max(abs(m.s_curvature(x, y)) for x, y in zip(X, rng.normal(size=X.shape)))
    ok = max(worst.values()) < 1e-6 and killing < 1e-6
    detail = ", ".join(f"k0={k}: {v:.1e}" for k, v in worst.items())
    emit(capsys, 3, ok, f"|S - (n+1)k0 F| {detail}; Killing on sphere {killing:.1e}")
    assert ok


# 4 -------------------------------------------------------------------------------------

def test_flag_curvature(capsys):
    rng = np.random.default_rng(SEED + 4)
    sph = SpaceForm(2, 1.0, "stereographic")
    bel = SpaceForm(2, -1.0, "beltrami")
    cases = [
        ("flat homothetic k0=1/4", randers_from(SpaceForm(2), affine_field(2, k0=0.25)), 1.2, -1 / 16),
        ("flat homothetic k0=0.3 with rotation", randers_from(SpaceForm(2), affine_field(2, k0=0.3, Q=rot(2, {(0, 1): 0.2}), e=[0.1, 0])), 0.9, -0.09),
        ("flat Killing", randers_from(SpaceForm(2), affine_field(2, Q=rot(2, {(0, 1): 0.3}), e=[0.2, 0.1])), 1.0, 0.0),
        ("sphere Killing", randers_from(sph, sphere_rotation_field(sph, rot(3, {(0, 1): 0.3, (1, 2): 0.2}))), 2.0, 1.0),
        ("hyperbolic Killing", randers_from(bel, projective_field(2, -1.0, Q=rot(2, {(0, 1): 0.2}), e=[0.2, -0.1])), 0.8, -1.0),
    ]
    lines, ok = [], True
    for name, m, radius, expected in cases:
        X = admissible(m, rng, 200, radius)
        K = np.array([m.flag_curvature(x, y, v) for x, y, v in zip(X, rng.normal(size=X.shape), rng.normal(size=X.shape))])
        spread, dev = float(K.max() - K.min()), abs(float(K.mean()) - expected)
        ok &= spread < 1e-3 and dev < 1e-4
        lines.append(f"{name} spread {spread:.1e} dev {dev:.1e}")
    emit(capsys, 4, ok, "; ".join(lines))
    assert ok


# 5 and 6 --------------------------------------------------------------------------------

def hypersurface_grid():
    flat = SpaceForm(3)
    Q = rot(3, {(0, 1): 0.25, (1, 2): -0.15})
    winds = {"constant": affine_field(3, e=[0.3, -0.2, 0.1]), "-x/2": affine_field(3, k0=0.25), "xQ": affine_field(3, Q=Q)}
    surfaces = {
        "hyperplane": catalog("hyperplane", flat, offset=0.1),
        "sphere r=1/2": catalog("hypersphere", flat, r=0.5),
        "sphere r=1": catalog("hypersphere", flat, r=1.0),
        "cylinder": catalog("cylinder", flat, m=1, r=0.5),
    }
    for sname, M in surfaces.items():
        for wname, W in winds.items():
            yield f"{sname}/{wname}", M, randers_from(flat, W)
    # on the sphere only rotations are Killing; constant and radial fields are not isotropic there
    for chart in ("stereographic", "beltrami"):
        sp = SpaceForm(3, 1.0, chart)
        M = catalog("clifford_torus", sp, m=1, r=1 / math.sqrt(2))
        yield f"clifford torus {chart}/xQ", M, randers_from(sp, sphere_rotation_field(sp, rot(4, {(0, 1): 0.3, (2, 3): 0.2})))


def test_principal_curvature_shift(capsys):
    rng = np.random.default_rng(SEED + 5)
    shift = angle = normal_der = 0.0
    cells = 0
    for name, M, m in hypersurface_grid():
        cells += 1
        for u in M.sample(rng, 4):
            for orientation in (1, -1):
                rep = verify_shift(M, m, u, orientation)
                shift = max(shift, rep.shift_residual)
                angle = max(angle, rep.principal_angle)
                normal_der = max(normal_der, rep.normal_derivative_residual)
    ok = shift < 1e-6 and angle < 1e-4 and normal_der < 1e-6
    emit(capsys, 5, ok, f"{cells} grid cells; shift {shift:.1e}, eigenspace angle {angle:.1e}, normal derivative {normal_der:.1e}")
    assert ok


def test_induced_metric_factor(capsys):
    rng = np.random.default_rng(SEED + 6)
    resid = factor_err = 0.0
    for name, M, m in hypersurface_grid():
        for u in M.sample(rng, 4):
            pair = unit_normals(M, m, u)
            im = induced_metric(M, m, u, pair)
            x = M(u)
            c = float(pair.n_h @ m.nav.space.metric(x) @ m.nav.W(x))
            resid = max(resid, im.residual)
            factor_err = max(factor_err, abs(im.factor - 1.0 / (1.0 + c)))
    flat = SpaceForm(2)
    instance = induced_metric(catalog("hyperplane", flat), randers_from(flat, affine_field(2, e=[0.5, 0.0])), [0.3]).factor
    ok = resid < 1e-8 and factor_err < 1e-12 and abs(instance - 2 / 3) < 1e-12
    emit(capsys, 6, ok, f"conformal residual {resid:.1e}, factor formula {factor_err:.1e}, hyperplane instance {instance:.15f}")
    assert ok


# 7 and 8 ------------------------------------------------------------------------------

def criteria_settings():
    flat2, flat3 = SpaceForm(2), SpaceForm(3)
    Qh = rot(3, {(0, 1): 0.3})
    Qs = rot(3, {(0, 1): 0.5})
    Qb = rot(3, {(1, 2): 0.4})
    Qg = rot(3, {(0, 1): 0.3, (0, 2): -0.2, (1, 2): 0.25})
    return {
        "height with rotation and translation": (
            Setting(builtin_field("height", 3), randers_from(flat3, affine_field(3, Q=Qh, e=[0.1, 0.0, 0.2])), 1.0), ISOPARAMETRIC),
        "sphere height with rotation": (sphere_setting(homogeneous_field("x3", 1, 3), Qs), ISOPARAMETRIC),
        "block quadric on S2": (sphere_setting(homogeneous_field("x1^2 - x2^2 - x3^2", 2, 3), Qb), ISOPARAMETRIC),
        "x1 with constant wind": (Setting(builtin_field("x1", 2), randers_from(flat2, affine_field(2, e=[0.5, 0.0])), 1.0), ISOPARAMETRIC),
        "|x|^2 with homothetic wind": (Setting(builtin_field("norm2", 2), randers_from(flat2, affine_field(2, k0=0.25)), 1.5), ISOPARAMETRIC),
        "parabola": (Setting(builtin_field("parabola", 2), randers_from(flat2, affine_field(2)), 1.0), NEITHER),
        "cubic on S2 with generic rotation": (sphere_setting(homogeneous_field("x1*x2*x3", 3, 3), Qg), NEITHER),
        "|x|^2 with generic constant wind": (Setting(builtin_field("norm2", 2), randers_from(flat2, affine_field(2, e=[0.3, 0.1])), 1.2), NEITHER),
    }


_SURVEYS = {}


def surveys():
    if not _SURVEYS:
        for name, (setting, expected) in criteria_settings().items():
            _SURVEYS[name] = (survey(setting, count=10, seed=SEED), expected)
    return _SURVEYS


def test_criteria_agreement(capsys):
    lines, ok = [], True
    for name, (sv, expected) in surveys().items():
        a = assess(sv)
        finsler = {k: v for k, v in a.verdicts.items() if k != "riemannian"}
        same = set(finsler.values()) == {expected}
        ok &= same and a.agree
        lines.append(f"{name}: {'/'.join(f'{k}={v}' for k, v in finsler.items())}")
        if name == "block quadric on S2":
            rep = a.reports["riemannian"]
            ts = rep.levels
            a_err = float(np.max(np.abs(rep.first.means - 2 * np.sqrt(1 - ts**2))))
            b_err = float(np.max(np.abs(rep.second.means - (-2 - 6 * ts))))
            ok &= a_err < 1e-5 and b_err < 1e-4
            lines.append(f"quadric profiles a {a_err:.1e}, b {b_err:.1e}")
    emit(capsys, 7, ok, f"{len(surveys())} scenarios; " + "; ".join(lines))
    assert ok


def transfer_reports():
    out = {}
    for name, (sv, expected) in surveys().items():
        if expected != ISOPARAMETRIC or not sv.setting.field_class().isotropic:
            continue
        out[name] = check_transfer(sv)
    return out


def test_transfer_profiles(capsys):
    """a~ = a + phi and the profile b~ = (a + phi)(b/a - 2 n k0 + phi')."""
    reps = transfer_reports()
    ra = max(r.a_tilde_residual for r in reps.values())
    rb = max(r.b_tilde_residual for r in reps.values())
    assert len(reps) >= 4 and all(r.passes for r in reps.values())
    assert ra < 1e-6 and rb < 1e-4


@pytest.mark.xfail(strict=True, reason="the short b~ formula is exact only where phi vanishes")
def test_transfer_short_formula(capsys):
    reps = transfer_reports()
    ra = max(r.a_tilde_residual for r in reps.values())
    short = {k: r.b_tilde_residual_short for k, r in reps.items()}
    corrected = max(r.b_tilde_residual for r in reps.values())
    ok = ra < 1e-6 and max(short.values()) < 1e-4
    bad = ", ".join(f"{k} {v:.2e}" for k, v in short.items() if v >= 1e-4)
    emit(
        capsys,
        8,
        ok,
        f"{len(reps)} passes; a~ = a + phi {ra:.1e}; b~ = b - a(2nk0 - phi') fails on [{bad}]; "
        f"(a + phi)(b/a - 2nk0 + phi') holds to {corrected:.1e}",
    )
    assert ok


# 9 -------------------------------------------------------------------------------------

def test_determinism_and_oracles(capsys, tmp_path):
    t0 = time.perf_counter()
    selftest_ok = main(["selftest"]) == 0
    shipped = shipped_scenarios()
    identical = True
    for name in ("funk_like_disk", "sphere_quadric"):
        blobs = []
        for run in ("a", "b"):
            d = tmp_path / f"{name}_{run}"
            d.mkdir()
            main(["verify", str(shipped[name]), "--levels", "3", "--samples", "6", "--seed", "7", "--csv-dir", str(d)])
            blobs.append((d / f"{name}.csv").read_bytes())
        identical &= blobs[0] == blobs[1] and len(blobs[0]) > 0

    rng = np.random.default_rng(SEED + 9)
    fd = 0.0
    for name, (m, radius) in metric_scenarios().items():
        for x in admissible(m, rng, 3, 0.8 * radius):
            y = rng.normal(size=m.dim)
            for f in corpus_for(name, m):
                fd = max(fd, fd_check(f, x).max_error)
            fd = max(fd, fd_check(lambda z: 0.5 * m.F_nav_generic(x, z) ** 2, y).max_error)
            fd = max(fd, fd_check(lambda z: log(m.bh_density_generic(z)), x).max_error)
    ok = selftest_ok and identical and fd < 1e-6
    emit(capsys, 9, ok, f"selftest {'ok' if selftest_ok else 'failed'}, CSV identical {identical}, FD {fd:.1e} ({time.perf_counter() - t0:.0f}s)")
    assert ok
