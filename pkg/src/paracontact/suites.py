"""Named verification suites run over seeded random points.

Each suite turns module-level checks into cases of one ``ResidualReport``.
Numerical failures inside a case are recorded as failed cases tagged with the
exception name; they never abort the suite.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import conformal, cr_analogue, curvature, models, yamabe
from .connection import solve_connection, verify_axioms
from .errors import ChartDegenerate, ChartDomain, FrameDegenerate, ModeError, NearSingularSet, ParacontactError
from .polynomials import parse_expression, random_polynomial
from .report import ResidualReport, normalized_residual
from .structures import PARACONTACT, StructureSpec, check_compatibility, evaluate
from .tensors import values

__all__ = ["SUITES", "RunConfig", "ConfigError", "run_suite", "sample_structure_points"]

log = logging.getLogger("paracontact")

MAX_TRIES = 100
DEFAULT_FACTORS = 3


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    suite: str
    n: int = 1
    order: int = 4
    tol: float = 1e-7
    seed: int = 42
    points: int = 10
    u: list = field(default_factory=list)  # expressions or monomial lists
    spec: StructureSpec | None = None
    out: str | None = None
    eps: float = 1.0

    def validate(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(sorted(SUITES))}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.order < 2:
            raise ConfigError("jet order must be at least 2")
        if self.points < 1:
            raise ConfigError("need at least one point")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if self.spec is not None and self.spec.n != self.n:
            self.n = self.spec.n
        return self


# -- sampling -------------------------------------------------------------------


def _usable(spec: StructureSpec, p) -> bool:
    if not spec.in_domain(p):
        return False
    try:
        evaluate(spec, p, 1)
    except (ChartDomain, ChartDegenerate, FrameDegenerate):
        return False
    return True


def sample_structure_points(spec: StructureSpec, rng, count: int, radius: float = 1.0, accept=None):
    """Uniform points in ``[-radius, radius]^m`` where ``spec`` evaluates, resampled up to 100 times."""
    pts = []
    for _ in range(count):
        for _attempt in range(MAX_TRIES):
            p = rng.uniform(-radius, radius, spec.dim)
            if _usable(spec, p) and (accept is None or accept(p)):
                pts.append(p)
                break
        else:
            raise NearSingularSet(f"no usable point of {spec.name} found in {MAX_TRIES} tries")
    return pts


def _factors(cfg: RunConfig, spec: StructureSpec, rng):
    """Conformal factors as ``(label, Polynomial)``: the user's, else seeded random quadratics."""
    if cfg.u:
        out = []
        for k, u in enumerate(cfg.u):
            try:
                poly = parse_expression(u, spec.coordinates) if isinstance(u, str) else u
            except ValueError as exc:
                raise ConfigError(f"bad conformal factor {u!r}: {exc}") from exc
            out.append((f"u{k}", poly))
        return out
    return [
        (f"u{k}", random_polynomial(rng, spec.dim, degree=2, scale=0.3))
        for k in range(DEFAULT_FACTORS)
    ]


# -- case bookkeeping -----------------------------------------------------------


class _Runner:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.rep = ResidualReport(cfg.suite)
        self.rng = np.random.default_rng(cfg.seed)

    def case(self, label: str, index: int, point, fn):
        """Run ``fn`` (returning a report, a float or a dict of floats) as cases under ``label``."""
        try:
            out = fn()
        except (ParacontactError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            log.info("%s[%d]: %s: %s", label, index, type(exc).__name__, exc)
            self.rep.add(label, math.nan, self.cfg.tol, point, index, error=type(exc).__name__)
            return
        if isinstance(out, ResidualReport):
            self.rep.extend(out, prefix=label + ".", point=point, index=index)
        elif isinstance(out, dict):
            for k, v in out.items():
                tol = v[1] if isinstance(v, tuple) else self.cfg.tol
                val = v[0] if isinstance(v, tuple) else v
                self.rep.add(f"{label}.{k}", val, tol, point, index)
        else:
            self.rep.add(label, out, self.cfg.tol, point, index)
        log.debug("%s[%d] done", label, index)

    def points(self, spec, count=None, radius=1.0, accept=None):
        return sample_structure_points(spec, self.rng, count or self.cfg.points, radius, accept)


def _retol(rep: ResidualReport, tol: float) -> ResidualReport:
    for c in rep.cases:
        c.tolerance = tol
    return rep


# -- suites ---------------------------------------------------------------------


def _builtin_paracontact(cfg):
    return [models.heisenberg_spec(cfg.n), models.hyperboloid_spec(cfg.n)]


def _suite_compat(r: _Runner):
    cfg = r.cfg
    specs = [cfg.spec] if cfg.spec is not None else _builtin_paracontact(cfg) + [
        models.perturbed_hyperboloid_spec(cfg.n, cfg.seed)
    ]
    for spec in specs:
        for i, p in enumerate(r.points(spec)):
            r.case(spec.name, i, p, lambda: check_compatibility(evaluate(spec, p, cfg.order), cfg.tol))


def _zero_checks(spec, p, cfg):
    ev = evaluate(spec, p, cfg.order)
    conn = solve_connection(ev)
    curv = curvature.curvature_tensor(conn, ev)
    inv = curvature.invariant_tensors(curv, conn, ev, with_B=False)
    out = {
        "gamma": normalized_residual(conn.gamma),
        "tau": normalized_residual(conn.tau),
        "R": normalized_residual(curv.R),
        "scal": normalized_residual(curv.scal),
        "L": normalized_residual(inv.L),
        "PW": normalized_residual(inv.PW),
        "Wpc": normalized_residual(inv.Wpc),
    }
    if inv.F is not None:
        out["F"] = normalized_residual(inv.F)
    for c in verify_axioms(conn, ev, cfg.tol).cases:
        out["axioms." + c.name] = c.residual
    return out


def _suite_flat_group(r: _Runner):
    spec = models.heisenberg_spec(r.cfg.n)
    for i, p in enumerate(r.points(spec)):
        r.case(spec.name, i, p, lambda: _zero_checks(spec, p, r.cfg))


def _suite_hyperboloid(r: _Runner):
    cfg = r.cfg
    spec = models.hyperboloid_spec(cfg.n)

    def run(p):
        ev = evaluate(spec, p, cfg.order)
        conn = solve_connection(ev)
        curv = curvature.curvature_tensor(conn, ev)
        inv = curvature.invariant_tensors(curv, conn, ev, with_B=False)
        rep = ResidualReport()
        rep.extend(check_compatibility(ev, cfg.tol), prefix="compat.")
        rep.extend(verify_axioms(conn, ev, cfg.tol), prefix="axioms.")
        dS = values(ev.frame_derivative(curv.scal))
        rep.add("tau", normalized_residual(conn.tau), cfg.tol)
        rep.add("scal_constant", normalized_residual(dS, 0.0, [curv.scal]), cfg.tol)
        rep.add("Wpc", normalized_residual(inv.Wpc), cfg.tol)
        if inv.F is not None:
            rep.add("F", normalized_residual(inv.F), cfg.tol)
        return rep

    for i, p in enumerate(r.points(spec)):
        r.case(spec.name, i, p, lambda: run(p))


def _identities(spec, p, cfg):
    ev = evaluate(spec, p, cfg.order)
    conn = solve_connection(ev)
    curv = curvature.curvature_tensor(conn, ev)
    rep = curvature.curvature_identity_residuals(curv, conn, ev, cfg.tol)
    inv = curvature.invariant_tensors(curv, conn, ev, with_F=False, with_B=False)
    rep.extend(_retol(curvature.pw_trace_residuals(inv, ev), cfg.tol))
    return rep


def _suite_identities(r: _Runner):
    cfg = r.cfg
    if cfg.spec is not None:
        specs = [cfg.spec]
    else:
        base = models.hyperboloid_spec(cfg.n)
        specs = [base, models.perturbed_hyperboloid_spec(cfg.n, cfg.seed)]
        for label, u in _factors(cfg, base, r.rng):
            specs.append(conformal.deform(base, u, f"hyperboloid+{label}"))
    for spec in specs:
        for i, p in enumerate(r.points(spec, radius=0.5)):
            r.case(spec.name, i, p, lambda: _identities(spec, p, cfg))


def _suite_conformal_invariance(r: _Runner):
    cfg = r.cfg
    specs = [cfg.spec] if cfg.spec is not None else [models.heisenberg_spec(cfg.n), models.hyperboloid_spec(cfg.n)]
    if any(spec.mode != PARACONTACT for spec in specs):
        raise ConfigError("conformal-invariance needs a paracontact structure")
    used = 0
    for spec in specs:
        try:
            factors = _factors(cfg, spec, r.rng)
        except ConfigError as exc:
            # a user factor written in another chart's coordinates
            log.info("skipping %s: %s", spec.name, exc)
            continue
        used += 1
        for label, u in factors:
            f = conformal.ConformalFactor(u, spec.dim)
            name = f"{spec.name}.{label}"
            for i, p in enumerate(r.points(spec, radius=0.5)):
                r.case(name + ".wpc_invariance", i, p, lambda: conformal.wpc_invariance_residual(spec, f, p, cfg.order))
                r.case(
                    name + ".laws",
                    i,
                    p,
                    lambda: _retol(conformal.transformation_law_residuals(spec, f, p, cfg.order), cfg.tol),
                )
    if not used:
        raise ConfigError(f"no structure has the coordinates used in {cfg.u}")


def _suite_flatness(r: _Runner):
    cfg = r.cfg
    base = models.heisenberg_spec(cfg.n)
    for label, u in _factors(cfg, base, r.rng):
        spec = conformal.deform(base, u, f"heisenberg+{label}")

        def run(p):
            ev = evaluate(spec, p, max(cfg.order, 4))
            conn = solve_connection(ev)
            inv = curvature.invariant_tensors(curvature.curvature_tensor(conn, ev), conn, ev, with_B=False)
            out = {"Wpc": normalized_residual(inv.Wpc)}
            if inv.F is not None:
                out["F"] = normalized_residual(inv.F)
            return out

        for i, p in enumerate(r.points(spec, radius=0.5)):
            r.case(spec.name, i, p, lambda: run(p))


def _suite_integrability(r: _Runner):
    cfg = r.cfg
    order = max(cfg.order, 5)
    if order != cfg.order:
        log.info("integrability needs jet order 5; using %d", order)
    specs = [cfg.spec] if cfg.spec is not None else []
    if not specs:
        for base in (models.heisenberg_spec(cfg.n), models.hyperboloid_spec(cfg.n)):
            for label, u in _factors(cfg, base, r.rng):
                specs.append(conformal.deform(base, u, f"{base.name}+{label}"))

    def run(spec, p):
        ev = evaluate(spec, p, order)
        conn = solve_connection(ev)
        curv = curvature.curvature_tensor(conn, ev)
        inv = curvature.invariant_tensors(curv, conn, ev)
        return curvature.integrability_residuals(inv, curv, conn, ev, cfg.tol)

    for spec in specs:
        for i, p in enumerate(r.points(spec, count=max(1, cfg.points // 2), radius=0.5)):
            r.case(spec.name, i, p, lambda: run(spec, p))


def _suite_cayley(r: _Runner):
    cfg = r.cfg
    spec = models.hyperboloid_spec(cfg.n)

    def off_sigma(q):
        P = models.hyperboloid_lift(q)
        return abs(abs(1.0 + P[0]) - abs(P[1])) > 0.05

    def run(q):
        P = models.hyperboloid_lift(q)
        rep = ResidualReport()
        rep.add("pullback", models.cayley_pullback_residual(q), cfg.tol)
        pcr = models.pcr_residuals(P)
        for c in pcr.cases:
            if c.name != "pcr_k0_uv_pairing":
                rep.add(c.name, c.residual, cfg.tol)
        return rep

    for i, q in enumerate(r.points(spec, accept=off_sigma)):
        r.case("hyperboloid", i, q, lambda: run(q))
    group = models.heisenberg_spec(cfg.n)
    for i, p in enumerate(r.points(group, accept=lambda p: models.xi_distance(p) > 0.1)):
        r.case(
            "inversion_involution",
            i,
            p,
            lambda: normalized_residual(models.inversion(models.inversion(p)), p),
        )


def _group_points(r: _Runner, functions):
    return yamabe.sample_points(r.rng, r.cfg.n, r.cfg.points, functions)


def _suite_yamabe(r: _Runner):
    cfg = r.cfg
    n = cfg.n
    phi = yamabe.phi_epsilon_function(n, cfg.eps)
    f = yamabe.f_function(n)
    for i, p in enumerate(_group_points(r, [phi, f])):
        r.case(f"{phi.name}.yamabe", i, p, lambda: yamabe.yamabe_residual(phi, n, p))
        r.case(
            f"{phi.name}.yamabe_reflected_convention",
            i,
            p,
            lambda: yamabe.yamabe_residual(phi, n, p, convention=yamabe.REFLECTED),
        )
        r.case("f.identity", i, p, lambda: yamabe.yamabe_residual(f, n, p, scale=4.0 * n * n))


def _kelvin_targets(n):
    def coord(k):
        return lambda X: X[k]

    t = 2 * n
    return [
        yamabe.GroupFunction(lambda X: 1.0, n, name="1"),
        yamabe.GroupFunction(coord(t), n, name="t"),
        yamabe.GroupFunction(coord(0), n, name="u1"),
        yamabe.GroupFunction(lambda X: X[0] * X[0] + X[n] * X[n], n, name="u1^2+v1^2"),
    ]


def _suite_kelvin(r: _Runner):
    cfg = r.cfg
    n = cfg.n
    phi = yamabe.phi_epsilon_function(n, cfg.eps)
    Kphi = yamabe.kelvin_function(phi, n)
    targets = [yamabe.kelvin_function(h, n) for h in _kelvin_targets(n)]
    for i, p in enumerate(_group_points(r, [Kphi] + targets)):
        for h in targets:
            r.case(f"{h.name}.harmonic", i, p, lambda: yamabe.harmonic_residual(h, p))
        r.case(f"{Kphi.name}.yamabe", i, p, lambda: yamabe.yamabe_residual(Kphi, n, p))
        KK = yamabe.kelvin_function(Kphi, n)
        r.case(
            f"{Kphi.name}.involution",
            i,
            p,
            lambda: abs(KK(p) - phi(p)) / max(1.0, abs(phi(p))),
        )


def _suite_cr(r: _Runner):
    cfg = r.cfg
    specs = [cfg.spec] if cfg.spec is not None else [models.cr_heisenberg_spec(cfg.n), models.sphere_spec(cfg.n)]
    order = max(cfg.order, 5) if cfg.n == 1 else cfg.order

    def run(spec, p):
        rep = ResidualReport()
        rep.extend(cr_analogue.webster_residuals(spec, p, order, cfg.tol))
        rep.extend(_retol(cr_analogue.sasakian_residuals(spec, p, order), cfg.tol))
        if spec.n == 1:
            rep.add("fcar", normalized_residual(cr_analogue.f_car_tensor(spec, p, order)), cfg.tol)
        return rep

    for spec in specs:
        if spec.mode == PARACONTACT:
            raise ConfigError("the cr suite needs a CR structure")
        pts = r.points(spec, radius=0.5)
        for i, p in enumerate(pts):
            r.case(spec.name, i, p, lambda: run(spec, p))
        if len(pts) > 1 and cfg.spec is None:
            scal = []
            for p in pts:
                conn, ev = cr_analogue.webster_connection(spec, p, 2)
                scal.append(float(values(curvature.curvature_tensor(conn, ev).scal)))
            r.rep.add(f"{spec.name}.scal_constant", normalized_residual(np.ptp(scal), 0.0, [np.array(scal)]), cfg.tol)


SUITES = {
    "compat": _suite_compat,
    "flat-group": _suite_flat_group,
    "hyperboloid": _suite_hyperboloid,
    "prop31": _suite_identities,
    "conformal-invariance": _suite_conformal_invariance,
    "flatness-criterion": _suite_flatness,
    "integrability": _suite_integrability,
    "cayley": _suite_cayley,
    "yamabe": _suite_yamabe,
    "kelvin": _suite_kelvin,
    "cr": _suite_cr,
}


def run_suite(cfg: RunConfig) -> ResidualReport:
    """Run one suite and, if ``cfg.out`` is set, write its JSON report."""
    cfg.validate()
    runner = _Runner(cfg)
    log.info("suite %s: n=%d order=%d tol=%g seed=%d points=%d", cfg.suite, cfg.n, cfg.order, cfg.tol, cfg.seed, cfg.points)
    try:
        SUITES[cfg.suite](runner)
    except ModeError as exc:
        raise ConfigError(str(exc)) from exc
    except NearSingularSet as exc:
        runner.rep.add("sampling", math.nan, cfg.tol, None, 0, error=type(exc).__name__)
    rep = runner.rep
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(rep.to_json() + "\n")
    return rep
