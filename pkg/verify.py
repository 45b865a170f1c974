import asyncio
import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

import config
import formulas
import geometry
from exact import ball_volume, binomial, sphere_area
from grassmann import (
    frame_for, kubota_check, mc_grassmann_integral, projection_mci_integrand,
    projection_volume_integrand,
)
from helpers import atomic_write_text, canonical_json, format_float
from reports import (
    DOCUMENTED, FAIL, KNOWN_DISCREPANCIES, PASS, CheckReport, exact_report,
    numeric_report, statistical_report,
)
from symbolic import (
    AtomKind, FormulaPoly, exact_bindings, mci_body, mci_proj, poly_eval,
    poly_substitute, quermass, rho, sigma, vol_proj, width,
)

logger = logging.getLogger("Verify")


class UnknownCheckError(KeyError):
    def __str__(self):
        return str(self.args[0])


class IncompleteConfigError(ValueError):
    def __init__(self, check_id, missing):
        self.check_id = check_id
        self.missing = list(missing)
        super().__init__(f"{check_id} is missing configuration: {', '.join(self.missing)}")


# ==========================================
# HELPERS
# ==========================================

def _body(cfg, dim=None):
    return geometry.load_body(cfg["body"], dim if dim is not None else cfg.get("n"))


def _rational(value):
    return Fraction(str(value))


def _is_rational_ball(spec):
    return isinstance(spec, dict) and spec.get("family") == "ball"


def _body_mci_bindings(body, atoms):
    grid = geometry.quadrature_grid(body.dim)
    values = {}
    for atom in atoms:
        if atom.kind is AtomKind.MCI_BODY:
            values[atom] = geometry.mean_curvature_integral(body, atom.indices[1], grid=grid)
    return values


def _quermass_bindings(n, values):
    return {quermass(n, k): values[k] for k in range(n + 1)}


def _ball_exact_values(n, r, radius, rho_value):
    """Exact atom values for the ball of rational radius R and its projections."""
    R = _rational(radius)
    values = {width(): 2 * R, rho(): _rational(rho_value), vol_proj(r): ball_volume(r) * R ** r}
    for t in range(r):
        values[mci_proj(r, t)] = sphere_area(r - 1) * R ** (r - 1 - t)
    for i in range(n):
        values[mci_body(n, i)] = sphere_area(n - 1) * R ** (n - 1 - i)
    return values


def _seed(cfg):
    return int(cfg["seed"]) if cfg.get("seed") is not None else config.DEFAULT_SEED


def _samples(cfg):
    return int(cfg["samples"]) if cfg.get("samples") is not None else config.MC_DEFAULT_SAMPLES


# ==========================================
# CHECKS
# ==========================================

def _check_thm1_internal(cfg):
    n, r, l = cfg["n"], cfg["r"], cfg["l"]
    rhs = poly_substitute(formulas.wc_expansion(n, r, l), formulas.santalo_bindings(n, r))
    return exact_report("thm1-internal", cfg, formulas.theorem1(n, r, l), rhs)


def _check_thm2_internal(cfg):
    n, r, l = cfg["n"], cfg["r"], cfg["l"]
    return exact_report("thm2-internal", cfg, formulas.theorem2(n, r, l), formulas.transfer_theorem1(n, r, l))


def _check_steiner_compose(cfg):
    n, i = cfg["n"], cfg["i"]
    sigma_poly = FormulaPoly.atom(sigma())
    lhs = FormulaPoly.zero()
    for j in range(n - i + 1):
        lhs += FormulaPoly.constant(binomial(n - i, j)) * formulas.steiner_quermass(n, i + j) * sigma_poly ** j
    rhs = formulas.steiner_quermass(n, i, distance=FormulaPoly.atom(rho()) + sigma_poly)
    return exact_report("steiner-compose", cfg, lhs, rhs)


def _check_ball_closure(cfg):
    n, s = cfg["n"], cfg["s"]
    R = _rational(cfg["radius"])
    values = {quermass(n, k): ball_volume(n) * R ** (n - k) for k in range(n + 1)}
    values[width()] = 2 * R
    lhs = poly_substitute(formulas.constant_width_reduce(n, s), exact_bindings(values))
    rhs = FormulaPoly.constant(ball_volume(n) * R ** (n - s))
    return exact_report("ball-closure", cfg, lhs, rhs)


def _check_ball_mci(cfg):
    n, i = cfg["n"], cfg["i"]
    body = geometry.ball(cfg["radius"], n)
    exact = geometry.ball_mci_exact(n, i, _rational(cfg["radius"]))
    return numeric_report("ball-mci", cfg, geometry.mean_curvature_integral(body, i), exact.to_float(),
                          config.CLOSED_FORM_REL_TOL, details={"rhs_exact": str(exact)})


def _check_barbier(cfg):
    body = _body(cfg, 2)
    perimeter = geometry.mean_curvature_integral(body, 0)
    return numeric_report("barbier", cfg, perimeter, np.pi * geometry.width(body, geometry.first_axis(2)),
                          config.CLOSED_FORM_REL_TOL)


def _check_steiner_volume(cfg):
    body = _body(cfg)
    n, rho_value = body.dim, float(cfg["rho"])
    lhs = geometry.volume(geometry.parallel(body, rho_value))
    bindings = _quermass_bindings(n, geometry.quermassintegrals(body))
    bindings[rho()] = rho_value
    rhs = poly_eval(formulas.steiner_volume(n), bindings)
    return numeric_report("steiner-volume", cfg, lhs, rhs, config.QUAD_REL_TOL)


def _check_steiner_quermass(cfg):
    body = _body(cfg)
    n, i, rho_value = body.dim, cfg["i"], float(cfg["rho"])
    lhs = geometry.quermassintegrals(geometry.parallel(body, rho_value))[i]
    bindings = _quermass_bindings(n, geometry.quermassintegrals(body))
    bindings[rho()] = rho_value
    rhs = poly_eval(formulas.steiner_quermass(n, i), bindings)
    return numeric_report("steiner-quermass", cfg, lhs, rhs, config.QUAD_REL_TOL)


def _check_mci_bridge(cfg):
    body = _body(cfg)
    n, i = body.dim, cfg["i"]
    fitted = geometry.steiner_fit_quermass(lambda d: geometry.volume(geometry.parallel(body, d)), n)
    rhs = poly_eval(formulas.mci_from_quermass(n, i), _quermass_bindings(n, fitted))
    return numeric_report("mci-bridge", cfg, geometry.mean_curvature_integral(body, i), rhs,
                          config.QUAD_REL_TOL, scale=max(abs(n * w) for w in fitted))


def _check_santalo(cfg):
    n, r, q = cfg["n"], cfg["r"], cfg["q"]
    proj = _body(cfg, r)
    lhs = geometry.flattened_mci(n, proj, q)
    fitted = geometry.steiner_fit_quermass(lambda d: geometry.flattened_parallel_volume(n, proj, d), n)
    rhs = n * fitted[q + 1]
    return numeric_report("santalo", cfg, lhs, rhs, config.QUAD_REL_TOL,
                          scale=max(abs(n * w) for w in fitted),
                          details={"lhs_formula": str(formulas.santalo_project(n, r, q))})


def _check_const_width(cfg):
    body = _body(cfg)
    n, s = body.dim, cfg["s"]
    W = geometry.quermassintegrals(body)
    bindings = _quermass_bindings(n, W)
    bindings[width()] = geometry.width(body, geometry.first_axis(n))
    rhs = poly_eval(formulas.constant_width_reduce(n, s), bindings)
    return numeric_report("const-width", cfg, W[s], rhs, config.QUAD_REL_TOL)


def _check_kubota(cfg):
    return kubota_check(_body(cfg), cfg["r"], _samples(cfg), _seed(cfg), configuration=cfg)


def _check_transfer_c4(cfg):
    body = _body(cfg)
    n, r, t = body.dim, cfg["r"], cfg["t"]
    samples, seed = _samples(cfg), _seed(cfg)
    estimate = mc_grassmann_integral(projection_mci_integrand(body, t), n, r, samples, seed, vectorized=True)
    poly = formulas.grassmann_mci_transfer(n, r, t)
    rhs = poly_eval(poly, _body_mci_bindings(body, poly.atoms()))
    return statistical_report("transfer-c4", cfg, estimate.mean, rhs, estimate.standard_error, samples, seed)


def _check_proj_vol_d2(cfg):
    body = _body(cfg)
    n, r = body.dim, cfg["r"]
    samples, seed = _samples(cfg), _seed(cfg)
    estimate = mc_grassmann_integral(projection_volume_integrand(body), n, r, samples, seed, vectorized=True)
    poly = formulas.projection_volume_integral(n, r)
    rhs = poly_eval(poly, _body_mci_bindings(body, poly.atoms()))
    return statistical_report("proj-vol-d2", cfg, estimate.mean, rhs, estimate.standard_error, samples, seed)


def _check_thm1_vs_oracle(cfg):
    n, r, l, rho_value = cfg["n"], cfg["r"], cfg["l"], float(cfg["rho"])
    body = _body(cfg)
    proj = geometry.project(body, frame_for(n, r, cfg.get("frame_seed")))
    poly = formulas.theorem1(n, r, l)
    bindings = geometry.projection_measures(proj, [a for a in poly.atoms() if a.kind in (AtomKind.MCI_PROJ, AtomKind.VOL_PROJ)])
    bindings[width()] = geometry.width(body, geometry.first_axis(n))
    bindings[rho()] = rho_value
    lhs = poly_eval(poly, bindings)
    rhs = geometry.parallel_flattened_mci_oracle(n, proj, rho_value, l)
    details = {}
    if _is_rational_ball(cfg["body"]):
        exact = poly_substitute(formulas.theorem1_residual(n, r, l),
                                exact_bindings(_ball_exact_values(n, r, cfg["body"]["radius"], rho_value)))
        details["residual_exact"] = str(exact.constant_value())
    return numeric_report("thm1-vs-oracle", cfg, lhs, rhs, config.ORACLE_REL_TOL, details=details)


def _check_thm2_vs_oracle(cfg):
    n, r, l, rho_value = cfg["n"], cfg["r"], cfg["l"], float(cfg["rho"])
    body = _body(cfg)
    samples, seed = _samples(cfg), _seed(cfg)
    poly = formulas.theorem2(n, r, l)
    bindings = _body_mci_bindings(body, poly.atoms())
    bindings[width()] = geometry.width(body, geometry.first_axis(n))
    bindings[rho()] = rho_value
    lhs = poly_eval(poly, bindings)

    oracle = poly_substitute(formulas.flattened_truth(n, r, l), formulas.santalo_bindings(n, r))

    def integrand(frames):
        volumes, mci = geometry.batch_projection_measures(body, frames)
        values = {vol_proj(r): volumes, rho(): rho_value}
        values.update({mci_proj(r, t): mci[:, t] for t in range(r)})
        return oracle.evaluate_many(values) * np.ones(len(frames))

    estimate = mc_grassmann_integral(integrand, n, r, samples, seed, vectorized=True)
    details = {}
    if _is_rational_ball(cfg["body"]):
        residual = poly_substitute(formulas.theorem1_residual(n, r, l), formulas.transfer_bindings(n, r))
        exact = poly_substitute(residual, exact_bindings(_ball_exact_values(n, r, cfg["body"]["radius"], rho_value)))
        details["residual_exact"] = str(exact.constant_value())
    return statistical_report("thm2-vs-oracle", cfg, lhs, estimate.mean, estimate.standard_error,
                              samples, seed, details=details)


def _check_steiner_volume_mc(cfg):
    body = _body(cfg)
    n, rho_value = body.dim, float(cfg["rho"])
    samples, seed = _samples(cfg), _seed(cfg)
    estimate, standard_error = geometry.mc_parallel_volume(body, rho_value, samples, seed)
    bindings = _quermass_bindings(n, geometry.quermassintegrals(body))
    bindings[rho()] = rho_value
    rhs = poly_eval(formulas.steiner_volume(n), bindings)
    return numeric_report("steiner-volume-mc", cfg, estimate, rhs, config.MEMBERSHIP_REL_TOL,
                          details={"standard_error": standard_error, "samples": samples, "seed": seed})


# ==========================================
# FIXTURES & SWEEPS
# ==========================================

BALL_FIXTURE = {"family": "ball", "radius": 1.0}
BALL_RADII = (0.5, 1.0, 2.0)

HARMONIC_2D_FIXTURES = (
    {"family": "odd_harmonic_2d", "halfwidth": 1.0, "harmonics": [{"degree": 3, "cos": 0.1}]},
    {"family": "odd_harmonic_2d", "halfwidth": 1.0, "harmonics": [{"degree": 3, "cos": 0.05}, {"degree": 5, "sin": 0.01}]},
    {"family": "odd_harmonic_2d", "halfwidth": 1.5, "harmonics": [{"degree": 3, "sin": 0.08}]},
)

HARMONIC_3D_FIXTURES = (
    {"family": "odd_harmonic_3d", "halfwidth": 1.0, "harmonics": [{"degree": 3, "order": 0, "coefficient": 0.02}]},
    {"family": "odd_harmonic_3d", "halfwidth": 1.0, "harmonics": [{"degree": 3, "order": 3, "coefficient": 0.02}]},
)


def _bodies(n):
    """(spec, n) pairs of fixture bodies living in dimension n."""
    specs = [BALL_FIXTURE] + list(HARMONIC_2D_FIXTURES if n == 2 else HARMONIC_3D_FIXTURES)
    return specs


def _triples(n_values):
    for n in n_values:
        for r in range(1, n):
            for l in range(n):
                yield n, r, l


def _sweep_exact_theorem(n_max):
    return [{"n": n, "r": r, "l": l} for n, r, l in _triples(range(2, n_max + 1))]


def _sweep_steiner_compose(n_max):
    return [{"n": n, "i": i} for n in range(1, n_max + 1) for i in range(n + 1)]


def _sweep_ball_closure(n_max):
    return [{"n": n, "s": s, "radius": 0.5} for n in range(1, n_max + 1) for s in range(n + 1)]


def _sweep_ball_mci(n_max):
    return [{"n": n, "i": i, "radius": R} for n in (2, 3) for R in BALL_RADII for i in range(n)]


def _sweep_barbier(n_max):
    return [{"body": spec} for spec in HARMONIC_2D_FIXTURES]


def _sweep_steiner_volume(n_max):
    return [{"n": n, "body": spec, "rho": rho_value}
            for n in (2, 3) for spec in _bodies(n) for rho_value in (0.25, 1.0)]


def _sweep_steiner_quermass(n_max):
    return [{"n": n, "body": spec, "rho": 0.5, "i": i} for n in (2, 3) for spec in _bodies(n) for i in range(n + 1)]


def _sweep_mci_bridge(n_max):
    return [{"n": n, "body": spec, "i": i} for n in (2, 3) for spec in _bodies(n) for i in range(n)]


def _sweep_santalo(n_max):
    configs = [{"n": n, "r": r, "q": q, "body": BALL_FIXTURE}
               for n in (2, 3, 4) for r in range(1, n) for q in range(n)]
    configs += [{"n": n, "r": 2, "q": q, "body": HARMONIC_2D_FIXTURES[0]} for n in (3, 4) for q in range(n)]
    return configs


def _sweep_const_width(n_max):
    return [{"n": n, "body": spec, "s": s} for n in (2, 3) for spec in _bodies(n) for s in range(n + 1)]


def _sweep_thm1_vs_oracle(n_max):
    return [{"n": n, "r": r, "l": l, "body": spec, "rho": 0.5}
            for n, r, l in _triples((2, 3)) for spec in _bodies(n)]


def _sweep_kubota(n_max):
    configs = [{"n": 3, "body": BALL_FIXTURE, "r": r} for r in (1, 2)]
    configs += [{"n": 2, "body": BALL_FIXTURE, "r": 1}, {"n": 2, "body": HARMONIC_2D_FIXTURES[0], "r": 1}]
    configs += [{"n": 3, "body": HARMONIC_3D_FIXTURES[1], "r": r} for r in (1, 2)]
    return configs


def _sweep_transfer_c4(n_max):
    configs = [{"n": 3, "body": BALL_FIXTURE, "r": 2, "t": t} for t in (0, 1)]
    configs += [{"n": 3, "body": BALL_FIXTURE, "r": 1, "t": 0}]
    configs += [{"n": 3, "body": HARMONIC_3D_FIXTURES[1], "r": 2, "t": t} for t in (0, 1)]
    return configs


def _sweep_proj_vol_d2(n_max):
    configs = [{"n": 3, "body": spec, "r": r} for spec in (BALL_FIXTURE, HARMONIC_3D_FIXTURES[1]) for r in (1, 2)]
    configs += [{"n": 2, "body": HARMONIC_2D_FIXTURES[0], "r": 1}]
    return configs


def _sweep_thm2_vs_oracle(n_max):
    return [{"n": n, "r": r, "l": l, "body": spec, "rho": 0.5}
            for n, r, l in _triples((2, 3)) for spec in (BALL_FIXTURE, _bodies(n)[1])]


def _sweep_steiner_volume_mc(n_max):
    return [{"n": 2, "body": BALL_FIXTURE, "rho": 0.5},
            {"n": 2, "body": HARMONIC_2D_FIXTURES[0], "rho": 0.5},
            {"n": 3, "body": BALL_FIXTURE, "rho": 0.25}]


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    run: object
    required: tuple
    kind: str
    reference: str
    sweep: object
    defaults: dict = field(default_factory=dict)


CHECKS = {spec.check_id: spec for spec in (
    CheckSpec("thm1-internal", _check_thm1_internal, ("n", "r", "l"), "exact", "thm-1.1 vs eq-3.4 + lemma-2.1", _sweep_exact_theorem),
    CheckSpec("thm2-internal", _check_thm2_internal, ("n", "r", "l"), "exact", "thm-1.2 vs transfer of thm-1.1", _sweep_exact_theorem),
    CheckSpec("steiner-compose", _check_steiner_compose, ("n", "i"), "exact", "eq-2.6 composed", _sweep_steiner_compose),
    CheckSpec("ball-closure", _check_ball_closure, ("n", "s"), "exact", "eq-2.11 on balls", _sweep_ball_closure, {"radius": 1}),
    CheckSpec("ball-mci", _check_ball_mci, ("n", "i"), "numeric", "closed-form ball integrals", _sweep_ball_mci, {"radius": 1.0}),
    CheckSpec("barbier", _check_barbier, ("body",), "numeric", "perimeter = pi * width", _sweep_barbier),
    CheckSpec("steiner-volume", _check_steiner_volume, ("body", "rho"), "numeric", "eq-2.5", _sweep_steiner_volume),
    CheckSpec("steiner-quermass", _check_steiner_quermass, ("body", "rho", "i"), "numeric", "eq-2.6", _sweep_steiner_quermass),
    CheckSpec("mci-bridge", _check_mci_bridge, ("body", "i"), "numeric", "eq-2.7", _sweep_mci_bridge),
    CheckSpec("santalo", _check_santalo, ("n", "r", "q", "body"), "numeric", "eq-2.8 .. eq-2.10", _sweep_santalo),
    CheckSpec("const-width", _check_const_width, ("body", "s"), "numeric", "eq-2.11", _sweep_const_width),
    CheckSpec("thm1-vs-oracle", _check_thm1_vs_oracle, ("n", "r", "l", "body", "rho"), "numeric", "thm-1.1 vs classical oracle", _sweep_thm1_vs_oracle),
    CheckSpec("kubota", _check_kubota, ("body", "r"), "statistical", "eq-2.1", _sweep_kubota),
    CheckSpec("transfer-c4", _check_transfer_c4, ("body", "r", "t"), "statistical", "eq-3.8", _sweep_transfer_c4),
    CheckSpec("proj-vol-d2", _check_proj_vol_d2, ("body", "r"), "statistical", "eq-3.10", _sweep_proj_vol_d2),
    CheckSpec("thm2-vs-oracle", _check_thm2_vs_oracle, ("n", "r", "l", "body", "rho"), "statistical", "thm-1.2 vs Monte Carlo oracle", _sweep_thm2_vs_oracle),
    CheckSpec("steiner-volume-mc", _check_steiner_volume_mc, ("body", "rho"), "statistical", "eq-2.5 by membership test", _sweep_steiner_volume_mc),
)}

SUITES = {
    "exact-identities": ("thm1-internal", "thm2-internal", "steiner-compose", "ball-closure"),
    "oracle-numeric": ("ball-mci", "barbier", "steiner-volume", "steiner-quermass", "mci-bridge",
                       "santalo", "const-width", "thm1-vs-oracle"),
    "statistical": ("kubota", "transfer-c4", "proj-vol-d2", "thm2-vs-oracle", "steiner-volume-mc"),
}
SUITES["full"] = SUITES["exact-identities"] + SUITES["oracle-numeric"] + SUITES["statistical"]


# ==========================================
# RUNNERS
# ==========================================

def get_check(check_id):
    if check_id not in CHECKS:
        raise UnknownCheckError(f"unknown check id {check_id!r}; known: {', '.join(sorted(CHECKS))}")
    return CHECKS[check_id]


def run_check(check_id, configuration):
    """Deterministic report for one check; every required key must be present."""
    spec = get_check(check_id)
    cfg = dict(spec.defaults)
    cfg.update({k: v for k, v in configuration.items() if v is not None})
    missing = [key for key in spec.required if key not in cfg]
    if missing:
        raise IncompleteConfigError(check_id, missing)
    report = spec.run(cfg)
    if report.verdict == DOCUMENTED:
        logger.warning(f"{check_id} {canonical_json(cfg)}: documented discrepancy, abs error {format_float(report.abs_error)}")
    elif report.verdict == FAIL:
        logger.error(f"{check_id} {canonical_json(cfg)}: FAILED (rel error {format_float(report.rel_error)})")
    else:
        logger.debug(f"{check_id} {canonical_json(cfg)}: pass")
    return report


def _run_guarded(check_id, configuration):
    try:
        return run_check(check_id, configuration)
    except (UnknownCheckError, IncompleteConfigError):
        raise
    except Exception as e:
        logger.error(f"{check_id} {canonical_json(configuration)} raised: {e}")
        return CheckReport(check_id, dict(configuration), "error", "error", float("inf"), float("inf"),
                           FAIL, "n/a", {"error": f"{type(e).__name__}: {e}"})


def sweep_configs(check_id, n_max=None, overrides=None):
    spec = get_check(check_id)
    configs = spec.sweep(int(n_max or config.SWEEP_N_MAX))
    if overrides:
        configs = [{**c, **{k: v for k, v in overrides.items() if v is not None}} for c in configs]
    return configs


def suite_tasks(suite_id, n_max=None, overrides=None):
    if suite_id not in SUITES:
        raise UnknownCheckError(f"unknown suite {suite_id!r}; known: {', '.join(SUITES)}")
    return [(check_id, cfg) for check_id in SUITES[suite_id] for cfg in sweep_configs(check_id, n_max, overrides)]


def sort_reports(reports):
    return sorted(reports, key=lambda report: report.sort_key)


async def run_tasks_async(tasks, workers=None):
    """Fans checks out over a thread pool; the result order is the sorted report order."""
    workers = max(1, int(workers or config.DEFAULT_THREADS))
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [loop.run_in_executor(executor, _run_guarded, check_id, cfg) for check_id, cfg in tasks]
        reports = await asyncio.gather(*futures)
    return sort_reports(reports)


def run_tasks(tasks, workers=None):
    return asyncio.run(run_tasks_async(tasks, workers))


def run_suite(suite_id, workers=None, n_max=None, overrides=None):
    tasks = suite_tasks(suite_id, n_max, overrides)
    logger.info(f"Running suite {suite_id}: {len(tasks)} checks on {workers or config.DEFAULT_THREADS} worker(s)")
    reports = run_tasks(tasks, workers)
    counts = verdict_counts(reports)
    logger.info(f"Suite {suite_id} finished: {counts}")
    return reports


def verdict_counts(reports):
    counts = {PASS: 0, FAIL: 0, DOCUMENTED: 0}
    for report in reports:
        counts[report.verdict] = counts.get(report.verdict, 0) + 1
    return counts


def exit_status(reports):
    return 1 if any(report.verdict == FAIL for report in reports) else 0


# ==========================================
# SERIALIZATION
# ==========================================

CSV_HEADER = ("check_id", "config_hash", "verdict", "rel_error")


def reports_to_jsonl(reports):
    return "".join(report.to_json() + "\n" for report in sort_reports(reports))


def reports_to_csv(reports):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in sort_reports(reports):
        writer.writerow((report.check_id, report.config_hash, report.verdict, format_float(report.rel_error)))
    return buffer.getvalue()


def write_reports(reports, jsonl_path, csv_path=None):
    """Atomic JSONL + CSV; the CSV defaults to the JSONL path with a .csv suffix."""
    if csv_path is None:
        stem = jsonl_path[:-len(".jsonl")] if jsonl_path.endswith(".jsonl") else jsonl_path
        csv_path = stem + ".csv"
    atomic_write_text(jsonl_path, reports_to_jsonl(reports))
    atomic_write_text(csv_path, reports_to_csv(reports))
    return jsonl_path, csv_path
