"""Experiment implementations and the run_experiment dispatcher.

Every experiment draws its instances from per-trial derived seeds, emits
one record per checked statement, and reduces the records into a summary
whose pass/fail is derivable from the records alone.  Hard gates are
exact finite-dimensional statements; records with gate == "monitor"
carry continuum-comparison data and never affect the exit status.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from ..errors import ClrlabError
from ..lattice import (
    GridSpec,
    MatrixPotential,
    birman_schwinger,
    bs_bound,
    clr_rhs,
    count_negative,
    hamiltonian,
    potential_digest,
    resolvent_trace,
    riesz_mean,
    semigroup_sandwich_trace,
    trotter_trace,
)
from ..matcore import apply_spectral, holder_trace_product
from ..timeorder import (
    ScalarFunctionClass,
    averaged_trace,
    convex_probe,
    jensen_gap,
    time_ordered_apply,
    time_ordered_exponential,
    time_ordered_monomial,
    time_ordered_mu_exp,
)
from ..transforms import (
    classical_constant,
    constant_table,
    exp_integral_E1,
    f_a_transform,
    lt_rhs,
    lw_product_check,
    minimize_R,
    r_of_a,
)
from .generators import (
    generate_potential,
    random_admissible_function,
    random_psd,
    rng_from,
)
from .reports import ExperimentConfig, ExperimentReport, derive_seed, inputs_digest


def _tol(cfg: ExperimentConfig, key: str, default: float) -> float:
    return float(cfg.tolerances.get(key, default))


def _summary(records: list, extra: dict | None = None) -> dict:
    hard = [r for r in records if r.get("gate") == "hard"]
    failures = sum(1 for r in hard if r["margin"] < 0.0)
    out = {
        "records": len(records),
        "hard_records": len(hard),
        "hard_failures": failures,
        "pass": failures == 0,
    }
    if hard:
        margins = np.array([r["margin"] for r in hard], dtype=float)
        out["min_margin"] = float(margins.min())
        out["max_margin"] = float(margins.max())
        out["mean_margin"] = float(margins.mean())
    if extra:
        out.update(extra)
    return out


def _report(cfg: ExperimentConfig, records: list, csv_columns: list,
            extra: dict | None = None) -> ExperimentReport:
    return ExperimentReport(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        records=records,
        summary=_summary(records, extra),
        csv_columns=csv_columns,
    )


# ---------------------------------------------------------------------------
# constants

def _run_constants(cfg: ExperimentConfig) -> ExperimentReport:
    dmax = int(cfg.options.get("dmax", 20))
    if not (4 <= dmax <= 40):
        raise ClrlabError(f"dmax must be in [4, 40], got {dmax}")
    records = []
    for d in range(1, dmax + 1):
        for gamma in (0.0, 0.1, 0.5, 1.0, 1.5, 2.0):
            tab = constant_table(gamma, d)
            records.append({
                "kind": "constant", "gate": "info", "gamma": gamma, "d": d,
                "L_cl": tab.L_cl, "R_bound": tab.R_bound,
            })
    for d in range(4, dmax + 1):
        residual = lw_product_check(d)
        records.append({
            "kind": "lw-residual", "gate": "hard", "d": d, "value": residual,
            "margin": _tol(cfg, "lw_residual", 1e-12) - residual,
        })
    e1 = exp_integral_E1(1.0)
    records.append({
        "kind": "e1-check", "gate": "hard", "value": e1,
        "margin": _tol(cfg, "e1_abs", 1e-6) - abs(e1 - 0.219384),
    })
    a_star, r_star = minimize_R(0.5, 3.0)
    records.append({
        "kind": "a_star", "gate": "hard", "value": a_star,
        "margin": min(a_star - 1.05, 1.25 - a_star),
    })
    records.append({
        "kind": "R_star", "gate": "hard", "value": r_star,
        "margin": min(r_star - 10.32, 10.34 - r_star),
    })
    records.append({
        "kind": "R_star_above_lower_bound", "gate": "hard", "value": r_star,
        "margin": r_star - 8.0 / math.sqrt(3.0),
    })
    r_ref_point = r_of_a(1.13)
    records.append({
        "kind": "R_at_1.13", "gate": "hard", "value": r_ref_point,
        "margin": min(r_ref_point - r_star + 1e-12,
                      1e-3 - (r_ref_point - r_star)),
    })
    extra = {"a_star": a_star, "R_star": r_star,
             "L_cl_0_3": classical_constant(0.0, 3)}
    records.append({
        "kind": "L_cl_0_3", "gate": "info", "gamma": 0.0, "d": 3,
        "L_cl": extra["L_cl_0_3"], "value": extra["L_cl_0_3"],
    })
    cols = ["kind", "gate", "gamma", "d", "L_cl", "R_bound", "value", "margin"]
    return _report(cfg, records, cols, extra)


# ---------------------------------------------------------------------------
# jensen

def _run_jensen(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 1000
    tol = _tol(cfg, "jensen_gap", 1e-9)
    records = []
    for i in range(trials):
        s = derive_seed(cfg.seed, i)
        rng = rng_from(s)
        n = int(rng.integers(1, cfg.n_max + 1))
        nf = int(rng.integers(1, cfg.N_max + 1))
        f = random_admissible_function(rng)
        ws = [random_psd(rng, nf, eig_max=float(rng.uniform(0.1, 1.2)))
              for _ in range(n)]
        rhs = averaged_trace(f, ws)
        gap = jensen_gap(f, ws)
        scale = 1.0 + abs(rhs)
        records.append({
            "kind": "jensen-gap", "gate": "hard", "trial": i, "seed": s,
            "n": n, "N": nf,
            "digest": inputs_digest(np.array(f.poly_coeffs),
                                    np.array(f.exp_atoms), *ws),
            "gap": gap, "scale": scale, "margin": gap + tol * scale,
        })
    gaps = np.array([r["gap"] for r in records])
    extra = {"min_gap": float(gaps.min()),
             "min_gap_seed": records[int(np.argmin(gaps))]["seed"]}
    cols = ["kind", "trial", "seed", "n", "N", "gap", "scale", "margin"]
    return _report(cfg, records, cols, extra)


# ---------------------------------------------------------------------------
# holder

def _run_holder(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 1000
    tol = _tol(cfg, "holder_slack", 1e-10)
    records = []
    for i in range(trials):
        s = derive_seed(cfg.seed, i)
        rng = rng_from(s)
        n = int(rng.integers(1, cfg.n_max + 1))
        nf = int(rng.integers(1, cfg.N_max + 1))
        k = int(rng.integers(1, 6))
        powers = rng.multinomial(k, np.full(n, 1.0 / n)).tolist()
        ws = [random_psd(rng, nf, eig_max=float(rng.uniform(0.2, 1.5)))
              for _ in range(n)]
        try:
            lhs, rhs = holder_trace_product(ws, powers)
            margin = rhs + tol * (1.0 + abs(rhs)) - lhs
        except ArithmeticError as exc:
            lhs = rhs = float("nan")
            margin = -1.0
            records.append({
                "kind": "holder-violation", "gate": "hard", "trial": i,
                "seed": s, "error": str(exc), "margin": margin,
            })
            continue
        records.append({
            "kind": "holder", "gate": "hard", "trial": i, "seed": s,
            "n": n, "N": nf, "k": k, "lhs": lhs, "rhs": rhs, "margin": margin,
        })
    cols = ["kind", "trial", "seed", "n", "N", "k", "lhs", "rhs", "margin"]
    return _report(cfg, records, cols)


# ---------------------------------------------------------------------------
# timeorder-consistency

def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m)))


def _run_timeorder(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 500
    tol_closed = _tol(cfg, "closed_form", 1e-8)
    tol_commute = _tol(cfg, "commuting_collapse", 1e-9)
    records = []
    for i in range(trials):
        s = derive_seed(cfg.seed, i)
        rng = rng_from(s)
        n = int(rng.integers(2, cfg.n_max + 1))
        nf = int(rng.integers(1, cfg.N_max + 1))
        ws = [random_psd(rng, nf, eig_max=float(rng.uniform(0.3, 1.0)))
              for _ in range(n)]

        checks = {}
        k = int(rng.integers(2, 7))
        a = time_ordered_monomial(k, ws).matrix
        b = time_ordered_apply(ScalarFunctionClass.monomial(k), ws).matrix
        checks["monomial"] = tol_closed * (1.0 + _max_abs(a)) - _max_abs(a - b)

        alpha = float(rng.uniform(-2.0, 2.0))
        a = time_ordered_exponential(alpha, ws).matrix
        b = time_ordered_apply(ScalarFunctionClass.exponential(alpha), ws).matrix
        checks["exponential"] = tol_closed * (1.0 + _max_abs(a)) - _max_abs(a - b)

        a = time_ordered_mu_exp(alpha, ws).matrix
        b = time_ordered_apply(lambda mu: mu * np.exp(alpha * mu), ws).matrix
        checks["mu-exp"] = tol_closed * (1.0 + _max_abs(a)) - _max_abs(a - b)

        # Commuting family: shared eigenbasis, random non-negative spectra.
        g = rng.standard_normal((nf, nf)) + 1j * rng.standard_normal((nf, nf))
        q, _ = np.linalg.qr(g)
        coms = []
        for _ in range(n):
            lam = rng.uniform(0.0, 1.0, nf)
            m = (q * lam) @ q.conj().T
            coms.append(0.5 * (m + m.conj().T))
        f = random_admissible_function(rng)
        a = time_ordered_apply(f, coms).matrix
        b = apply_spectral(f, sum(coms))
        checks["commuting"] = tol_commute * (1.0 + _max_abs(a)) - _max_abs(a - b)

        worst = min(checks, key=checks.get)
        records.append({
            "kind": "timeorder", "gate": "hard", "trial": i, "seed": s,
            "n": n, "N": nf, "worst_check": worst, "margin": checks[worst],
        })
    cols = ["kind", "trial", "seed", "n", "N", "worst_check", "margin"]
    return _report(cfg, records, cols)


# ---------------------------------------------------------------------------
# trotter

def _trotter_instance(cfg: ExperimentConfig, index: int):
    s = derive_seed(cfg.seed, index)
    rng = rng_from(s)
    if cfg.grid_points is not None:
        pts = cfg.grid_points
    else:
        pts = (int(rng.integers(6, 13)),)
    grid = GridSpec(d=len(pts), points_per_axis=pts,
                    h=float(rng.uniform(0.3, 0.7)))
    nf = int(rng.integers(1, 3))
    amp = float(rng.uniform(1.0, 8.0))
    v = generate_potential(s, grid, nf, "random-psd-field", amplitude=amp)
    alpha = float(rng.choice([0.5, 1.0, 2.0]))
    return s, grid, v, alpha


def _k_eigenvalues(grid: GridSpec, v) -> np.ndarray:
    k_op = birman_schwinger(grid, v)
    if k_op.dim == 0:
        return np.zeros(0)
    return np.maximum(np.linalg.eigvalsh(k_op.toarray()), 0.0)


def _barrier_instance(cfg: ExperimentConfig, index: int):
    """Strong barrier on an otherwise empty line.

    The per-step potential phase t*alpha*w stays >> 1 over the whole n
    range, the regime in which the n-vs-2n error of the split trace halves
    instead of quartering, so the fitted slope sits near -1.
    """
    s = derive_seed(cfg.seed, index)
    rng = rng_from(s)
    m, h, t, alpha = 12, 0.5, 0.5, 4.0
    grid = GridSpec(d=1, points_per_axis=(m,), h=h)
    nf = 1 + index % 2
    theta = float(rng.uniform(90.0, 130.0))
    w_top = theta / (t * alpha)
    start = int(rng.integers(4, 7))
    width = int(rng.integers(2, 4))
    vals = np.zeros((m, nf, nf), dtype=complex)
    block = np.diag(w_top * np.linspace(1.0, 0.6, nf))
    if nf > 1:
        g = rng.standard_normal((nf, nf)) + 1j * rng.standard_normal((nf, nf))
        q, _ = np.linalg.qr(g)
        block = q @ block @ q.conj().T
    vals[start:start + width] = block
    v = MatrixPotential(grid=grid, N=nf, values=vals)
    return s, grid, v, alpha, t


def _run_trotter(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 50
    tol_res = _tol(cfg, "resolvent_rel", 1e-8)
    tol_quad = _tol(cfg, "t_quadrature_rel", 1e-3)
    records = []

    for i in range(trials):
        s, grid, v, alpha = _trotter_instance(cfg, i)
        r_direct = resolvent_trace(grid, v, alpha)
        lam = _k_eigenvalues(grid, v)
        r_spectral = float(np.sum(lam / (1.0 + alpha * lam)))
        rel = abs(r_direct - r_spectral) / max(abs(r_spectral), 1e-30)
        records.append({
            "kind": "resolvent-identity", "gate": "hard", "trial": i,
            "seed": s, "dim": v.dim, "alpha": alpha, "value": r_direct,
            "reference": r_spectral, "margin": tol_res - rel,
        })

    for i in range(3):
        s, grid, v, alpha, t = _barrier_instance(cfg, 10_000 + i)
        exact = semigroup_sandwich_trace(grid, v, alpha, t)
        ns = np.array([4, 8, 16, 32, 64, 128, 256], dtype=float)
        errs = np.array([
            abs(trotter_trace(grid, v, alpha, t, int(n)) - exact) for n in ns
        ])
        slope = float(np.polyfit(np.log(ns), np.log(errs), 1)[0])
        records.append({
            "kind": "trotter-slope", "gate": "hard", "trial": i, "seed": s,
            "dim": v.dim, "alpha": alpha, "value": slope,
            "margin": min(slope + 1.3, -0.7 - slope),
        })

    for i in range(10):
        s, grid, v, alpha = _trotter_instance(cfg, 20_000 + i)
        r_direct = resolvent_trace(grid, v, alpha)
        val, _ = quad(lambda t: trotter_trace(grid, v, alpha, t, 256),
                      0.0, np.inf, epsabs=1e-10, epsrel=1e-7, limit=200)
        rel = abs(val - r_direct) / max(abs(r_direct), 1e-30)
        records.append({
            "kind": "t-quadrature", "gate": "hard", "trial": i, "seed": s,
            "dim": v.dim, "alpha": alpha, "value": val,
            "reference": r_direct, "margin": tol_quad - rel,
        })

    cols = ["kind", "trial", "seed", "dim", "alpha", "value", "reference", "margin"]
    return _report(cfg, records, cols)


# ---------------------------------------------------------------------------
# bs-equivalence

def _bs_instance(cfg: ExperimentConfig, trial: int):
    """Draw an instance, re-seeding while eigenvalues sit in a zero band."""
    for attempt in range(8):
        s = derive_seed(cfg.seed, (trial << 8) | attempt)
        rng = rng_from(s)
        if cfg.grid_points is not None:
            pts = cfg.grid_points
        elif trial % 4 == 3:
            pts = (3, 3, 3)
        else:
            pts = (int(rng.integers(8, 15)),)
        grid = GridSpec(d=len(pts), points_per_axis=pts,
                        h=float(rng.uniform(0.4, 0.8)))
        cap = 2 if grid.d == 3 else cfg.N_max
        nf = int(rng.integers(1, cap + 1))
        style = "random-psd-field" if rng.integers(0, 2) else "gaussian-bumps"
        lam_floor = 4.0 / grid.h**2 * math.sin(
            math.pi / (2.0 * (max(grid.points_per_axis) + 1))) ** 2
        amp = float(rng.uniform(0.3, 3.0)) * lam_floor * 3.0
        v = generate_potential(s, grid, nf, style, amplitude=amp)

        h_op = hamiltonian(grid, v, sign=-1.0)
        w_h = np.linalg.eigvalsh(h_op.toarray())
        band = 10.0 * 1e-10 * h_op.scale()
        if w_h.size and float(np.min(np.abs(w_h))) <= band:
            continue
        lam_k = _k_eigenvalues(grid, v)
        if lam_k.size and float(np.min(np.abs(lam_k - 1.0))) <= 1e-9 * (
                1.0 + float(lam_k.max())):
            continue
        return s, grid, v, h_op, w_h, lam_k
    raise ClrlabError(f"could not draw a non-degenerate instance for trial {trial}")


def _run_bs(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 200
    records = []
    for i in range(trials):
        s, grid, v, h_op, w_h, lam_k = _bs_instance(cfg, i)
        zero_tol = 1e-10 * h_op.scale()
        count_inertia = count_negative(h_op, method="inertia")
        count_dense = count_negative(h_op, method="dense")
        count_ref = int(np.sum(w_h < -zero_tol))
        k_above_one = int(np.sum(lam_k > 1.0))
        match = (count_inertia == count_dense == count_ref == k_above_one)
        records.append({
            "kind": "count-equivalence", "gate": "hard", "trial": i, "seed": s,
            "dim": v.dim, "count": count_inertia, "count_dense": count_dense,
            "k_count": k_above_one, "margin": 0.0 if match else -1.0,
        })
        for a in (0.7, 1.13, 2.0):
            bound = (sum(f_a_transform(a, float(l)) for l in lam_k if l > 0.0)
                     / f_a_transform(a, 1.0)) if lam_k.size else 0.0
            records.append({
                "kind": "bs-bound", "gate": "hard", "trial": i, "seed": s,
                "dim": v.dim, "a": a, "bound": bound, "count": count_inertia,
                "margin": bound - count_inertia + 1e-9,
            })
    counts = [r["count"] for r in records if r["kind"] == "count-equivalence"]
    extra = {"max_count": int(max(counts)), "mean_count": float(np.mean(counts))}
    cols = ["kind", "trial", "seed", "dim", "count", "count_dense", "k_count",
            "a", "bound", "margin"]
    return _report(cfg, records, cols, extra)


# ---------------------------------------------------------------------------
# clr-survey

def _run_survey(cfg: ExperimentConfig) -> ExperimentReport:
    ensembles = cfg.trials or 3
    refinements = tuple(cfg.options.get("refinements", (3, 7, 15)))
    amplitude = float(cfg.options.get("amplitude", 600.0))
    records = []
    trend_ok_all = True
    for e in range(ensembles):
        s = derive_seed(cfg.seed, e)
        eps_chain = []
        for m in refinements:
            grid = GridSpec(d=3, points_per_axis=(m, m, m), h=1.0 / (m + 1))
            v = generate_potential(s, grid, 1, "gaussian-bumps",
                                   amplitude=amplitude)
            count = count_negative(hamiltonian(grid, v, sign=-1.0))
            rhs = clr_rhs(v, 10.332)
            ratio = count / rhs if rhs > 0 else math.inf
            eps = max(0.0, ratio - 1.0)
            eps_chain.append(eps)
            records.append({
                "kind": "survey", "gate": "monitor", "ensemble": e, "seed": s,
                "m": m, "h": grid.h, "count": count, "rhs": rhs,
                "ratio": ratio, "eps": eps,
                "digest": potential_digest(v),
            })
        trend_ok = all(eps_chain[j + 1] <= eps_chain[j] + 1e-12
                       for j in range(len(eps_chain) - 1))
        trend_ok_all = trend_ok_all and trend_ok
        records.append({
            "kind": "trend", "gate": "monitor", "ensemble": e, "seed": s,
            "trend_ok": trend_ok, "eps_chain": eps_chain,
        })
    ratios = [r["ratio"] for r in records if r["kind"] == "survey"]
    extra = {"trend_ok": trend_ok_all, "max_ratio": float(max(ratios))}
    cols = ["kind", "ensemble", "seed", "m", "h", "count", "rhs", "ratio", "eps"]
    return _report(cfg, records, cols, extra)


# ---------------------------------------------------------------------------
# lt-moments

def _run_lt(cfg: ExperimentConfig) -> ExperimentReport:
    instances = cfg.trials or 3
    records = []
    for i in range(instances):
        s = derive_seed(cfg.seed, i)
        rng = rng_from(s)
        pts = cfg.grid_points or (5, 5, 5)
        grid = GridSpec(d=len(pts), points_per_axis=pts,
                        h=float(rng.uniform(0.4, 0.6)))
        nf = int(rng.integers(1, 3))
        lam_floor = 4.0 / grid.h**2 * math.sin(
            math.pi / (2.0 * (max(grid.points_per_axis) + 1))) ** 2
        amp = float(rng.uniform(1.0, 3.0)) * lam_floor * 30.0
        v = generate_potential(s, grid, nf, "gaussian-bumps", amplitude=amp)
        h_op = hamiltonian(grid, v, sign=-1.0)
        for gamma in (0.5, 1.0, 2.0):
            lhs = riesz_mean(h_op, gamma)
            rhs = lt_rhs(gamma, grid.d, v.moment(gamma + grid.d / 2.0))
            records.append({
                "kind": "lt-moment", "gate": "monitor", "trial": i, "seed": s,
                "gamma": gamma, "riesz": lhs, "rhs": rhs,
                "ratio": lhs / rhs if rhs > 0 else math.inf,
            })
    ratios = [r["ratio"] for r in records]
    extra = {"max_ratio": float(max(ratios))}
    cols = ["kind", "trial", "seed", "gamma", "riesz", "rhs", "ratio"]
    return _report(cfg, records, cols, extra)


# ---------------------------------------------------------------------------
# remark-probe

def _run_probe(cfg: ExperimentConfig) -> ExperimentReport:
    trials = cfg.trials or 5000
    records = []
    for i in range(trials):
        s = derive_seed(cfg.seed, i)
        rng = rng_from(s)
        n = int(rng.integers(2, min(cfg.n_max, 3) + 1))
        nf = int(rng.integers(2, min(cfg.N_max, 3) + 1))
        kink = float(rng.uniform(0.2, 2.0))
        ws = [random_psd(rng, nf, eig_max=float(rng.uniform(0.3, 1.5)))
              for _ in range(n)]
        gap = convex_probe(kink, ws)
        records.append({
            "kind": "hinge-gap", "gate": "monitor", "trial": i, "seed": s,
            "n": n, "N": nf, "kink": kink, "gap": gap,
        })
    gaps = np.array([r["gap"] for r in records])
    imin = int(np.argmin(gaps))
    extra = {
        "min_gap": float(gaps.min()),
        "min_gap_seed": records[imin]["seed"],
        "min_gap_trial": imin,
        "negative_fraction": float(np.mean(gaps < 0.0)),
    }
    cols = ["kind", "trial", "seed", "n", "N", "kink", "gap"]
    return _report(cfg, records, cols, extra)


EXPERIMENTS = {
    "constants": _run_constants,
    "jensen": _run_jensen,
    "holder": _run_holder,
    "timeorder-consistency": _run_timeorder,
    "trotter": _run_trotter,
    "bs-equivalence": _run_bs,
    "clr-survey": _run_survey,
    "lt-moments": _run_lt,
    "remark-probe": _run_probe,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Validate, dispatch, optionally write report files, return the report."""
    config.validate()
    report = EXPERIMENTS[config.experiment](config)
    if config.out:
        report.write(config.out)
    return report
