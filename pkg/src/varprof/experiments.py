"""Runners for each experiment kind.

Every runner takes a validated :class:`ExperimentConfig` and an output
directory, writes CSV/JSON/PNG artifacts and returns a :class:`RunResult`.
CSV files start with a ``#`` line carrying the package version and config
hash; the body after it depends only on the config.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from varprof import __version__, plotting
from varprof.bounds import compute_bn, norm_budget, norm_check, tv_bound_rhs, variance_lower_bound_check
from varprof.config import ExperimentConfig, build_profile
from varprof.cycles import cycle_sum_brute, cycle_sum_dfs
from varprof.embeddings import plan_covariance, plan_product, verify_trace_identity, zk_via_embedding
from varprof.entrylaws import MatrixEnsemble, parse_law
from varprof.errors import BoundVacuous, StructuralZeroVariance
from varprof.gof import gof_suite, write_histogram_csv
from varprof.profiles import ErdosRenyiConfig, check_erdos_renyi_concentration
from varprof.simulate import PolynomialSpec, run_batch, structural_zero_check

SWEEP_FIELDS = ("n", "k", "max_a", "b_n", "s_k", "rhs", "status")


@dataclass
class RunResult:
    status: int
    files: list[Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def fail(self, msg: str):
        self.status = 1
        self.failures.append(msg)


def header_line(cfg: ExperimentConfig) -> str:
    return f"# varprof {__version__} config={cfg.hash} name={cfg.name} kind={cfg.kind}\n"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, cfg: ExperimentConfig, fields, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(header_line(cfg))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(row[f]) for f in fields])
    return path


def write_json(path, cfg: ExperimentConfig, payload: dict) -> Path:
    path = Path(path)
    doc = {"version": __version__, "config_hash": cfg.hash, "name": cfg.name, "kind": cfg.kind}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _ensemble(cfg: ExperimentConfig) -> MatrixEnsemble:
    return MatrixEnsemble(cfg.ensemble_kind, parse_law(cfg.law), cfg.seed)


def _polys(cfg: ExperimentConfig):
    if cfg.coeffs:
        return [PolynomialSpec(cfg.coeffs)]
    return [PolynomialSpec.monomial(k) for k in cfg.ks]


def _checks(cfg: ExperimentConfig) -> dict:
    return cfg.options.get("checks", {})


def _gof_outputs(cfg, out, stem, batch, title, res: RunResult):
    """Shared tail for batch-producing runners: CSV, gof JSON, histogram, figure."""
    write = write_csv(out / f"{stem}.csv", cfg, ("replica", "raw_trace", "z"),
                      [{"replica": r, "raw_trace": x, "z": z}
                       for r, (x, z) in enumerate(zip(batch.raw_traces, batch.z_samples))])
    hist = write_histogram_csv(batch.z_samples, out / f"{stem}_hist.csv")
    _prepend_header(hist, cfg)
    gof = gof_suite(batch)
    payload = {"batch": batch.summary(), "gof": json.loads(gof.to_json())}
    ks_max = _checks(cfg).get("ks_max")
    if ks_max is not None:
        ok = gof.ks <= ks_max
        payload["checks"] = {"ks_max": ks_max, "ks": gof.ks, "passed": ok}
        if not ok:
            res.fail(f"{stem}: KS {gof.ks:.4f} > {ks_max}")
    res.files += [write, hist, write_json(out / f"{stem}.json", cfg, payload),
                  plotting.plot_z_histogram(batch.z_samples, out / f"{stem}.png", title)]
    res.summary[stem] = {"ks": gof.ks, "tv_binned": gof.tv_binned, "w1": gof.w1}


def _prepend_header(path: Path, cfg):
    body = path.read_text()
    path.write_text(header_line(cfg) + body)


def _structural_zero_entry(cfg, out, stem, exc, res: RunResult):
    res.summary[stem] = {"structural_zero": True}
    res.files.append(write_json(out / f"{stem}.json", cfg, {"structural_zero": True, "detail": str(exc)}))
    if "ks_max" in _checks(cfg):
        res.fail(f"{stem}: statistic is degenerate, KS check cannot be evaluated")


def run_clt(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    A = build_profile(cfg.profile, cfg.ns[0])
    ens = _ensemble(cfg)
    for P in _polys(cfg):
        stem = f"clt_k{P.degree}"
        try:
            batch = run_batch(A, ens, P, cfg.replicas, cfg.seed, cfg.workers)
        except StructuralZeroVariance as exc:
            _structural_zero_entry(cfg, out, stem, exc, res)
            continue
        _gof_outputs(cfg, out, stem, batch, f"{cfg.name}: k={P.degree}, n={A.n}", res)
    return res


def run_embedding(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    emb = cfg.options["embedding"]
    ens = _ensemble(cfg)
    rng = np.random.default_rng(cfg.seed)
    residual_max = _checks(cfg).get("residual_max", 1e-10)
    rows = []
    for P in _polys(cfg):
        if emb["type"] == "covariance":
            plan = plan_covariance(emb["dims"][0], emb["dims"][1], P)
        else:
            plan = plan_product(emb["dims"], P)
        stem = f"embedding_{emb['type']}_k{P.degree}"
        for trial in range(10):
            blocks = [rng.standard_normal(s) for s in plan.block_shapes()]
            r = verify_trace_identity(plan, blocks)
            rows.append({"k": P.degree, "trial": trial, "residual": r})
            if r > residual_max:
                res.fail(f"{stem}: identity residual {r:.3e} > {residual_max}")
        try:
            batch = zk_via_embedding(plan, ens, cfg.replicas, cfg.seed, cfg.workers)
        except StructuralZeroVariance as exc:
            _structural_zero_entry(cfg, out, stem, exc, res)
            continue
        _gof_outputs(cfg, out, stem, batch, f"{cfg.name}: {emb['type']} k={P.degree}", res)
        res.summary[stem]["plan"] = plan.describe()
    res.files.append(write_csv(out / "embedding_identity.csv", cfg, ("k", "trial", "residual"), rows))
    return res


def sweep_bound(cfg: ExperimentConfig) -> list[dict]:
    """Evaluate the TV bound across the configured sizes and degrees.

    Rows with ``S_k = 0`` are kept with status ``vacuous`` and NaN bound.
    """
    rows = []
    for n in cfg.ns:
        A = build_profile(cfg.profile, n)
        for k in cfg.ks:
            try:
                rep = tv_bound_rhs(A, k)
                rows.append({"n": n, "k": k, "max_a": rep.max_a, "b_n": rep.b_n, "s_k": rep.s_k,
                             "rhs": rep.rhs, "status": "ok"})
            except BoundVacuous:
                rows.append({"n": n, "k": k, "max_a": A.max_abs, "b_n": compute_bn(A), "s_k": 0.0,
                             "rhs": float("nan"), "status": "vacuous"})
    return rows


def run_bound_sweep(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    rows = sweep_bound(cfg)
    ratios = {}
    for k in cfg.ks:
        vals = [r["rhs"] for r in rows if r["k"] == k and r["status"] == "ok"]
        ratios[k] = [b / a for a, b in zip(vals, vals[1:])]
    res.summary = {"ratios": ratios, "vacuous": sum(r["status"] == "vacuous" for r in rows)}
    res.files += [
        write_csv(out / "bound_sweep.csv", cfg, SWEEP_FIELDS, rows),
        write_json(out / "bound_sweep.json", cfg, {"rows": rows, "successive_ratios": ratios}),
        plotting.plot_bound_sweep(rows, out / "bound_sweep.png", cfg.name),
    ]
    return res


def run_norm_check(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    A = build_profile(cfg.profile, cfg.ns[0])
    opts = cfg.options.get("norm", {})
    rep = norm_check(A, _ensemble(cfg), opts.get("trials", 100), opts.get("t", 2.0),
                     opts.get("k_cal", 1.0), cfg.seed)
    b_n = compute_bn(A)
    norms = rep.pop("norms")
    rows = [{"trial": i, "norm": x, "norm_over_sqrt_bn": x / math.sqrt(b_n)} for i, x in enumerate(norms)]
    ratio_max = _checks(cfg).get("ratio_max")
    if ratio_max is not None and rep["max_norm_over_sqrt_bn"] > ratio_max:
        res.fail(f"norm/sqrt(b_n) = {rep['max_norm_over_sqrt_bn']:.3f} > {ratio_max}")
    if not rep["below_frobenius"]:
        res.fail("spectral norm exceeded the Frobenius norm")
    rep.update(b_n=b_n, norm_budget=norm_budget(A))
    res.summary = {k: rep[k] for k in ("mean_norm", "max_norm_over_sqrt_bn", "exceed_mean", "tail_bound")}
    res.files += [
        write_csv(out / "norms.csv", cfg, ("trial", "norm", "norm_over_sqrt_bn"), rows),
        write_json(out / "norms.json", cfg, rep),
        plotting.plot_norms(norms, out / "norms.png", b_n, rep["budget"], cfg.name),
    ]
    return res


def run_variance_check(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    A = build_profile(cfg.profile, cfg.ns[0])
    ens = _ensemble(cfg)
    rows = []
    for k in cfg.ks:
        rep = variance_lower_bound_check(A, ens, k, cfg.replicas, cfg.seed, cfg.workers)
        rows.append(rep)
        if not rep["passes"]:
            res.fail(f"k={k}: var_hat {rep['var_hat']:.4g} below S_k {rep['s_k']:.4g}")
    fields = ("k", "var_hat", "var_se", "s_k", "passes")
    res.summary = {"rows": [{f: r[f] for f in fields} for r in rows]}
    res.files += [
        write_csv(out / "variance.csv", cfg, fields, rows),
        write_json(out / "variance.json", cfg, {"rows": rows}),
        plotting.plot_variance(rows, out / "variance.png", cfg.name),
    ]
    return res


def oracle_profiles(cases: int, n_max: int, density: float, ks, seed: int):
    """Random sparse profiles ``(a, k)`` for the cycle-sum cross-check."""
    rng = np.random.default_rng(seed)
    for case in range(cases):
        n = int(rng.integers(2, n_max + 1))
        mask = rng.random((n, n)) < density
        a = np.where(mask, rng.uniform(0.1, 1.0, (n, n)), 0.0)
        yield case, a, ks[case % len(ks)]


def run_cycle_oracle(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    opts = cfg.options.get("oracle", {})
    tol = _checks(cfg).get("rel_tol", 1e-9)
    rows = []
    for case, a, k in oracle_profiles(opts.get("cases", 50), opts.get("n_max", 8),
                                      opts.get("density", 0.4), cfg.ks, cfg.seed):
        fast, slow = cycle_sum_dfs(a, k).value, cycle_sum_brute(a, k).value
        err = abs(fast - slow) / abs(slow) if slow != 0 else abs(fast)
        rows.append({"case": case, "n": a.shape[0], "k": k, "dfs": fast, "brute": slow, "rel_err": err})
        if err > tol:
            res.fail(f"case {case}: relative error {err:.3e}")
    res.summary = {"max_rel_err": max(r["rel_err"] for r in rows), "cases": len(rows)}
    res.files += [
        write_csv(out / "cycle_oracle.csv", cfg, ("case", "n", "k", "dfs", "brute", "rel_err"), rows),
        write_json(out / "cycle_oracle.json", cfg, res.summary),
        plotting.plot_oracle(rows, out / "cycle_oracle.png", cfg.name),
    ]
    return res


def run_er_concentration(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    prof = cfg.profile
    opts = cfg.options.get("graph", {})
    er = ErdosRenyiConfig(cfg.ns[0], prof.get("p", 0.3), prof.get("alpha", 0.35),
                          seed=prof.get("graph_seed", cfg.seed))
    k = cfg.ks[0]
    rep = check_erdos_renyi_concentration(er, k, opts.get("graphs", 100))
    checks = _checks(cfg)
    lo, hi = checks.get("ratio_low", 0.9), checks.get("ratio_high", 1.1)
    bad = [r for r in rep["ratios"] if not lo <= r <= hi]
    if bad:
        res.fail(f"{len(bad)} cycle-sum ratios outside [{lo}, {hi}]")
    frac_min = checks.get("fraction_min", 0.99)
    if rep["fraction_within_bound"] < frac_min:
        res.fail(f"row-sum bound held for {rep['fraction_within_bound']:.2f} < {frac_min} of graphs")
    rows = [{"graph": g, "seed": s, "ratio": r, "max_row_sum": m, "within_bound": m <= rep["row_sum_bound"]}
            for g, (s, r, m) in enumerate(zip(rep["seeds"], rep["ratios"], rep["max_row_sums"]))]
    res.summary = {"ratio_min": min(rep["ratios"]), "ratio_max": max(rep["ratios"]),
                   "fraction_within_bound": rep["fraction_within_bound"]}
    res.files += [
        write_csv(out / "er_concentration.csv", cfg, ("graph", "seed", "ratio", "max_row_sum", "within_bound"),
                  rows),
        write_json(out / "er_concentration.json", cfg, rep),
        plotting.plot_er(rep, out / "er_concentration.png", cfg.name),
    ]
    return res


def run_structural_zero(cfg: ExperimentConfig, out: Path) -> RunResult:
    res = RunResult(0)
    A = build_profile(cfg.profile, cfg.ns[0])
    ens = _ensemble(cfg)
    rows = []
    for k in cfg.ks:
        rep = structural_zero_check(A, k, trials=20, ens=ens, seed=cfg.seed)
        rows.append({"k": k, "constant": rep.constant, "support_constant": rep.support_constant,
                     "spread": rep.spread, "scale": rep.scale})
        if rep.constant != rep.support_constant:
            res.fail(f"k={k}: sampled verdict disagrees with the support walk count")
    res.summary = {"constant_k": [r["k"] for r in rows if r["constant"]],
                   "varying_k": [r["k"] for r in rows if not r["constant"]]}
    fields = ("k", "constant", "support_constant", "spread", "scale")
    res.files += [
        write_csv(out / "structural_zero.csv", cfg, fields, rows),
        write_json(out / "structural_zero.json", cfg, {"rows": rows, **res.summary}),
        plotting.plot_structural_zero(rows, out / "structural_zero.png", cfg.name),
    ]
    return res


RUNNERS = {
    "clt": run_clt,
    "embedding": run_embedding,
    "bound-sweep": run_bound_sweep,
    "norm-check": run_norm_check,
    "variance-check": run_variance_check,
    "cycle-oracle": run_cycle_oracle,
    "er-concentration": run_er_concentration,
    "structural-zero": run_structural_zero,
}


def run(cfg: ExperimentConfig, out) -> RunResult:
    """Run ``cfg`` into directory ``out``; writes ``config.ini`` and ``run.json`` too.

    Raises ``OSError`` when the directory cannot be created or written.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini())
    t0 = time.perf_counter()
    res = RUNNERS[cfg.kind](cfg, out)
    write_json(out / "run.json", cfg, {
        "status": res.status,
        "failures": res.failures,
        "summary": res.summary,
        "files": sorted(p.name for p in res.files),
        "elapsed_s": round(time.perf_counter() - t0, 3),
    })
    return res
