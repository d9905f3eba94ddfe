import logging

from projclust.pc_clustering.utils.selection import (
    choose_k_bootstrap,
    choose_k_kl,
    instability_curve,
    kl_curve,
    replicate_fitted_means,
)
from projclust.pc_data.utils.loading import union_times
from projclust.utils.file_io import write_json, write_matrix_csv, write_rows_csv

logger = logging.getLogger(__name__)


def select_with_kl(cfg, design, draws, spec, out_dir):
    curve = kl_curve(
        design,
        draws,
        spec.shared,
        cfg.k_max,
        S=min(cfg.curve_draws, len(draws)) if cfg.curve_draws else None,
        seed=cfg.seed,
        n_jobs=cfg.threads,
        max_iter=cfg.max_iter,
        n_restarts=cfg.restarts,
    )
    write_rows_csv(out_dir / "kl_curve.csv", curve.rows(), ["K", "KL_K"])
    return {"K": choose_k_kl(curve, cfg.epsilon), "epsilon": cfg.epsilon}


def select_with_bootstrap(cfg, ds, draws, spec, out_dir):
    times = union_times(ds)
    fitted = replicate_fitted_means(
        draws, spec, times, n_covariates=ds.n_covariates, max_draws=cfg.fitted_draws or len(draws)
    )
    write_matrix_csv(
        out_dir / "fitted_means.csv", fitted, ds.ids, columns=[repr(float(t)) for t in times]
    )
    curve = instability_curve(
        fitted, K_max=cfg.k_max, B=cfg.bootstrap_b, seed=cfg.seed, n_jobs=cfg.threads
    )
    write_rows_csv(out_dir / "instability_curve.csv", curve.rows(), ["K", "I_K"])
    return {
        "K": choose_k_bootstrap(curve, K_max=cfg.k_max, rule=cfg.bootstrap_rule),
        "rule": cfg.bootstrap_rule,
        "B": cfg.bootstrap_b,
    }


def run_selection(cfg, ds, spec, design, draws, out_dir, methods=None):
    """Run the requested K-selection rules, write their curves and
    ``chosen_k.json``; return the report."""
    if methods is None:
        methods = ["kl", "bootstrap"] if cfg.selection in ("", "both") else [cfg.selection]
    report = {"shared": list(spec.shared), "K_max": cfg.k_max}
    if "kl" in methods:
        report["kl"] = select_with_kl(cfg, design, draws, spec, out_dir)
        logger.info("KL-ratio rule chose K=%d", report["kl"]["K"])
    if "bootstrap" in methods:
        report["bootstrap"] = select_with_bootstrap(cfg, ds, draws, spec, out_dir)
        logger.info("Instability rule chose K=%d", report["bootstrap"]["K"])
    write_json(out_dir / "chosen_k.json", report)
    return report
