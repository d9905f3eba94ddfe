import logging

import numpy as np
from django.core.exceptions import ValidationError
from joblib import Parallel, delayed

from projclust.pc_analytics.utils.evaluation import coincidence, coincidence_summary
from projclust.pc_clustering.utils.partition_file import write_partitions
from projclust.pc_clustering.utils.projection import project_cluster
from projclust.pc_clustering.utils.pipeline import run_selection
from projclust.pc_model.utils.draws import spread_indices
from projclust.pc_model.utils.replicate import projection_problem
from projclust.utils.commands import DrawsCommand
from projclust.utils.file_io import write_matrix_csv

logger = logging.getLogger(__name__)


def cluster_draw(design, draw, shared, K, draw_index, seed, max_iter, n_restarts):
    b_A, Qinv = projection_problem(design, draw, shared)
    partition = project_cluster(
        b_A,
        Qinv,
        K,
        max_iter=max_iter,
        n_restarts=n_restarts,
        seed=np.random.SeedSequence(seed, spawn_key=(draw_index,)),
    )
    return partition.as_record(draw_index=draw_index)


class Command(DrawsCommand):
    help = (
        "Project every posterior draw onto K clusters of the shared random effects and "
        "write the partitions (partitions.jsonl) and pairwise coincidence matrix"
    )

    def add_step_arguments(self, parser):
        parser.add_argument(
            "--select", dest="selection", type=str, default=None,
            help="choose K first with kl or bootstrap",
        )
        parser.add_argument(
            "--draws-used", dest="draws_used", type=int, default=None,
            help="number of posterior draws to cluster (0 = all)",
        )

    def step_overrides(self, options):
        return {
            "SELECTION": options.get("selection"),
            "CLUSTER_DRAWS": options.get("draws_used"),
        }

    def run(self, cfg, options):
        if cfg.k is not None and cfg.selection:
            raise ValidationError(
                "give either K or a selection method, not both", code="config"
            )
        if cfg.k is None and not cfg.selection:
            raise ValidationError("give K (--k) or a selection method", code="config")
        if cfg.selection == "both":
            raise ValidationError(
                "cluster needs a single selection method (kl or bootstrap)", code="config"
            )

        header, draws, cfg = self.read_draws(cfg, options)
        ds, spec, design = self.load_design(cfg, header)
        out_dir = self.prepare_out_dir(cfg)

        K = cfg.k
        if K is None:
            K = run_selection(cfg, ds, spec, design, draws, out_dir)[cfg.selection]["K"]
        if K > len(design):
            raise ValidationError(
                f"K={K} exceeds the {len(design)} subjects", code="out_of_range"
            )

        indices = spread_indices(len(draws), cfg.cluster_draws)
        records = Parallel(n_jobs=cfg.threads)(
            delayed(cluster_draw)(
                design, draws[k], spec.shared, K, int(k), cfg.seed, cfg.max_iter, cfg.restarts
            )
            for k in indices
        )
        write_partitions(out_dir / "partitions.jsonl", records, ds.ids, K, spec.shared)

        matrix = coincidence([np.asarray(r["labels"]) for r in records])
        write_matrix_csv(out_dir / "coincidence.csv", matrix, ds.ids)
        summary = coincidence_summary(matrix)
        summary["K"] = int(K)
        summary["draws"] = len(records)
        self.write_report(out_dir / "coincidence_summary.json", summary)

        self.success(
            f"Clustered {len(records)} draws into K={K} clusters; "
            f"{summary['solid']} of {summary['pairs']} pairs coincide with probability > 0.8"
        )
