from projclust.pc_analytics.utils.evaluation import label_agreement_report
from projclust.pc_clustering.utils.partition_file import read_partitions
from projclust.utils.commands import PipelineCommand
from projclust.utils.file_io import read_labels


class Command(PipelineCommand):
    help = (
        "Compare the per-draw partitions with known group labels; writes the mean and "
        "standard deviation of the Rand and adjusted Rand indices to evaluation.json"
    )

    def add_step_arguments(self, parser):
        parser.add_argument(
            "--partitions", type=str, default=None,
            help="partition file (default OUT/partitions.jsonl)",
        )
        parser.add_argument(
            "--labels", type=str, default=None, help="subject,label CSV (default OUT/labels.csv)"
        )

    def run(self, cfg, options):
        partitions_path = options.get("partitions") or cfg.out_dir / "partitions.jsonl"
        labels_path = options.get("labels") or cfg.out_dir / "labels.csv"

        header, partitions, _ = read_partitions(partitions_path)
        truth = read_labels(labels_path, header["subjects"])
        report = label_agreement_report(partitions, truth)
        report["K"] = header.get("K")

        out_dir = self.prepare_out_dir(cfg)
        self.write_report(out_dir / "evaluation.json", report)
        self.success(
            f"Rand {report['rand_mean']:.3f} (sd {report['rand_sd']:.3f}), "
            f"ARI {report['ari_mean']:.3f} (sd {report['ari_sd']:.3f}) "
            f"over {report['partitions']} partitions"
        )
