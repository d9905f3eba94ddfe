from projclust.pc_data.utils.loading import drop_random_rows, write_csv
from projclust.pc_data.utils.synthetic import generate_example1
from projclust.utils.commands import PipelineCommand
from projclust.utils.file_io import write_labels


class Command(PipelineCommand):
    help = "Generate the four-group cosine dataset (data.csv) and its group labels (labels.csv)"

    def add_step_arguments(self, parser):
        parser.add_argument("--per-group", dest="per_group", type=int, default=None)
        parser.add_argument("--T", dest="T", type=int, default=None, help="observations per subject")
        parser.add_argument("--noise-var", dest="noise_var", type=float, default=None)
        parser.add_argument(
            "--missing", type=float, default=None, help="fraction of rows to delete at random"
        )

    def step_overrides(self, options):
        return {
            "SIM_PER_GROUP": options.get("per_group"),
            "SIM_T": options.get("T"),
            "SIM_NOISE_VAR": options.get("noise_var"),
            "SIM_MISSING": options.get("missing"),
        }

    def run(self, cfg, options):
        synth = cfg.synth_config()
        out_dir = self.prepare_out_dir(cfg)

        ds, labels = generate_example1(synth)
        if cfg.sim_missing:
            ds = drop_random_rows(ds, cfg.sim_missing, seed=cfg.seed)

        write_csv(ds, out_dir / "data.csv")
        write_labels(out_dir / "labels.csv", ds.ids, labels)
        self.success(
            f"Simulated {len(ds)} subjects ({ds.n_total} observations) into {out_dir}"
        )
