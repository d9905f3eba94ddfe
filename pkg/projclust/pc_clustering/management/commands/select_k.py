from django.core.exceptions import ValidationError

from projclust.pc_clustering.utils.pipeline import run_selection
from projclust.utils.commands import DrawsCommand

METHODS = {"kl": ["kl"], "bootstrap": ["bootstrap"], "both": ["kl", "bootstrap"]}


class Command(DrawsCommand):
    help = (
        "Choose the number of clusters from the posterior draws with the KL-ratio "
        "rule and/or bootstrap clustering instability; writes the curves and chosen_k.json"
    )

    def add_step_arguments(self, parser):
        parser.add_argument(
            "--method", dest="selection", type=str, default=None, help="kl, bootstrap or both"
        )
        parser.add_argument("--epsilon", type=float, default=None, help="KL-ratio threshold")
        parser.add_argument("--B", dest="bootstrap_b", type=int, default=None)
        parser.add_argument("--rule", type=str, default=None, help="half_max or min")
        parser.add_argument("--k-max", dest="k_max", type=int, default=None)

    def step_overrides(self, options):
        return {
            "SELECTION": options.get("selection"),
            "EPSILON": options.get("epsilon"),
            "BOOTSTRAP_B": options.get("bootstrap_b"),
            "BOOTSTRAP_RULE": options.get("rule"),
            "K_MAX": options.get("k_max"),
        }

    def run(self, cfg, options):
        methods = METHODS.get(cfg.selection or "both")
        if methods is None:
            raise ValidationError(f"unknown selection method {cfg.selection!r}", code="config")

        header, draws, cfg = self.read_draws(cfg, options)
        ds, spec, design = self.load_design(cfg, header)
        out_dir = self.prepare_out_dir(cfg)
        report = run_selection(cfg, ds, spec, design, draws, out_dir, methods=methods)

        chosen = ", ".join(f"{m}: K={report[m]['K']}" for m in methods)
        self.success(f"Chose {chosen} (K_max={cfg.k_max}) from {len(draws)} draws")
