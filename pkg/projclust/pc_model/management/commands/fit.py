import logging

from django.core.exceptions import ValidationError

from projclust.pc_model.utils.diagnostics import summarize_draws
from projclust.pc_model.utils.draws import write_draws
from projclust.pc_model.utils.gibbs import gibbs_fit
from projclust.utils.commands import DRAWS_FILE, PipelineCommand

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = (
        "Standardize the input data, fit the linear mixed model by Gibbs sampling "
        "and write the posterior draws (draws.jsonl) with convergence diagnostics"
    )

    def add_step_arguments(self, parser):
        parser.add_argument("--input", type=str, default=None, help="long-format data CSV")
        self.add_design_arguments(parser)
        parser.add_argument("--chains", type=int, default=None)
        parser.add_argument("--iter", dest="iterations", type=int, default=None)
        parser.add_argument("--burn-in", dest="burn_in", type=int, default=None)
        parser.add_argument("--thin", type=int, default=None)

    def step_overrides(self, options):
        return {
            "MCMC_CHAINS": options.get("chains"),
            "MCMC_ITER": options.get("iterations"),
            "MCMC_BURN_IN": options.get("burn_in"),
            "MCMC_THIN": options.get("thin"),
        }

    def run(self, cfg, options):
        # validate everything before any sampling
        spec = cfg.model_spec()
        mcmc = cfg.mcmc_config()
        draws_path = cfg.out_dir / DRAWS_FILE
        if draws_path.exists() and not cfg.force:
            raise ValidationError(
                f"{draws_path} already exists; pass --force to overwrite it",
                code="exists",
            )
        ds, transform = self.load_dataset(cfg)

        draws = gibbs_fit(ds, spec, mcmc, n_jobs=cfg.threads, progress=self.progress(options))

        out_dir = self.prepare_out_dir(cfg)
        write_draws(
            draws_path, draws, ds.ids, config_hash=cfg.config_hash, design=cfg.design_keys()
        )
        self.write_report(out_dir / "standardization.json", transform.as_dict())
        summary = summarize_draws(draws)
        summary.to_csv(out_dir / "diagnostics.csv", lineterminator="\n")

        self.success(
            f"Wrote {len(draws)} draws ({mcmc.n_chains} chains) for {len(ds)} subjects "
            f"to {draws_path}; max split R-hat {summary['r_hat'].max():.3f}"
        )
