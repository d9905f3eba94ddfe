import logging

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from projclust.pc_data.utils.design import build_design
from projclust.pc_data.utils.loading import load_csv
from projclust.pc_data.utils.scaling import standardize
from projclust.pc_model.utils.draws import read_draws
from projclust.utils.file_io import ensure_out_dir, write_json, write_run_config
from projclust.utils.run_config import DESIGN_KEYS, RunConfig

logger = logging.getLogger(__name__)

# exit codes of the pipeline commands
VALIDATION_ERROR = 2
NUMERICAL_ERROR = 3
IO_ERROR = 4

DRAWS_FILE = "draws.jsonl"


class PipelineCommand(BaseCommand):
    """Base class of the pipeline steps.

    Adds the flags every step shares, builds the ``RunConfig`` and turns
    validation, numerical and I/O failures into ``CommandError`` exit codes.
    Subclasses implement ``add_step_arguments``, ``step_overrides`` and
    ``run``.
    """

    def add_arguments(self, parser):
        parser.add_argument("--config", type=str, default=None, help="KEY=value config file")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--out", type=str, default=None, help="output directory")
        parser.add_argument("--k", type=int, default=None, help="number of clusters")
        parser.add_argument(
            "--shared", type=str, default=None, help="shared set: all, low:0..3, 0,1,2"
        )
        parser.add_argument("--threads", type=int, default=None, help="worker processes")
        parser.add_argument(
            "--force", action="store_true", default=None, help="overwrite existing outputs"
        )
        self.add_step_arguments(parser)

    def add_step_arguments(self, parser):
        pass

    def add_design_arguments(self, parser):
        parser.add_argument("--basis", type=str, default=None, help="fourier:9, bspline:30")
        parser.add_argument(
            "--fixed-basis", dest="fixed_basis", type=str, default=None,
            help="fixed-effect basis (default intercept only)",
        )
        parser.add_argument(
            "--no-covariates", dest="use_covariates", action="store_const", const=False,
            default=None, help="leave the covariate columns out of the fixed effects",
        )

    def step_overrides(self, options):
        return {}

    def run(self, cfg, options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            cfg = self.run_config(options)
            self.run(cfg, options)
        except ValidationError as err:
            raise CommandError(
                "Invalid input: " + "; ".join(err.messages), returncode=VALIDATION_ERROR
            ) from err
        except (np.linalg.LinAlgError, ArithmeticError) as err:
            raise CommandError(f"Numerical error: {err}", returncode=NUMERICAL_ERROR) from err
        except OSError as err:
            raise CommandError(f"I/O error: {err}", returncode=IO_ERROR) from err

    def run_config(self, options):
        overrides = {
            "INPUT": options.get("input"),
            "SEED": options.get("seed"),
            "OUT": options.get("out"),
            "K": options.get("k"),
            "SHARED": options.get("shared"),
            "THREADS": options.get("threads"),
            "FORCE": options.get("force"),
            "BASIS": options.get("basis"),
            "FIXED_BASIS": options.get("fixed_basis"),
            "USE_COVARIATES": options.get("use_covariates"),
        }
        overrides.update(self.step_overrides(options))
        return RunConfig.load(options.get("config"), overrides)

    # helpers shared by the steps

    def progress(self, options):
        return options.get("verbosity", 1) > 1

    @property
    def command_name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def prepare_out_dir(self, cfg):
        out_dir = ensure_out_dir(cfg.out_dir)
        write_run_config(out_dir, cfg, self.command_name)
        return out_dir

    def load_dataset(self, cfg, ids=None):
        """The standardized input dataset, optionally reordered to ``ids``."""
        ds, transform = standardize(load_csv(cfg.input))
        if ids is not None:
            unknown = sorted(set(ids) - set(ds.ids))
            if unknown or len(ids) != len(ds):
                raise ValidationError(
                    f"{cfg.input} does not hold the {len(ids)} subjects of the draw file",
                    code="shape",
                )
            ds = ds.subset(ids)
        return ds, transform

    def load_design(self, cfg, header):
        """Design matrices matching a draw file header."""
        spec = cfg.model_spec()
        ds, _ = self.load_dataset(cfg, header["subjects"])
        design = build_design(ds, spec)
        if (design.p, design.q) != (header["p"], header["q"]):
            raise ValidationError(
                f"configured design has p={design.p}, q={design.q} but the draws were "
                f"fitted with p={header['p']}, q={header['q']}",
                code="config",
            )
        return ds, spec, design

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))

    def write_report(self, path, report):
        write_json(path, report)
        logger.info("Wrote %s", path)


class DrawsCommand(PipelineCommand):
    """A pipeline step that reads the posterior draws written by ``fit``."""

    def add_arguments(self, parser):
        parser.add_argument("--input", type=str, default=None, help="data CSV used by fit")
        parser.add_argument(
            "--draws", type=str, default=None, help="draw file (default OUT/draws.jsonl)"
        )
        self.add_design_arguments(parser)
        super().add_arguments(parser)

    def read_draws(self, cfg, options):
        """Return ``(header, draws, cfg)``.

        Design keys not given on the command line default to the ones recorded
        in the draw file header.
        """
        path = options.get("draws") or cfg.out_dir / DRAWS_FILE
        header, draws = read_draws(path)
        if not draws:
            raise ValidationError(f"{path} holds no draws", code="empty")
        fitted = {
            key: value
            for key, value in header.items()
            if key in DESIGN_KEYS and options.get(key.lower()) is None
        }
        cfg = cfg.with_design(fitted)
        if header.get("config_hash") and header["config_hash"] != cfg.config_hash:
            logger.info(
                "Draws in %s were fitted under config %s", path, header["config_hash"][:12]
            )
        return header, draws, cfg
