from projclust.pc_data.utils.loading import load_csv, write_csv
from projclust.pc_data.utils.spectrum import spectrum_dataset
from projclust.utils.commands import PipelineCommand


class Command(PipelineCommand):
    help = (
        "Map each subject's raw series (subject,time,y) to its power spectrum at "
        "the lowest frequencies and write spectra.csv, ready for fit"
    )

    def add_step_arguments(self, parser):
        parser.add_argument("--input", type=str, default=None, help="raw signal CSV")
        parser.add_argument("--freqs", type=int, default=None, help="number of frequencies")
        parser.add_argument("--h", type=float, default=None, help="window half-width")

    def step_overrides(self, options):
        return {
            "SPECTRUM_FREQS": options.get("freqs"),
            "SPECTRUM_H": options.get("h"),
        }

    def run(self, cfg, options):
        raw = load_csv(cfg.input)
        spectra = spectrum_dataset(raw, n_freq=cfg.spectrum_freqs, h=cfg.spectrum_h)
        out_dir = self.prepare_out_dir(cfg)
        write_csv(spectra, out_dir / "spectra.csv")
        self.success(
            f"Wrote {cfg.spectrum_freqs}-frequency spectra of {len(spectra)} subjects "
            f"to {out_dir / 'spectra.csv'}"
        )
