import logging

import numpy as np

from gbolab.services.manifest_service import RunManifest
from gbolab.utils.duhamel_utils import cutoff_lemma_sweep, lemma_family
from gbolab.utils.spacetime_utils import TimeGrid
from gbolab.utils.spectral_utils import DispersionParams, SpatialGrid, SpectralField

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['b', 'lemma', 'delta', 'ratio']
GAIN_LEMMAS = {'x_gain': 'X^b against X^1/2', 'y_gain': 'Y^b against Y^1/2'}
LOSS_LEMMAS = {'x_half_loss': 'X^1/2', 'y_half_loss': 'Y^1/2', 'z_half_loss': 'Z^1/2', 'cdual_stability': 'Cdual'}


class CutoffsService:
    """delta-sweeps of the time-cutoff lemmas over a family of windowed linear flows"""

    def __init__(self, config):
        self.config = config
        self.params = DispersionParams(config.a)

    def family(self):
        config = self.config
        grid = SpatialGrid(config.n_x, config.length)
        u0 = SpectralField.from_samples(grid, np.exp(-grid.wrapped_x ** 2))
        return lemma_family(self.params, u0, TimeGrid(config.n_t, config.period), config.taus)

    def checks(self, manifest, b, sweeps):
        config = self.config
        stability = sweeps.get('tilde_x_stability')
        if stability is not None:
            if b < 0.5:
                spread = max(stability.ratios) / min(stability.ratios) - 1.0
                manifest.check(f"b={b:g}: tilde-X cutoff flat within {config.flat_tolerance:.0%}",
                               spread <= config.flat_tolerance)
            else:
                expected = 0.5 - b
                manifest.check(f"b={b:g}: tilde-X cutoff exponent {stability.fit.slope:.3f} near {expected:g}",
                               abs(stability.fit.slope - expected) <= config.slope_tolerance)
        if b < 0.5:
            for name, label in GAIN_LEMMAS.items():
                gain = sweeps.get(name)
                if gain is not None:
                    manifest.check(f"b={b:g}: {label} gains a positive power", gain.fit.slope > 0)
        for name, label in LOSS_LEMMAS.items():
            loss = sweeps.get(name)
            if loss is not None:
                manifest.check(f"b={b:g}: {label} cutoff loses at most a log", loss.fit.slope >= config.loss_floor)

    def run(self, out_dir):
        config, params = self.config, self.params
        manifest = RunManifest.start('cutoffs', config, out_dir)
        family = self.family()
        rows, summary = [], {}
        for b in config.b_values:
            logger.info("📈 b=%g: %d lemmas over %d cutoff scales", b, len(config.lemmas), len(config.deltas))
            sweeps = cutoff_lemma_sweep(params, family, params.s_star, b, config.deltas, config.lemmas)
            for name, result in sweeps.items():
                rows.extend({'b': b, 'lemma': name, 'delta': d, 'ratio': r}
                            for d, r in zip(result.deltas, result.ratios))
            summary[f"b={b:g}"] = {name: result.to_record() for name, result in sweeps.items()}
            self.checks(manifest, b, sweeps)
        manifest.write_csv('lemma_sweeps.csv', SWEEP_COLUMNS, rows)
        manifest.write_json('lemma_exponents.json', summary)
        manifest.summary = summary
        return manifest.finish()
