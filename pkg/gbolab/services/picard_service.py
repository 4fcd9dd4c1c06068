import logging

import numpy as np

from gbolab.services.manifest_service import RunManifest
from gbolab.utils.duhamel_utils import (
    TimeCutoff, compare_with_evolution, contraction_sweep, differential_residual, integral_residual,
    picard_iterate, select_delta, solution_map_continuity,
)
from gbolab.utils.spacetime_utils import TimeGrid
from gbolab.utils.spectral_utils import DispersionParams, SpatialGrid, SpectralField

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ['s', 'k', 'd_k', 'ratio', 'z_norm']
CONTINUITY_COLUMNS = ['eps', 'lipschitz_ratio']
SWEEP_COLUMNS = ['delta', 'worst_ratio']


def gaussian_data(grid, epsilon, shift=0.0):
    return SpectralField.from_samples(grid, epsilon * np.exp(-(grid.wrapped_x - shift) ** 2))


class PicardService:
    """Picard iteration of the cut-off Duhamel map, checked against the time stepper"""

    def __init__(self, config):
        self.config = config
        self.params = DispersionParams(config.a)
        self.grid = SpatialGrid(config.n_x, config.length)

    def time_grid_for(self, delta):
        return TimeGrid(self.config.n_t, self.config.window_factor * delta)

    def choose_delta(self, u0):
        """The configured delta, or the largest dyadic one passing the smallness rule when theta is set"""
        config = self.config
        if config.theta is None:
            return config.delta
        trial = picard_iterate(self.params, TimeCutoff(config.delta), u0, self.time_grid_for(config.delta),
                               k_max=0)
        delta = select_delta(trial.c_emp, trial.a_ball, config.theta)
        logger.info("📈 smallness rule picked delta=%g (C=%.3g, A=%.3g)", delta, trial.c_emp, trial.a_ball)
        return delta

    def run(self, out_dir):
        config, params = self.config, self.params
        manifest = RunManifest.start('picard', config, out_dir)
        u0 = gaussian_data(self.grid, config.epsilon)
        delta = self.choose_delta(u0)
        cutoff = TimeCutoff(delta)
        time_grid = self.time_grid_for(delta)

        history, states = [], {}
        for offset in config.s_offsets:
            s = params.s_star + offset
            state = picard_iterate(params, cutoff, u0, time_grid, k_max=config.k_max, s=s,
                                   tolerance=config.tolerance)
            states[offset] = state
            for record in state.history_records():
                history.append({'s': s, **record, 'z_norm': state.z_norms[record['k'] + 1]})
            worst = max(state.ratios, default=0.0)
            logger.info("📈 s=%.3f: %d iterations, worst ratio %.3g", s, state.k, worst)
            manifest.check(f"s={s:.3f}: iteration converged", state.converged)
            manifest.check(f"s={s:.3f}: contraction ratio <= {config.max_ratio:g}", worst <= config.max_ratio)
        manifest.write_csv('history.csv', HISTORY_COLUMNS, history)

        limit = states[config.s_offsets[0]]
        summary = {'delta': delta, 'c_emp': limit.c_emp, 'a_ball': limit.a_ball, 'iterations': limit.k}
        if limit.converged and config.epsilon > 0:
            summary['integral_residual'] = integral_residual(params, cutoff, u0, limit.field)
            summary['differential_residual'] = differential_residual(params, cutoff, u0, limit.field)
            summary['evolution_gap'] = compare_with_evolution(params, limit, cutoff, u0)
            manifest.check("integral equation residual", summary['integral_residual'] < config.max_residual)
            manifest.check("differential residual", summary['differential_residual'] < config.max_residual)
            manifest.check("agrees with the time stepper", summary['evolution_gap'] < config.max_evolution_gap)

            rng = np.random.default_rng(config.seed)
            direction = gaussian_data(self.grid, rng.normal(), shift=rng.uniform(-2.0, 2.0))
            continuity = solution_map_continuity(params, cutoff, u0, direction, config.perturbations, time_grid,
                                                 k_max=config.k_max)
            manifest.write_csv('continuity.csv', CONTINUITY_COLUMNS,
                               [{'eps': eps, 'lipschitz_ratio': ratio}
                                for eps, ratio in zip(continuity.sizes, continuity.ratios)])
            summary['lipschitz_spread'] = continuity.spread
            manifest.check("solution map Lipschitz in the data", continuity.spread < config.max_lipschitz_spread)

        if config.delta_sweep:
            worst, fit = contraction_sweep(params, u0, config.delta_sweep, self.time_grid_for,
                                           k_max=config.k_max)
            manifest.write_csv('delta_sweep.csv', SWEEP_COLUMNS,
                               [{'delta': d, 'worst_ratio': r} for d, r in zip(config.delta_sweep, worst)])
            summary['delta_exponent'] = fit.to_record()
            manifest.check("contraction improves as delta shrinks", fit.slope > 0)
        manifest.summary = summary
        return manifest.finish()
