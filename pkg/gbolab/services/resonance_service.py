import logging
import math

import numpy as np

from gbolab.services.manifest_service import RunManifest
from gbolab.utils.resonance_utils import (
    admissible_b, brute_force_constants, jacobian_constant, levelset_derivative_constant,
    levelset_measure, lower_bound_check, resonance_fn, sample_region,
)
from gbolab.utils.spectral_utils import DispersionParams, omega

logger = logging.getLogger(__name__)

CONSTANT_COLUMNS = ['a', 'branch', 'c_empirical', 'c_bound', 'n_samples', 'violations', 'worst_sample']
LEVELSET_COLUMNS = ['a', 'j', 'm1', 'theta_trials', 'measured_max', 'bound', 'c_empirical',
                    'c_empirical_refined', 'out_of_regime']
WINDOW_COLUMNS = ['a', 'lower', 'upper', 'empty', 'jacobian_constant', 'derivative_constant']
THETA_TRIALS = 100


def cubic_closed_form_error(extent=10.0, n=201):
    """max relative gap between Omega at a=1 and 3 xi1 xi2 (xi1 + xi2) where all signs agree"""
    params = DispersionParams(1.0)
    grid = np.linspace(-extent, extent, n)
    xi1, xi2 = np.meshgrid(grid, grid)
    agree = (xi1 * xi2 >= 0) & (xi1 * (xi1 + xi2) >= 0)
    exact = 3 * xi1 * xi2 * (xi1 + xi2)
    gap = np.abs(resonance_fn(params, xi1, xi2) - exact) / np.maximum(1.0, np.abs(exact))
    return float(np.max(gap[agree]))


def symmetry_error(params, xi1, xi2):
    """Largest failure of Omega(x, y) = Omega(y, x) and Omega(-x, -y) = -Omega(x, y), relative to the symbols"""
    big_omega = resonance_fn(params, xi1, xi2)
    scale = 1.0 + np.abs(omega(params, xi1)) + np.abs(omega(params, xi2)) + np.abs(omega(params, xi1 + xi2))
    swapped = np.abs(resonance_fn(params, xi2, xi1) - big_omega) / scale
    reflected = np.abs(resonance_fn(params, -xi1, -xi2) + big_omega) / scale
    return float(max(swapped.max(), reflected.max()))


class ResonanceService:
    """Resonance lower bounds, Jacobian and level-set constants, admissible b windows"""

    def __init__(self, config):
        self.config = config

    def constants_for(self, index, a):
        config = self.config
        params = DispersionParams(a)
        rng = np.random.default_rng([config.seed, index])
        xi1, xi2 = sample_region(rng, config.n_samples, config.xi_scale)
        c_same, c_opposite = brute_force_constants(params, config.n_beta)
        report = lower_bound_check(params, xi1, xi2, c_same, c_opposite)
        counts = {'same_sign': 0, 'opposite_sign': 0}
        for branch, *_ in report.violations:
            counts[branch] += 1
        bounds = {'same_sign': c_same, 'opposite_sign': c_opposite}
        rows = []
        for record in report.to_records():
            record['c_bound'] = bounds[record['branch']]
            record['violations'] = counts[record['branch']]
            rows.append(record)
        logger.info("📈 a=%s: %d samples, %d violations", a, report.n_samples, len(report.violations))
        return rows, symmetry_error(params, xi1, xi2), len(report.rejected)

    def levelset_rows(self, index, a):
        """Worst measured/bound over random (theta1, theta2) per layer j, on two scan resolutions"""
        config = self.config
        params = DispersionParams(a)
        rng = np.random.default_rng([config.seed, index, 1])
        xi1 = config.levelset_xi1
        m1 = math.log2(xi1)
        rows = []
        for j in config.levelset_layers:
            thetas = rng.uniform(-2.0 ** (j + 1), 2.0 ** (j + 1), size=(THETA_TRIALS, 2))
            reports = [levelset_measure(params, xi1, t1, t2, j, m1) for t1, t2 in thetas]
            refined = [levelset_measure(params, xi1, t1, t2, j, m1, n_scan=1 << 18) for t1, t2 in thetas]
            bound = reports[0].bound
            rows.append({
                'a': a, 'j': j, 'm1': m1, 'theta_trials': THETA_TRIALS,
                'measured_max': max(r.measured for r in reports),
                'bound': bound,
                'c_empirical': max(r.constant for r in reports),
                'c_empirical_refined': max(r.constant for r in refined),
                'out_of_regime': any(r.out_of_regime for r in reports),
            })
        return rows

    def run(self, out_dir):
        config = self.config
        manifest = RunManifest.start('resonance', config, out_dir)
        constant_rows, levelset, windows = [], [], []
        worst_symmetry, rejected = 0.0, 0
        for index, a in enumerate(config.a_values):
            rows, symmetry, n_rejected = self.constants_for(index, a)
            constant_rows.extend(rows)
            worst_symmetry = max(worst_symmetry, symmetry)
            rejected += n_rejected
            levelset.extend(self.levelset_rows(index, a))

        for a in sorted(set(config.a_values) | {0.0, 0.5, 1.0}):
            params = DispersionParams(a)
            interval = admissible_b(params)
            windows.append({'a': a, 'lower': interval.lower, 'upper': interval.upper, 'empty': interval.empty,
                            'jacobian_constant': jacobian_constant(params),
                            'derivative_constant': levelset_derivative_constant(params, config.levelset_xi1)})

        manifest.write_csv('constants.csv', CONSTANT_COLUMNS, constant_rows)
        manifest.write_csv('levelset.csv', LEVELSET_COLUMNS, levelset)
        manifest.write_csv('admissible_b.csv', WINDOW_COLUMNS, windows)
        manifest.write_json('constants.json', constant_rows)

        closed_form = cubic_closed_form_error()
        by_a = {row['a']: row for row in windows}
        manifest.check("no resonance bound violations", all(row['violations'] == 0 for row in constant_rows))
        manifest.check("every sample inside the comparability region", rejected == 0)
        manifest.check("Omega symmetric and odd", worst_symmetry < 1e-12)
        manifest.check("a=1 cubic closed form", closed_form < 1e-12)
        manifest.check("admissible b empty at a=0", by_a[0.0]['empty'])
        manifest.check("admissible b at a=0.5 is (0.35, 0.5)",
                       abs(by_a[0.5]['lower'] - 0.35) < 1e-12 and abs(by_a[0.5]['upper'] - 0.5) < 1e-12)
        manifest.check("admissible b at a=1 is (1/3, 1/2)",
                       abs(by_a[1.0]['lower'] - 1 / 3) < 1e-12 and abs(by_a[1.0]['upper'] - 0.5) < 1e-12)
        manifest.check("admissible b nonempty for 0 < a < 1",
                       all(not row['empty'] for row in windows if 0.0 < row['a'] < 1.0))
        manifest.check("Jacobian and level-set derivative bounded below",
                       all(row['jacobian_constant'] > 0 and row['derivative_constant'] > 0
                           for row in windows))
        manifest.summary = {'closed_form_error': closed_form, 'symmetry_error': worst_symmetry,
                            'levelset_constant_max': max((row['c_empirical'] for row in levelset), default=0.0)}
        return manifest.finish()
