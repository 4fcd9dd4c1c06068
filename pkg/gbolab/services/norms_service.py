import logging

import numpy as np

from gbolab.services.manifest_service import RunManifest
from gbolab.utils.bourgain_utils import (
    f_norm_report, lebesgue_l4, norm_Cdual, norm_tildeX, norm_X, pairing, strichartz_ratio, z_norm_report,
)
from gbolab.utils.spacetime_utils import TimeGrid, windowed_linear_flow
from gbolab.utils.spectral_utils import DispersionParams, SpatialGrid, SpectralField

logger = logging.getLogger(__name__)

REFERENCE_TAU = 0.25
FAMILY_COLUMNS = ['index', 'strichartz', 'strichartz_refined', 'X_b0', 'tildeX_b0', 'L4',
                  'L2', 'X00', 'duality_ratio']


def random_data(grid, rng, max_mode):
    """Real trigonometric polynomial with random complex amplitudes on modes 1..max_mode"""
    coeffs = np.zeros(grid.n_points, dtype=complex)
    amplitudes = rng.normal(size=max_mode) + 1j * rng.normal(size=max_mode)
    coeffs[1:max_mode + 1] = amplitudes * grid.length
    coeffs[-max_mode:] = np.conj(amplitudes[::-1]) * grid.length
    return SpectralField(grid, coeffs)


def refine(u0):
    """The same band-limited data on a grid with twice the points"""
    grid = u0.grid
    fine = SpatialGrid(2 * grid.n_points, grid.length)
    coeffs = np.zeros(fine.n_points, dtype=complex)
    half = grid.n_points // 2
    coeffs[:half] = u0.coeffs[:half]
    coeffs[-half + 1:] = u0.coeffs[-half + 1:]
    return SpectralField(fine, coeffs)


class NormsService:
    """Norm evaluations on windowed linear flows: Strichartz constants, embeddings, duality"""

    def __init__(self, config):
        self.config = config
        self.params = DispersionParams(config.a)

    def family_row(self, index, u0, partner):
        config, params = self.config, self.params
        coarse_time = TimeGrid(config.n_t, config.period)
        fine_time = TimeGrid(2 * config.n_t, config.period)
        u = windowed_linear_flow(params, u0, coarse_time, config.tau)
        u_fine = windowed_linear_flow(params, refine(u0), fine_time, config.tau)
        g = windowed_linear_flow(params, partner, coarse_time, config.tau / 2)
        s = params.s_star
        dual_bound = norm_X(params, u, s, -0.5) * norm_Cdual(params, g, -s)
        return {
            'index': index,
            'strichartz': strichartz_ratio(params, u),
            'strichartz_refined': strichartz_ratio(params, u_fine),
            'X_b0': norm_X(params, u, 0.0, params.b0),
            'tildeX_b0': norm_tildeX(params, u, 0.0, params.b0),
            'L4': lebesgue_l4(u),
            'L2': u.fourier_l2_norm(),
            'X00': norm_X(params, u, 0.0, 0.0),
            'duality_ratio': abs(pairing(u, g)) / dual_bound if dual_bound > 0 else 0.0,
        }

    def reference_norms(self):
        """F and Z norms of psi(t/tau) W(t) e^{-x^2}, tau capped so the packet stays inside the period"""
        config, params = self.config, self.params
        grid = SpatialGrid(config.n_x, config.length)
        u0 = SpectralField.from_samples(grid, np.exp(-grid.wrapped_x ** 2))
        s = params.s_star
        f_report = f_norm_report(params, u0, s)
        tau = min(config.tau, REFERENCE_TAU)
        u = windowed_linear_flow(params, u0, TimeGrid(config.n_t, config.period), tau)
        z_report = z_norm_report(params, u, s, 0.5)
        return {'F': f_report.to_record(), 'Z': z_report.to_record()}

    def run(self, out_dir):
        config = self.config
        manifest = RunManifest.start('norms', config, out_dir)
        rng = np.random.default_rng(config.seed)
        grid = SpatialGrid(config.n_x, config.length)
        rows = []
        for index in range(config.family_size):
            u0 = random_data(grid, rng, config.max_mode)
            partner = random_data(grid, rng, config.max_mode)
            rows.append(self.family_row(index, u0, partner))
            if (index + 1) % 50 == 0:
                logger.info("📈 %d/%d family members", index + 1, config.family_size)
        manifest.write_csv('family.csv', FAMILY_COLUMNS, rows)

        base = np.array([row['strichartz'] for row in rows])
        fine = np.array([row['strichartz_refined'] for row in rows])
        median = float(np.median(base))
        summary = {
            'strichartz_max': float(base.max()),
            'strichartz_median': median,
            'strichartz_refined_max': float(fine.max()),
            'reference': self.reference_norms(),
        }
        manifest.check("Strichartz maximum within spread of the median",
                       summary['strichartz_max'] < config.max_spread * median)
        manifest.check("Strichartz maximum stable under refinement",
                       summary['strichartz_refined_max'] < config.max_spread * median)
        manifest.check("L2 <= X^0_0 on every member", all(row['L2'] <= row['X00'] * (1 + 1e-12) for row in rows))
        manifest.check("duality pairing bounded", all(row['duality_ratio'] <= 1 + 1e-12 for row in rows))
        manifest.write_json('reference_norms.json', summary['reference'])
        manifest.summary = summary
        return manifest.finish()
