import json

import numpy as np
import pytest

from qmet import matcore, measurement, states, tomography
from qmet.errors import DomainError
from qmet.streams import RandomStream


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


class TestSettings:
    def test_nine_settings_in_grid_order(self):
        got = tomography.standard_settings()
        assert len(got) == 9
        labels = [s.label() for s in got]
        assert labels == ["HV,HV", "HV,DA", "HV,RL",
                          "DA,HV", "DA,DA", "DA,RL",
                          "RL,HV", "RL,DA", "RL,RL"]

    def test_thirty_six_projectors_complete_per_setting(self):
        for setting in tomography.standard_settings():
            projs = measurement.setting_projectors(setting)
            assert len(projs) == 4
            np.testing.assert_allclose(sum(projs), np.eye(4), atol=1e-12)

    def test_design_spans_hermitian_space(self):
        # rank oracle: numpy SVD-based matrix_rank on the 36x16 design
        design = tomography._design_matrix(tomography.standard_settings())
        assert np.linalg.matrix_rank(design) == 16


class TestDataset:
    def test_simulate_is_deterministic(self):
        rho = states.family_state(0.6, 0.5)
        a = tomography.simulate_tomography(rho, 500, RandomStream(11, 3))
        b = tomography.simulate_tomography(rho, 500, RandomStream(11, 3))
        np.testing.assert_array_equal(a.counts, b.counts)
        assert np.all(a.n_per_setting == 500)

    def test_singlet_hvhv_counts_only_on_cross_outcomes(self):
        ds = tomography.simulate_tomography(states.singlet(), 2000, RandomStream(5))
        row = ds.counts[0]  # HV,HV row
        assert row[0] == 0 and row[3] == 0
        assert row[1] + row[2] == 2000

    def test_frequencies_within_five_sigma_everywhere(self):
        rho = states.family_state(0.37, 0.83)
        n = 10**5
        ds = tomography.simulate_tomography(rho, n, RandomStream(21, 9))
        for setting, row in zip(ds.settings, ds.counts):
            probs = measurement.outcome_probabilities(rho, setting).as_array()
            sigma = np.sqrt(probs * (1 - probs) / n)
            assert np.all(np.abs(row / n - probs) <= 5 * sigma + 1e-12)

    def test_validation_rejects_bad_shapes_and_values(self):
        settings = tomography.standard_settings()
        good = np.ones((9, 4))
        with pytest.raises(DomainError):
            tomography.TomoDataset(settings, np.ones((8, 4)))
        bad = good.copy()
        bad[2, 1] = -1.0
        with pytest.raises(DomainError):
            tomography.TomoDataset(settings, bad)
        bad = good.copy()
        bad[4] = 0.0
        with pytest.raises(DomainError):
            tomography.TomoDataset(settings, bad)

    def test_json_round_trip(self):
        ds = tomography.simulate_tomography(states.singlet(), 300, RandomStream(2))
        text = tomography.dataset_to_json(ds)
        back = tomography.dataset_from_json(text)
        np.testing.assert_array_equal(back.counts, ds.counts)
        assert [s.label() for s in back.settings] == [s.label() for s in ds.settings]
        # counts serialize as plain integers for measured data
        assert isinstance(json.loads(text)[0]["n_pp"], int)

    def test_json_malformed_rejected(self):
        with pytest.raises(DomainError):
            tomography.dataset_from_json('[{"basis_a": "HV"}]')
        with pytest.raises(DomainError):
            tomography.dataset_from_json('{"not": "a list"}')


class TestLinearInversion:
    def test_exact_singlet_recovered(self):
        ds = tomography.exact_dataset(states.singlet())
        rec = tomography.reconstruct_linear(ds)
        assert rec.method == "linear_inversion"
        assert np.abs(rec.rho_hat - states.singlet()).max() < 1e-10
        assert rec.psd_ok

    def test_exact_family_half_recovered(self):
        rho = states.family_state(0.5, 0.5)
        rec = tomography.reconstruct_linear(tomography.exact_dataset(rho))
        assert np.abs(rec.rho_hat - rho).max() < 1e-10

    def test_finite_data_hermitian_unit_trace(self):
        ds = tomography.simulate_tomography(states.family_state(0.3, 0.7), 400,
                                            RandomStream(8, 1))
        rec = tomography.reconstruct_linear(ds)
        np.testing.assert_allclose(rec.rho_hat, rec.rho_hat.conj().T, atol=1e-12)
        assert abs(np.trace(rec.rho_hat).real - 1.0) < 1e-12

    def test_indefinite_estimate_is_flagged(self):
        # small-n singlet data: the unconstrained estimate dips well below zero
        ds = tomography.simulate_tomography(states.singlet(), 100, RandomStream(3, 2))
        rec = tomography.reconstruct_linear(ds)
        assert rec.min_eigenvalue < -1e-6
        assert not rec.psd_ok


class TestMLE:
    def test_noiseless_round_trip_all_reconstructors(self):
        for rho in (states.singlet(), states.dephased_mixture(),
                    states.family_state(0.37, 0.21)):
            ds = tomography.exact_dataset(rho, 1e5)
            li = tomography.reconstruct_linear(ds)
            mle = tomography.reconstruct_mle(ds)
            assert trace_distance(li.rho_hat, rho) < 1e-6
            assert trace_distance(mle.rho_hat, rho) < 1e-6
            assert mle.converged

    def test_output_is_physical(self):
        ds = tomography.simulate_tomography(states.singlet(), 1000, RandomStream(17))
        rec = tomography.reconstruct_mle(ds)
        rho = rec.rho_hat
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert abs(np.trace(rho).real - 1.0) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12
        assert rec.psd_ok

    def test_likelihood_dominates_linear_inversion(self):
        # invariant: MLE log-likelihood >= projected linear inversion's
        for seed in range(4):
            rho = states.family_state(0.2 + 0.2 * seed, 0.4)
            ds = tomography.simulate_tomography(rho, 2000, RandomStream(40 + seed))
            li = tomography.reconstruct_linear(ds)
            mle = tomography.reconstruct_mle(ds)
            assert mle.log_likelihood >= li.log_likelihood - 1e-9

    def test_self_consistency_fidelity(self):
        for rho in (states.singlet(), states.dephased_mixture()):
            ds = tomography.simulate_tomography(rho, 10**5, RandomStream(77, 5))
            rec = tomography.reconstruct_mle(ds)
            assert rec.converged
            assert states.fidelity(rho, rec.rho_hat) >= 0.99

    def test_nonconvergence_is_flagged_not_raised(self):
        ds = tomography.simulate_tomography(states.singlet(), 1000, RandomStream(1))
        rec = tomography.reconstruct_mle(ds, max_sweeps=1)
        assert not rec.converged
        assert rec.iterations == 1

    def test_mean_fidelity_monotone_in_shots(self):
        # invariant: mean fidelity non-decreasing in n_per_setting
        rho = states.family_state(0.6, 0.5)
        means = []
        for n in (10**2, 10**3, 10**4, 10**5):
            fids = []
            for seed in range(50):
                ds = tomography.simulate_tomography(rho, n, RandomStream(seed, n))
                rec = tomography.reconstruct_mle(ds)
                fids.append(states.fidelity(rho, rec.rho_hat))
            means.append(np.mean(fids))
        assert all(b >= a for a, b in zip(means, means[1:]))

    def test_reconstruction_json_export(self):
        ds = tomography.simulate_tomography(states.singlet(), 500, RandomStream(9))
        rec = tomography.reconstruct_mle(ds)
        blob = json.loads(rec.to_json())
        assert blob["method"] == "mle"
        assert np.array(blob["real"]).shape == (4, 4)
        assert np.array(blob["imag"]).shape == (4, 4)
        assert blob["converged"] is True


class TestProjection:
    def test_clips_negative_eigenvalues(self):
        rho = np.diag([0.7, 0.4, -0.1, 0.0]).astype(complex)
        out = tomography.project_physical(rho)
        vals = np.linalg.eigvalsh(out)
        assert vals.min() >= -1e-15
        assert abs(np.trace(out).real - 1.0) < 1e-12

    def test_identity_on_valid_state(self):
        rho = states.family_state(0.3, 0.3)
        np.testing.assert_allclose(tomography.project_physical(rho), rho, atol=1e-12)


class TestReport:
    def test_singlet_report(self):
        ds = tomography.simulate_tomography(states.singlet(), 10**5, RandomStream(31))
        rec = tomography.reconstruct_mle(ds)
        rep = tomography.tomo_report(states.singlet(), rec)
        assert rep.fidelity > 0.999
        assert abs(rep.fit.p - 1.0) < 0.02
        assert abs(rep.measures[states.NEGATIVITY] - 1.0) < 0.02

    def test_mixture_report(self):
        ds = tomography.simulate_tomography(states.dephased_mixture(), 10**5,
                                            RandomStream(32))
        rec = tomography.reconstruct_mle(ds)
        rep = tomography.tomo_report(states.dephased_mixture(), rec)
        assert rep.fidelity > 0.999
        assert abs(rep.fit.p) < 0.02
        assert abs(rep.measures[states.NEGATIVITY]) < 0.02

    def test_family_p_estimate_quick(self):
        rho = states.family_state(0.6, 0.5)
        phats = []
        for seed in range(5):
            ds = tomography.simulate_tomography(rho, 10**5, RandomStream(200 + seed))
            rep = tomography.tomo_report(rho, tomography.reconstruct_mle(ds))
            phats.append(rep.fit.p)
        assert abs(np.mean(phats) - 0.6) < 0.02

    def test_report_from_linear_inversion_projects_first(self):
        ds = tomography.simulate_tomography(states.singlet(), 100, RandomStream(3, 2))
        rec = tomography.reconstruct_linear(ds)
        assert not rec.psd_ok
        rep = tomography.tomo_report(states.singlet(), rec)
        assert 0.0 <= rep.fidelity <= 1.0
        assert np.isfinite(rep.fit.residual)
