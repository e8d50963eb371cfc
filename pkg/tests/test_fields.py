import numpy as np
import pytest

import monofield as mf
from monofield.algebra import interior_indices
from monofield.fields import _poisson_tail


def unit_sphere_draws(rng, count):
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestPolarization:
    def test_z_axis_convention(self):
        e = mf.polarization((0.0, 0.0, 1.0), +1)
        assert np.allclose(e, np.array([1.0, 1.0j, 0.0]) / np.sqrt(2), atol=1e-15)

    def test_minus_z_axis_convention(self):
        e = mf.polarization((0.0, 0.0, -2.0), +1)
        assert np.allclose(e, np.array([1.0, -1.0j, 0.0]) / np.sqrt(2), atol=1e-15)

    def test_self_orthogonality_closed_form(self):
        for kappa in [(0, 0, 1), (1, 2, 3), (-1, 0.5, 0)]:
            for s in (+1, -1):
                e = mf.polarization(kappa, s)
                assert abs(np.dot(e, e)) < 1e-15

    def test_invariants_over_random_directions(self):
        rng = np.random.default_rng(7)
        for n_hat in unit_sphere_draws(rng, 1000):
            kappa = n_hat * rng.uniform(0.1, 5.0)
            basis = mf.polarization_basis(kappa)
            for s in (+1, -1):
                e = basis.vector(s)
                assert abs(np.dot(e, n_hat)) < 1e-13          # transversality
                assert abs(np.dot(e, e)) < 1e-13              # self-orthogonal
                assert abs(np.dot(e, e.conj()) - 1) < 1e-13   # unit norm
                helicity = np.cross(n_hat, e) + 1j * s * e
                assert np.max(np.abs(helicity)) < 1e-13       # n x e = -i s e
            cross = np.dot(basis.vector(+1), np.conj(basis.vector(-1)))
            assert abs(cross) < 1e-13

    def test_zero_wavevector_rejected(self):
        with pytest.raises(ValueError, match="zero wavevector"):
            mf.polarization((0.0, 0.0, 0.0), +1)


class TestFieldOperators:
    def test_single_mode_electric_matches_hand_matrix(self, natural):
        layout = mf.build_layout([mf.mode(+1, (0.0, 0.0, 1.0))], 1)
        ex, ey, ez = mf.electric_field(layout, natural, 0.0, (0, 0, 0))
        a = np.array([[0, 1], [0, 0]], dtype=complex)
        # w = i*sqrt(omega/2V)*e with e = (1, i, 0)/sqrt(2), omega = V = 1
        wx, wy = 0.5j, -0.5
        assert np.allclose(ex.toarray(), wx * a + np.conj(wx) * a.conj().T, atol=1e-15)
        assert np.allclose(ey.toarray(), wy * a + np.conj(wy) * a.conj().T, atol=1e-15)
        assert np.max(np.abs(ez.toarray())) == 0.0

    def test_all_components_hermitian(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 3)
        for builder in (mf.vector_potential, mf.electric_field, mf.magnetic_field):
            for op in builder(layout, natural, 0.37, (0.2, -0.1, 0.5)):
                assert op.hermitian_deviation() < 1e-13

    def test_electric_is_minus_time_derivative_of_potential(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 2)
        t, x, h = 0.4, (0.1, 0.0, -0.3), 1e-4
        plus = mf.vector_potential(layout, natural, t + h, x)
        minus = mf.vector_potential(layout, natural, t - h, x)
        e_ops = mf.electric_field(layout, natural, t, x)
        for ap, am, e in zip(plus, minus, e_ops):
            deriv = (ap.toarray() - am.toarray()) / (2 * h)
            assert np.max(np.abs(deriv + e.toarray())) < 1e-7

    def test_translation_covariance_against_expm_oracle(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 2)
        h = mf.hamiltonian(layout, natural)
        p_ops = mf.momentum(layout, natural)
        points = [(0.7, (0.1, 0.2, 0.3)), (1.3, (0.0, -0.4, 0.2)), (0.2, (1.0, 0.0, 0.0))]
        for builder in (mf.vector_potential, mf.electric_field, mf.magnetic_field):
            ref = builder(layout, natural, 0.0, (0.0, 0.0, 0.0))
            for t, x in points:
                # generator (H*t - P.x)/hbar; conjugation moves fields to (t, x)
                gen = t * h.toarray()
                for xi, p in zip(x, p_ops):
                    gen = gen - xi * p.toarray()
                u = mf.matrix_exp(mf.Operator(layout, 1j * gen)).toarray()
                moved = builder(layout, natural, t, x)
                for f0, ftx in zip(ref, moved):
                    conj = u @ f0.toarray() @ u.conj().T
                    assert np.max(np.abs(conj - ftx.toarray())) < 1e-9

    def test_abstract_modes_rejected(self, natural, two_tone_layout):
        with pytest.raises(ValueError, match="abstract"):
            mf.electric_field(two_tone_layout, natural, 0.0, (0, 0, 0))


class TestCoherentState:
    def two_mode_spec(self, alphas=(0.3, 0.4j)):
        modes = (mf.mode(+1, (0.0, 0.0, 1.0)), mf.mode(-1, (0.0, 2.0, 0.0)))
        return mf.CoherentSpec.make(modes, [1.0, 1.0], list(alphas))

    def test_vacuum_spec_energy(self, natural):
        spec = self.two_mode_spec(alphas=(0.0, 0.0))
        layout = mf.build_layout(spec.modes, 4)
        state = mf.coherent_state(layout, spec)
        h = mf.hamiltonian(layout, natural)
        # (1/2) sum |Phi|^2 omega = (1/2)(0.5*1 + 0.5*2)
        assert mf.expect(h, state).real == pytest.approx(0.75, abs=1e-12)

    def test_eigenrelation_of_truncated_block(self, natural):
        mode = mf.mode(+1, (0.0, 0.0, 1.0))
        layout = mf.build_layout([mode], 30)
        spec = mf.CoherentSpec.make([mode], [1.0], [0.5])
        state = mf.coherent_state(layout, spec)
        a = mf.mode_annihilator(layout, 0)
        residual = mf.apply(a, state).amplitudes - 0.5 * state.amplitudes
        assert np.linalg.norm(residual) < 1e-10

    def test_energy_expectation_formula(self, natural):
        spec = self.two_mode_spec()
        layout = mf.build_layout(spec.modes, 30)
        state = mf.coherent_state(layout, spec)
        h = mf.hamiltonian(layout, natural)
        expected = sum(m.omega * abs(w) ** 2 * (abs(al) ** 2 + 0.5)
                       for m, w, al in zip(spec.modes, spec.weights, spec.alphas))
        assert mf.expect(h, state).real == pytest.approx(expected, abs=1e-10)

    def test_momentum_expectation_formula(self, natural):
        spec = self.two_mode_spec()
        layout = mf.build_layout(spec.modes, 30)
        state = mf.coherent_state(layout, spec)
        for i, p in enumerate(mf.momentum(layout, natural)):
            expected = sum(m.kappa[i] * abs(w) ** 2 * (abs(al) ** 2 + 0.5)
                           for m, w, al in zip(spec.modes, spec.weights, spec.alphas))
            assert mf.expect(p, state).real == pytest.approx(expected, abs=1e-10)

    def test_truncation_too_small_reports_required_nmax(self):
        mode = mf.mode(+1, (0.0, 0.0, 1.0))
        layout = mf.build_layout([mode], 5)
        spec = mf.CoherentSpec.make([mode], [1.0], [3.0])
        with pytest.raises(ValueError, match="nmax >= "):
            mf.coherent_state(layout, spec)
        need = mf.required_truncation(3.0)
        assert _poisson_tail(9.0, need) < 1e-10
        assert _poisson_tail(9.0, need - 1) >= 1e-10

    def test_weights_normalized(self):
        spec = self.two_mode_spec()
        assert sum(abs(w) ** 2 for w in spec.weights) == pytest.approx(1.0, abs=1e-14)

    def test_spec_loadable_from_json(self, tmp_path):
        import json

        doc = {
            "modes": [{"s": 1, "kappa": [0.0, 0.0, 1.0]},
                      {"s": -1, "kappa": [0.0, 2.0, 0.0]}],
            "weights": [1.0, [0.0, 1.0]],
            "alphas": [0.3, [0.0, 0.4]],
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(doc))
        spec = mf.load_coherent_spec(str(path))
        assert spec.alphas == (0.3 + 0j, 0.4j)
        assert abs(spec.weights[1] / spec.weights[0] - 1j) < 1e-14
        with pytest.raises(ValueError, match="unknown"):
            mf.load_coherent_spec({"modes": doc["modes"], "weights": [1, 1],
                                   "phases": [0, 0]})


class TestFieldAverages:
    def test_vacuum_averages_identically_zero(self, natural):
        modes = (mf.mode(+1, (0.0, 0.0, 1.0)), mf.mode(-1, (1.0, 0.0, 0.0)))
        spec = mf.CoherentSpec.vacuum(modes)
        layout = mf.build_layout(modes, 3)
        state = mf.coherent_state(layout, spec)
        for builder in (mf.vector_potential, mf.electric_field, mf.magnetic_field):
            avg = mf.field_average(builder, state, natural, 0.8, (0.1, 0.2, 0.3))
            assert np.all(avg == 0.0)
        for formula in mf.classical_formula(spec, natural, 0.8, (0.1, 0.2, 0.3)):
            assert np.all(formula == 0.0)

    def test_single_mode_hand_value(self, natural):
        mode = mf.mode(+1, (0.0, 0.0, 2.0))
        alpha = 0.2
        spec = mf.CoherentSpec.make([mode], [1.0], [alpha])
        layout = mf.build_layout([mode], 30)
        state = mf.coherent_state(layout, spec)
        avg = mf.field_average(mf.vector_potential, state, natural, 0.0, (0, 0, 0))
        e = mf.polarization(mode.kappa, mode.s)
        expected = np.sqrt(1.0 / (2.0 * mode.omega)) * alpha * (e + e.conj()).real
        assert np.allclose(avg, expected, atol=1e-12)

    def test_operator_route_matches_classical_oracle(self, natural):
        modes = (mf.mode(+1, (0.0, 0.0, 1.0)), mf.mode(-1, (0.0, 2.0, 0.0)))
        spec = mf.CoherentSpec.make(modes, [1.0, 1.0j], [0.9, 0.35 - 0.2j])
        layout = mf.build_layout(modes, 30)
        state = mf.coherent_state(layout, spec)
        rng = np.random.default_rng(42)
        builders = (mf.vector_potential, mf.electric_field, mf.magnetic_field)
        for _ in range(20):
            t = rng.uniform(0, 5)
            x = rng.uniform(-2, 2, size=3)
            reference = mf.classical_formula(spec, natural, t, x)
            for builder, ref in zip(builders, reference):
                avg = mf.field_average(builder, state, natural, t, x)
                assert np.max(np.abs(avg - ref)) < 1e-8

    def test_average_electric_is_minus_ddt_average_potential(self, natural):
        modes = (mf.mode(+1, (0.0, 0.0, 1.0)), mf.mode(+1, (0.0, 2.0, 0.0)))
        spec = mf.CoherentSpec.make(modes, [1.0, 1.0], [0.4, 0.7j])
        layout = mf.build_layout(modes, 30)
        state = mf.coherent_state(layout, spec)
        t, x, h = 0.6, (0.3, 0.0, -0.2), 1e-4
        a_plus = mf.field_average(mf.vector_potential, state, natural, t + h, x)
        a_minus = mf.field_average(mf.vector_potential, state, natural, t - h, x)
        e_avg = mf.field_average(mf.electric_field, state, natural, t, x)
        assert np.max(np.abs((a_plus - a_minus) / (2 * h) + e_avg)) < 1e-7


class TestEnergyMomentumIdentity:
    def samples(self, count=5, seed=11):
        rng = np.random.default_rng(seed)
        return [(float(rng.uniform(0, 3)), tuple(rng.uniform(-1, 1, size=3)))
                for _ in range(count)]

    def test_identities_on_mixed_modes(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 4)
        report = mf.energy_identity(layout, natural, self.samples())
        assert report.energy_dev < 1e-10
        assert report.integrand_sample_dev < 1e-12
        # E.E and B.B are separately (t, x)-independent: no E/B cancellation
        assert report.e2_sample_dev < 1e-12
        assert report.b2_sample_dev < 1e-12
        assert min(report.momentum_dev_literal, report.momentum_dev_symmetrized) < 1e-10
        assert report.passed

    def test_orderings_coincide(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 3)
        report = mf.energy_identity(layout, natural, self.samples(3))
        assert abs(report.momentum_dev_literal - report.momentum_dev_symmetrized) < 1e-13
        assert "symmetrized" in report.ordering_winner

    def test_single_mode_diagonal_energy(self, natural):
        layout = mf.build_layout([mf.mode(+1, (0.0, 0.0, 1.5))], 3)
        e_ops = mf.electric_field(layout, natural, 0.3, (0.1, 0.2, 0.0))
        b_ops = mf.magnetic_field(layout, natural, 0.3, (0.1, 0.2, 0.0))
        total = np.zeros((layout.dimension,) * 2, dtype=complex)
        for op in (*e_ops, *b_ops):
            total += op.toarray() @ op.toarray()
        half_v = 0.5 * natural.volume * total
        omega = 1.5
        idx = interior_indices(layout)
        diag = np.diagonal(half_v).real
        # hbar*omega*(n + 1/2) on the interior, the truncated value at the rung
        assert np.allclose(diag[idx], [omega * (n + 0.5) for n in range(3)], atol=1e-12)
        assert diag[layout.nmax] == pytest.approx(omega * layout.nmax / 2, abs=1e-12)
        off = half_v - np.diag(np.diagonal(half_v))
        assert np.max(np.abs(off)) < 1e-12

    def test_requires_samples(self, mixed_modes, natural):
        layout = mf.build_layout(mixed_modes, 2)
        with pytest.raises(ValueError, match="sample"):
            mf.energy_identity(layout, natural, [])
