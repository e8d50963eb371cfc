import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import monofield as mf
from monofield.dynamics import resonance_kernel
from monofield.emission import EXCITED, GROUND, emission_csv, sigma3, sigma_plus


def z_mode(omega=2.0, s=+1):
    return mf.mode(s, (0.0, 0.0, omega))


def excited_state(layout, weights):
    """Excited-atom state with photon amplitudes {(k, n): amp}."""
    amps = np.zeros(layout.dimension, dtype=complex)
    for (k, n), value in weights.items():
        amps[layout.flatten(k, n, EXCITED)] = value
    return mf.StateVector(layout, amps).normalize()


def interaction_picture_exact(layout, atom, config, psi0, t):
    h_full = mf.atom_field_hamiltonian(layout, atom, config)
    h_free = mf.free_hamiltonian_with_atom(layout, atom, config)
    psi_s = mf.evolve(h_full, psi0, t, config.hbar)
    return mf.evolve(h_free, psi_s, -t, config.hbar)


class TestCoupling:
    def test_closed_form_value(self, natural):
        mode = z_mode(omega=2.0)
        e = mf.polarization(mode.kappa, mode.s)
        atom = mf.AtomParams(omega0=1.0, d=1.0, u=tuple(np.conj(e)))
        g = mf.coupling(mode, atom, natural)
        # e.u = e.e* = 1, so g = i*sqrt(1/(2*omega)) = i/2
        assert g == pytest.approx(0.5j, abs=1e-14)

    def test_longitudinal_dipole_decouples(self, natural):
        atom = mf.AtomParams(omega0=1.0, d=1.0, u=(0.0, 0.0, 1.0))
        for s in (+1, -1):
            g = mf.coupling(z_mode(s=s), atom, natural)
            assert abs(g) < 1e-15

    def test_polarization_sum_completeness(self, natural):
        rng = np.random.default_rng(5)
        for _ in range(50):
            kappa = rng.normal(size=3)
            u = rng.normal(size=3) + 1j * rng.normal(size=3)
            u /= np.linalg.norm(u)
            atom = mf.AtomParams(omega0=1.0, d=1.0, u=tuple(u))
            omega = np.linalg.norm(kappa)
            total = sum(abs(mf.coupling(mf.mode(s, kappa), atom, natural)) ** 2
                        for s in (+1, -1))
            n_hat = kappa / omega
            expected = (1.0 - abs(np.dot(n_hat, u)) ** 2) / (2.0 * omega)
            assert total == pytest.approx(expected, abs=1e-13)

    def test_abstract_mode_rejected(self, natural):
        atom = mf.AtomParams(omega0=1.0, d=1.0, u=(1.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="abstract"):
            mf.coupling(mf.abstract_mode(1.0), atom, natural)

    def test_atom_params_validation(self):
        with pytest.raises(ValueError, match="unit"):
            mf.AtomParams(omega0=1.0, d=0.1, u=(1.0, 1.0, 0.0))
        with pytest.raises(ValueError, match="omega0"):
            mf.AtomParams(omega0=-1.0, d=0.1, u=(1.0, 0.0, 0.0))
        normalized = mf.AtomParams.make(1.0, 0.1, (3.0, 4.0, 0.0))
        assert abs(np.linalg.norm(normalized.u) - 1.0) < 1e-12


class TestAtomFieldHamiltonian:
    def test_decoupled_spectrum(self, natural):
        modes = [z_mode(1.0), z_mode(2.0)]
        layout = mf.build_layout(modes, 2, with_atom=True)
        atom = mf.AtomParams(omega0=0.7, d=0.0, u=(1.0, 0.0, 0.0))
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        expected = sorted(om * (n + 0.5) + sign * 0.35
                          for om in (1.0, 2.0) for n in range(3)
                          for sign in (-1, +1))
        assert np.allclose(sorted(np.linalg.eigvalsh(h.toarray())), expected,
                           atol=1e-12)

    def test_hermitian(self, natural):
        layout = mf.build_layout([z_mode(1.0), z_mode(2.0)], 2, with_atom=True)
        atom = mf.AtomParams.make(1.0, 0.05, (1.0, 1.0j, 0.0))
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        assert h.hermitian_deviation() < 1e-13

    def test_resonant_jc_splitting(self, natural):
        mode = z_mode(1.0)
        layout = mf.build_layout([mode], 3, with_atom=True)
        e = mf.polarization(mode.kappa, mode.s)
        atom = mf.AtomParams(omega0=1.0, d=0.01, u=tuple(np.conj(e)))
        g = mf.coupling(mode, atom, natural)
        lam = atom.omega0 * atom.d * abs(g)
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        evals = np.sort(np.linalg.eigvalsh(h.toarray()))
        expected = sorted(
            [0.0]                                    # |0, -> is uncoupled
            + [n + 1.0 + sign * lam * np.sqrt(n + 1.0)
               for n in range(3) for sign in (-1, +1)]
            + [4.0])                                 # unpaired top rung |3, +>
        assert np.allclose(evals, expected, atol=1e-12)

    def test_spectrum_matches_standard_scheme_single_mode(self, natural):
        mode = z_mode(1.0)
        layout = mf.build_layout([mode], 3, with_atom=True)
        e = mf.polarization(mode.kappa, mode.s)
        atom = mf.AtomParams(omega0=1.0, d=0.02, u=tuple(np.conj(e)))
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        std_layout = mf.build_standard_layout([mode], 3, with_atom=True)
        h_std = mf.standard_atom_field_hamiltonian(std_layout, atom, natural)
        ours = np.sort(np.linalg.eigvalsh(h.toarray()))
        std = np.sort(np.linalg.eigvalsh(h_std))
        assert np.max(np.abs(ours - std)) < 1e-12

    def test_requires_atom_factor(self, natural):
        layout = mf.build_layout([z_mode(1.0)], 2)
        atom = mf.AtomParams(omega0=1.0, d=0.1, u=(1.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="atom"):
            mf.atom_field_hamiltonian(layout, atom, natural)


class TestInteractionHamiltonian:
    def setup_method(self):
        self.modes = [z_mode(0.8), z_mode(1.3)]
        self.layout = mf.build_layout(self.modes, 2, with_atom=True)
        self.atom = mf.AtomParams.make(1.0, 0.05, (1.0, -0.5j, 0.2))

    def test_t_zero_is_bare_coupling(self, natural):
        h_i = mf.interaction_hamiltonian(self.layout, self.atom, natural, 0.0)
        bare = mf.atom_field_hamiltonian(self.layout, self.atom, natural).toarray() \
            - mf.free_hamiltonian_with_atom(self.layout, self.atom, natural).toarray()
        assert np.max(np.abs(h_i.toarray() - bare)) < 1e-14

    def test_matches_conjugation_by_free_propagator(self, natural):
        t = 0.9
        h0 = mf.free_hamiltonian_with_atom(self.layout, self.atom, natural)
        v = mf.interaction_hamiltonian(self.layout, self.atom, natural, 0.0)
        u = mf.matrix_exp(1j * t * mf.Operator(self.layout, h0.toarray()))
        conj = u.toarray() @ v.toarray() @ u.toarray().conj().T
        h_i = mf.interaction_hamiltonian(self.layout, self.atom, natural, t)
        assert np.max(np.abs(conj - h_i.toarray())) < 1e-10

    def test_hermitian_at_sampled_times(self, natural):
        for t in (0.0, 0.4, 2.7, 11.0):
            h_i = mf.interaction_hamiltonian(self.layout, self.atom, natural, t)
            assert h_i.hermitian_deviation() < 1e-13


class TestFirstOrderEmission:
    def setup_method(self):
        self.modes = [z_mode(0.8), z_mode(1.0), z_mode(1.3)]
        self.layout = mf.build_layout(self.modes, 4, with_atom=True)
        self.atom = mf.AtomParams.make(1.0, 0.01, (1.0, 0.3j, 0.0))

    def test_printed_formula(self, natural):
        initial = excited_state(self.layout, {(0, 0): 1.0, (1, 1): 1.0j})
        t = 1.0
        result = mf.first_order_emission(initial, self.atom, natural, t)
        for k, n in [(0, 0), (1, 1)]:
            psi = initial.amplitude(k, n, EXCITED)
            mode = self.modes[k]
            g = mf.coupling(mode, self.atom, natural)
            expected = self.atom.omega0 * self.atom.d \
                * resonance_kernel(self.atom.omega0 - mode.omega, t) \
                * psi * np.sqrt(n + 1) * np.conj(g)
            got = [r.amplitude for r in result.records
                   if r.mode_index == k and r.n_initial == n]
            assert got[0] == pytest.approx(expected, abs=1e-15)

    def test_resonant_mode_kernel_is_minus_it(self, natural):
        initial = excited_state(self.layout, {(1, 0): 1.0})
        result = mf.first_order_emission(initial, self.atom, natural, 1.0)
        g = mf.coupling(self.modes[1], self.atom, natural)
        # mode 1 sits exactly at omega0: kernel -> -i*t = -i
        expected = self.atom.omega0 * self.atom.d * (-1j) * np.conj(g)
        assert result.spontaneous(1) == pytest.approx(expected, abs=1e-14)

    def test_absent_modes_get_exactly_zero(self, natural):
        initial = excited_state(self.layout, {(0, 0): 1.0})
        result = mf.first_order_emission(initial, self.atom, natural, 0.7)
        for r in result.records:
            if r.mode_index != 0:
                assert r.amplitude == 0.0

    def test_channel_split_and_enhancement(self, natural):
        initial = excited_state(self.layout, {(0, 0): 0.6, (0, 2): 0.8})
        result = mf.first_order_emission(initial, self.atom, natural, 0.5)
        spont = result.spontaneous(0)
        stim = result.stimulated(0)
        assert set(stim) == {1, 2, 3}
        assert stim[1] == 0.0
        # same kernel and coupling: ratio reduces to sqrt(n+1) * Psi ratio
        ratio = stim[2] / spont
        psi0 = initial.amplitude(0, 0, EXCITED)
        psi2 = initial.amplitude(0, 2, EXCITED)
        assert ratio == pytest.approx(np.sqrt(3) * psi2 / psi0, abs=1e-12)

    def test_ground_component_rejected(self, natural):
        amps = np.zeros(self.layout.dimension, dtype=complex)
        amps[self.layout.flatten(0, 0, EXCITED)] = 1.0
        amps[self.layout.flatten(0, 0, GROUND)] = 0.1
        state = mf.StateVector(self.layout, amps).normalize()
        with pytest.raises(ValueError, match="ground"):
            mf.first_order_emission(state, self.atom, natural, 1.0)

    @given(scale=st.floats(0.1, 10.0), dscale=st.floats(0.1, 10.0))
    @settings(max_examples=20, deadline=None)
    def test_homogeneity_in_dipole_and_weights(self, scale, dscale):
        natural = mf.FieldConfig()
        base = mf.StateVector(self.layout, excited_state(
            self.layout, {(0, 0): 1.0, (2, 1): 0.5}).amplitudes)
        scaled = mf.StateVector(self.layout, scale * base.amplitudes)
        atom2 = mf.AtomParams(self.atom.omega0, self.atom.d * dscale, self.atom.u)
        r1 = mf.first_order_emission(base, self.atom, natural, 1.0)
        r2 = mf.first_order_emission(scaled, atom2, natural, 1.0)
        for a, b in zip(r1.records, r2.records):
            assert b.amplitude == pytest.approx(scale * dscale * a.amplitude,
                                                rel=1e-12, abs=1e-18)

    def test_closed_form_vs_quadrature(self, natural):
        initial = excited_state(self.layout, {(0, 0): 0.5, (1, 0): 0.5,
                                              (2, 1): 1.0 / np.sqrt(2)})
        t = 1.2
        closed = mf.first_order_state(initial, self.atom, natural, t)
        quad = mf.dyson_first_order(
            lambda tp: mf.interaction_hamiltonian(self.layout, self.atom, natural, tp),
            initial, t, hbar=natural.hbar)
        assert np.max(np.abs(closed.amplitudes - quad.amplitudes)) < 1e-10

    def test_error_scales_quadratically_in_coupling(self, natural):
        initial = excited_state(self.layout, {(0, 0): 0.7, (1, 0): 0.7140714,
                                              (2, 1): 0.02})
        t = 1.0
        couplings = np.logspace(-3, -1, 7)
        devs = []
        for d in couplings:
            atom_d = mf.AtomParams(self.atom.omega0, float(d), self.atom.u)
            pert = mf.first_order_state(initial, atom_d, natural, t)
            exact = interaction_picture_exact(self.layout, atom_d, natural, initial, t)
            devs.append(np.linalg.norm(pert.amplitudes - exact.amplitudes))
        slope = np.polyfit(np.log(couplings), np.log(devs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_first_order_norm_excess_is_second_order(self, natural):
        initial = excited_state(self.layout, {(0, 0): 1.0})
        excesses = []
        for d in (0.01, 0.02):
            atom_d = mf.AtomParams(self.atom.omega0, d, self.atom.u)
            pert = mf.first_order_state(initial, atom_d, natural, 1.0)
            excesses.append(pert.norm ** 2 - 1.0)
        assert excesses[0] > 0
        assert excesses[1] / excesses[0] == pytest.approx(4.0, rel=1e-6)


class TestExcitationNumber:
    def test_conserved_by_rwa_hamiltonian(self, natural):
        modes = [z_mode(0.9), z_mode(1.2)]
        layout = mf.build_layout(modes, 3, with_atom=True)
        atom = mf.AtomParams.make(1.0, 0.08, (1.0, 0.0, 0.0))
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        n_exc = sum((mf.number_operator(layout, k) for k in range(2)),
                    start=0.5 * (sigma3(layout) + mf.Operator.identity(layout)))
        comm = h @ n_exc - n_exc @ h
        assert comm.max_abs() < 1e-12
        psi0 = excited_state(layout, {(0, 1): 1.0})
        before = mf.expect(n_exc, psi0).real
        after = mf.expect(n_exc, mf.evolve(h, psi0, 3.0)).real
        assert abs(after - before) < 1e-10


class TestVacuumSubspace:
    def test_uniform_two_mode_vacuum(self, natural):
        layout = mf.build_layout([mf.abstract_mode(1.0), mf.abstract_mode(2.0)], 3)
        psi = mf.superposition(layout, {(0, 0): 1.0, (1, 0): 1.0})
        check = mf.vacuum_subspace_check(psi, natural)
        assert check
        assert check.field_energy == pytest.approx(0.75, abs=1e-12)

    def test_photon_admixture_fails(self, natural):
        layout = mf.build_layout([mf.abstract_mode(1.0)], 3)
        psi = mf.superposition(layout, {(0, 0): 1.0, (0, 1): 0.01})
        assert not mf.vacuum_subspace_check(psi, natural)

    def test_energy_is_state_dependent(self, natural):
        layout = mf.build_layout([mf.abstract_mode(1.0), mf.abstract_mode(2.0)], 3)
        low = mf.superposition(layout, {(0, 0): 1.0})
        high = mf.superposition(layout, {(1, 0): 1.0})
        e_low = mf.vacuum_subspace_check(low, natural).field_energy
        e_high = mf.vacuum_subspace_check(high, natural).field_energy
        assert e_low == pytest.approx(0.5, abs=1e-12)
        assert e_high == pytest.approx(1.0, abs=1e-12)
        assert e_low != e_high

    def test_atom_layout_supported(self, natural):
        layout = mf.build_layout([z_mode(1.0)], 2, with_atom=True)
        psi = excited_state(layout, {(0, 0): 1.0})
        check = mf.vacuum_subspace_check(psi, natural)
        assert check and check.field_energy == pytest.approx(0.5, abs=1e-12)


class TestSingleModeEquivalence:
    def test_matches_jc_oracle_over_ten_rabi_periods(self, natural):
        mode = z_mode(1.0)
        layout = mf.build_layout([mode], 3, with_atom=True)
        e = mf.polarization(mode.kappa, mode.s)
        atom = mf.AtomParams(omega0=1.0, d=0.05, u=tuple(np.conj(e)))
        g = mf.coupling(mode, atom, natural)
        lam = mf.jc_rabi_half_frequency(atom, g)
        h = mf.atom_field_hamiltonian(layout, atom, natural)
        psi0 = excited_state(layout, {(0, 0): 1.0})
        for t in np.linspace(0.0, 10.0 / lam, 60):
            psi = mf.evolve(h, psi0, float(t), natural.hbar)
            excited_pop = float(np.sum(np.abs(
                psi.amplitudes[layout.field_dim:]) ** 2))
            oracle = mf.jc_excited_population(atom, g, 0, float(t))
            assert abs(excited_pop - oracle) < 1e-10


class TestSigmaConventions:
    def test_sigma_plus_raises_ground(self):
        layout = mf.build_layout([z_mode(1.0)], 1, with_atom=True)
        ground = mf.basis_state(layout, 0, 0, atom_level=GROUND)
        raised = mf.apply(sigma_plus(layout), ground)
        assert raised.amplitude(0, 0, EXCITED) == 1.0
        assert mf.expect(sigma3(layout), raised).real == 1.0


class TestEmissionCsv:
    def test_rows_and_header(self, natural, tmp_path):
        modes = [z_mode(0.9), z_mode(1.1)]
        layout = mf.build_layout(modes, 2, with_atom=True)
        atom = mf.AtomParams.make(1.0, 0.05, (1.0, 0.0, 0.0))
        initial = excited_state(layout, {(0, 0): 1.0})
        result = mf.first_order_emission(initial, atom, natural, 1.0)
        path = tmp_path / "emission.csv"
        emission_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "s,kx,ky,kz,omega,n_initial,amp_re,amp_im,channel,prob"
        assert len(lines) == 1 + len(result.records)
        assert any(",spontaneous," in line for line in lines[1:])
