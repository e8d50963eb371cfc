"""Desk-scale standard mode quantization: one oscillator per mode on a
tensor-product Fock space.  Comparison baseline for the single-oscillator
scheme; deliberately capped in size because its dimension grows as
(nmax+1)^M.

No normal ordering anywhere: the ground-state energy is kept, so vacuum
energies can be compared like-for-like.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .algebra import fock_lowering
from .dynamics import resonance_kernel
from .emission import AtomParams, coupling
from .hilbert import FieldConfig, ModeLabel

__all__ = [
    "MAX_MODES",
    "MAX_NMAX",
    "MAX_DIMENSION",
    "StandardLayout",
    "build_standard_layout",
    "standard_mode_annihilator",
    "standard_hamiltonian",
    "standard_atom_field_hamiltonian",
    "standard_vacuum_energy",
    "standard_first_order_emission",
    "jc_rabi_half_frequency",
    "jc_excited_population",
    "single_oscillator_run",
    "standard_scheme_run",
    "compare_report",
]

MAX_MODES = 4
MAX_NMAX = 3
MAX_DIMENSION = 4096


@dataclass(frozen=True)
class StandardLayout:
    """Tensor-product Fock layout: occupation tuples (n_0, ..., n_{M-1}).

    Mode 0 is the slowest occupation axis; an atom factor, when present,
    is slower still (level 0 = ground, 1 = excited).
    """

    modes: tuple[ModeLabel, ...]
    nmax: int
    atom_levels: int = 0

    def __post_init__(self):
        if len(self.modes) > MAX_MODES:
            raise ValueError(f"standard layout capped at {MAX_MODES} modes")
        if self.nmax > MAX_NMAX:
            raise ValueError(f"standard layout capped at nmax = {MAX_NMAX}")
        if self.dimension > MAX_DIMENSION:
            raise ValueError(f"standard layout dimension exceeds {MAX_DIMENSION}")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def fock_dim(self) -> int:
        return self.nmax + 1

    @property
    def field_dim(self) -> int:
        return self.fock_dim ** self.n_modes

    @property
    def dimension(self) -> int:
        return self.field_dim * max(1, self.atom_levels)

    @property
    def has_atom(self) -> bool:
        return self.atom_levels == 2

    def flatten(self, occupation: Sequence[int], atom: int = 0) -> int:
        if len(occupation) != self.n_modes:
            raise IndexError("occupation tuple has wrong length")
        idx = 0
        for n in occupation:
            if not 0 <= n <= self.nmax:
                raise IndexError(f"occupation {n} out of range [0, {self.nmax}]")
            idx = idx * self.fock_dim + n
        return atom * self.field_dim + idx

    def basis_state(self, occupation: Sequence[int], atom: int = 0) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=complex)
        vec[self.flatten(occupation, atom)] = 1.0
        return vec


def build_standard_layout(modes: Sequence[ModeLabel], nmax: int,
                          with_atom: bool = False) -> StandardLayout:
    modes = tuple(modes)
    if not modes:
        raise ValueError("mode set must be nonempty")
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate modes in mode set")
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    return StandardLayout(modes, int(nmax), 2 if with_atom else 0)


def _kron_chain(mats: list[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def _lift_atom(layout: StandardLayout, field_matrix: np.ndarray) -> np.ndarray:
    if layout.has_atom:
        return np.kron(np.eye(2, dtype=complex), field_matrix)
    return field_matrix


def standard_mode_annihilator(layout: StandardLayout, k: int) -> np.ndarray:
    """1 x ... x a x ... x 1 with the lowering matrix in slot k."""
    if not 0 <= k < layout.n_modes:
        raise ValueError(f"mode index {k} out of range [0, {layout.n_modes})")
    eye = np.eye(layout.fock_dim, dtype=complex)
    mats = [eye] * layout.n_modes
    mats[k] = fock_lowering(layout.nmax)
    return _lift_atom(layout, _kron_chain(mats))


def standard_hamiltonian(layout: StandardLayout,
                         config: FieldConfig | None = None) -> np.ndarray:
    """Free field sum_k hbar*omega_k*(n_k + 1/2), ground-state energy kept."""
    hbar = (config or FieldConfig()).hbar
    diag = np.zeros(layout.field_dim)
    for k, m in enumerate(layout.modes):
        eye_diag = [np.ones(layout.fock_dim)] * layout.n_modes
        eye_diag[k] = np.arange(layout.fock_dim) + 0.5
        diag += hbar * m.omega * reduce(np.kron, eye_diag)
    if layout.has_atom:
        diag = np.tile(diag, 2)
    return np.diag(diag.astype(complex))


def standard_vacuum_energy(layout: StandardLayout,
                           config: FieldConfig | None = None) -> float:
    """(1/2) sum_k hbar*omega_k: unique vacuum, state-independent."""
    hbar = (config or FieldConfig()).hbar
    return 0.5 * hbar * float(sum(m.omega for m in layout.modes))


def standard_atom_field_hamiltonian(layout: StandardLayout, atom: AtomParams,
                                    config: FieldConfig) -> np.ndarray:
    """Dipole/RWA Hamiltonian on the tensor-product space, same conventions."""
    if not layout.has_atom:
        raise ValueError("layout has no atom factor")
    f = layout.field_dim
    h = standard_hamiltonian(layout, config)
    atom_diag = np.concatenate([-np.ones(f), np.ones(f)])
    h += 0.5 * config.hbar * atom.omega0 * np.diag(atom_diag.astype(complex))
    sp_mat = np.zeros((layout.dimension,) * 2, dtype=complex)
    sp_mat[f:, :f] = np.eye(f)
    for k, m in enumerate(layout.modes):
        g = coupling(m, atom, config)
        term = config.hbar * atom.omega0 * atom.d * g * (
            standard_mode_annihilator(layout, k) @ sp_mat)
        h += term + term.conj().T
    return h


def standard_first_order_emission(atom: AtomParams, layout: StandardLayout,
                                  config: FieldConfig, t: float) -> list[dict]:
    """Textbook first-order amplitudes from |vac> x |excited>.

    Every mode receives omega0*d*conj(g_k)*kernel(omega0-omega_k, t) from
    the one shared vacuum; there is no per-mode weighting.
    """
    rows = []
    for k, m in enumerate(layout.modes):
        amp = atom.omega0 * atom.d * np.conj(coupling(m, atom, config)) \
            * resonance_kernel(atom.omega0 - m.omega, t)
        rows.append({"mode_index": k, "s": m.s, "kappa": m.kappa, "omega": m.omega,
                     "amplitude": complex(amp)})
    return rows


# -- Jaynes-Cummings closed forms ----------------------------------------


def jc_rabi_half_frequency(atom: AtomParams, g: complex, n: int = 0) -> float:
    """Half-Rabi frequency omega0*d*|g|*sqrt(n+1) of the (n, +) <-> (n+1, -) doublet."""
    return atom.omega0 * atom.d * abs(g) * math.sqrt(n + 1)


def jc_excited_population(atom: AtomParams, g: complex, n: int, t: float,
                          detuning: float = 0.0) -> float:
    """Excited-state survival probability from |n, +> in the two-level doublet.

    General-detuning textbook result; at resonance it reduces to
    cos^2(lambda*sqrt(n+1)*t) with lambda the half-Rabi frequency.
    """
    lam = jc_rabi_half_frequency(atom, g, n)
    omega_g = math.sqrt(lam ** 2 + 0.25 * detuning ** 2)
    if omega_g == 0.0:
        return 1.0
    return 1.0 - (lam ** 2 / omega_g ** 2) * math.sin(omega_g * t) ** 2


# -- scheme comparison ----------------------------------------------------


def single_oscillator_run(modes: Sequence[ModeLabel], nmax: int, config: FieldConfig,
                     atom: AtomParams | None = None, t: float = 1.0,
                     weights: Sequence[complex] | None = None,
                     seed: int = 0, n_vacuum_samples: int = 5) -> dict:
    """Summary of the single-oscillator scheme for the comparison report."""
    from .algebra import mode_annihilator
    from .emission import EXCITED, first_order_emission
    from .hilbert import StateVector, build_layout

    layout = build_layout(modes, nmax)
    hbar = config.hbar
    omegas = layout.omegas
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(n_vacuum_samples):
        w = rng.normal(size=len(modes)) + 1j * rng.normal(size=len(modes))
        w /= np.linalg.norm(w)
        samples.append(0.5 * hbar * float(np.sum(np.abs(w) ** 2 * omegas)))
    cross = 0.0
    if layout.n_modes >= 2:
        a0 = mode_annihilator(layout, 0).data
        a1 = mode_annihilator(layout, 1).data
        cross = float(np.max(np.abs(a0.conj().T @ a1.conj().T)))
    run = {
        "scheme": "single-oscillator",
        "dimension": layout.dimension,
        "vacuum_energy_min": 0.5 * hbar * float(omegas.min()),
        "vacuum_energy_max": 0.5 * hbar * float(omegas.max()),
        "vacuum_energy_samples": samples,
        "vacuum_state_dependent": True,
        "cross_mode_double_creation": cross,
    }
    if atom is not None:
        emit_layout = build_layout(modes, nmax, with_atom=True)
        if weights is None:
            weights = [1.0 / math.sqrt(len(modes))] * len(modes)
        amps = np.zeros(emit_layout.dimension, dtype=complex)
        for k, w in enumerate(weights):
            amps[emit_layout.flatten(k, 0, EXCITED)] = w
        initial = StateVector(emit_layout, amps).normalize()
        result = first_order_emission(initial, atom, config, t)
        run["emission"] = [
            {"mode_index": r.mode_index, "omega": r.mode.omega,
             "amplitude": r.amplitude, "channel": r.channel}
            for r in result.records if r.n_initial == 0
        ]
        run["emission_weights"] = [complex(w) for w in weights]
        run["emission_dimension"] = emit_layout.dimension
    return run


def standard_scheme_run(modes: Sequence[ModeLabel], nmax: int, config: FieldConfig,
                        atom: AtomParams | None = None, t: float = 1.0) -> dict:
    """Summary of the tensor-product scheme for the comparison report."""
    layout = build_standard_layout(modes, nmax)
    cross = 0.0
    if layout.n_modes >= 2:
        a0 = standard_mode_annihilator(layout, 0)
        a1 = standard_mode_annihilator(layout, 1)
        vac = layout.basis_state([0] * layout.n_modes)
        cross = float(np.linalg.norm(a0.conj().T @ a1.conj().T @ vac))
    run = {
        "scheme": "standard",
        "dimension": layout.dimension,
        "vacuum_energy": standard_vacuum_energy(layout, config),
        "vacuum_state_dependent": False,
        "cross_mode_double_creation": cross,
    }
    if atom is not None:
        emit_layout = build_standard_layout(modes, nmax, with_atom=True)
        run["emission"] = [
            {"mode_index": r["mode_index"], "omega": r["omega"],
             "amplitude": r["amplitude"], "channel": "spontaneous"}
            for r in standard_first_order_emission(atom, emit_layout, config, t)
        ]
        run["emission_dimension"] = emit_layout.dimension
    return run


def compare_report(single_run: dict, standard_run: dict) -> dict:
    """Structured diff of the two schemes: dimensions, vacua, algebra, emission."""
    report = {
        "dimensions": {
            "single_oscillator": single_run["dimension"],
            "standard": standard_run["dimension"],
        },
        "vacuum_energy": {
            "single_oscillator_min": single_run["vacuum_energy_min"],
            "single_oscillator_max": single_run["vacuum_energy_max"],
            "single_oscillator_samples": single_run["vacuum_energy_samples"],
            "standard": standard_run["vacuum_energy"],
            "single_oscillator_state_dependent": True,
            "standard_state_dependent": False,
        },
        "algebra": {
            # max |entry| of a_0^dag a_1^dag vs norm of the two-photon state it creates
            "cross_mode_double_creation_single_oscillator":
                single_run["cross_mode_double_creation"],
            "cross_mode_double_creation_standard":
                standard_run["cross_mode_double_creation"],
        },
    }
    if "emission" in single_run and "emission" in standard_run:
        rows = []
        std_by_mode = {r["mode_index"]: r for r in standard_run["emission"]}
        weights = single_run.get("emission_weights")
        for r in single_run["emission"]:
            srow = std_by_mode[r["mode_index"]]
            w = weights[r["mode_index"]] if weights else None
            ratio = r["amplitude"] / srow["amplitude"] if srow["amplitude"] != 0 else None
            rows.append({
                "mode_index": r["mode_index"],
                "omega": r["omega"],
                "single_oscillator_amplitude": r["amplitude"],
                "standard_amplitude": srow["amplitude"],
                "weight": w,
                "amplitude_ratio": ratio,
            })
        report["emission"] = rows
    return report
