"""Two-level atom coupled to the mode superposition: dipole/RWA Hamiltonian,
interaction picture, and first-order spontaneous/stimulated amplitudes.

Atom conventions (this library's choice): the atom factor is the slowest
index axis, level 0 = ground |->, level 1 = excited |+>, sigma3 |+> = +|+>,
sigma_minus |+> = |->.  The atom sits at the origin, so no spatial phases
enter the couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import hamiltonian, mode_annihilator
from .dynamics import resonance_kernel
from .fields import polarization
from .hilbert import FieldConfig, HilbertLayout, ModeLabel, Operator, StateVector

__all__ = [
    "AtomParams",
    "coupling",
    "sigma3",
    "sigma_plus",
    "sigma_minus",
    "free_hamiltonian_with_atom",
    "atom_field_hamiltonian",
    "interaction_hamiltonian",
    "EmissionRecord",
    "EmissionAmplitudes",
    "first_order_emission",
    "first_order_state",
    "VacuumCheck",
    "vacuum_subspace_check",
    "emission_csv",
]

GROUND, EXCITED = 0, 1


@dataclass(frozen=True)
class AtomParams:
    """Two-level atom at the origin: transition frequency, dipole scale, direction.

    ``u`` is the complex unit vector of the dipole matrix element between
    the excited and ground states; ``d`` is its magnitude (d = 0 is the
    decoupled limit).
    """

    omega0: float
    d: float
    u: tuple[complex, complex, complex]

    def __post_init__(self):
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive and finite, got {self.omega0}")
        if not (self.d >= 0 and math.isfinite(self.d)):
            raise ValueError(f"dipole magnitude must be >= 0, got {self.d}")
        uv = tuple(complex(z) for z in self.u)
        if len(uv) != 3:
            raise ValueError("dipole direction must be a 3-vector")
        norm = math.sqrt(sum(abs(z) ** 2 for z in uv))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"dipole direction must be unit length, |u| = {norm}")
        object.__setattr__(self, "u", uv)

    @classmethod
    def make(cls, omega0: float, d: float, direction: Sequence[complex]) -> "AtomParams":
        """Build with the direction normalized for the caller."""
        uv = np.asarray(direction, dtype=complex)
        norm = np.linalg.norm(uv)
        if norm == 0.0:
            raise ValueError("dipole direction must be nonzero")
        return cls(float(omega0), float(d), tuple(uv / norm))


def coupling(mode: ModeLabel, atom: AtomParams, config: FieldConfig) -> complex:
    """Mode-atom coupling i*sqrt(1/(2*hbar*omega*V)) * (e_s . u)."""
    if mode.abstract:
        raise ValueError(f"coupling requires a propagating mode; {mode} is abstract")
    e = polarization(mode.kappa, mode.s)
    return 1j * math.sqrt(1.0 / (2.0 * config.hbar * mode.omega * config.volume)) \
        * complex(np.dot(e, np.asarray(atom.u)))


def _require_atom(layout: HilbertLayout):
    if not layout.has_atom:
        raise ValueError("layout has no atom factor")


def sigma3(layout: HilbertLayout) -> Operator:
    _require_atom(layout)
    d = np.concatenate([-np.ones(layout.field_dim), np.ones(layout.field_dim)])
    return Operator.from_diagonal(layout, d)


def sigma_plus(layout: HilbertLayout) -> Operator:
    _require_atom(layout)
    m = np.zeros((layout.dimension,) * 2, dtype=complex)
    f = layout.field_dim
    m[f:, :f] = np.eye(f)
    return Operator(layout, m)


def sigma_minus(layout: HilbertLayout) -> Operator:
    return sigma_plus(layout).dag()


def free_hamiltonian_with_atom(layout: HilbertLayout, atom: AtomParams,
                               config: FieldConfig) -> Operator:
    """Uncoupled part: atom splitting plus the spectral field Hamiltonian."""
    _require_atom(layout)
    field_diag = hamiltonian(layout.without_atom(), config).diag().real
    d = np.tile(field_diag, 2)
    d[:layout.field_dim] -= 0.5 * config.hbar * atom.omega0
    d[layout.field_dim:] += 0.5 * config.hbar * atom.omega0
    return Operator.from_diagonal(layout, d)


def _coupling_matrix(layout: HilbertLayout, atom: AtomParams, config: FieldConfig,
                     phases: np.ndarray | None = None) -> np.ndarray:
    """hbar*omega0*d * sum_k (g_k [phase_k] a_k sigma+ + h.c.)."""
    sp_mat = sigma_plus(layout).data
    total = np.zeros((layout.dimension,) * 2, dtype=complex)
    for k, m in enumerate(layout.modes):
        g = coupling(m, atom, config)
        if phases is not None:
            g = g * phases[k]
        ak = mode_annihilator(layout, k).data
        term = g * (ak @ sp_mat)
        total += term + term.conj().T
    return config.hbar * atom.omega0 * atom.d * total


def atom_field_hamiltonian(layout: HilbertLayout, atom: AtomParams,
                           config: FieldConfig) -> Operator:
    """Dipole/RWA Hamiltonian: atom splitting + field + sigma+ a / sigma- a^dag coupling."""
    _require_atom(layout)
    h0 = free_hamiltonian_with_atom(layout, atom, config)
    return Operator(layout, h0.toarray() + _coupling_matrix(layout, atom, config))


def interaction_hamiltonian(layout: HilbertLayout, atom: AtomParams,
                            config: FieldConfig, t: float) -> Operator:
    """Interaction-picture coupling with detuning phases exp(+-i(omega0-omega_k)t)."""
    _require_atom(layout)
    phases = np.exp(1j * (atom.omega0 - layout.omegas) * t)
    return Operator(layout, _coupling_matrix(layout, atom, config, phases))


@dataclass(frozen=True)
class EmissionRecord:
    """First-order amplitude into |mode, n_initial+1, ground>."""

    mode_index: int
    mode: ModeLabel
    n_initial: int
    amplitude: complex
    channel: str  # "spontaneous" (n_initial = 0) or "stimulated"


@dataclass(frozen=True)
class EmissionAmplitudes:
    """All first-order transition amplitudes for one initial state and time."""

    layout: HilbertLayout
    time: float
    records: tuple[EmissionRecord, ...]

    def spontaneous(self, k: int) -> complex:
        for r in self.records:
            if r.mode_index == k and r.n_initial == 0:
                return r.amplitude
        return 0.0

    def stimulated(self, k: int) -> dict[int, complex]:
        return {r.n_initial: r.amplitude for r in self.records
                if r.mode_index == k and r.n_initial >= 1}


def first_order_emission(initial: StateVector, atom: AtomParams,
                         config: FieldConfig, t: float,
                         ground_tol: float = 1e-14) -> EmissionAmplitudes:
    """First-order amplitudes from an excited-atom state with photon weights Psi.

    Each amplitude is omega0*d * kernel(omega0-omega_k, t) * Psi_(k,n)
    * sqrt(n+1) * conj(g_k), feeding |k, n+1, ground>.  Sectors the
    initial superposition does not populate come out exactly zero: the
    raising operator of one mode annihilates every other sector instead
    of creating a two-mode excitation.  The n = nmax sector has no
    in-layout target (the truncated raising operator drops it), matching
    exact truncated evolution.
    """
    layout = initial.layout
    _require_atom(layout)
    ground_norm = float(np.linalg.norm(initial.amplitudes[:layout.field_dim]))
    if ground_norm > ground_tol:
        raise ValueError(
            f"initial state has ground-atom components (norm {ground_norm:.3e}); "
            "first-order emission starts from the excited sector"
        )
    records = []
    for k, m in enumerate(layout.modes):
        g_conj = np.conj(coupling(m, atom, config))
        kernel = resonance_kernel(atom.omega0 - m.omega, t)
        for n in range(layout.nmax):
            psi = initial.amplitude(k, n, EXCITED)
            amp = atom.omega0 * atom.d * kernel * psi * math.sqrt(n + 1) * g_conj
            records.append(EmissionRecord(
                mode_index=k, mode=m, n_initial=n, amplitude=complex(amp),
                channel="spontaneous" if n == 0 else "stimulated"))
    return EmissionAmplitudes(layout=layout, time=t, records=tuple(records))


def first_order_state(initial: StateVector, atom: AtomParams, config: FieldConfig,
                      t: float) -> StateVector:
    """Interaction-picture state through first order (not normalized)."""
    amps = first_order_emission(initial, atom, config, t)
    out = initial.amplitudes.copy()
    for r in amps.records:
        out[initial.layout.flatten(r.mode_index, r.n_initial + 1, GROUND)] += r.amplitude
    return StateVector(initial.layout, out)


@dataclass(frozen=True)
class VacuumCheck:
    """Whether a state lies in the zero-photon subspace, and its field energy."""

    is_vacuum: bool
    field_energy: float
    max_excited_component: float

    def __bool__(self) -> bool:
        return self.is_vacuum


def vacuum_subspace_check(state: StateVector, config: FieldConfig | None = None,
                          tol: float = 1e-14) -> VacuumCheck:
    """True iff every n > 0 amplitude vanishes; reports <H_field> = sum |psi|^2 * hbar*omega/2.

    The zero-photon states span a whole subspace, so the reported energy
    depends on the state (finite, bounded by half the largest mode energy).
    """
    cfg = config or FieldConfig()
    layout = state.layout
    worst = 0.0
    energy = 0.0
    for i, amp in enumerate(state.amplitudes):
        k, n, _atom = layout.unflatten(i)
        if n > 0:
            worst = max(worst, abs(amp))
        else:
            energy += 0.5 * cfg.hbar * layout.modes[k].omega * abs(amp) ** 2
    return VacuumCheck(is_vacuum=bool(worst < tol), field_energy=float(energy),
                       max_excited_component=float(worst))


def emission_csv(amplitudes: EmissionAmplitudes, path) -> None:
    """Write amplitude rows: s, kx, ky, kz, omega, n_initial, re, im, channel, |amp|^2."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("s,kx,ky,kz,omega,n_initial,amp_re,amp_im,channel,prob\n")
        for r in amplitudes.records:
            m = r.mode
            prob = abs(r.amplitude) ** 2
            fh.write(
                f"{m.s},{m.kappa[0]!r},{m.kappa[1]!r},{m.kappa[2]!r},{m.omega!r},"
                f"{r.n_initial},{r.amplitude.real!r},{r.amplitude.imag!r},"
                f"{r.channel},{prob!r}\n"
            )
