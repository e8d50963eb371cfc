"""Mode operators of the single-oscillator scheme and their algebra checks.

Every mode operator is a frequency-sector projector tensored with one
shared Fock ladder, so cross-mode products like a_k a_l or a_k^dag a_l^dag
vanish identically (k != l) instead of creating two-mode excitations.

Truncation note: with the ladder cut at nmax = N, the product a a^dag
loses its top rung, so the commutator [a, a^dag] equals the identity only
on the interior subspace n <= N-1 and picks up the exact boundary term
-(N+1)|N><N| at the edge.  Constructors that need the untruncated
spectrum (Hamiltonian, momentum) therefore build diagonals directly from
the closed-form eigenvalues; the ladder-product forms are kept as
separate constructors for identity checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import FieldConfig, HilbertLayout, Operator

__all__ = [
    "fock_lowering",
    "ladder",
    "mode_projector",
    "mode_annihilator",
    "number_operator",
    "frequency_operator",
    "hamiltonian",
    "hamiltonian_from_frequency_operator",
    "hamiltonian_from_mode_ladders",
    "momentum",
    "momentum_from_mode_ladders",
    "interior_indices",
    "full_commutator_reference",
    "AlgebraReport",
    "verify_algebra",
    "algebra_reports_csv",
]

DEFAULT_ALGEBRA_TOL = 1e-12


def fock_lowering(nmax: int) -> np.ndarray:
    """(N+1) x (N+1) lowering matrix with <n-1|a|n> = sqrt(n)."""
    a = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    for n in range(1, nmax + 1):
        a[n - 1, n] = np.sqrt(n)
    return a


def _lift_field(layout: HilbertLayout, field_matrix: np.ndarray) -> np.ndarray:
    """Extend a field-sector matrix over the atom factor (identity there)."""
    if layout.has_atom:
        return np.kron(np.eye(2, dtype=complex), field_matrix)
    return field_matrix


def _lift_diag(layout: HilbertLayout, field_diag: np.ndarray) -> np.ndarray:
    if layout.has_atom:
        return np.tile(field_diag, 2)
    return field_diag


def ladder(layout: HilbertLayout) -> Operator:
    """Lowering operator on the shared Fock factor (identity on mode labels)."""
    a = np.kron(np.eye(layout.n_modes, dtype=complex), fock_lowering(layout.nmax))
    return Operator(layout, _lift_field(layout, a))


def mode_projector(layout: HilbertLayout, k: int) -> Operator:
    """Projector onto the frequency sector of mode k, identity on the Fock factor."""
    if not 0 <= k < layout.n_modes:
        raise ValueError(f"mode index {k} out of range [0, {layout.n_modes})")
    d = np.zeros(layout.field_dim)
    d[k * layout.fock_dim:(k + 1) * layout.fock_dim] = 1.0
    return Operator.from_diagonal(layout, _lift_diag(layout, d))


def mode_annihilator(layout: HilbertLayout, k: int) -> Operator:
    """Sector projector |k><k| tensor the Fock lowering operator."""
    if not 0 <= k < layout.n_modes:
        raise ValueError(f"mode index {k} out of range [0, {layout.n_modes})")
    sector = np.zeros((layout.n_modes, layout.n_modes), dtype=complex)
    sector[k, k] = 1.0
    a = np.kron(sector, fock_lowering(layout.nmax))
    return Operator(layout, _lift_field(layout, a))


def number_operator(layout: HilbertLayout, k: int) -> Operator:
    """a_k^dag a_k: photon number on mode k's sector, zero elsewhere."""
    if not 0 <= k < layout.n_modes:
        raise ValueError(f"mode index {k} out of range [0, {layout.n_modes})")
    d = np.zeros(layout.field_dim)
    d[k * layout.fock_dim:(k + 1) * layout.fock_dim] = np.arange(layout.fock_dim)
    return Operator.from_diagonal(layout, _lift_diag(layout, d))


def frequency_operator(layout: HilbertLayout) -> Operator:
    """Diagonal operator with eigenvalue omega_k on every |k, n> ket."""
    d = np.repeat(layout.omegas, layout.fock_dim)
    return Operator.from_diagonal(layout, _lift_diag(layout, d))


def _spectral_field_diag(layout: HilbertLayout) -> np.ndarray:
    """Diagonal omega_k*(n + 1/2) from the closed-form spectrum."""
    halves = np.arange(layout.fock_dim) + 0.5
    return np.outer(layout.omegas, halves).ravel()


def hamiltonian(layout: HilbertLayout, config: FieldConfig | None = None) -> Operator:
    """Free Hamiltonian, diagonal with eigenvalues hbar*omega_k*(n + 1/2).

    Built directly from the spectrum, so the eigenvalues are exact on the
    truncated space (no top-rung droop).
    """
    if layout.has_atom:
        raise ValueError("free-field hamiltonian requires a layout without atom factor")
    hbar = (config or FieldConfig()).hbar
    return Operator.from_diagonal(layout, hbar * _spectral_field_diag(layout))


def hamiltonian_from_frequency_operator(layout: HilbertLayout,
                                        config: FieldConfig | None = None) -> Operator:
    """Frequency operator tensored with (a^dag a + a a^dag)/2, truncated products.

    Differs from :func:`hamiltonian` only in the n = nmax states, where
    the truncated a a^dag loses its top matrix element.
    """
    if layout.has_atom:
        raise ValueError("free-field hamiltonian requires a layout without atom factor")
    hbar = (config or FieldConfig()).hbar
    a = fock_lowering(layout.nmax)
    sym = 0.5 * (a.conj().T @ a + a @ a.conj().T)
    h = hbar * np.kron(np.diag(layout.omegas.astype(complex)), sym)
    return Operator(layout, h, diagonal=True)


def hamiltonian_from_mode_ladders(layout: HilbertLayout,
                                  config: FieldConfig | None = None) -> Operator:
    """Sum form (1/2) sum_k hbar*omega_k (a_k^dag a_k + a_k a_k^dag), truncated products."""
    if layout.has_atom:
        raise ValueError("free-field hamiltonian requires a layout without atom factor")
    hbar = (config or FieldConfig()).hbar
    total = np.zeros((layout.dimension,) * 2, dtype=complex)
    for k, m in enumerate(layout.modes):
        ak = mode_annihilator(layout, k).data
        adk = ak.conj().T
        total += 0.5 * hbar * m.omega * (adk @ ak + ak @ adk)
    return Operator(layout, total, diagonal=True)


def _require_field_modes(layout: HilbertLayout, what: str):
    for m in layout.modes:
        if m.abstract:
            raise ValueError(f"{what} requires propagating modes; {m} is abstract")


def momentum(layout: HilbertLayout,
             config: FieldConfig | None = None) -> tuple[Operator, Operator, Operator]:
    """Momentum components, diagonal with eigenvalues hbar*kappa_i*(n + 1/2)."""
    _require_field_modes(layout, "momentum")
    hbar = (config or FieldConfig()).hbar
    halves = np.arange(layout.fock_dim) + 0.5
    comps = []
    for i in range(3):
        d = np.outer(layout.kappas[:, i], halves).ravel()
        comps.append(Operator.from_diagonal(layout, hbar * _lift_diag(layout, d)))
    return tuple(comps)


def momentum_from_mode_ladders(layout: HilbertLayout,
                               config: FieldConfig | None = None
                               ) -> tuple[Operator, Operator, Operator]:
    """Momentum from the ladder products, the form the field integrals reproduce."""
    _require_field_modes(layout, "momentum")
    hbar = (config or FieldConfig()).hbar
    mats = [np.zeros((layout.dimension,) * 2, dtype=complex) for _ in range(3)]
    for k, m in enumerate(layout.modes):
        ak = mode_annihilator(layout, k).data
        sym = 0.5 * (ak.conj().T @ ak + ak @ ak.conj().T)
        for i in range(3):
            mats[i] += hbar * m.kappa[i] * sym
    return tuple(Operator(layout, mat, diagonal=True) for mat in mats)


def interior_indices(layout: HilbertLayout) -> np.ndarray:
    """Flat indices of all basis kets with photon number n <= nmax - 1."""
    keep = [i for i in range(layout.dimension) if layout.unflatten(i)[1] <= layout.nmax - 1]
    return np.array(keep, dtype=int)


def full_commutator_reference(layout: HilbertLayout, k: int) -> Operator:
    """Exact full-space [a_k, a_k^dag]: the sector projector minus (N+1)|N><N|."""
    d = np.zeros(layout.field_dim)
    lo = k * layout.fock_dim
    d[lo:lo + layout.fock_dim] = 1.0
    d[lo + layout.nmax] = -layout.nmax
    # diagonal is (1, ..., 1, -N) on the sector: identity minus (N+1) at n = N
    return Operator.from_diagonal(layout, _lift_diag(layout, d))


@dataclass(frozen=True)
class AlgebraReport:
    """Outcome of one operator relation check."""

    relation: str
    k: int
    l: int
    subspace: str
    deviation: float
    passed: bool


def _max_abs_on(matrix: np.ndarray, idx: np.ndarray) -> float:
    sub = matrix[np.ix_(idx, idx)]
    return float(np.max(np.abs(sub))) if sub.size else 0.0


def verify_algebra(layout: HilbertLayout, tol: float = DEFAULT_ALGEBRA_TOL,
                   annihilators: list[Operator] | None = None,
                   include_boundary: bool = False) -> list[AlgebraReport]:
    """Check the projector-valued commutation relation and both product rules.

    For every ordered mode pair (k, l), three relations are checked:

    * ``commutator``: [a_k, a_l^dag] = delta_kl P_k; on the interior
      subspace for k = l, on the full space (exact zero) otherwise.
    * ``product_aa``: a_k a_l = delta_kl a_k^2.
    * ``product_adad``: a_k^dag a_l^dag = delta_kl (a_k^dag)^2.

    With ``include_boundary`` an extra row per diagonal pair compares the
    full-space commutator against its exact truncation reference.
    ``annihilators`` may inject precomputed (or deliberately corrupted)
    mode operators; by default they are built from the layout.
    """
    m_count = layout.n_modes
    if annihilators is None:
        annihilators = [mode_annihilator(layout, k) for k in range(m_count)]
    if len(annihilators) != m_count:
        raise ValueError("need one annihilator per mode")
    interior = interior_indices(layout)
    reports: list[AlgebraReport] = []
    for k in range(m_count):
        ak = annihilators[k]
        for l in range(m_count):
            al = annihilators[l]
            comm = (ak @ al.dag() - al.dag() @ ak).toarray()
            if k == l:
                dev = _max_abs_on(comm - mode_projector(layout, k).toarray(), interior)
                reports.append(AlgebraReport("commutator", k, l, "interior", dev, dev < tol))
                if include_boundary:
                    bdev = float(np.max(np.abs(comm - full_commutator_reference(layout, k).toarray())))
                    reports.append(AlgebraReport("commutator_boundary", k, l, "full",
                                                 bdev, bdev < tol))
            else:
                dev = float(np.max(np.abs(comm)))
                reports.append(AlgebraReport("commutator", k, l, "full", dev, dev < tol))
            prod = (ak @ al).toarray()
            if k == l:
                prod = prod - (ak @ ak).toarray()
            dev = float(np.max(np.abs(prod)))
            reports.append(AlgebraReport("product_aa", k, l, "full", dev, dev < tol))
            dprod = (ak.dag() @ al.dag()).toarray()
            if k == l:
                dprod = dprod - (ak.dag() @ ak.dag()).toarray()
            dev = float(np.max(np.abs(dprod)))
            reports.append(AlgebraReport("product_adad", k, l, "full", dev, dev < tol))
    return reports


def algebra_reports_csv(reports: list[AlgebraReport], path) -> None:
    """Write reports as CSV: relation, k, l, subspace, deviation, pass."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("relation,k,l,subspace,deviation,pass\n")
        for r in reports:
            flag = "true" if r.passed else "false"
            fh.write(f"{r.relation},{r.k},{r.l},{r.subspace},{r.deviation!r},{flag}\n")
