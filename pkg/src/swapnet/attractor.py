"""Attractor subspace of the channel: the permutation-class operator basis.

Operators invariant under conjugation by every swap are spanned by class
operators Gamma_beta, one per 4-tuple beta = (b00, b01, b10, b11) counting
the per-site (upper, lower) index columns of a basis outer product. All
unimodular eigen-operators of the channel live in this span; the late-time
state is their phase-rotating sum weighted by initial overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb, factorial

import numpy as np

from .core import check_qubit_count, sites_from_dim, swap_commutation_residual, swap_permutation


@dataclass(frozen=True)
class ClassIndex:
    """Column counts (b00, b01, b10, b11); entries (i, j) belong to the class
    when, sitewise, the pair (bit_i, bit_j) has these multiplicities."""

    b00: int
    b01: int
    b10: int
    b11: int

    def __post_init__(self):
        counts = (self.b00, self.b01, self.b10, self.b11)
        if any(c < 0 for c in counts):
            raise ValueError(f"class counts must be nonnegative, got {counts}")

    @property
    def n(self) -> int:
        return self.b00 + self.b01 + self.b10 + self.b11

    @property
    def upper_magnetization(self) -> int:
        return self.b00 + self.b01 - self.b10 - self.b11

    @property
    def lower_magnetization(self) -> int:
        return self.b00 + self.b10 - self.b01 - self.b11

    @property
    def arrangements(self) -> int:
        """Distinct site arrangements of the column multiset."""
        n = self.n
        return (comb(n, self.b01) * comb(n - self.b01, self.b10)
                * comb(n - self.b01 - self.b10, self.b11))

    def as_tuple(self) -> tuple:
        return (self.b00, self.b01, self.b10, self.b11)


def enumerate_classes(n_sites: int) -> list[ClassIndex]:
    """All classes for N sites in lexicographic order; count C(N+3, 3)."""
    check_qubit_count(n_sites)
    out = []
    for b00 in range(n_sites + 1):
        for b01 in range(n_sites - b00 + 1):
            for b10 in range(n_sites - b00 - b01 + 1):
                b11 = n_sites - b00 - b01 - b10
                out.append(ClassIndex(b00, b01, b10, b11))
    return out


def gamma_entry_indices(beta: ClassIndex) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) basis indices of the class's nonzero entries."""
    n = beta.n
    sites = tuple(range(n))
    weights = [1 << (n - 1 - s) for s in sites]
    rows, cols = [], []
    for pos01 in combinations(sites, beta.b01):
        rem1 = tuple(s for s in sites if s not in pos01)
        for pos10 in combinations(rem1, beta.b10):
            rem2 = tuple(s for s in rem1 if s not in pos10)
            for pos11 in combinations(rem2, beta.b11):
                ones_upper = sum(weights[s] for s in pos10) + sum(weights[s] for s in pos11)
                ones_lower = sum(weights[s] for s in pos01) + sum(weights[s] for s in pos11)
                rows.append(ones_upper)
                cols.append(ones_lower)
    return np.asarray(rows), np.asarray(cols)


@dataclass(frozen=True)
class AttractorBasisElement:
    """One orthonormal class operator Gamma_beta (unit Hilbert-Schmidt norm)."""

    class_index: ClassIndex
    matrix: np.ndarray
    normalization: float  # C = 1/sqrt(N! b00! b01! b10! b11!)


def build_gamma(beta: ClassIndex) -> AttractorBasisElement:
    n = check_qubit_count(beta.n)
    rows, cols = gamma_entry_indices(beta)
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, cols] = 1.0 / np.sqrt(beta.arrangements)
    c = 1.0 / np.sqrt(float(factorial(n)) * factorial(beta.b00) * factorial(beta.b01)
                      * factorial(beta.b10) * factorial(beta.b11))
    return AttractorBasisElement(class_index=beta, matrix=mat, normalization=c)


@lru_cache(maxsize=8)
def _gamma_stack(n_sites: int) -> tuple:
    """(classes, stacked Gamma matrices) cached per network size."""
    classes = enumerate_classes(n_sites)
    stack = np.stack([build_gamma(b).matrix for b in classes])
    return tuple(classes), stack


def ising_energy(magnetization: float, n_sites: int, j_z: float, h: float) -> float:
    """Diagonal energy as a function of total magnetization M."""
    return j_z * (magnetization**2 - n_sites) / 2.0 + h * magnetization


@dataclass
class AttractorSpectrum:
    """Unimodular eigenvalues with orthonormal eigen-operators."""

    eigenvalues: np.ndarray
    operators: np.ndarray | None       # (K, dim, dim) stack, or None
    classes: list | None               # ClassIndex per entry (analytic case)
    degeneracies: np.ndarray           # d_nu of each entry's eigenvalue cluster

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _cluster_degeneracies(eigenvalues: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    K = len(eigenvalues)
    degen = np.zeros(K, dtype=int)
    assigned = np.full(K, -1)
    groups = []
    for i in range(K):
        placed = False
        for g, rep in groups:
            if abs(eigenvalues[i] - rep) <= tol:
                assigned[i] = g
                placed = True
                break
        if not placed:
            groups.append((len(groups), eigenvalues[i]))
            assigned[i] = groups[-1][0]
    for g, _ in groups:
        members = assigned == g
        degen[members] = int(np.sum(members))
    return degen


def ising_attractor_spectrum(n_sites: int, j_z: float, h: float,
                             dt: float = 1.0,
                             include_operators: bool = True) -> AttractorSpectrum:
    """Analytic spectrum: each class carries nu = e^{i[eps(M_up)-eps(M_low)]dt}.

    Classes whose upper and lower indices share a magnetization are exactly
    stationary (nu = 1).
    """
    check_qubit_count(n_sites)
    classes = enumerate_classes(n_sites)
    eigenvalues = np.empty(len(classes), dtype=complex)
    for k, beta in enumerate(classes):
        m_up = beta.upper_magnetization
        m_low = beta.lower_magnetization
        if m_up == m_low:
            eigenvalues[k] = 1.0
        else:
            phase = ising_energy(m_up, n_sites, j_z, h) - ising_energy(m_low, n_sites, j_z, h)
            eigenvalues[k] = np.exp(1j * phase * dt)
    operators = None
    if include_operators:
        operators = np.stack([build_gamma(b).matrix for b in classes])
    return AttractorSpectrum(eigenvalues=eigenvalues, operators=operators,
                             classes=classes,
                             degeneracies=_cluster_degeneracies(eigenvalues))


def general_attractor_spectrum(H: np.ndarray, dt: float = 1.0,
                               residual_tol: float = 1e-10) -> AttractorSpectrum:
    """Numeric spectrum for any uniform (permutation-symmetric) Hamiltonian.

    Restricts conjugation by U0 = e^{iH dt} to the class-operator span,
    eigendecomposes the restricted (unitary) matrix, and returns eigen-pairs
    with residual guarantees. Degenerate eigenvalue clusters are
    re-orthonormalized in deterministic column order.
    """
    n_sites = sites_from_dim(H.shape[0])
    for m in range(n_sites):
        for n in range(m + 1, n_sites):
            r = swap_commutation_residual(H, m, n)
            if r > residual_tol:
                raise ValueError(
                    f"H does not commute with swap ({m},{n}): residual {r:.3e}")

    classes, gammas = _gamma_stack(n_sites)
    evals, vecs = np.linalg.eigh(H)
    u0 = (vecs * np.exp(1j * evals * dt)) @ vecs.conj().T
    conjugated = u0 @ gammas @ u0.conj().T
    mat = np.tensordot(gammas.conj(), conjugated, axes=([1, 2], [1, 2]))

    K = mat.shape[0]
    unitary_err = float(np.max(np.abs(mat @ mat.conj().T - np.eye(K))))
    if unitary_err > 1e-10:
        raise ValueError(f"restricted conjugation not unitary: {unitary_err:.3e}")

    w, v = np.linalg.eig(mat)
    order = np.argsort(np.angle(w), kind="stable")
    w = w[order]
    v = v[:, order]

    # Re-orthonormalize within eigenvalue clusters for reproducibility.
    start = 0
    while start < K:
        stop = start + 1
        while stop < K and abs(w[stop] - w[start]) <= 1e-9:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(v[:, start:stop])
            v[:, start:stop] = q
        else:
            v[:, start] /= np.linalg.norm(v[:, start])
        start = stop

    operators = np.tensordot(v.T, gammas, axes=(1, 0))
    norms = np.sqrt(np.real(np.einsum("kij,kij->k", operators.conj(), operators)))
    operators /= norms[:, None, None]

    # Residual guarantees on every returned pair.
    back = u0 @ operators @ u0.conj().T
    for k in range(K):
        res = np.linalg.norm(back[k] - w[k] * operators[k])
        if res > 1e-9:
            raise ValueError(f"eigen-operator {k} conjugation residual {res:.3e}")
    for m in range(n_sites):
        for n in range(m + 1, n_sites):
            perm = swap_permutation(n_sites, m, n)
            swapped = operators[:, perm][:, :, perm]
            res = float(np.max(np.sqrt(np.sum(np.abs(swapped - operators)**2,
                                              axis=(1, 2)))))
            if res > 1e-10:
                raise ValueError(f"eigen-operator swap residual {res:.3e} at ({m},{n})")

    return AttractorSpectrum(eigenvalues=w, operators=operators, classes=None,
                             degeneracies=_cluster_degeneracies(w))


@dataclass
class AttractorExpansion:
    """Initial-state overlaps with the attractor basis, lambda_k = (Gamma_k, rho0)."""

    spectrum: AttractorSpectrum
    coefficients: np.ndarray

    def state_at(self, n: int) -> np.ndarray:
        phases = np.angle(self.spectrum.eigenvalues)
        weights = np.exp(1j * phases * n) * self.coefficients
        return np.tensordot(weights, self.spectrum.operators, axes=(0, 0))


def attractor_expansion(spectrum: AttractorSpectrum, rho0: np.ndarray) -> AttractorExpansion:
    if spectrum.operators is None:
        raise ValueError("spectrum was built without operators")
    coeffs = np.einsum("kij,ij->k", spectrum.operators.conj(), rho0)
    return AttractorExpansion(spectrum=spectrum, coefficients=coeffs)


def asymptotic_state(spectrum: AttractorSpectrum, rho0: np.ndarray, n: int) -> np.ndarray:
    """Late-time state sum_k nu_k^n (Gamma_k, rho0) Gamma_k."""
    return attractor_expansion(spectrum, rho0).state_at(n)


def commutant_distance(rho: np.ndarray, n_sites: int | None = None) -> float:
    """Hilbert-Schmidt distance of rho from its projection onto the class span."""
    if n_sites is None:
        n_sites = sites_from_dim(rho.shape[0])
    _, gammas = _gamma_stack(n_sites)
    coeffs = np.einsum("kij,ij->k", gammas.conj(), rho)
    proj = np.tensordot(coeffs, gammas, axes=(0, 0))
    return float(np.linalg.norm(rho - proj))


def reduce_gamma(beta: ClassIndex) -> list[tuple[float, ClassIndex]]:
    """Partial trace of Gamma_beta over any one site, as weighted classes.

    Tr_m(Gamma_beta) = (1/sqrt N) [sqrt(b00) Gamma_{b00-1} + sqrt(b11) Gamma_{b11-1}]
    on N-1 sites; empty iff b00 = b11 = 0 (no diagonal columns to consume).
    """
    n = beta.n
    if n < 2:
        raise ValueError("reduction needs at least 2 sites")
    out = []
    if beta.b00 > 0:
        out.append((np.sqrt(beta.b00 / n),
                    ClassIndex(beta.b00 - 1, beta.b01, beta.b10, beta.b11)))
    if beta.b11 > 0:
        out.append((np.sqrt(beta.b11 / n),
                    ClassIndex(beta.b00, beta.b01, beta.b10, beta.b11 - 1)))
    return out


def single_site_frequencies(n_sites: int, j_z: float, h: float) -> np.ndarray:
    """Oscillation frequencies that survive reduction to a single site.

    The set {j_z (4a + 2 - 2N) + 2h : a = 0..N-1}, one per adjacent
    magnetization pair; sorted ascending, duplicates removed.
    """
    check_qubit_count(n_sites)
    a = np.arange(n_sites)
    return np.unique(j_z * (4 * a + 2 - 2 * n_sites) + 2 * h)
