"""Operators, Hamiltonians and states for fully connected qubit networks.

Conventions used throughout the package:

* Computational basis ordered lexicographically, site 0 is the most
  significant bit of the basis index.
* sigma_z |0> = +|0>, so a basis index with bit 0 at site m carries
  z_m = +1 and the magnetization of index i is M_i = N - 2 popcount(i).
* All operators are dense complex numpy arrays on the full 2^N space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

MAX_QUBITS = 12

HAMILTONIAN_FAMILIES = ("ising", "tfi", "xx", "xyz", "general")

STATE_KINDS = (
    "haar_random_pure",
    "plus_zero_product",
    "w_plus_superposition",
    "eigenpair_superposition",
    "maximally_mixed",
    "explicit_matrix",
)


class DimensionCapError(ValueError):
    """Raised when a requested qubit count exceeds the dense-simulation cap."""


def check_qubit_count(n_sites: int, cap: int = MAX_QUBITS) -> int:
    if not isinstance(n_sites, (int, np.integer)) or n_sites < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n_sites!r}")
    if n_sites > cap:
        raise DimensionCapError(
            f"{n_sites} qubits exceeds the dense cap of {cap} (dim 2^{cap})"
        )
    return int(n_sites)


def sites_from_dim(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension, validated."""
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def pair_list(n_sites: int) -> list[tuple[int, int]]:
    """All unordered site pairs (m, n) with m < n, lexicographic order."""
    return list(combinations(range(n_sites), 2))


def kron_all(factors) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


def local_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator at the given site (identity elsewhere)."""
    factors = [PAULI_I] * n_sites
    factors[site] = op
    return kron_all(factors)


def two_site_operator(op_a: np.ndarray, op_b: np.ndarray, m: int, n: int,
                      n_sites: int) -> np.ndarray:
    if m == n:
        raise ValueError("two_site_operator needs distinct sites")
    factors = [PAULI_I] * n_sites
    factors[m] = op_a
    factors[n] = op_b
    return kron_all(factors)


def site_bits(n_sites: int, site: int) -> np.ndarray:
    """Bit of each basis index at the given site (site 0 = MSB)."""
    idx = np.arange(2**n_sites)
    return (idx >> (n_sites - 1 - site)) & 1


def magnetization_values(n_sites: int) -> np.ndarray:
    """M_i = (number of 0 bits) - (number of 1 bits) per basis index."""
    m = np.full(2**n_sites, n_sites, dtype=np.int64)
    for site in range(n_sites):
        m -= 2 * site_bits(n_sites, site)
    return m


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters of one fully connected network Hamiltonian.

    Families and their active couplings:
      ising:   H = J_z sum_<mn> z_m z_n + h sum_m z_m
      tfi:     H = J_z sum_<mn> z_m z_n + t sum_m x_m
      xx:      H = J_x sum_<mn> (x_m x_n + y_m y_n) + h sum_m z_m   (J_y = J_x)
      xyz:     H = sum_<mn> (J_x xx + J_y yy + J_z zz) + h sum_m z_m
      general: all five couplings active
    """

    family: str
    n: int
    j_x: float = 0.0
    j_y: float = 0.0
    j_z: float = 0.0
    h: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.family not in HAMILTONIAN_FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}, expected one of {HAMILTONIAN_FAMILIES}"
            )
        check_qubit_count(self.n)
        for name in ("j_x", "j_y", "j_z", "h", "t"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        inactive = {
            "ising": ("j_x", "j_y", "t"),
            "tfi": ("j_x", "j_y", "h"),
            "xx": ("t",),
            "xyz": ("t",),
            "general": (),
        }[self.family]
        for name in inactive:
            if getattr(self, name) != 0.0:
                raise ValueError(f"{name} is not active for family {self.family!r}")
        if self.family == "xx":
            if self.j_y == 0.0:
                object.__setattr__(self, "j_y", self.j_x)
            elif self.j_y != self.j_x:
                raise ValueError("xx family requires j_x == j_y")

    def couplings(self) -> dict:
        """Coefficient map consumed by build_network_hamiltonian."""
        return {
            "jx": self.j_x,
            "jy": self.j_y,
            "jz": self.j_z,
            "hz": self.h,
            "hx": self.t,
        }


def _per_bond(value, n_pairs: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return np.full(n_pairs, arr.item())
    if arr.size != n_pairs:
        raise ValueError(f"{name}: expected scalar or {n_pairs} per-bond values")
    return arr.astype(float)


def _per_site(value, n_sites: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return np.full(n_sites, arr.item())
    if arr.size != n_sites:
        raise ValueError(f"{name}: expected scalar or {n_sites} per-site values")
    return arr.astype(float)


def build_network_hamiltonian(n_sites: int, jx=0.0, jy=0.0, jz=0.0,
                              hz=0.0, hx=0.0) -> np.ndarray:
    """Dense Hamiltonian of the fully connected network.

    H = sum_<mn> (jx_mn xx + jy_mn yy + jz_mn zz) + sum_m (hz_m z_m + hx_m x_m)

    Each coupling may be a scalar (uniform) or an array: per-bond values in
    pair_list order for jx/jy/jz, per-site values for hz/hx.
    """
    check_qubit_count(n_sites)
    pairs = pair_list(n_sites)
    jx = _per_bond(jx, len(pairs), "jx")
    jy = _per_bond(jy, len(pairs), "jy")
    jz = _per_bond(jz, len(pairs), "jz")
    hz = _per_site(hz, n_sites, "hz")
    hx = _per_site(hx, n_sites, "hx")

    dim = 2**n_sites
    ham = np.zeros((dim, dim), dtype=complex)
    for k, (m, n) in enumerate(pairs):
        if jx[k] != 0.0:
            ham += jx[k] * two_site_operator(PAULI_X, PAULI_X, m, n, n_sites)
        if jy[k] != 0.0:
            ham += jy[k] * two_site_operator(PAULI_Y, PAULI_Y, m, n, n_sites)
        if jz[k] != 0.0:
            ham += jz[k] * two_site_operator(PAULI_Z, PAULI_Z, m, n, n_sites)
    for m in range(n_sites):
        if hz[m] != 0.0:
            ham += hz[m] * local_operator(PAULI_Z, m, n_sites)
        if hx[m] != 0.0:
            ham += hx[m] * local_operator(PAULI_X, m, n_sites)
    return ham


def build_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Dense Hamiltonian for a HamiltonianSpec (uniform couplings)."""
    return build_network_hamiltonian(spec.n, **spec.couplings())


def swap_permutation(n_sites: int, m: int, n: int) -> np.ndarray:
    """Basis-index permutation exchanging the bits of sites m and n."""
    if m == n:
        raise ValueError("swap needs distinct sites")
    if not (0 <= m < n_sites and 0 <= n < n_sites):
        raise ValueError(f"sites ({m},{n}) out of range for {n_sites} qubits")
    idx = np.arange(2**n_sites)
    sm = n_sites - 1 - m
    sn = n_sites - 1 - n
    bm = (idx >> sm) & 1
    bn = (idx >> sn) & 1
    out = idx & ~((1 << sm) | (1 << sn))
    out |= (bn << sm) | (bm << sn)
    return out


def build_swap_operator(m: int, n: int, n_sites: int) -> np.ndarray:
    """Swap unitary SW_mn exchanging sites m and n (a basis permutation)."""
    check_qubit_count(n_sites)
    perm = swap_permutation(n_sites, m, n)
    dim = perm.size
    sw = np.zeros((dim, dim), dtype=complex)
    sw[perm, np.arange(dim)] = 1.0
    return sw


def partial_trace(rho: np.ndarray, drop, n_sites: int | None = None) -> np.ndarray:
    """Trace out the sites in `drop`, keeping the rest in site order."""
    if n_sites is None:
        n_sites = sites_from_dim(rho.shape[0])
    drop = sorted(set(int(s) for s in drop))
    if any(s < 0 or s >= n_sites for s in drop):
        raise ValueError(f"drop sites {drop} out of range for {n_sites} qubits")
    tensor = np.asarray(rho).reshape((2,) * (2 * n_sites))
    remaining = n_sites
    for s in reversed(drop):
        tensor = np.trace(tensor, axis1=s, axis2=s + remaining)
        remaining -= 1
    dim = 2**remaining
    return tensor.reshape(dim, dim)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S = -sum lambda ln lambda with eigenvalues clipped at zero."""
    evals = np.linalg.eigvalsh(rho)
    evals = np.clip(evals.real, 0.0, None)
    pos = evals[evals > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def entropy_from_eigenvalues(evals: np.ndarray) -> float:
    evals = np.clip(np.asarray(evals).real, 0.0, None)
    pos = evals[evals > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def swap_commutation_residual(H: np.ndarray, m: int, n: int,
                              kappa: float = 1.0) -> float:
    """Max-norm of [kappa SW_mn, H]; zero iff the pair decouples from H."""
    n_sites = sites_from_dim(H.shape[0])
    sw = build_swap_operator(m, n, n_sites)
    comm = sw @ H - H @ sw
    return float(abs(kappa) * np.max(np.abs(comm)))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def density_matrix_checks(rho: np.ndarray) -> tuple[float, float, float]:
    """(trace error, hermiticity error, min eigenvalue) of a candidate state."""
    trace_err = abs(np.trace(rho) - 1.0)
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.linalg.eigvalsh(rho)[0].real)
    return float(trace_err), herm_err, min_eig


def validate_density_matrix(rho: np.ndarray, trace_atol: float = 1e-12,
                            herm_atol: float = 1e-12,
                            eig_floor: float = -1e-10,
                            name: str = "rho") -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    trace_err, herm_err, min_eig = density_matrix_checks(rho)
    if trace_err > trace_atol:
        raise ValueError(f"{name}: trace deviates from 1 by {trace_err:.3e}")
    if herm_err > herm_atol:
        raise ValueError(f"{name}: not Hermitian, max deviation {herm_err:.3e}")
    if min_eig < eig_floor:
        raise ValueError(f"{name}: negative eigenvalue {min_eig:.3e}")


@dataclass(frozen=True)
class StateSpec:
    """Recipe for an initial density matrix.

    kinds: haar_random_pure (needs seed), plus_zero_product,
    w_plus_superposition, eigenpair_superposition (needs pair of full-spectrum
    eigenvector indices and a Hamiltonian at build time), maximally_mixed,
    explicit_matrix (needs matrix).
    """

    kind: str
    seed: int | None = None
    pair: tuple[int, int] | None = None
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(
                f"unknown state kind {self.kind!r}, expected one of {STATE_KINDS}"
            )
        if self.kind == "haar_random_pure" and self.seed is None:
            raise ValueError("haar_random_pure requires a seed")
        if self.kind == "eigenpair_superposition":
            if self.pair is None or len(self.pair) != 2:
                raise ValueError("eigenpair_superposition requires pair=(a, b)")
            if self.pair[0] == self.pair[1]:
                raise ValueError("eigenpair_superposition requires a != b")
        if self.kind == "explicit_matrix" and self.matrix is None:
            raise ValueError("explicit_matrix requires matrix")


def pure_state_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def make_initial_state(spec: StateSpec, n_sites: int,
                       hamiltonian: np.ndarray | None = None) -> np.ndarray:
    """Build the density matrix described by a StateSpec."""
    check_qubit_count(n_sites)
    dim = 2**n_sites

    if spec.kind == "haar_random_pure":
        rng = np.random.default_rng(spec.seed)
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        rho = pure_state_density(psi)
    elif spec.kind == "plus_zero_product":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        psi[2 ** (n_sites - 1)] = 1.0
        rho = pure_state_density(psi)
    elif spec.kind == "w_plus_superposition":
        # sum_i |0..+_i..0> expands to N|0..0> + sum_i |0..1_i..0>, then the
        # whole vector is renormalized (the bare sum is not normalized).
        psi = np.zeros(dim, dtype=complex)
        psi[0] = float(n_sites)
        for site in range(n_sites):
            psi[1 << (n_sites - 1 - site)] = 1.0
        rho = pure_state_density(psi)
    elif spec.kind == "eigenpair_superposition":
        if hamiltonian is None:
            raise ValueError("eigenpair_superposition requires a Hamiltonian")
        if hamiltonian.shape[0] != dim:
            raise ValueError("Hamiltonian dimension does not match qubit count")
        a, b = spec.pair
        if not (0 <= a < dim and 0 <= b < dim):
            raise ValueError(f"eigenvector indices {spec.pair} out of range")
        _, vecs = np.linalg.eigh(hamiltonian)
        rho = pure_state_density(vecs[:, a] + vecs[:, b])
    elif spec.kind == "maximally_mixed":
        rho = np.eye(dim, dtype=complex) / dim
    elif spec.kind == "explicit_matrix":
        rho = np.array(spec.matrix, dtype=complex)
        if rho.shape != (dim, dim):
            raise ValueError(f"explicit matrix has shape {rho.shape}, expected {(dim, dim)}")
    else:  # pragma: no cover - guarded by StateSpec validation
        raise ValueError(f"unhandled state kind {spec.kind!r}")

    validate_density_matrix(rho, name=f"state {spec.kind}")
    return rho


def single_site_expectations(rho: np.ndarray, site: int) -> tuple[float, float, float]:
    """(<sigma_x>, <sigma_y>, <sigma_z>) at one site, O(dim) gathers."""
    n_sites = sites_from_dim(rho.shape[0])
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} qubits")
    idx = np.arange(rho.shape[0])
    bit = (idx >> (n_sites - 1 - site)) & 1
    flip = idx ^ (1 << (n_sites - 1 - site))
    cross = rho[flip, idx]
    sx = float(np.real(np.sum(cross)))
    sy = float(np.real(np.sum(1j * (2 * bit - 1) * cross)))
    sz = float(np.real(np.sum((1 - 2 * bit) * rho[idx, idx])))
    return sx, sy, sz


def total_magnetization_expectation(rho: np.ndarray) -> float:
    """<sum_m sigma_z^m> from the diagonal."""
    n_sites = sites_from_dim(rho.shape[0])
    m_vals = magnetization_values(n_sites)
    return float(np.real(np.sum(m_vals * np.diag(rho))))
