"""Dense operators for same-gate circuits on a periodic chain of qudits.

Basis states are base-``d`` digit strings with site 1 as the most significant
digit.  The one-site translation ``S`` maps ``|s1 s2 ... sN>`` to
``|s2 ... sN s1>``.  Operators act on column blocks ``X`` from the left, so a
full matrix is obtained by acting on the identity; gates are applied as
two-site contractions instead of building ``d**N``-sized factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg
import scipy.sparse

from .circuit_algebra import GateSequence, canonical_fqr, is_allowed
from .errors import (
    DimensionOverflow,
    InvalidClassParameters,
    InternalInvariantViolation,
    InvalidSector,
    NonUnitarySpectrum,
    NotBlockDiagonal,
)

DEFAULT_MAX_DIM = 2**20
GATE_UNITARITY_TOL = 1e-12
SPECTRUM_TOL = 1e-8
LEAKAGE_TOL = 1e-8
COMMUTATION_TOL = 1e-10


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[1])).max())


@dataclass(frozen=True, eq=False)
class LocalGate:
    """Two-site gate; rows and columns are indexed by ``a*d + b`` for sites ``(i, i+1)``."""

    matrix: np.ndarray
    d: int = 2

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.d**2, self.d**2):
            raise ValueError(f"gate must be {self.d**2}x{self.d**2}, got {m.shape}")
        err = unitarity_error(m)
        if err > GATE_UNITARITY_TOL:
            raise ValueError(f"gate is not unitary (error {err:.2e})")
        object.__setattr__(self, "matrix", m)


GateLike = Union[LocalGate, np.ndarray]


def _gate(v: GateLike) -> np.ndarray:
    return v.matrix if isinstance(v, LocalGate) else np.asarray(v, dtype=complex)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with phase-fixed columns."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_gate(d: int = 2, seed=None) -> LocalGate:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return LocalGate(haar_unitary(d * d, rng), d)


def hilbert_dim(n_sites: int, d: int, max_dim: int = DEFAULT_MAX_DIM) -> int:
    dim = d**n_sites
    if dim > max_dim:
        raise DimensionOverflow(f"d**N = {dim} exceeds the cap {max_dim}")
    return dim


# --- translations -----------------------------------------------------------


def translation_perm(n_sites: int, d: int = 2) -> np.ndarray:
    """``perm[s]`` is the label of ``S|s>``: digits rotated one place left."""
    dim = d**n_sites
    s = np.arange(dim)
    return (s * d) % dim + s // d ** (n_sites - 1)


def translation_op(n_sites: int, d: int = 2) -> np.ndarray:
    dim = d**n_sites
    op = np.zeros((dim, dim), dtype=complex)
    op[translation_perm(n_sites, d), np.arange(dim)] = 1.0
    return op


def shift_rows(x: np.ndarray, k: int, n_sites: int, d: int = 2) -> np.ndarray:
    """``S**k @ x`` for any integer ``k``."""
    k %= n_sites
    if k == 0:
        return x
    rest = x.shape[1:]
    y = x.reshape((d**k, d ** (n_sites - k)) + rest).swapaxes(0, 1)
    return np.ascontiguousarray(y).reshape(x.shape)


def shift_cols(x: np.ndarray, k: int, n_sites: int, d: int = 2) -> np.ndarray:
    """``x @ S**k``: the column label's digits rotated ``k`` places right."""
    m = (-k) % n_sites
    if m == 0:
        return x
    rows = x.shape[0]
    y = x.reshape(rows, d**m, d ** (n_sites - m)).swapaxes(1, 2)
    return np.ascontiguousarray(y).reshape(x.shape)


def conjugate_by_shift(x: np.ndarray, k: int, n_sites: int, d: int = 2) -> np.ndarray:
    """``S**-k @ x @ S**k``."""
    return shift_rows(shift_cols(x, k, n_sites, d), -k, n_sites, d)


# --- gates -----------------------------------------------------------------


def embed_gate_sparse(v: GateLike, site: int, n_sites: int, d: int = 2) -> scipy.sparse.csr_matrix:
    """Gate on sites ``(site, site+1 mod N)`` as a sparse ``d**N`` matrix, built from the digits."""
    v = _gate(v)
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")
    dim = d**n_sites
    labels = np.arange(dim)
    w1 = d ** (n_sites - site)  # weight of the first acted site
    w2 = d ** (n_sites - 1 - site % n_sites)  # weight of the second (wraps to site 1)
    a = (labels // w1) % d
    b = (labels // w2) % d
    base = labels - a * w1 - b * w2
    pair_in = a * d + b
    rows, cols, vals = [], [], []
    for a_out in range(d):
        for b_out in range(d):
            rows.append(base + a_out * w1 + b_out * w2)
            cols.append(labels)
            vals.append(v[a_out * d + b_out, pair_in])
    coo = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return coo.tocsr()


def embed_gate(v: GateLike, site: int, n_sites: int, d: int = 2) -> np.ndarray:
    """Explicit dense matrix of the gate on sites ``(site, site+1 mod N)``.

    Built entry by entry from the digit representation; it is the slow
    reference the contraction path in :func:`apply_gate` is tested against.
    """
    return embed_gate_sparse(v, site, n_sites, d).toarray()


def apply_gate(x: np.ndarray, v: GateLike, site: int, n_sites: int, d: int = 2) -> np.ndarray:
    """Left-multiply ``x`` by the gate on sites ``(site, site+1 mod N)``."""
    v = _gate(v)
    if site == n_sites:
        # the wrapped pair (N, 1) is S (gate on 1, 2) S**-1
        y = apply_gate(shift_rows(x, -1, n_sites, d), v, 1, n_sites, d)
        return shift_rows(y, 1, n_sites, d)
    shape = x.shape
    y = np.matmul(v, x.reshape(d ** (site - 1), d * d, -1))
    return y.reshape(shape)


def apply_gate_right(x: np.ndarray, v: GateLike, site: int, n_sites: int, d: int = 2) -> np.ndarray:
    """Right-multiply ``x`` by the adjoint of the gate on sites ``(site, site+1 mod N)``."""
    v = _gate(v)
    if site == n_sites:
        y = apply_gate_right(shift_cols(x, 1, n_sites, d), v, 1, n_sites, d)
        return shift_cols(y, -1, n_sites, d)
    shape = x.shape
    y = np.matmul(v.conj(), x.reshape(shape[0] * d ** (site - 1), d * d, -1))
    return y.reshape(shape)


def _apply_gates(x: np.ndarray, gates, v: np.ndarray, n_sites: int, d: int) -> np.ndarray:
    for g in gates:
        x = apply_gate(x, v, g, n_sites, d)
    return x


def apply_sequence(x: np.ndarray, seq: GateSequence, v: GateLike, d: int = 2) -> np.ndarray:
    """``F @ x`` with gates applied in time order (first gate acts first)."""
    v = _gate(v)
    for g in seq.order:
        x = apply_gate(x, v, g, seq.n_sites, d)
    return x


BLOCK_COLUMNS = 128


def dense_from_action(action: Callable[[np.ndarray], np.ndarray], dim: int, width: int = BLOCK_COLUMNS) -> np.ndarray:
    """Matrix of a column-wise linear map, built one cache-sized block of identity columns at a time."""
    out = np.empty((dim, dim), dtype=complex)
    for j, block in _identity_blocks(dim, width):
        out[:, j : j + block.shape[1]] = action(block)
    return out


def build_floquet(seq: GateSequence, v: GateLike, d: int = 2, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    dim = hilbert_dim(seq.n_sites, d, max_dim)
    v = _gate(v)
    return dense_from_action(lambda x: apply_sequence(x, seq, v, d), dim)


def _check_class(n_sites, q, r):
    if not is_allowed(n_sites, q, r):
        raise InvalidClassParameters(n_sites, q, r)


def apply_root(x: np.ndarray, n_sites: int, q: int, r: int, v: GateLike, d: int = 2) -> np.ndarray:
    """``S**r f_1 @ x`` where ``f_1`` is the layer of gates on sites ``1 + k*q``."""
    v = _gate(v)
    for k in range(n_sites // q):
        x = apply_gate(x, v, 1 + k * q, n_sites, d)
    return shift_rows(x, r, n_sites, d)


def build_root(n_sites: int, q: int, r: int, v: GateLike, d: int = 2, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    _check_class(n_sites, q, r)
    dim = hilbert_dim(n_sites, d, max_dim)
    v = _gate(v)
    return dense_from_action(lambda x: apply_root(x, n_sites, q, r, v, d), dim)


def floquet_action(seq: GateSequence, v: GateLike, d: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: apply_sequence(x, seq, v, d)


def root_action(n_sites: int, q: int, r: int, v: GateLike, d: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    _check_class(n_sites, q, r)
    return lambda x: apply_root(x, n_sites, q, r, v, d)


def layer_shifted(seq: GateSequence, q: int) -> GateSequence:
    """The same circuit started one layer (``N/q`` gates) later."""
    shift = seq.n_sites // q
    return GateSequence(seq.n_sites, seq.order[shift:] + seq.order[:shift])


# --- identity checks --------------------------------------------------------


def _maxabs(a: np.ndarray, b: np.ndarray, rows: int = 64) -> float:
    # row blocks keep the temporaries small
    worst = 0.0
    for i in range(0, a.shape[0], rows):
        worst = max(worst, float(np.abs(a[i : i + rows] - b[i : i + rows]).max()))
    return worst


def verify_conjugation(n_sites: int, v: GateLike, d: int = 2) -> float:
    """Largest deviation of ``gate(i+1) = S**-1 gate(i) S`` over all sites ``i``.

    ``(S**-1 G S)[a, b] = G[perm[a], perm[b]]`` for the label permutation of
    ``S``, so the check runs on the sparse embeddings.
    """
    perm = translation_perm(n_sites, d)
    err = 0.0
    current = embed_gate_sparse(v, 1, n_sites, d)
    for i in range(1, n_sites + 1):
        following = embed_gate_sparse(v, i % n_sites + 1, n_sites, d)
        moved = current[perm][:, perm]
        diff = abs(following - moved)
        err = max(err, float(diff.max()) if diff.nnz else 0.0)
        current = following
    return err


def _identity_blocks(dim: int, width: int = BLOCK_COLUMNS):
    for j in range(0, dim, width):
        w = min(width, dim - j)
        block = np.zeros((dim, w), dtype=complex)
        block[j : j + w] = np.eye(w)
        yield j, block


def _root_power(x, n_sites, q, r, v, d):
    """``S**(-q r) root**q @ x``."""
    for _ in range(q):
        x = apply_root(x, n_sites, q, r, v, d)
    return shift_rows(x, -q * r, n_sites, d)


def verify_root_identity(n_sites: int, q: int, r: int, v: GateLike, d: int = 2) -> float:
    """``max |F_{q,r} - S**(-q r) root**q|`` over all entries."""
    _check_class(n_sites, q, r)
    dim = hilbert_dim(n_sites, d)
    f = build_floquet(canonical_fqr(n_sites, q, r), v, d)
    v = _gate(v)
    return _maxabs(f, dense_from_action(lambda x: _root_power(x, n_sites, q, r, v, d), dim))


def verify_space_time(n_sites: int, q: int, r: int, v: GateLike, d: int = 2) -> float:
    """Compare ``S**-r F S**r`` with the circuit started from its second layer."""
    _check_class(n_sites, q, r)
    seq = canonical_fqr(n_sites, q, r)
    f = build_floquet(seq, v, d)
    shifted = build_floquet(layer_shifted(seq, q), v, d)
    return _maxabs(conjugate_by_shift(f, r, n_sites, d), shifted)


def verify_translation_sym(n_sites: int, q: int, r: int, v: GateLike, d: int = 2) -> float:
    root = build_root(n_sites, q, r, v, d)
    return _maxabs(conjugate_by_shift(root, q, n_sites, d), root)


def verify_identities(n_sites: int, q: int, r: int, v: GateLike, d: int = 2, conjugation: bool = True) -> dict[str, float]:
    """All operator identities of one class, sharing the dense intermediates.

    ``F``, the root and ``root**q`` are built together one block of columns at a
    time; the circuit started one layer later is formed as ``L1 F L1^dagger``
    with ``L1`` its first layer.
    """
    _check_class(n_sites, q, r)
    dim = hilbert_dim(n_sites, d)
    v = _gate(v)
    seq = canonical_fqr(n_sites, q, r)
    out = {}
    if conjugation:
        out["conjugation"] = verify_conjugation(n_sites, v, d)
    f = np.empty((dim, dim), dtype=complex)
    root = np.empty((dim, dim), dtype=complex)
    worst = 0.0
    width = n_sites // q
    first, later = seq.order[:width], seq.order[width:]
    if sorted(first) != list(range(1, n_sites + 1, q)):
        raise InternalInvariantViolation(f"first layer of F_{q},{r} is {first}")
    for j, block in _identity_blocks(dim):
        cols = slice(j, j + block.shape[1])
        # F and the root both begin with the first layer
        block = _apply_gates(block, first, v, n_sites, d)
        f[:, cols] = _apply_gates(block, later, v, n_sites, d)
        y = root[:, cols] = shift_rows(block, r, n_sites, d)
        for _ in range(q - 1):
            y = apply_root(y, n_sites, q, r, v, d)
        worst = max(worst, _maxabs(f[:, cols], shift_rows(y, -q * r, n_sites, d)))
    out["root_identity"] = worst
    out["translation"] = _maxabs(conjugate_by_shift(root, q, n_sites, d), root)
    del root
    shifted = _layer_conjugate(f, first, v, n_sites, d)
    out["space_time"] = _maxabs(conjugate_by_shift(f, r, n_sites, d), shifted)
    return out


def _layer_conjugate(x, gates, v, n_sites, d):
    """``L x L^dagger`` for the product ``L`` of the given (mutually commuting) gates."""
    for g in gates:
        x = apply_gate(x, v, g, n_sites, d)
    out = np.empty_like(x)
    for i in range(0, x.shape[0], BLOCK_COLUMNS):
        y = x[i : i + BLOCK_COLUMNS]
        for g in gates:
            y = apply_gate_right(y, v, g, n_sites, d)
        out[i : i + BLOCK_COLUMNS] = y
    return out


# --- momentum sectors -------------------------------------------------------


@dataclass(eq=False)
class MomentumSectorBasis:
    n_sites: int
    d: int
    q: int
    k: int
    columns: np.ndarray
    sparse: scipy.sparse.csr_matrix | None = None

    def __post_init__(self):
        if self.sparse is None:
            self.sparse = scipy.sparse.csr_matrix(self.columns)

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def eigenvalue(self) -> complex:
        return np.exp(2j * np.pi * self.k * self.q / self.n_sites)


def _orbit_table(n_sites: int, d: int, q: int) -> np.ndarray:
    """Row ``j`` holds the labels of ``S**(j q) |s>`` for every label ``s``."""
    dim = d**n_sites
    s = np.arange(dim)
    step = (s * d**q) % dim + s // d ** (n_sites - q)
    table = np.empty((n_sites // q, dim), dtype=np.int64)
    table[0] = s
    for j in range(1, n_sites // q):
        table[j] = step[table[j - 1]]
    return table


def sector_dims(n_sites: int, d: int, q: int) -> list[int]:
    """Sector dimensions for ``k = 0 .. N/q - 1`` from the orbit lengths alone."""
    orbits = _orbit_table(n_sites, d, q)
    rep = orbits.min(axis=0)
    is_rep = rep == orbits[0]
    lengths = _orbit_lengths(orbits)[is_rep]
    return [int(np.sum((k * q * lengths) % n_sites == 0)) for k in range(n_sites // q)]


def _orbit_lengths(orbits: np.ndarray) -> np.ndarray:
    n_steps = orbits.shape[0]
    lengths = np.full(orbits.shape[1], n_steps)
    for j in range(n_steps - 1, 0, -1):
        lengths[orbits[j] == orbits[0]] = j
    return lengths


def momentum_basis(n_sites: int, d: int, q: int, k: int, max_dim: int = DEFAULT_MAX_DIM) -> MomentumSectorBasis:
    """Orthonormal basis of the ``S**q`` eigenspace with eigenvalue ``exp(2 pi i k q / N)``.

    Each orbit of product labels under ``S**q`` of length ``L`` contributes one
    Fourier superposition when ``k q L / N`` is an integer.
    """
    if q < 1 or n_sites % q:
        raise InvalidSector(f"q = {q} does not divide N = {n_sites}")
    if not 0 <= k < n_sites // q:
        raise InvalidSector(f"k = {k} outside 0..{n_sites // q - 1}")
    dim = hilbert_dim(n_sites, d, max_dim)
    orbits = _orbit_table(n_sites, d, q)
    lengths = _orbit_lengths(orbits)
    is_rep = orbits.min(axis=0) == orbits[0]
    keep = is_rep & ((k * q * lengths) % n_sites == 0)
    reps = np.flatnonzero(keep)
    lengths = lengths[reps]
    omega = np.exp(2j * np.pi * k * q / n_sites)
    cols = np.zeros((dim, reps.size), dtype=complex)
    idx = np.arange(reps.size)
    norm = 1 / np.sqrt(lengths)
    for j in range(orbits.shape[0]):
        live = j < lengths
        cols[orbits[j, reps[live]], idx[live]] = omega ** (-j) * norm[live]
    return MomentumSectorBasis(n_sites, d, q, k, cols)


Operator = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def restrict(u: Operator, basis: MomentumSectorBasis) -> np.ndarray:
    """``B^dagger U B`` for an operator that preserves the sector.

    ``u`` may be a dense matrix or a callable acting on column blocks.
    """
    b = basis.columns
    bs = basis.sparse
    if callable(u):
        ub = u(b.copy())
    else:
        u = np.asarray(u)
        comm = _maxabs(
            shift_rows(u, basis.q, basis.n_sites, basis.d),
            shift_cols(u, basis.q, basis.n_sites, basis.d),
        )
        if comm > COMMUTATION_TOL:
            raise NotBlockDiagonal(f"operator does not commute with S**{basis.q} (error {comm:.2e})")
        ub = u @ b
    block = np.asarray(bs.conj().T @ ub)
    leak = float(np.abs(ub - bs @ block).max()) if b.size else 0.0
    if leak > LEAKAGE_TOL:
        raise NotBlockDiagonal(f"operator leaks out of the sector (error {leak:.2e})")
    return block


# --- spectra ----------------------------------------------------------------


@dataclass(eq=False)
class EigenphaseSet:
    phases: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.phases.size)

    def __len__(self) -> int:
        return self.dim

    def to_csv(self) -> str:
        lines = ["index,phase"]
        lines += [f"{i},{phase:.17g}" for i, phase in enumerate(self.phases)]
        return "\n".join(lines) + "\n"


def phases_from_eigenvalues(eigenvalues: np.ndarray, tol: float = SPECTRUM_TOL) -> EigenphaseSet:
    eigenvalues = np.asarray(eigenvalues)
    dev = np.abs(np.abs(eigenvalues) - 1)
    if dev.size and dev.max() > tol:
        raise NonUnitarySpectrum(f"eigenvalue modulus off by {dev.max():.2e}")
    phases = np.mod(np.angle(eigenvalues), 2 * np.pi)
    phases[phases >= 2 * np.pi] = 0.0
    return EigenphaseSet(np.sort(phases))


def eigenphases(u: np.ndarray, tol: float = SPECTRUM_TOL) -> EigenphaseSet:
    """Eigenphases in ``[0, 2 pi)`` from a general (Schur-based) complex eigensolver."""
    u = np.asarray(u, dtype=complex)
    return phases_from_eigenvalues(scipy.linalg.eigvals(u, check_finite=False), tol)


def phase_distance(a, b, max_offset: int = 3) -> float:
    """Max gap between two sorted phase multisets on the circle.

    Sorting can misalign the two lists by a few places when phases straddle
    zero, so small cyclic offsets are tried and the best one kept.
    """
    a = np.asarray(getattr(a, "phases", a))
    b = np.asarray(getattr(b, "phases", b))
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    best = np.inf
    for off in range(-max_offset, max_offset + 1):
        diff = np.angle(np.exp(1j * (a - np.roll(b, off))))
        best = min(best, float(np.abs(diff).max()))
    return best


def spectral_equivalence_check(seq_a: GateSequence, seq_b: GateSequence, v: GateLike, d: int = 2) -> float:
    if seq_a.n_sites != seq_b.n_sites:
        raise ValueError("sequences act on different chain lengths")
    pa = eigenphases(build_floquet(seq_a, v, d))
    pb = eigenphases(build_floquet(seq_b, v, d))
    return phase_distance(pa, pb)


def sector_spectra(n_sites: int, q: int, r: int, k: int, v: GateLike, d: int = 2, basis: MomentumSectorBasis | None = None):
    """Eigenphases of the Floquet operator and of its root inside sector ``k`` of ``S**q``."""
    _check_class(n_sites, q, r)
    if basis is None:
        basis = momentum_basis(n_sites, d, q, k)
    f_block = restrict(floquet_action(canonical_fqr(n_sites, q, r), v, d), basis)
    root_block = restrict(root_action(n_sites, q, r, v, d), basis)
    return eigenphases(f_block), eigenphases(root_block)


def predicted_floquet_phases(root_phases, n_sites: int, q: int, r: int, k: int) -> np.ndarray:
    """Floquet phases implied by root phases: ``q*theta - 2 pi q k r / N`` mod ``2 pi``."""
    theta = np.asarray(getattr(root_phases, "phases", root_phases))
    return np.sort(np.mod(q * theta - 2 * np.pi * q * k * r / n_sites, 2 * np.pi))


def sector_phase_relation(n_sites: int, q: int, r: int, k: int, v: GateLike, d: int = 2) -> float:
    f_phases, root_phases = sector_spectra(n_sites, q, r, k, v, d)
    return phase_distance(f_phases, predicted_floquet_phases(root_phases, n_sites, q, r, k))
