"""States, observables, and the spectral primitives everything else rests on.

Conventions used throughout the package:

* Matrices are dense complex numpy arrays; index i labels the computational
  basis vector |i>.
* Spectral decompositions sort eigenvalues in descending order, and each
  eigenvector's phase is fixed by making its largest-magnitude component
  real and positive, so decompositions are reproducible bit-for-bit.
* Tensor products follow numpy.kron: the first factor is the slow index.

A :class:`DensityMatrix` can be built either from a dense matrix or directly
from spectral factors (weights and orthonormal columns).  The factored form
avoids ever materializing or diagonalizing the dense matrix, which matters
for the multi-qubit mixtures used in the scaling experiments.
"""

from __future__ import annotations

import string

import numpy as np

from .config import TOL


class ValidationError(ValueError):
    """An input violated a structural invariant (with measured magnitudes)."""


class ResourceLimitError(RuntimeError):
    """An operation would exceed a configured dimension cap."""


def _to_array(obj) -> np.ndarray:
    """Extract a complex ndarray from a matrix-like object."""
    mat = getattr(obj, "matrix", obj)
    mat = np.asarray(mat, dtype=complex)
    if not np.all(np.isfinite(mat.real)) or not np.all(np.isfinite(mat.imag)):
        raise ValidationError("matrix contains non-finite entries")
    return mat


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    lead_idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[lead_idx, np.arange(vecs.shape[1])]
    mags = np.abs(lead)
    # Null columns cannot occur for unitary input; guard anyway.
    phases = np.where(mags > 0, lead / np.where(mags > 0, mags, 1.0), 1.0)
    return vecs * phases.conj()[None, :]


def hermiticity_defect(mat: np.ndarray) -> float:
    """Largest absolute entry of M - M†."""
    return float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0


def spectral_decompose(M, hermitian_atol: float | None = None):
    """Eigenvalues (descending) and phase-fixed eigenvector columns of M.

    Raises ValidationError if M is not Hermitian within the tolerance or if
    the decomposition fails to reconstruct M to within the configured
    relative error (a backstop against silent LAPACK misuse; eigh is
    backward stable, so this never fires on sane input).
    """
    mat = _to_array(M)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
    atol = TOL.hermitian_atol if hermitian_atol is None else hermitian_atol
    defect = hermiticity_defect(mat)
    if defect > atol:
        raise ValidationError(
            f"matrix is not Hermitian: max |M - M†| entry = {defect:.3e} > {atol:.1e}"
        )
    evals, evecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    evals = evals[::-1].astype(float)
    evecs = _fix_phases(evecs[:, ::-1])
    recon = (evecs * evals) @ evecs.conj().T
    scale = max(float(np.abs(mat).max()), 1e-300)
    rel = float(np.abs(recon - mat).max()) / scale
    if rel > TOL.reconstruction_rtol:
        raise ValidationError(
            f"spectral reconstruction error {rel:.3e} exceeds {TOL.reconstruction_rtol:.1e}"
        )
    return evals, evecs


def validate_density(matrix, *, return_spectrum: bool = True):
    """Check Hermiticity, unit trace, and positivity of a density matrix.

    Raises ValidationError listing every violated invariant with the
    measured magnitude.  On success returns the spectral decomposition
    computed along the way so callers can seed their caches without a
    second diagonalization.
    """
    mat = _to_array(matrix)
    problems = []
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
    defect = hermiticity_defect(mat)
    if defect > TOL.hermitian_atol:
        problems.append(f"not Hermitian: max |M - M†| = {defect:.3e}")
    tr = mat.trace()
    if abs(tr - 1.0) > TOL.trace_atol:
        problems.append(f"trace = {tr:.12g}, differs from 1 by {abs(tr - 1.0):.3e}")
    evals, evecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    if evals[0] < TOL.eigenvalue_floor:
        problems.append(f"negative eigenvalue {evals[0]:.3e} below {TOL.eigenvalue_floor:.1e}")
    if problems:
        raise ValidationError("invalid density matrix: " + "; ".join(problems))
    if not return_spectrum:
        return None
    return evals[::-1].astype(float), _fix_phases(evecs[:, ::-1])


class PureState:
    """A normalized complex amplitude vector."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, normalize: bool = False):
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(vec.real)) or not np.all(np.isfinite(vec.imag)):
            raise ValidationError("amplitudes contain non-finite entries")
        nrm = float(np.linalg.norm(vec))
        if normalize:
            if nrm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            vec = vec / nrm
        elif abs(nrm - 1.0) > TOL.unit_norm_atol:
            raise ValidationError(
                f"state norm {nrm:.12g} differs from 1 by {abs(nrm - 1.0):.3e}"
            )
        vec.flags.writeable = False
        self.amplitudes = vec

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        """Rank-1 projector |psi><psi| with its spectrum pre-seeded."""
        vec = self.amplitudes
        rho = DensityMatrix(np.outer(vec, vec.conj()), validate=False)
        rho._spectrum = (np.array([1.0]), _fix_phases(vec[:, None].copy()))
        return rho

    def expectation(self, A) -> float:
        mat = _to_array(A)
        return float(np.real(np.vdot(self.amplitudes, mat @ self.amplitudes)))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class DensityMatrix:
    """A density matrix with a cached spectral decomposition.

    Either construct from a dense matrix (validated by default) or from
    spectral factors via :meth:`from_spectrum`, in which case the dense
    matrix is only materialized on demand.
    """

    __slots__ = ("_matrix", "_spectrum")

    def __init__(self, matrix, validate: bool = True):
        mat = _to_array(matrix)
        self._spectrum = None
        if validate:
            self._spectrum = validate_density(mat)
        mat.flags.writeable = False
        self._matrix = mat

    @classmethod
    def from_spectrum(cls, weights, vectors) -> "DensityMatrix":
        """Build sum_a w_a |v_a><v_a| from orthonormal columns, lazily dense.

        The weights must be >= the configured eigenvalue floor and sum to 1;
        the columns must be orthonormal to within the configured tolerance.
        Tiny negative weights are clamped to zero.
        """
        w = np.asarray(weights, dtype=float).reshape(-1)
        V = np.asarray(vectors, dtype=complex)
        if V.ndim != 2 or V.shape[1] != w.shape[0]:
            raise ValidationError(
                f"need one column per weight: {V.shape} columns vs {w.shape[0]} weights"
            )
        if w.min() < TOL.eigenvalue_floor:
            raise ValidationError(f"negative weight {w.min():.3e}")
        total = float(w.sum())
        if abs(total - 1.0) > TOL.trace_atol:
            raise ValidationError(f"weights sum to {total:.12g}, off by {abs(total - 1.0):.3e}")
        gram_defect = float(np.abs(V.conj().T @ V - np.eye(V.shape[1])).max())
        if gram_defect > TOL.orthonormal_atol:
            raise ValidationError(
                f"columns not orthonormal: max |V†V - I| = {gram_defect:.3e}"
            )
        w = np.clip(w, 0.0, None)
        order = np.argsort(w)[::-1]
        obj = cls.__new__(cls)
        obj._matrix = None
        obj._spectrum = (w[order], _fix_phases(V[:, order].copy()))
        return obj

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            w, V = self._spectrum
            mat = (V * w) @ V.conj().T
            mat.flags.writeable = False
            self._matrix = mat
        return self._matrix

    @property
    def dim(self) -> int:
        if self._matrix is not None:
            return self._matrix.shape[0]
        return self._spectrum[1].shape[0]

    @property
    def is_factored(self) -> bool:
        """True while only spectral factors are stored (no dense matrix)."""
        return self._matrix is None

    def spectrum(self):
        """(eigenvalues descending, eigenvector columns).

        For factored states only the stored weights are returned; absent
        eigenvalues are exact zeros and consumers treat them as such.
        """
        if self._spectrum is None:
            evals, evecs = np.linalg.eigh(self.matrix)
            self._spectrum = (evals[::-1].astype(float), _fix_phases(evecs[:, ::-1]))
        return self._spectrum

    @property
    def rank(self) -> int:
        evals, _ = self.spectrum()
        return int(np.count_nonzero(evals > TOL.rank_cutoff))

    def trace(self) -> float:
        if self._matrix is None:
            return float(self._spectrum[0].sum())
        return float(np.real(self._matrix.trace()))

    def purity(self) -> float:
        """tr(rho^2), from the spectrum when available."""
        if self._spectrum is not None:
            return float(np.sum(self._spectrum[0] ** 2))
        return float(np.real(np.vdot(self.matrix, self.matrix)))


class HermitianObservable:
    """A Hermitian matrix with a cached eigensystem."""

    __slots__ = ("matrix", "_eigensystem")

    def __init__(self, matrix, validate: bool = True):
        mat = _to_array(matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
        if validate:
            defect = hermiticity_defect(mat)
            if defect > TOL.hermitian_atol:
                raise ValidationError(
                    f"observable is not Hermitian: max |M - M†| = {defect:.3e}"
                )
        mat.flags.writeable = False
        self.matrix = mat
        self._eigensystem = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigensystem(self):
        """(eigenvalues descending, phase-fixed eigenvector columns)."""
        if self._eigensystem is None:
            self._eigensystem = spectral_decompose(self.matrix)
        return self._eigensystem

    @property
    def spectral_range(self) -> float:
        evals, _ = self.eigensystem()
        return float(evals[0] - evals[-1])


def tensor_product(X, Y) -> np.ndarray:
    """Kronecker product with a dimension overflow guard."""
    a = _to_array(X)
    b = _to_array(Y)
    out_rows = a.shape[0] * b.shape[0]
    if out_rows > TOL.tensor_dim_cap:
        raise ResourceLimitError(
            f"tensor product dimension {out_rows} exceeds cap {TOL.tensor_dim_cap}"
        )
    return np.kron(a, b)


def partial_trace(rho, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    dims lists the local dimensions in tensor order; keep is an iterable of
    subsystem indices to retain (order preserved as given, ascending
    recommended).  Returns the same flavor it was given: DensityMatrix in,
    DensityMatrix out (unvalidated), ndarray in, ndarray out.
    """
    mat = _to_array(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValidationError(f"matrix shape {mat.shape} does not match dims {dims}")
    keep = [int(k) for k in keep]
    if any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise ValidationError(f"invalid keep list {keep} for {n} subsystems")
    letters = string.ascii_lowercase + string.ascii_uppercase
    if 2 * n > len(letters):
        raise ResourceLimitError(f"too many subsystems ({n}) for partial trace")
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row + col) + "->" + out, mat.reshape(dims + dims))
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    reduced = reduced.reshape(kept_dim, kept_dim)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(reduced, validate=False)
    return reduced


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """GG†/tr(GG†) for a dim x rank complex Gaussian G (Hilbert-Schmidt-like)."""
    rank = dim if rank is None else int(rank)
    if not 1 <= rank <= dim:
        raise ValidationError(f"rank {rank} not in [1, {dim}]")
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    rho /= np.real(rho.trace())
    return DensityMatrix(rho)


def random_pure_state(dim: int, seed=None) -> PureState:
    """Haar-distributed unit vector (normalized complex Gaussian)."""
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(vec, normalize=True)


def random_hermitian(dim: int, seed=None, scale: float = 1.0) -> HermitianObservable:
    """(G + G†)/2 for a complex Gaussian G (GUE up to scale)."""
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianObservable(scale * (G + G.conj().T) / 2.0)


def phase_unitary(A, x: float) -> np.ndarray:
    """exp(-i x A) via the spectral decomposition of A."""
    if isinstance(A, HermitianObservable):
        evals, evecs = A.eigensystem()
    else:
        evals, evecs = spectral_decompose(A)
    return (evecs * np.exp(-1j * x * evals)) @ evecs.conj().T


def phase_conjugate(rho, A, x: float):
    """Conjugate a state by exp(-i x A); preserves trace and spectrum.

    Off-diagonal elements in the eigenbasis of A pick up phases
    exp(-i x (a_i - a_j)), one phase per spectral gap.
    """
    U = phase_unitary(A, x)
    if isinstance(rho, PureState):
        return PureState(U @ rho.amplitudes, normalize=True)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(U @ rho.matrix @ U.conj().T, validate=False)
    return U @ _to_array(rho) @ U.conj().T
