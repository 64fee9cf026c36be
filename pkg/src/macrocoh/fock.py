"""Truncated Fock-space toolkit: operators, standard states, displacements.

Conventions:

* a has entries sqrt(n) on the first superdiagonal; x = (a + a†)/sqrt(2),
  p = (a - a†)/(i sqrt(2)), so [x, p] = i away from the truncation edge and
  V(|alpha>, x) = 1/2 for coherent states.
* Multi-mode operators embed single-mode ones by Kronecker products, first
  mode slowest.

Truncation policy: every constructor checks that the state leaves at most
1e-6 weight on the top two Fock levels of each mode ("truncation health"),
and unitaries that push population upward (displacement, squeezing) are
evaluated by spectral exponentials in a padded workspace, then projected
back, so edge effects stay out of the retained block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .states import DensityMatrix, PureState, ValidationError, _to_array


class TruncationHealthError(ValidationError):
    """Too much population near the truncation edge for reliable results."""


class FockSpace:
    """n_modes bosonic modes, each truncated at dim_per_mode levels.

    Embedded operators are cached; instances are immutable and safe to
    share.
    """

    def __init__(self, n_modes: int = 1, dim_per_mode: int = 40):
        if n_modes < 1 or dim_per_mode < 2:
            raise ValidationError(
                f"need n_modes >= 1 and dim_per_mode >= 2, got {n_modes}, {dim_per_mode}"
            )
        if dim_per_mode**n_modes > TOL.tensor_dim_cap:
            raise ValidationError(
                f"total dimension {dim_per_mode}^{n_modes} exceeds cap {TOL.tensor_dim_cap}"
            )
        self.n_modes = int(n_modes)
        self.dim_per_mode = int(dim_per_mode)
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.dim_per_mode**self.n_modes

    def _single(self, name: str, d: int | None = None) -> np.ndarray:
        d = self.dim_per_mode if d is None else d
        key = (name, d)
        if key not in self._cache:
            a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)
            ops = {
                "a": a,
                "adag": a.conj().T,
                "x": (a + a.conj().T) / np.sqrt(2),
                "p": (a - a.conj().T) / (1j * np.sqrt(2)),
                "n": np.diag(np.arange(d, dtype=float)).astype(complex),
            }
            for k, v in ops.items():
                v.flags.writeable = False
                self._cache[(k, d)] = v
        return self._cache[key]

    def _embed(self, name: str, mode: int) -> np.ndarray:
        if not 0 <= mode < self.n_modes:
            raise ValidationError(f"mode {mode} out of range for {self.n_modes} modes")
        key = ("embed", name, mode)
        if key not in self._cache:
            d = self.dim_per_mode
            op = self._single(name)
            left = d**mode
            right = d ** (self.n_modes - mode - 1)
            full = np.kron(np.kron(np.eye(left), op), np.eye(right))
            full.flags.writeable = False
            self._cache[key] = full
        return self._cache[key]

    def annihilation(self, mode: int = 0) -> np.ndarray:
        return self._embed("a", mode)

    def creation(self, mode: int = 0) -> np.ndarray:
        return self._embed("adag", mode)

    def position(self, mode: int = 0) -> np.ndarray:
        return self._embed("x", mode)

    def momentum(self, mode: int = 0) -> np.ndarray:
        return self._embed("p", mode)

    def number(self, mode: int = 0) -> np.ndarray:
        return self._embed("n", mode)

    def quadrature(self, theta: float, mode: int = 0) -> np.ndarray:
        """x(theta) = cos(theta) x + sin(theta) p; x(pi/2) = p."""
        return np.cos(theta) * self.position(mode) + np.sin(theta) * self.momentum(mode)

    def vacuum(self) -> PureState:
        vec = np.zeros(self.dim, dtype=complex)
        vec[0] = 1.0
        return PureState(vec)


@dataclass
class StateRecipe:
    """Named single-mode state families with truncation-health guards.

    kind "number":   parameter n
    kind "coherent": parameter alpha
    kind "cat":      parameter alpha, the normalized |alpha> + |-alpha>
    kind "squeezed": parameters xi and alpha, exp((xi* a^2 - xi a†^2)/2)|alpha>
    """

    kind: str
    n: int | None = None
    alpha: complex | None = None
    xi: complex | None = None

    def __post_init__(self):
        kinds = ("number", "coherent", "cat", "squeezed")
        if self.kind not in kinds:
            raise ValidationError(f"unknown state kind {self.kind!r}; choose from {kinds}")
        if self.kind == "number" and (self.n is None or self.n < 0):
            raise ValidationError("number state needs n >= 0")
        if self.kind in ("coherent", "cat") and self.alpha is None:
            raise ValidationError(f"{self.kind} state needs alpha")
        if self.kind == "squeezed" and self.xi is None:
            raise ValidationError("squeezed state needs xi (alpha defaults to 0)")


def _check_amplitude_bound(label: str, mag: float, dim: int):
    # Displacement-like population bound: mean photon number |alpha|^2 plus
    # four standard deviations must fit below the truncation.
    if mag * mag + 4 * mag > dim:
        raise TruncationHealthError(
            f"{label} magnitude {mag:.3g} violates the truncation bound "
            f"|.|^2 + 4|.| <= dim_per_mode = {dim}; increase dim_per_mode"
        )


def truncation_health(state, fock: FockSpace) -> float:
    """Largest per-mode population on the top two Fock levels."""
    d = fock.dim_per_mode
    if isinstance(state, PureState):
        pops = np.abs(state.amplitudes) ** 2
    elif isinstance(state, DensityMatrix):
        pops = np.real(np.diag(state.matrix))
    else:
        mat = _to_array(state)
        pops = np.abs(mat) ** 2 if mat.ndim == 1 else np.real(np.diag(mat))
    grid = pops.reshape((d,) * fock.n_modes)
    worst = 0.0
    for mode in range(fock.n_modes):
        marginal = grid.sum(axis=tuple(i for i in range(fock.n_modes) if i != mode))
        worst = max(worst, float(marginal[-2:].sum()))
    return worst


def check_truncation(state, fock: FockSpace, atol: float = 1e-6):
    health = truncation_health(state, fock)
    if health > atol:
        raise TruncationHealthError(
            f"population {health:.3e} on the top two Fock levels exceeds {atol:.1e}; "
            f"increase dim_per_mode"
        )
    return health


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    # alpha^n / sqrt(n!) with the Gaussian prefactor folded in by final
    # normalization (safer than e^{-|a|^2/2} for borderline magnitudes).
    n = np.arange(dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    mag = np.exp(n * np.log(np.abs(alpha)) - 0.5 * log_fact) if alpha != 0 else (n == 0).astype(float)
    phase = np.exp(1j * n * np.angle(alpha)) if alpha != 0 else np.ones(dim)
    vec = mag * phase
    return vec / np.linalg.norm(vec)


def number_state(n: int, fock: FockSpace) -> PureState:
    if fock.n_modes != 1:
        raise ValidationError("standard states are single-mode; tensor them explicitly")
    if not 0 <= n < fock.dim_per_mode - 2:
        raise TruncationHealthError(
            f"number state n={n} too close to truncation {fock.dim_per_mode}"
        )
    vec = np.zeros(fock.dim_per_mode, dtype=complex)
    vec[n] = 1.0
    return PureState(vec)


def coherent_state(alpha: complex, fock: FockSpace) -> PureState:
    if fock.n_modes != 1:
        raise ValidationError("standard states are single-mode; tensor them explicitly")
    _check_amplitude_bound("alpha", abs(alpha), fock.dim_per_mode)
    psi = PureState(_coherent_amplitudes(complex(alpha), fock.dim_per_mode))
    check_truncation(psi, fock)
    return psi


def cat_state(alpha: complex, fock: FockSpace) -> PureState:
    if fock.n_modes != 1:
        raise ValidationError("standard states are single-mode; tensor them explicitly")
    _check_amplitude_bound("alpha", abs(alpha), fock.dim_per_mode)
    plus = _coherent_amplitudes(complex(alpha), fock.dim_per_mode)
    minus = _coherent_amplitudes(-complex(alpha), fock.dim_per_mode)
    psi = PureState(plus + minus, normalize=True)
    check_truncation(psi, fock)
    return psi


def squeezed_state(xi: complex, fock: FockSpace, alpha: complex = 0.0) -> PureState:
    """exp((xi* a^2 - xi a†^2)/2) |alpha>, via a padded spectral exponential."""
    if fock.n_modes != 1:
        raise ValidationError("standard states are single-mode; tensor them explicitly")
    mu = float(np.sinh(abs(xi)))
    _check_amplitude_bound("sinh|xi|", mu, fock.dim_per_mode)
    if alpha:
        _check_amplitude_bound("alpha", abs(alpha), fock.dim_per_mode)
    d = fock.dim_per_mode
    dw = 2 * d  # doubled workspace keeps the squeeze exponential clean
    a = np.diag(np.sqrt(np.arange(1, dw, dtype=float)), k=1).astype(complex)
    G = (np.conj(xi) * (a @ a) - xi * (a.conj().T @ a.conj().T)) / 2.0
    H = 1j * G  # Hermitian generator of the anti-Hermitian G
    evals, evecs = np.linalg.eigh(H)
    S = (evecs * np.exp(-1j * evals)) @ evecs.conj().T
    seed = np.zeros(dw, dtype=complex)
    seed[:d] = _coherent_amplitudes(complex(alpha), d)
    out = (S @ seed)[:d]
    psi = PureState(out, normalize=True)
    check_truncation(psi, fock)
    return psi


def standard_state(recipe: StateRecipe, fock: FockSpace) -> PureState:
    if recipe.kind == "number":
        return number_state(int(recipe.n), fock)
    if recipe.kind == "coherent":
        return coherent_state(recipe.alpha, fock)
    if recipe.kind == "cat":
        return cat_state(recipe.alpha, fock)
    return squeezed_state(recipe.xi, fock, recipe.alpha or 0.0)


def _padded_displacement(alpha: complex, d: int) -> np.ndarray:
    """Single-mode D(alpha) on d levels: spectral exponential of the
    generator in a workspace padded by 2 ceil(|alpha|^2) levels (floor 4),
    projected back."""
    pad = max(4, 2 * int(np.ceil(abs(alpha) ** 2)))
    dw = d + pad
    a = np.diag(np.sqrt(np.arange(1, dw, dtype=float)), k=1).astype(complex)
    G = alpha * a.conj().T - np.conj(alpha) * a
    H = 1j * G
    evals, evecs = np.linalg.eigh(H)
    D = (evecs * np.exp(-1j * evals)) @ evecs.conj().T
    return D[:d, :d]


def displacement_operator(alpha, fock: FockSpace) -> np.ndarray:
    """D(alpha) = prod_i exp(alpha_i a_i† - alpha_i* a_i) on the full space.

    alpha: scalar for one mode or a length-n_modes vector.  Unitary on the
    healthy subspace; exactly unitary only in the infinite-dimensional
    limit.
    """
    alphas = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if alphas.shape[0] != fock.n_modes:
        raise ValidationError(
            f"need one displacement per mode: got {alphas.shape[0]} for {fock.n_modes}"
        )
    for al in alphas:
        _check_amplitude_bound("alpha", abs(al), fock.dim_per_mode)
    out = np.array([[1.0]], dtype=complex)
    for al in alphas:
        out = np.kron(out, _padded_displacement(al, fock.dim_per_mode))
    return out


def _state_matrix(state) -> np.ndarray:
    """Dense density matrix for a PureState, DensityMatrix, or raw array."""
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityMatrix):
        return state.matrix
    return _to_array(state)


def characteristic_function(rho, alpha, fock: FockSpace) -> complex:
    """chi_rho(alpha) = tr[rho D(alpha)]."""
    mat = _state_matrix(rho)
    D = displacement_operator(alpha, fock)
    return complex(np.einsum("ij,ji->", mat, D))


def characteristic_grid(rho, xs: np.ndarray, ys: np.ndarray, fock: FockSpace) -> np.ndarray:
    """chi_rho on a grid of alpha = xs[i] + i ys[j], single mode.

    Uses the exact factorization D(u + iv) = e^{-iuv} e^{i sqrt(2) v x}
    e^{-i sqrt(2) u p} (the commutator of the two exponents is the scalar
    2iuv), evaluated in a workspace padded for the largest |alpha| on the
    grid with two eigendecompositions shared across all grid points.
    Returns chi[i, j] with i indexing xs and j indexing ys.
    """
    if fock.n_modes != 1:
        raise ValidationError("characteristic_grid supports a single mode")
    mat = _state_matrix(rho)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    d = fock.dim_per_mode
    max_sq = float(np.max(np.abs(xs)) ** 2 + np.max(np.abs(ys)) ** 2)
    pad = max(4, 2 * int(np.ceil(max_sq)))
    dw = d + pad
    a = np.diag(np.sqrt(np.arange(1, dw, dtype=float)), k=1).astype(complex)
    xop = (a + a.conj().T) / np.sqrt(2)
    pop = (a - a.conj().T) / (1j * np.sqrt(2))
    ex, wx = np.linalg.eigh(xop)
    ep, wp = np.linalg.eigh(pop)

    rho_w = np.zeros((dw, dw), dtype=complex)
    rho_w[:d, :d] = mat
    # chi(u, v) = e^{-iuv} tr(rho Wx e^{i sqrt2 v Ex} Wx† Wp e^{-i sqrt2 u Ep} Wp†)
    #           = e^{-iuv} sum_k Pu[u, k] (Pv @ C)[v, k]
    # with C[j, k] = (Wp† rho Wx)[k, j] (Wx† Wp)[j, k] contracted as below.
    M1 = wp.conj().T @ rho_w @ wx
    M2 = wx.conj().T @ wp
    C = M1.T * M2  # C[j, k] = M1[k, j] M2[j, k]
    Pv = np.exp(1j * np.sqrt(2) * np.outer(ys, ex))
    Pu = np.exp(-1j * np.sqrt(2) * np.outer(xs, ep))
    diag_g = Pv @ C  # [n_v, dw]
    chi = (Pu @ diag_g.T) * np.exp(-1j * np.outer(xs, ys))
    return chi
