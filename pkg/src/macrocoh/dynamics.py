"""Double-commutator decoherence models and a fixed-step RK4 integrator.

The generator L(rho) = -sum_k c_k [B_k, [B_k, rho]] preserves trace and
Hermiticity and can only push purity down: -tr(rho L(rho)) equals
sum_k c_k ||[B_k, rho]||_HS^2 >= 0.  With B running over all quadratures at
weight 1/4 that rate is exactly the closed-form phase-space size, which is
what makes the integrator a useful independent oracle for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockSpace
from .states import DensityMatrix, PureState, ValidationError, _to_array, hermiticity_defect


class IntegrationError(RuntimeError):
    """The integrated state drifted beyond repair tolerance."""


@dataclass
class DoubleCommutatorGenerator:
    """L(rho) = -sum_k c_k [B_k, [B_k, rho]] with Hermitian B_k, c_k >= 0."""

    terms: list

    def __post_init__(self):
        cleaned = []
        for B, c in self.terms:
            mat = _to_array(B)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValidationError("generator terms must be square matrices")
            defect = hermiticity_defect(mat)
            if defect > 1e-10:
                raise ValidationError(f"generator term not Hermitian: defect {defect:.3e}")
            c = float(c)
            if c < 0:
                raise ValidationError(f"negative coefficient {c} in generator")
            cleaned.append((mat, c))
        if not cleaned:
            raise ValidationError("generator needs at least one term")
        dim = cleaned[0][0].shape[0]
        for mat, _ in cleaned:
            if mat.shape[0] != dim:
                raise ValidationError("generator terms must share one dimension")
        self.terms = cleaned
        self._squares = [(B, B @ B, c) for B, c in cleaned]

    @property
    def dim(self) -> int:
        return self.terms[0][0].shape[0]

    def apply(self, mat: np.ndarray) -> np.ndarray:
        """-sum_k c_k (B^2 rho - 2 B rho B + rho B^2)."""
        out = np.zeros_like(mat)
        for B, B2, c in self._squares:
            out -= c * (B2 @ mat + mat @ B2 - 2.0 * (B @ mat @ B))
        return out


def theorem4a_generator(fock: FockSpace) -> DoubleCommutatorGenerator:
    """Isotropic model: every quadrature of every mode at weight 1/4."""
    terms = []
    for i in range(fock.n_modes):
        terms.append((fock.position(i), 0.25))
        terms.append((fock.momentum(i), 0.25))
    return DoubleCommutatorGenerator(terms)


def nh_generator(c_x: float, c_p: float, fock: FockSpace) -> DoubleCommutatorGenerator:
    """Single-mode weighted model -c_x [x,[x,rho]] - c_p [p,[p,rho]]."""
    if fock.n_modes != 1:
        raise ValidationError("the weighted model is single mode")
    if c_x < 0 or c_p < 0:
        raise ValidationError("coefficients must be nonnegative")
    return DoubleCommutatorGenerator([(fock.position(), c_x), (fock.momentum(), c_p)])


def purity_rate(rho, L: DoubleCommutatorGenerator) -> float:
    """-tr(rho L(rho)), the instantaneous rate of purity loss (halved).

    d/dt tr(rho^2) = 2 tr(rho L(rho)), so this value is -(1/2) d/dt tr(rho^2).
    """
    if isinstance(rho, PureState):
        mat = np.outer(rho.amplitudes, rho.amplitudes.conj())
    elif isinstance(rho, DensityMatrix):
        mat = rho.matrix
    else:
        mat = _to_array(rho)
    return -float(np.real(np.einsum("ij,ji->", mat, L.apply(mat))))


def _snapshot(mat: np.ndarray, step: int) -> DensityMatrix:
    """Package an integrator state, repairing eigenvalue noise above -1e-8."""
    try:
        return DensityMatrix(mat)
    except ValidationError:
        eigs, V = np.linalg.eigh((mat + mat.conj().T) / 2.0)
        if eigs.min() < -1e-8:
            raise IntegrationError(
                f"step {step}: state left the density cone "
                f"(min eigenvalue {eigs.min():.3e}); reduce the step size"
            )
        eigs = np.clip(eigs, 0.0, None)
        eigs /= eigs.sum()
        return DensityMatrix((V * eigs) @ V.conj().T)


def evolve(rho, L: DoubleCommutatorGenerator, t: float, steps: int) -> list:
    """Fixed-step RK4 trajectory [(time, DensityMatrix, purity), ...].

    Every step re-Hermitizes and renormalizes the trace (both are conserved
    quantities, so this only strips rounding drift); a trace drift above
    1e-6 before renormalization aborts with step diagnostics.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if steps < 1:
        raise ValidationError("steps must be positive")
    if isinstance(rho, PureState):
        mat = np.outer(rho.amplitudes, rho.amplitudes.conj())
    elif isinstance(rho, DensityMatrix):
        mat = rho.matrix.copy()
    else:
        mat = _to_array(rho).copy()
    if mat.shape != (L.dim, L.dim):
        raise ValidationError(f"state dim {mat.shape[0]} does not match generator {L.dim}")
    h = t / steps
    purity = float(np.real(np.einsum("ij,ji->", mat, mat)))
    trajectory = [(0.0, _snapshot(mat, 0), purity)]
    for k in range(1, steps + 1):
        k1 = L.apply(mat)
        k2 = L.apply(mat + 0.5 * h * k1)
        k3 = L.apply(mat + 0.5 * h * k2)
        k4 = L.apply(mat + h * k3)
        mat = mat + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mat = (mat + mat.conj().T) / 2.0
        tr = float(np.real(np.trace(mat)))
        if abs(tr - 1.0) > 1e-6:
            raise IntegrationError(
                f"step {k}: trace drifted to {tr:.9f}; reduce the step size"
            )
        mat = mat / tr
        purity = float(np.real(np.einsum("ij,ji->", mat, mat)))
        trajectory.append((k * h, _snapshot(mat, k), purity))
    return trajectory
