"""Closed-form dynamics of two spin-1/2 qubits coupled by a cylindrical-symmetry
exchange interaction in a static axial magnetic field.

The Hamiltonian is diagonal on rows/columns 1 and 4 of the product basis
``|++>, |+->, |-+>, |-->`` and mixes the middle two components through the
symmetric/antisymmetric combinations, so the propagator over an interval dt
factors as M = Q D Q with a constant involution Q and a diagonal of four
phase factors exp(-i omega dt).  All quantities are SI: energies in joules,
times in seconds, frequencies in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("++", "+-", "-+", "--")

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

# Constant change of basis between the product basis and the eigenbasis of the
# exchange block; it is its own inverse.
Q_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, _INV_SQRT2, _INV_SQRT2, 0.0],
        [0.0, _INV_SQRT2, -_INV_SQRT2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)


def sign_with_positive_zero(x: float) -> float:
    """Sign function with the tie sgn(0) = +1."""
    return 1.0 if x >= 0.0 else -1.0


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants, SI units."""

    mu_e: float = 0.927e-23  # Bohr magneton, J/T
    hbar: float = 1.054571817e-34  # reduced Planck constant, J*s
    k_B: float = 1.380649e-23  # Boltzmann constant, J/K

    def __post_init__(self) -> None:
        if self.mu_e <= 0 or self.hbar <= 0 or self.k_B <= 0:
            raise ValueError("physical constants must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class ProcessParams:
    """Couplings of the two-spin process.

    g is the dimensionless g-factor, b_field the magnetic field in tesla and
    j_xy, j_z the two principal values of the exchange tensor in joules.
    """

    g: float
    b_field: float
    j_xy: float
    j_z: float
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @property
    def big_g(self) -> float:
        """Gyromagnetic energy per tesla, G = g * mu_e (J/T). Always derived."""
        return self.g * self.constants.mu_e

    @property
    def gb(self) -> float:
        """Zeeman energy G * B (J)."""
        return self.big_g * self.b_field

    @classmethod
    def from_kelvin(
        cls,
        g: float,
        b_field: float,
        j_z_kelvin: float,
        j_xy_kelvin: float,
        constants: PhysicalConstants = DEFAULT_CONSTANTS,
    ) -> "ProcessParams":
        """Build params with exchange values given as J/k_B in kelvin."""
        return cls(
            g=g,
            b_field=b_field,
            j_xy=j_xy_kelvin * constants.k_B,
            j_z=j_z_kelvin * constants.k_B,
            constants=constants,
        )


@dataclass(frozen=True)
class FrequencyQuad:
    """The four angular eigenfrequencies of the coupled pair (rad/s)."""

    omega_11: float
    omega_10: float
    omega_00: float
    omega_1m1: float


@dataclass(frozen=True)
class MixingParams:
    """Derived phase parameters of the outcome-probability models at one dt.

    delta_e is the accumulated exchange phase, v its sign-folded sine (the
    z-axis model parameter), delta_phi_10 / delta_phi_1m1 the level-pair phase
    gaps entering the x-axis model, and (w1, w2) = (cos, sin) of delta_phi_10.
    """

    delta_e: float
    v: float
    delta_phi_1m1: float
    delta_phi_10: float
    w1: float
    w2: float


def angular_frequencies(params: ProcessParams) -> FrequencyQuad:
    """Eigenfrequencies of the four stationary states for the given couplings."""
    hbar = params.constants.hbar
    gb = params.gb
    return FrequencyQuad(
        omega_11=(gb - params.j_z / 2.0) / hbar,
        omega_10=(-params.j_xy + params.j_z / 2.0) / hbar,
        omega_00=(params.j_xy + params.j_z / 2.0) / hbar,
        omega_1m1=(-gb - params.j_z / 2.0) / hbar,
    )


def _evolution_from_diagonal_phases(phases: np.ndarray) -> np.ndarray:
    d = np.diag(np.exp(-1j * phases))
    return Q_MATRIX @ d @ Q_MATRIX


def build_evolution_matrix(params: ProcessParams, dt: float) -> np.ndarray:
    """Propagator M = Q D Q over the interval dt (seconds), a 4x4 unitary."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    f = angular_frequencies(params)
    phases = np.array([f.omega_11, f.omega_10, f.omega_00, f.omega_1m1]) * dt
    return _evolution_from_diagonal_phases(phases)


def evolution_matrix_from_scaled(
    jxy_scaled: float, jz_scaled: float, gb_scaled: float
) -> np.ndarray:
    """Propagator from dimensionless couplings J_xy*dt/hbar, J_z*dt/hbar, G*B*dt/hbar.

    Used by the reconstruction step, where only scaled (phase) estimates of the
    couplings are available.
    """
    phases = np.array(
        [
            gb_scaled - jz_scaled / 2.0,
            -jxy_scaled + jz_scaled / 2.0,
            jxy_scaled + jz_scaled / 2.0,
            -gb_scaled - jz_scaled / 2.0,
        ]
    )
    return _evolution_from_diagonal_phases(phases)


def mixing_parameters(params: ProcessParams, dt: float) -> MixingParams:
    """Phase parameters of the measurement-outcome models at interval dt."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    hbar = params.constants.hbar
    gb = params.gb
    delta_e = -params.j_xy * dt / hbar
    v = sign_with_positive_zero(np.cos(delta_e)) * np.sin(delta_e)
    delta_phi_1m1 = -2.0 * gb * dt / hbar
    delta_phi_10 = dt / hbar * (-params.j_xy + params.j_z - gb)
    return MixingParams(
        delta_e=delta_e,
        v=v,
        delta_phi_1m1=delta_phi_1m1,
        delta_phi_10=delta_phi_10,
        w1=np.cos(delta_phi_10),
        w2=np.sin(delta_phi_10),
    )


def apply_process(m: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Apply the propagator to one state vector (4,) or a batch of columns (4, n)."""
    return m @ state
