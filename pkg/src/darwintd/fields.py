"""Field recovery from potentials and weighted comparison norms."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


class UndefinedMetricError(ConfigurationError):
    """Relative difference against a zero reference field is undefined."""


@dataclass
class FieldSnapshot:
    """Edge-sampled E (split into parts) and face-sampled B at one time.

    E vectors hold the field component along each edge in V/m (edge voltage
    divided by edge length); b holds raw face fluxes in Wb so that
    b == C @ a exactly.
    """

    t: float
    e_total: np.ndarray
    e_irr: np.ndarray
    e_rem: np.ndarray
    b: np.ndarray


def recover_fields(grid, gradient, curl, a_np1, a_n, phi_np1, dt, t=0.0):
    """Fields at t^{n+1} via the backward difference of the vector potential."""
    lengths = grid.edge_lengths()
    e_irr = -(gradient @ phi_np1) / lengths
    e_rem = -((a_np1 - a_n) / dt) / lengths
    return FieldSnapshot(
        t=t, e_total=e_irr + e_rem, e_irr=e_irr, e_rem=e_rem, b=curl @ a_np1
    )


def recover_fields_central(grid, gradient, curl, a_next, a_prev, phi_n, a_n, dt, t=0.0):
    """Fields at t^n via the central difference (a_{n+1} - a_{n-1}) / (2 dt).

    Second-order accurate at the grid point, matching the accuracy of the
    trapezoidal state vectors; B and E_irr use the state at t^n directly.
    """
    lengths = grid.edge_lengths()
    e_irr = -(gradient @ phi_n) / lengths
    e_rem = -((a_next - a_prev) / (2.0 * dt)) / lengths
    return FieldSnapshot(
        t=t, e_total=e_irr + e_rem, e_irr=e_irr, e_rem=e_rem, b=curl @ a_n
    )


def b_to_flux_density(grid, b):
    """Convert face fluxes (Wb) to face-normal flux densities (T)."""
    return b / grid.face_areas()


def relative_difference(f_ref, f_test, weights):
    """|| Re(f_ref) - f_test ||_w / || f_ref ||_w with per-entity weights.

    The reference norm uses the complex magnitude, so both real and
    imaginary parts of a phasor reference contribute to the denominator.
    """
    f_ref = np.asarray(f_ref)
    f_test = np.asarray(f_test)
    weights = np.asarray(weights)
    if f_ref.shape != f_test.shape or f_ref.shape != weights.shape:
        raise ValueError(
            f"shape mismatch: ref {f_ref.shape}, test {f_test.shape}, weights {weights.shape}"
        )
    ref_norm = np.sqrt(np.sum(weights * np.abs(f_ref) ** 2))
    if ref_norm == 0.0:
        raise UndefinedMetricError("reference field has zero norm; relative difference undefined")
    diff = np.real(f_ref) - f_test
    return float(np.sqrt(np.sum(weights * diff**2)) / ref_norm)


def edge_field_difference(grid, e_ref, e_test):
    """Relative L2 difference of edge-sampled fields (V/m) in the FIT norm."""
    return relative_difference(e_ref, e_test, grid.edge_volumes())


def face_field_difference(grid, b_ref, b_test):
    """Relative L2 difference of face fluxes (Wb), weighted as flux densities."""
    areas = grid.face_areas()
    return relative_difference(b_ref / areas, b_test / areas, grid.face_volumes())
