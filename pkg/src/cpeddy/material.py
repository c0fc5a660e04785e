"""Bulk response of a metal half-space and the derived physical scales.

Unit system used throughout the package:

* energies and (angular) frequencies are stored as ``hbar*omega`` in eV,
* lengths in micrometres,
* temperatures in kelvin,
* the Fermi velocity is stored as a fraction of the speed of light.

With these conventions ``omega/c`` becomes ``E / HBARC`` (1/um) and the
diffusion constant ``D = Gamma * lambda_p_bar**2`` carries eV*um^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as _k

# Fundamental constants (single definition for the whole package).
HBARC = 0.19732697           # eV * um
KB = 8.6173333e-5            # eV / K
ALPHA_FS = 1.0 / 137.036     # fine-structure constant
EULER_GAMMA = 0.5772156649015329
GAMMA_E_PRIME = math.exp(-EULER_GAMMA)   # e^{-gamma_E}
# mu_0 * mu_B^2 expressed in eV*um^3; converts polarizability x Green tensor
# products (dipole moments in Bohr magnetons, tensors in units of mu_0) into
# dimensionless interaction strengths.
MU0_MUB2 = 6.74646e-16

RESPONSES = ("local_drude", "local_plasma", "scib")


@dataclass(frozen=True)
class DissipationModel:
    """Temperature law of the collision rate, hbar*Gamma(T) in eV.

    ``constant`` keeps gamma_ref at every temperature; ``power_law`` applies
    gamma_ref * (T / T_ref)**exponent, the perfect-crystal behaviour for
    exponent >= 2.
    """

    kind: str = "constant"
    gamma_ref: float = 0.0
    exponent: float = 0.0
    T_ref: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "power_law"):
            raise ValueError(f"unknown dissipation kind {self.kind!r}")
        if self.gamma_ref < 0.0:
            raise ValueError("gamma_ref must be >= 0")
        if self.kind == "power_law":
            if self.exponent < 0.0:
                raise ValueError("power_law exponent must be >= 0")
            if self.T_ref <= 0.0:
                raise ValueError("power_law T_ref must be > 0")


def gamma_at(model: DissipationModel, T: float) -> float:
    """hbar*Gamma(T) in eV for the given dissipation model."""
    if model.kind == "constant":
        return model.gamma_ref
    if T < 0.0:
        raise ValueError("temperature must be >= 0")
    if T == 0.0:
        return 0.0
    return model.gamma_ref * (T / model.T_ref) ** model.exponent


@dataclass(frozen=True)
class MaterialParams:
    """Metal parameters: plasma energy, collision-rate model, Fermi velocity.

    ``response`` selects how the surface scatters: a spatially local Drude or
    plasma description, or the nonlocal semiclassical (Boltzmann-Mermin)
    model with specular electron reflection.
    """

    omega_p: float                      # hbar*omega_p, eV
    gamma_model: DissipationModel
    v_F: float = ALPHA_FS               # fraction of c
    response: str = "local_drude"

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValueError("omega_p must be > 0")
        if not (0.0 < self.v_F < 1.0):
            raise ValueError("v_F must lie in (0, 1) as a fraction of c")
        if self.response not in RESPONSES:
            raise ValueError(f"unknown response {self.response!r}")
        if self.response == "local_plasma" and self.gamma_model.gamma_ref != 0.0:
            raise ValueError("plasma response requires Gamma == 0")

    # -- convenience -------------------------------------------------------

    @property
    def vf_energy_length(self) -> float:
        """hbar * v_F * c in eV*um (the combination entering u = omega/(v_F k))."""
        return self.v_F * HBARC

    @property
    def lambda_p_bar(self) -> float:
        """Reduced plasma wavelength hbar*c / omega_p in um."""
        return HBARC / self.omega_p

    def gamma(self, T: float | None = None) -> float:
        """Resolve hbar*Gamma(T); T may be omitted for a constant model."""
        if self.gamma_model.kind == "constant":
            return self.gamma_model.gamma_ref
        if T is None:
            raise ValueError("temperature required for a power_law dissipation model")
        return gamma_at(self.gamma_model, T)


def gold(response: str = "local_drude",
         gamma_model: Optional[DissipationModel] = None) -> MaterialParams:
    """Gold preset: omega_p = 9 eV, Gamma = 30 meV, v_F = alpha_fs * c."""
    if gamma_model is None:
        gamma_model = DissipationModel("constant", 0.03)
    if response == "local_plasma":
        gamma_model = DissipationModel("constant", 0.0)
    return MaterialParams(omega_p=9.0, gamma_model=gamma_model, response=response)


# ---------------------------------------------------------------------------
# Bulk permittivities
# ---------------------------------------------------------------------------

def eps_local(params: MaterialParams, omega: complex, T: float | None = None) -> complex:
    """Local permittivity at complex energy ``omega`` (eV).

    Drude: 1 - omega_p^2 / (omega*(omega + i Gamma)); the plasma response is
    the Gamma = 0 limit.
    """
    if omega == 0:
        raise ZeroDivisionError("eps_local has a pole at omega = 0")
    if params.response == "local_plasma":
        return 1.0 - params.omega_p ** 2 / omega ** 2
    hg = params.gamma(T)
    return 1.0 - params.omega_p ** 2 / (omega * (omega + 1j * hg))


def lindhard_g(u):
    """Dimensionless longitudinal/transverse kernels (g_l, g_t) of u.

    g_l = 1 - u*arccoth(u), g_t = (3/2) [u^2 - (u^2-1) u arccoth(u)];
    evaluation switches to the Laurent series for |u| > 100 to avoid
    cancellation.  ``u`` must stay off the real interval [-1, 1].
    """
    arr = np.asarray(u, dtype=np.complex128)
    on_cut = (arr.imag == 0.0) & (np.abs(arr.real) <= 1.0)
    if np.any(on_cut):
        raise ValueError("lindhard_g is undefined on the real interval [-1, 1]")
    gl, gt = _k.g_lt(np.atleast_1d(arr))
    if np.isscalar(u) or arr.ndim == 0:
        return complex(gl[0]), complex(gt[0])
    return gl.reshape(arr.shape), gt.reshape(arr.shape)


def eps_bm(params: MaterialParams, omega: complex, k: float,
           T: float | None = None) -> tuple[complex, complex]:
    """Boltzmann-Mermin longitudinal and transverse permittivities.

    ``k`` is the wave number in 1/um; u = (omega + i Gamma)/(v_F k).
    """
    if omega == 0:
        raise ZeroDivisionError("eps_bm has a pole at omega = 0")
    if k <= 0.0:
        raise ValueError("k must be > 0")
    hg = params.gamma(T)
    vf = params.vf_energy_length
    G = omega + 1j * hg
    u = G / (vf * k)
    gl, gt = lindhard_g(u)
    wp2 = params.omega_p ** 2
    eps_l = 1.0 + (wp2 / G) * 3.0 * u * u * gl / (omega + 1j * hg * gl)
    eps_t = 1.0 - wp2 * gt / (omega * G)
    return eps_l, eps_t


def eps_landau_limit(params: MaterialParams, omega: float, k: float) -> tuple[complex, complex]:
    """Small-|u| (ballistic) limit of the nonlocal permittivities.

    Collisions drop out; the damping is the collisionless (Landau) one.
    Valid for v_F >> omega/k and/or k*l >> 1; the caller owns the regime.
    """
    lam_tf = params.vf_energy_length / (params.omega_p * math.sqrt(3.0))
    gl_rate, gt_rate = landau_rates(params, k)
    wp2 = params.omega_p ** 2
    eps_l = 1.0 + 3.0 / (k * lam_tf) ** 2 + 1j * omega * gl_rate / wp2
    eps_t = 1.0 - 3.0 / (k * lam_tf) ** 2 + 1j * wp2 / (omega * gt_rate)
    return eps_l, eps_t


def landau_rates(params: MaterialParams, k: float) -> tuple[float, float]:
    """Collisionless damping rates (hbar*Gamma_l, hbar*Gamma_t) in eV."""
    if k <= 0.0:
        raise ValueError("k must be > 0")
    vf = params.vf_energy_length
    gl = 3.0 * math.pi * params.omega_p ** 4 / (2.0 * (vf * k) ** 3)
    gt = 4.0 * vf * k / (3.0 * math.pi)
    return gl, gt


# ---------------------------------------------------------------------------
# Derived scales
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LengthScales:
    """Characteristic lengths (um), energies (eV) and temperatures (K).

    Fields that require a finite collision rate are None for Gamma = 0.
    """

    lambda_p_bar: float
    D: Optional[float]            # eV*um^2
    delta_a: Optional[float]
    ell: Optional[float]
    lambda_TF: float
    lambda_e_bar: Optional[float]
    nu_lc: Optional[float]        # eV
    nu_nl: float                  # eV
    T_a: float                    # K
    T_c: float                    # K


def scales(params: MaterialParams, atom, z_a: float, T: float) -> LengthScales:
    """All derived scales for one (material, atom, separation, T) setting."""
    if z_a <= 0.0:
        raise ValueError("z_a must be > 0")
    lam_p = params.lambda_p_bar
    vf = params.vf_energy_length
    hg = params.gamma(T)
    lam_tf = vf / (params.omega_p * math.sqrt(3.0))
    nu_nl = (4.0 / (3.0 * math.pi)) * vf * lam_p ** 2 / z_a ** 3
    T_a = atom.omega_a / (2.0 * KB)
    T_c = vf / (KB * z_a)
    if hg > 0.0:
        D = hg * lam_p ** 2
        delta_a = lam_p * math.sqrt(2.0 * hg / atom.omega_a)
        ell = vf / hg
        lam_e = ell * (4.0 * lam_p ** 2 / (3.0 * math.pi * ell ** 2)) ** (1.0 / 3.0)
        nu_lc = hg * (lam_p / z_a) ** 2
    else:
        D = delta_a = ell = lam_e = nu_lc = None
    return LengthScales(lambda_p_bar=lam_p, D=D, delta_a=delta_a, ell=ell,
                        lambda_TF=lam_tf, lambda_e_bar=lam_e, nu_lc=nu_lc,
                        nu_nl=nu_nl, T_a=T_a, T_c=T_c)
