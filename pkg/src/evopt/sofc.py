"""Solid-oxide fuel cell electrochemistry and the 20-variable design benchmark.

The cell voltage is the Nernst potential minus three loss terms,

    V_cell = E - (V_act_a + V_act_c) - V_ohm - (V_conc_a + V_conc_c),

built from standard button-cell polarization relations (Nernst equation,
Butler-Volmer kinetics in asinh form, ohmic series resistance, and
concentration losses with fixed anode limiting currents plus a Knudsen/binary
diffusion submodel at the cathode; see Ni et al. 2007 for the family of
models this follows).  Power density and efficiency are

    P = j * A * V_cell          eta = -n_e * F * V_cell / dH,

and the design objective maximizes ``0.5 * P + 0.5 * eta * 100`` over the 20
uncertain parameters bounded in :func:`sofc_space`.

Fixed physical constants (temperature, pressures, activation energies, the
diffusion submodel parameters) live in ``data/sofc_constants.yaml`` and are
echoed into every run summary.  Inside the benchmark box the model is smooth
and domain errors cannot occur; outside it, non-physical inputs raise
:class:`SofcDomainError`, which the benchmark fitness maps to a large negative
sentinel so population methods keep iterating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources

import yaml

from .problems import DomainError
from .space import SearchSpace, parse_space

__all__ = [
    "SofcDomainError",
    "SofcConstants",
    "SofcParams",
    "VoltageBreakdown",
    "CONSTANTS",
    "SENTINEL_FITNESS",
    "SOFC_BOUNDS",
    "sofc_space",
    "nernst_voltage",
    "exchange_current_densities",
    "activation_overpotential",
    "ohmic_overpotential",
    "concentration_overpotential",
    "voltage_breakdown",
    "power_and_efficiency",
    "sofc_fitness",
]

# Fitness assigned to non-physical inputs (maximization problem, so very poor).
SENTINEL_FITNESS = -1.0e9


class SofcDomainError(DomainError):
    """A voltage-chain subterm was evaluated outside its physical domain."""


@dataclass(frozen=True)
class SofcConstants:
    """Fixed operating conditions and physical constants of the cell model."""

    T: float
    p: float
    p_H2: float
    p_N2: float
    n_e: int
    F: float
    R: float
    dH: float
    E_act_a: float
    E_act_c: float
    j_l_H2O: float
    j_l_H2: float
    sigma_e_prefactor: float
    sigma_e_theta: float
    M_O2: float
    M_N2: float
    omega_d: float
    chapman_enskog_c: float
    atm_to_pa: float
    version: int = 1

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _load_constants() -> SofcConstants:
    with resources.files("evopt.data").joinpath("sofc_constants.yaml").open() as fh:
        raw = yaml.safe_load(fh)
    return SofcConstants(**raw)


CONSTANTS = _load_constants()

# (name, low, high) for the 20 decision variables, in definition order.
SOFC_BOUNDS = (
    ("j", 12672.0, 13728.0),          # A/m^2   current density
    ("A", 1.55e-3, 1.65e-3),          # m^2     effective surface area
    ("p_O2", 0.168, 0.252),           # atm     oxygen partial pressure
    ("p_H2O", 0.04, 0.06),            # atm     water partial pressure
    ("eps", 0.3936, 0.5664),          # -       electrode porosity
    ("xi", 4.32, 6.48),               # -       electrode tortuosity
    ("D_p", 2.8e-6, 3.2e-6),          # m       average pore diameter
    ("D_s", 1.4e-6, 1.6e-6),          # m       average grain size
    ("X", 0.6, 0.8),                  # -       grain contact neck ratio
    ("L_a", 4.7e-4, 5.3e-4),          # m       anode thickness
    ("L_c", 4.7e-5, 5.3e-5),          # m       cathode thickness
    ("L_e", 4.7e-5, 5.3e-5),          # m       electrolyte thickness
    ("sigma_a", 48000.0, 112000.0),   # 1/(ohm m) anode conductivity
    ("sigma_c", 5040.0, 11760.0),     # 1/(ohm m) cathode conductivity
    ("sigma_H2", 2.159, 3.495),       # angstrom  H2 collision diameter
    ("sigma_H2O", 2.009, 3.273),      # angstrom  H2O collision diameter
    ("sigma_O2", 2.635, 4.299),       # angstrom  O2 collision diameter
    ("sigma_N2", 2.886, 4.710),       # angstrom  N2 collision diameter
    ("gamma_a", 1.39e-9, 1.69e-9),    # A m     anode exchange-current coefficient
    ("gamma_c", 5.27e-10, 6.44e-10),  # A m     cathode exchange-current coefficient
)


@dataclass(frozen=True)
class SofcParams:
    """The 20 decision variables of the fuel-cell benchmark.

    ``sigma_H2`` and ``sigma_H2O`` are part of the design vector for
    completeness but are not consumed by this model: the anode concentration
    loss uses the fixed limiting currents ``j_l_H2O``/``j_l_H2`` instead of a
    hydrogen-side diffusion submodel.
    """

    j: float
    A: float
    p_O2: float
    p_H2O: float
    eps: float
    xi: float
    D_p: float
    D_s: float
    X: float
    L_a: float
    L_c: float
    L_e: float
    sigma_a: float
    sigma_c: float
    sigma_H2: float
    sigma_H2O: float
    sigma_O2: float
    sigma_N2: float
    gamma_a: float
    gamma_c: float

    @classmethod
    def from_vector(cls, x) -> "SofcParams":
        if len(x) != 20:
            raise ValueError(f"expected 20 parameters, got {len(x)}")
        return cls(**{name: float(v) for (name, _, _), v in zip(SOFC_BOUNDS, x)})


@dataclass(frozen=True)
class VoltageBreakdown:
    """Per-term voltages of one operating point, all in volts."""

    E: float
    V_act_a: float
    V_act_c: float
    V_ohm: float
    V_conc_a: float
    V_conc_c: float
    V_cell: float


def sofc_space() -> SearchSpace:
    """Default benchmark search space: the 20 bounded design variables."""
    return parse_space({name: ["float", lo, hi] for name, lo, hi in SOFC_BOUNDS})


def gibbs_free_energy_change(T: float) -> float:
    """Linear Gibbs free energy change of the cell reaction, J/mol."""
    return -282150.0 + 86.735 * T


def nernst_voltage(c: SofcConstants, p: SofcParams) -> float:
    """Open-circuit (maximum) voltage from the Nernst equation."""
    if c.p_H2 <= 0 or p.p_O2 <= 0 or p.p_H2O <= 0:
        raise SofcDomainError("partial pressures must be positive")
    dg = gibbs_free_energy_change(c.T)
    nF = c.n_e * c.F
    return -dg / nF + (c.R * c.T / nF) * math.log(c.p_H2 * p.p_O2 ** 0.5 / p.p_H2O)


def _microstructure_factor(p: SofcParams) -> float:
    """Shared electrode-geometry prefactor of both exchange current densities."""
    if not 0.0 < p.X < 1.0:
        raise SofcDomainError(f"grain contact ratio X={p.X} outside (0, 1)")
    if p.D_p <= 0 or p.D_s <= 0:
        raise SofcDomainError("pore and grain sizes must be positive")
    num = 72.0 * p.X * (p.D_p - (p.D_p + p.D_s) * p.eps) * p.eps
    den = p.D_s ** 2 * p.D_p ** 2 * (1.0 - math.sqrt(1.0 - p.X ** 2))
    factor = num / den
    if factor <= 0:
        raise SofcDomainError(f"non-physical electrode geometry: microstructure "
                              f"prefactor {factor:.3e} <= 0")
    return factor


def exchange_current_densities(c: SofcConstants, p: SofcParams) -> tuple[float, float]:
    """Anode and cathode exchange current densities (j0_a, j0_c), A/m^2."""
    s = _microstructure_factor(p)
    j0_a = p.gamma_a * s * (c.p_H2 / c.p) * (p.p_H2O / c.p) * math.exp(-c.E_act_a / (c.R * c.T))
    j0_c = p.gamma_c * s * (p.p_O2 / c.p) ** 0.25 * math.exp(-c.E_act_c / (c.R * c.T))
    return j0_a, j0_c


def activation_overpotential(j: float, j0: float, c: SofcConstants) -> float:
    """One electrode's activation loss, (RT/F) * asinh(j / (2 j0)).

    Computed via the logarithmic form ``ln(u + sqrt(u^2 + 1))``.
    """
    if j0 <= 0:
        raise SofcDomainError(f"exchange current density must be positive, got {j0}")
    u = j / (2.0 * j0)
    return (c.R * c.T / c.F) * math.log(u + math.sqrt(u * u + 1.0))


def ohmic_overpotential(j: float, p: SofcParams, c: SofcConstants) -> float:
    """Series resistance loss across anode, cathode, and electrolyte layers."""
    sigma_e = c.sigma_e_prefactor * math.exp(-c.sigma_e_theta / c.T)
    if p.sigma_a <= 0 or p.sigma_c <= 0 or sigma_e <= 0:
        raise SofcDomainError("layer conductivities must be positive")
    return j * (p.L_a / p.sigma_a + p.L_c / p.sigma_c + p.L_e / sigma_e)


def oxygen_diffusivities(c: SofcConstants, p: SofcParams) -> tuple[float, float]:
    """Effective Knudsen and binary O2 diffusivities (m^2/s) in the cathode."""
    if p.eps <= 0 or p.xi <= 0:
        raise SofcDomainError("porosity and tortuosity must be positive")
    porous = p.eps / p.xi
    v_mean = math.sqrt(8.0 * c.R * c.T / (math.pi * c.M_O2 * 1e-3))
    d_kn = porous * (2.0 / 3.0) * (p.D_p / 2.0) * v_mean
    sigma_ab = 0.5 * (p.sigma_O2 + p.sigma_N2)
    d_bin_cm2 = c.chapman_enskog_c * math.sqrt(
        c.T ** 3 * (1.0 / c.M_O2 + 1.0 / c.M_N2)) / (c.p * sigma_ab ** 2 * c.omega_d)
    d_bin = porous * d_bin_cm2 * 1e-4
    return d_kn, d_bin


def concentration_overpotential(j: float, p: SofcParams,
                                c: SofcConstants) -> tuple[float, float]:
    """Anode and cathode concentration losses (V_conc_a, V_conc_c)."""
    if j >= c.j_l_H2:
        raise SofcDomainError(f"current density {j} at or above the anode limiting "
                              f"current {c.j_l_H2}")
    nF = c.n_e * c.F
    v_a = (c.R * c.T / nF) * (math.log(1.0 + j / c.j_l_H2O) - math.log(1.0 - j / c.j_l_H2))

    d_kn, d_bin = oxygen_diffusivities(c, p)
    d_ratio = d_kn / (d_kn + d_bin)
    d_eff = 1.0 / (1.0 / d_kn + 1.0 / d_bin)
    p_c = p.p_O2 + c.p_N2
    exponent = (c.R * c.T * p.L_c * j * d_ratio) / (4.0 * c.F * d_eff * p_c * c.atm_to_pa)
    denom = p_c / d_ratio - (p_c / d_ratio - p.p_O2) * math.exp(exponent)
    if denom <= 0:
        raise SofcDomainError(f"cathode gas depleted: log denominator {denom:.3e} <= 0 "
                              f"at j={j}")
    arg = p.p_O2 / denom
    if arg <= 0:
        raise SofcDomainError(f"cathode concentration log argument {arg:.3e} <= 0")
    v_c = (c.R * c.T / (4.0 * c.F)) * math.log(arg)
    return v_a, v_c


def voltage_breakdown(p: SofcParams, c: SofcConstants = CONSTANTS) -> VoltageBreakdown:
    """Evaluate the full voltage chain at one operating point."""
    if p.j < 0:
        raise SofcDomainError(f"current density must be non-negative, got {p.j}")
    e = nernst_voltage(c, p)
    j0_a, j0_c = exchange_current_densities(c, p)
    v_act_a = activation_overpotential(p.j, j0_a, c)
    v_act_c = activation_overpotential(p.j, j0_c, c)
    v_ohm = ohmic_overpotential(p.j, p, c)
    v_conc_a, v_conc_c = concentration_overpotential(p.j, p, c)
    v_cell = e - (v_act_a + v_act_c) - v_ohm - (v_conc_a + v_conc_c)
    return VoltageBreakdown(E=e, V_act_a=v_act_a, V_act_c=v_act_c, V_ohm=v_ohm,
                            V_conc_a=v_conc_a, V_conc_c=v_conc_c, V_cell=v_cell)


def power_and_efficiency(p: SofcParams,
                         c: SofcConstants = CONSTANTS) -> tuple[float, float]:
    """Power output P = j A V_cell (W) and efficiency eta = -n_e F V_cell / dH."""
    v = voltage_breakdown(p, c)
    power = p.j * p.A * v.V_cell
    eta = -c.n_e * c.F * v.V_cell / c.dH
    return power, eta


def sofc_fitness(x) -> float:
    """Benchmark objective 0.5 * P + 0.5 * eta * 100 (maximized).

    Non-physical inputs yield ``SENTINEL_FITNESS`` (-1e9) instead of raising,
    so optimizers treat them as very poor candidates.
    """
    try:
        params = SofcParams.from_vector(x)
        power, eta = power_and_efficiency(params, CONSTANTS)
    except SofcDomainError:
        return SENTINEL_FITNESS
    return 0.5 * power + 0.5 * eta * 100.0
