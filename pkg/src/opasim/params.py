"""Cavity geometry, decay rates, and the normalized coupled-mode parameters.

Rate conventions: every decay rate is a field (amplitude) rate.  A port
with power transmission T on a cavity with round-trip time tau contributes
gamma = T / (2 tau); round-trip internal power loss maps to a rate the
same way.  Normalized parameter sets measure all rates in units of the
total subharmonic decay and drive amplitudes in photon-flux units, so
|amplitude|^2 is a photon rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

C_LIGHT = 299_792_458.0
H_PLANCK = 6.626_070_15e-34


@dataclass(frozen=True)
class CavityParams:
    """Physical cavity description: geometry, mirror reflectivities, losses.

    Lengths in metres; reflectivities and losses are power fractions in
    [0, 1] (losses per round trip).  The probe enters through the input
    mirror; the back mirror is the subharmonic transmission port and is
    nominally high-reflectivity for the pump.
    """

    mirror_separation: float = 61e-3
    crystal_length: float = 12e-3
    crystal_index_sub: float = 1.83
    crystal_index_pump: float = 1.89
    r_in_sub: float = 0.99
    r_out_sub: float = 0.93
    r_in_pump: float = 0.97
    r_out_pump: float = 0.999
    loss_sub: float = 0.005
    loss_pump: float = 0.01
    wavelength_sub: float = 1.064e-6

    def __post_init__(self):
        for name in ("r_in_sub", "r_out_sub", "r_in_pump", "r_out_pump",
                     "loss_sub", "loss_pump"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value!r} outside [0, 1]")
        if not 0.0 < self.crystal_length < self.mirror_separation:
            raise ValueError("crystal_length must lie in (0, mirror_separation)")
        if self.crystal_index_sub < 1.0 or self.crystal_index_pump < 1.0:
            raise ValueError("refractive indices must be >= 1")
        if self.wavelength_sub <= 0.0:
            raise ValueError("wavelength_sub must be positive")


@dataclass(frozen=True)
class DecayRates:
    """Amplitude decay rates (1/s) derived from a CavityParams.

    Subharmonic: input mirror (gamma_in), back mirror (gamma_c), internal
    loss (gamma_l).  Pump: input coupler (gamma_b_in), back-mirror leakage
    (gamma_b_out), internal loss (gamma_b_loss).
    """

    gamma_in: float
    gamma_c: float
    gamma_l: float
    gamma_b_in: float
    gamma_b_out: float
    gamma_b_loss: float
    tau_sub: float
    tau_pump: float

    @property
    def gamma(self) -> float:
        return self.gamma_in + self.gamma_c + self.gamma_l

    @property
    def gamma_b(self) -> float:
        return self.gamma_b_in + self.gamma_b_out + self.gamma_b_loss

    @property
    def gamma_b_l(self) -> float:
        """Lumped non-input pump rate: back-mirror leakage plus loss."""
        return self.gamma_b_out + self.gamma_b_loss

    @property
    def under_coupled(self) -> bool:
        """True when the probe port is weaker than all other subharmonic loss."""
        return self.gamma_in < self.gamma_c + self.gamma_l


def derive_rates(cavity: CavityParams) -> DecayRates:
    """Map mirror/loss data to amplitude decay rates.

    The round-trip time at each wavelength is 2 * (air path + n * crystal
    length) / c with air path = mirror separation - crystal length; each
    power fraction T then gives gamma = T / (2 tau).
    """
    air_path = cavity.mirror_separation - cavity.crystal_length
    tau_sub = 2.0 * (air_path + cavity.crystal_index_sub * cavity.crystal_length) / C_LIGHT
    tau_pump = 2.0 * (air_path + cavity.crystal_index_pump * cavity.crystal_length) / C_LIGHT
    if tau_sub <= 0.0 or tau_pump <= 0.0:
        raise ValueError("round-trip time must be positive")

    t_in_sub = 1.0 - cavity.r_in_sub
    t_out_sub = 1.0 - cavity.r_out_sub
    t_in_pump = 1.0 - cavity.r_in_pump
    t_out_pump = 1.0 - cavity.r_out_pump
    fractions = (t_in_sub, t_out_sub, cavity.loss_sub,
                 t_in_pump, t_out_pump, cavity.loss_pump)
    if all(t == 0.0 for t in fractions):
        raise ValueError("lossless cavity: every transmission and loss is zero, "
                         "no decay rates can be derived")

    return DecayRates(
        gamma_in=t_in_sub / (2.0 * tau_sub),
        gamma_c=t_out_sub / (2.0 * tau_sub),
        gamma_l=cavity.loss_sub / (2.0 * tau_sub),
        gamma_b_in=t_in_pump / (2.0 * tau_pump),
        gamma_b_out=t_out_pump / (2.0 * tau_pump),
        gamma_b_loss=cavity.loss_pump / (2.0 * tau_pump),
        tau_sub=tau_sub,
        tau_pump=tau_pump,
    )


@dataclass(frozen=True)
class ModelParams:
    """Normalized parameters of the coupled-mode model.

    gamma_in / gamma_c / gamma_l: subharmonic amplitude decay through the
    probe port, the second mirror, and internal loss.  gamma_b_in /
    gamma_b_l: pump decay through the pump input coupler and everything
    else.  kappa is the parametric coupling rate, seed_amp the real probe
    input amplitude, pump_ratio the pump power over its oscillation
    threshold, theta the two-photon drive phase (pi = deamplification,
    0 = amplification) and detune_ratio the pump/subharmonic detuning
    ratio under a cavity-length scan.
    """

    gamma_in: float
    gamma_c: float
    gamma_l: float
    gamma_b_in: float
    gamma_b_l: float
    kappa: float
    seed_amp: float
    pump_ratio: float = 0.0
    theta: float = math.pi
    detune_ratio: float = 2.0

    def __post_init__(self):
        for name in ("gamma_in", "gamma_c", "gamma_l", "gamma_b_in", "gamma_b_l"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.kappa < 0.0:
            raise ValueError("kappa must be >= 0")
        if self.pump_ratio < 0.0:
            raise ValueError("pump_ratio must be >= 0")
        if self.kappa == 0.0 and self.pump_ratio > 0.0:
            raise ValueError("a driven pump (pump_ratio > 0) requires kappa > 0; "
                             "the drive is calibrated through the threshold relation")
        if self.seed_amp < 0.0:
            raise ValueError("seed_amp must be >= 0")

    @property
    def gamma(self) -> float:
        return self.gamma_in + self.gamma_c + self.gamma_l

    @property
    def gamma_b(self) -> float:
        return self.gamma_b_in + self.gamma_b_l

    @property
    def sigma(self) -> float:
        """Normalized free-running intracavity pump, kappa|b|/gamma = sqrt(P/Pth)."""
        return math.sqrt(self.pump_ratio)

    @property
    def narrowband_pump(self) -> bool:
        """True when the pump linewidth is strictly narrower than the probe's.

        This is the regime where the transparency window can open inside
        the subharmonic reflection dip.
        """
        return self.gamma_b < self.gamma

    @property
    def under_coupled(self) -> bool:
        return self.gamma_in < self.gamma_c + self.gamma_l

    @property
    def pump_phi(self) -> float:
        """Pump optical phase phi = theta / 2 (phi = pi/2 at deamplification)."""
        return 0.5 * self.theta

    def scaled(self, s: float) -> "ModelParams":
        """Common rescaling of all rates and kappa by s, time by 1/s.

        Input amplitudes scale by sqrt(s) because |amplitude|^2 is a
        photon rate; every dimensionless observable is left invariant.
        """
        if s <= 0.0:
            raise ValueError("scale factor must be positive")
        return replace(
            self,
            gamma_in=self.gamma_in * s,
            gamma_c=self.gamma_c * s,
            gamma_l=self.gamma_l * s,
            gamma_b_in=self.gamma_b_in * s,
            gamma_b_l=self.gamma_b_l * s,
            kappa=self.kappa * s,
            seed_amp=self.seed_amp * math.sqrt(s),
        )

    @classmethod
    def defaults(cls, *, pump_ratio: float = 0.0, theta: float = math.pi,
                 gamma_b: float = 0.05, kappa: float = 0.05,
                 seed_amp: float | None = None,
                 detune_ratio: float = 2.0) -> "ModelParams":
        """Reference parameter set in gamma = 1 units.

        The subharmonic split follows the default cavity's round-trip
        budget (1% probe mirror, 7% back mirror, 0.5% loss); the pump
        split keeps the 3:1 input/other ratio of the default coatings.
        gamma_b defaults to gamma / 20, well inside the narrow-pump
        regime.  seed_amp defaults to the value giving unit intracavity
        photon number at zero detuning with the pump off.
        """
        t_total = 0.01 + 0.07 + 0.005
        gamma_in = 0.01 / t_total
        gamma_c = 0.07 / t_total
        gamma_l = 0.005 / t_total
        if seed_amp is None:
            seed_amp = (gamma_in + gamma_c + gamma_l) / math.sqrt(2.0 * gamma_in)
        return cls(
            gamma_in=gamma_in,
            gamma_c=gamma_c,
            gamma_l=gamma_l,
            gamma_b_in=0.75 * gamma_b,
            gamma_b_l=0.25 * gamma_b,
            kappa=kappa,
            seed_amp=seed_amp,
            pump_ratio=pump_ratio,
            theta=theta,
            detune_ratio=detune_ratio,
        )

    @classmethod
    def from_cavity(cls, cavity: CavityParams, *, threshold_power: float = 0.090,
                    pump_ratio: float = 0.0, theta: float = math.pi,
                    seed_amp: float | None = None,
                    detune_ratio: float = 2.0) -> "ModelParams":
        """Build a normalized (gamma = 1) parameter set from physical data.

        kappa is calibrated so that the given threshold pump power maps to
        pump_ratio = 1.
        """
        rates = derive_rates(cavity)
        g = rates.gamma
        if g <= 0.0:
            raise ValueError("subharmonic decay must be positive")
        kappa_phys = calibrate_kappa(cavity, threshold_power=threshold_power)
        gamma_in = rates.gamma_in / g
        if seed_amp is None:
            seed_amp = 1.0 / math.sqrt(2.0 * gamma_in)
        return cls(
            gamma_in=gamma_in,
            gamma_c=rates.gamma_c / g,
            gamma_l=rates.gamma_l / g,
            gamma_b_in=rates.gamma_b_in / g,
            gamma_b_l=rates.gamma_b_l / g,
            kappa=kappa_phys / g,
            seed_amp=seed_amp,
            pump_ratio=pump_ratio,
            theta=theta,
            detune_ratio=detune_ratio,
        )


@dataclass(frozen=True)
class FieldState:
    """Intracavity amplitudes at one detuning, with solver diagnostics."""

    a: complex
    b: complex
    delta: float
    converged: bool
    residual_norm: float


def threshold_drive(params: ModelParams) -> float:
    """Pump input amplitude |b_in| at the oscillation threshold.

    At threshold the free-running intracavity pump satisfies
    kappa |b| = gamma, which fixes |b_in,th| = gamma gamma_b /
    (kappa sqrt(2 gamma_b_in)).
    """
    if params.kappa == 0.0:
        raise ValueError("threshold is undefined for kappa = 0")
    return params.gamma * params.gamma_b / (params.kappa * math.sqrt(2.0 * params.gamma_b_in))


def calibrate_kappa(cavity: CavityParams, *, threshold_power: float = 0.090) -> float:
    """Parametric coupling rate (physical units) from a measured threshold power.

    The pump input amplitude is referenced to photon flux at the pump
    frequency (half the subharmonic wavelength), |b_in|^2 = P / (hbar
    omega_pump), and the threshold relation is inverted for kappa.
    """
    if threshold_power <= 0.0:
        raise ValueError("threshold_power must be positive")
    rates = derive_rates(cavity)
    if rates.gamma_b_in <= 0.0:
        raise ValueError("pump input coupler transmission must be nonzero to calibrate")
    omega_pump = 2.0 * math.pi * C_LIGHT / (cavity.wavelength_sub / 2.0)
    hbar = H_PLANCK / (2.0 * math.pi)
    b_in_th = math.sqrt(threshold_power / (hbar * omega_pump))
    return rates.gamma * rates.gamma_b / (b_in_th * math.sqrt(2.0 * rates.gamma_b_in))


def threshold_power(cavity: CavityParams, kappa: float) -> float:
    """Inverse of calibrate_kappa: threshold pump power for a given kappa."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    rates = derive_rates(cavity)
    b_in_th = rates.gamma * rates.gamma_b / (kappa * math.sqrt(2.0 * rates.gamma_b_in))
    omega_pump = 2.0 * math.pi * C_LIGHT / (cavity.wavelength_sub / 2.0)
    hbar = H_PLANCK / (2.0 * math.pi)
    return hbar * omega_pump * b_in_th**2
