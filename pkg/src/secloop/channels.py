"""Large-scale channel model and link-rate evaluation.

Geometry is converted to power gains via a distance power law; legitimate
and eavesdropping data rates share the same bandwidth-normalized Shannon
form. The ground-to-ground eavesdropping link is Rayleigh faded, and its
expected rate is accounted for through the closed-form worst-case bound
obtained from Jensen's inequality, so all security bookkeeping is
conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SecloopError

LN2 = math.log(2.0)


def n0_from_dbm_per_hz(n0_dbm: float) -> float:
    """Noise PSD in W/Hz from the dBm/Hz figure used in configs."""
    return 10.0 ** ((n0_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class Position3:
    """Cartesian node position in meters. Ground nodes have z = 0."""

    x: float
    y: float
    z: float = 0.0

    def distance_to(self, other: "Position3") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )


@dataclass(frozen=True)
class PathLossModel:
    """Reference gains at 1 m and exponents for the two propagation classes.

    ``air`` covers any link with the elevated hub as one endpoint; ``ground``
    covers the ground-to-ground sensor-to-eavesdropper link.
    """

    kappa_air: float = 1.42e-4
    eta_air: float = 2.0
    kappa_ground: float = 1.42e-4
    eta_ground: float = 3.5

    def __post_init__(self) -> None:
        for name in ("kappa_air", "eta_air", "kappa_ground", "eta_ground"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class NodeLayout:
    """Positions of the four nodes in one scenario."""

    sensor: Position3
    hub: Position3
    robot: Position3
    eavesdropper: Position3


@dataclass(frozen=True)
class ChannelGains:
    """The four large-scale power gains plus noise PSD (W/Hz)."""

    g_u: float  # sensor -> hub
    g_d: float  # hub -> robot
    g_se: float  # sensor -> eavesdropper (Rayleigh faded, ground model)
    g_ce: float  # hub -> eavesdropper (LoS, air model)
    n0: float

    def __post_init__(self) -> None:
        for name in ("g_u", "g_d", "g_se", "g_ce", "n0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def scaled(self, g_u=None, g_d=None, g_se=None, g_ce=None) -> "ChannelGains":
        """Copy with individual gains replaced (used by CSI perturbations)."""
        return ChannelGains(
            g_u if g_u is not None else self.g_u,
            g_d if g_d is not None else self.g_d,
            g_se if g_se is not None else self.g_se,
            g_ce if g_ce is not None else self.g_ce,
            self.n0,
        )


def path_loss_gain(tx: Position3, rx: Position3, kappa: float, eta: float) -> float:
    """Power gain kappa * d^-eta over the Euclidean distance d in meters."""
    if kappa <= 0 or eta <= 0:
        raise ValueError("kappa and eta must be strictly positive")
    d = tx.distance_to(rx)
    if d == 0.0:
        raise SecloopError("coincident transmitter and receiver: path-loss model is singular")
    return kappa * d**-eta


def gains_from_geometry(layout: NodeLayout, model: PathLossModel, n0: float) -> ChannelGains:
    """Gains for all four links of a scenario.

    Links touching the elevated hub use the air model; the sensor-to-
    eavesdropper link uses the ground model.
    """
    return ChannelGains(
        g_u=path_loss_gain(layout.sensor, layout.hub, model.kappa_air, model.eta_air),
        g_d=path_loss_gain(layout.hub, layout.robot, model.kappa_air, model.eta_air),
        g_se=path_loss_gain(layout.sensor, layout.eavesdropper, model.kappa_ground, model.eta_ground),
        g_ce=path_loss_gain(layout.hub, layout.eavesdropper, model.kappa_air, model.eta_air),
        n0=n0,
    )


def rate(p: float, b: float, g: float, n0: float) -> float:
    """Link rate b * log2(1 + p*g / (b*n0)) in bits/second.

    Zero power maps to zero rate by continuous extension; zero bandwidth is
    rejected because every solver path keeps b > 0.
    """
    if b <= 0:
        raise ValueError("bandwidth must be strictly positive")
    if p < 0:
        raise ValueError("power must be nonnegative")
    if p == 0.0:
        return 0.0
    return b * math.log1p(p * g / (b * n0)) / LN2


def eavesdrop_rate_upper_bound(p: float, b: float, g_e: float, n0: float) -> float:
    """Worst-case expected rate of the Rayleigh-faded eavesdropping link.

    Jensen's inequality turns the expectation over the unit-mean exponential
    channel power into the same closed form as ``rate``; the true expected
    rate is never above this value.
    """
    return rate(p, b, g_e, n0)


def rate_array(p, b, g, n0: float):
    """Vectorized ``rate`` for the grid oracle; p, b, g broadcast together."""
    p = np.asarray(p, dtype=float)
    b = np.asarray(b, dtype=float)
    out = b * np.log1p(p * g / (b * n0)) / LN2
    return np.where(p == 0.0, 0.0, out)


def sample_fading_power(rng: np.random.Generator, size=None):
    """Draw |xi|^2 for the Rayleigh-faded link: unit-mean exponential."""
    return rng.exponential(1.0, size=size)
