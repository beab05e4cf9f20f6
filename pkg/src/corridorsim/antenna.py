"""Directional transmit gain of a sectorized uniform planar array.

Implements the standard 3GPP-style decomposition

    G(theta, phi) = A_E(theta, phi) + A_V(theta, phi)   [dBi]

where A_E is the single-element pattern (parabolic rolloff in both cuts,
capped by the side-lobe limit and the front-to-back ratio) and A_V is the
array factor 10*log10(|V^H W|^2) built from a steering vector V toward the
link direction and a beamforming vector W for a horizontal scan angle with
a fixed vertical tilt.

Element spacings are stored in wavelengths, so the carrier wavelength
cancels out of every phase term and the array math never touches it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class AntennaConfig:
    """UPA geometry and element-pattern parameters.

    Defaults are the nominal 4x4 half-wavelength array: -8 dBi peak element
    gain, 65/90 degree beamwidths, 30 dB side-lobe and front-to-back caps,
    15 degree downtilt at 3.5 GHz.
    """

    n_h: int = 4  # horizontal elements
    n_v: int = 4  # vertical elements
    d_h: float = 0.5  # horizontal spacing, wavelengths
    d_v: float = 0.5  # vertical spacing, wavelengths
    g_e_max_dbi: float = -8.0
    theta_3db: float = math.radians(65.0)  # elevation 3 dB beamwidth
    phi_3db: float = math.radians(90.0)  # azimuth 3 dB beamwidth
    a_m_db: float = 30.0  # front-to-back ratio
    sl_av_db: float = 30.0  # vertical side-lobe limit
    theta_tilt: float = math.radians(15.0)
    wavelength: float = SPEED_OF_LIGHT / 3.5e9  # meters
    gain_floor_db: float = -400.0  # clamp for |V^H W|^2 underflow

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v


@dataclass(frozen=True)
class SteeringDirection:
    """Link direction in the BS-local frame (theta zenith, phi off boresight)."""

    theta: float
    phi: float


def _maybe_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def element_gain_vertical(theta, cfg: AntennaConfig):
    """Vertical element cut A_EV(theta) in dB: 0 at the horizon, floor -SL_AV."""
    t_deg = np.degrees(np.asarray(theta, dtype=float))
    bw_deg = math.degrees(cfg.theta_3db)
    out = -np.minimum(12.0 * ((t_deg - 90.0) / bw_deg) ** 2, cfg.sl_av_db)
    return _maybe_scalar(out)


def element_gain_horizontal(phi, cfg: AntennaConfig):
    """Horizontal element cut A_EH(phi) in dB: 0 on boresight, floor -A_m."""
    p_deg = np.degrees(np.asarray(phi, dtype=float))
    bw_deg = math.degrees(cfg.phi_3db)
    out = -np.minimum(12.0 * (p_deg / bw_deg) ** 2, cfg.a_m_db)
    return _maybe_scalar(out)


def element_gain(theta, phi, cfg: AntennaConfig):
    """Combined element pattern A_E(theta, phi) in dBi, peak g_e_max_dbi."""
    a_v = np.asarray(element_gain_vertical(theta, cfg))
    a_h = np.asarray(element_gain_horizontal(phi, cfg))
    out = cfg.g_e_max_dbi - np.minimum(-(a_v + a_h), cfg.a_m_db)
    return _maybe_scalar(out)


def steering_vector(direction: SteeringDirection, cfg: AntennaConfig) -> np.ndarray:
    """Unit-modulus steering phasors toward `direction`.

    Flattened row-major over (horizontal index m, vertical index n); element
    (m, n) has phase 2*pi*(d_h*m*sin(theta)*sin(phi) + d_v*n*cos(theta)).
    """
    m = np.arange(cfg.n_h)
    n = np.arange(cfg.n_v)
    h_phase = cfg.d_h * m * math.sin(direction.theta) * math.sin(direction.phi)
    v_phase = cfg.d_v * n * math.cos(direction.theta)
    phase = h_phase[:, None] + v_phase[None, :]
    return np.exp(2j * math.pi * phase).reshape(-1)


def beamforming_vector(phi_scan, cfg: AntennaConfig) -> np.ndarray:
    """Unit-norm beamforming weights for a horizontal scan angle.

    Element (m, n) has phase -2*pi*(d_h*m*sin(phi_scan)*cos(tilt)
    - d_v*n*sin(tilt)), uniform magnitude 1/sqrt(n_h*n_v). `phi_scan` may be
    an array, in which case the leading axes broadcast and the element axis
    is last.
    """
    scan = np.asarray(phi_scan, dtype=float)
    m = np.arange(cfg.n_h)
    n = np.arange(cfg.n_v)
    h_phase = cfg.d_h * np.sin(scan)[..., None] * math.cos(cfg.theta_tilt) * m
    v_phase = -cfg.d_v * n * math.sin(cfg.theta_tilt)
    phase = h_phase[..., :, None] + v_phase
    w = np.exp(-2j * math.pi * phase) / math.sqrt(cfg.n_elements)
    return w.reshape(*scan.shape, cfg.n_elements) if scan.ndim else w.reshape(-1)


def array_gain(direction: SteeringDirection, phi_scan, cfg: AntennaConfig):
    """Array factor 10*log10(|V^H W|^2) in dB, clamped at `gain_floor_db`.

    Never exceeds 10*log10(n_h*n_v) (Cauchy-Schwarz). Vectorized over
    `phi_scan`.
    """
    v = steering_vector(direction, cfg)
    w = beamforming_vector(phi_scan, cfg)
    inner = w @ v.conj()
    power = np.maximum(np.abs(inner) ** 2, 10.0 ** (cfg.gain_floor_db / 10.0))
    return _maybe_scalar(10.0 * np.log10(power))


def total_gain(direction: SteeringDirection, phi_scan, cfg: AntennaConfig):
    """Total transmit gain A_E + A_V in dBi. Vectorized over `phi_scan`."""
    return element_gain(direction.theta, direction.phi, cfg) + array_gain(
        direction, phi_scan, cfg
    )


def make_scan_gain(direction: SteeringDirection, cfg: AntennaConfig) -> Callable[[float], float]:
    """Build a fast scalar scan -> total gain map for a fixed direction.

    Folds the element gain, the steering vector and the scan-independent
    vertical weight phases into n_h complex coefficients, leaving one sin()
    and n_h phasors per evaluation. Matches total_gain() to float rounding;
    used by the per-triplet scan optimizer where the gain is evaluated a few
    hundred times per direction.
    """
    elem_db = element_gain(direction.theta, direction.phi, cfg)
    v = steering_vector(direction, cfg).reshape(cfg.n_h, cfg.n_v)
    n = np.arange(cfg.n_v)
    w_vert = np.exp(2j * math.pi * cfg.d_v * n * math.sin(cfg.theta_tilt))
    coeffs = (v.conj() @ w_vert) / math.sqrt(cfg.n_elements)  # (n_h,)
    coeffs_list = [complex(c) for c in coeffs]
    alpha = -2.0 * math.pi * cfg.d_h * math.cos(cfg.theta_tilt)
    floor = 10.0 ** (cfg.gain_floor_db / 10.0)

    def gain(phi_scan: float) -> float:
        step = alpha * math.sin(phi_scan)
        acc = 0j
        for k, c in enumerate(coeffs_list):
            acc += c * cmath.exp(1j * step * k)
        power = acc.real * acc.real + acc.imag * acc.imag
        if power < floor:
            power = floor
        return elem_db + 10.0 * math.log10(power)

    return gain
