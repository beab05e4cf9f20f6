"""Channel-twin link gains between every UAV waypoint and BS.

Three interchangeable providers fill a LinkGainTensor:

* ``few_ray``      - deterministic free-space LOS ray plus a seeded diffuse
                     component sampled with ``ray_count - 1`` scatter rays.
                     The total scattered power is the LOS power divided by
                     the linear Rician K factor; the sampling error of the
                     ray sum shrinks as 1/(ray_count - 1), so a high ray
                     count pins the link gain down tightly while a low one
                     leaves estimation noise. This is the desk-scale stand-in
                     for a site-specific ray tracer.
* ``statistical``  - street-canyon LOS path loss
                     PL = 32.4 + 21*log10(d_3D) + 20*log10(f_GHz) [dB]
                     with unit-mean Rician small-scale fading.
* ``import``       - reads an externally produced tensor from the binary or
                     JSON file format documented at the bottom of this file.

Every provider is a pure function of (spec, geometries, seed): per-link
substreams are derived from (seed, m, l), so parallel and serial generation
produce bit-identical tensors.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .antenna import SPEED_OF_LIGHT
from .errors import GeometryError, TensorFormatError
from .geometry import LinkGeometry

# Above this many scatter rays the uniform-phasor sum is replaced by its
# Gaussian limit (same mean, same 1/(R-1) variance); keeps 1e6-ray tensors
# cheap without changing the statistics the providers promise.
_EXACT_RAY_LIMIT = 10_000

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RfConstants:
    """Link-budget constants. Defaults: 3.5 GHz, 30 MHz, 10 W TX, 0.3 W noise."""

    carrier_hz: float = 3.5e9
    bandwidth_hz: float = 30e6
    tx_power_w: float = 10.0
    noise_power_w: float = 0.3


@dataclass(frozen=True)
class ChannelProviderSpec:
    """Which provider to run and with what fidelity/seed."""

    kind: str = "statistical"  # few_ray | statistical | import
    ray_count: int = 1_000_000
    rician_k_db: float = 3.0
    seed: int = 0
    import_path: str | None = None


@dataclass
class LinkGainTensor:
    """Per-link channel state: scalar power gains plus optional coefficients.

    ``power_gains[m, l]`` is the linear |h|^2 for UAV m and BS l. When
    per-element ``coefficients`` (m, l, k) are present, power gains are their
    mean element power. ``ray_count`` records the fidelity the tensor was
    generated (or degraded) at, None for statistical/imported tensors.
    """

    power_gains: np.ndarray
    coefficients: np.ndarray | None = None
    ray_count: int | None = None

    @property
    def m(self) -> int:
        return self.power_gains.shape[0]

    @property
    def l(self) -> int:
        return self.power_gains.shape[1]

    @property
    def n_elems(self) -> int:
        return 0 if self.coefficients is None else self.coefficients.shape[2]


def aggregate_power(coefficients: np.ndarray) -> np.ndarray:
    """Scalar |h|^2 per link: mean element power over the antenna axis."""
    return np.mean(np.abs(coefficients) ** 2, axis=2)


def free_space_path_gain(distance: float, carrier_hz: float):
    """Friis distance term (lambda / (4*pi*d))^2, linear."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0.0):
        raise GeometryError(f"path gain needs a positive distance, got {distance}")
    lam = SPEED_OF_LIGHT / carrier_hz
    out = (lam / (4.0 * math.pi * d)) ** 2
    return float(out) if np.ndim(distance) == 0 else out


def _link_rng(seed: int, m: int, l: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed & _SEED_MASK, m, l)))


def _unit_phasor(phase: float) -> complex:
    return complex(math.cos(phase), math.sin(phase))


def _distance_matrix(geometries: list[list[LinkGeometry]]) -> np.ndarray:
    return np.array([[g.distance_3d for g in row] for row in geometries], dtype=float)


def generate_few_ray(
    geometries: list[list[LinkGeometry]],
    spec: ChannelProviderSpec,
    rf: RfConstants,
) -> LinkGainTensor:
    """LOS ray plus (ray_count - 1) seeded scatter rays per link.

    The diffuse field of link (m, l) is a fixed phasor of power
    LOS/K (drawn once from the link substream, independent of ray count);
    the scatter rays estimate it with zero-mean error of variance
    diffuse_power/(ray_count - 1). ray_count = 1 is the pure-LOS channel.
    """
    if spec.ray_count < 1:
        raise ValueError(f"ray_count must be >= 1, got {spec.ray_count}")
    dist = _distance_matrix(geometries)
    mm, ll = dist.shape
    lam = SPEED_OF_LIGHT / rf.carrier_hz
    k_lin = 10.0 ** (spec.rician_k_db / 10.0)
    n_scatter = spec.ray_count - 1

    coeffs = np.empty((mm, ll, 1), dtype=np.complex128)
    for m in range(mm):
        for l in range(ll):
            d = dist[m, l]
            a0 = math.sqrt(free_space_path_gain(d, rf.carrier_hz))
            psi0 = math.fmod(2.0 * math.pi * d / lam, 2.0 * math.pi)
            h = a0 * _unit_phasor(psi0)
            if n_scatter >= 1:
                rng = _link_rng(spec.seed, m, l)
                s_amp = a0 / math.sqrt(k_lin)
                chi = rng.uniform(-math.pi, math.pi)
                if n_scatter <= _EXACT_RAY_LIMIT:
                    psi = rng.uniform(-math.pi, math.pi, size=n_scatter)
                    err = np.exp(1j * psi).sum() / n_scatter
                else:
                    g = rng.standard_normal(2)
                    err = (g[0] + 1j * g[1]) * math.sqrt(0.5 / n_scatter)
                h += s_amp * (_unit_phasor(chi) + err)
            coeffs[m, l, 0] = h
    return LinkGainTensor(
        power_gains=aggregate_power(coeffs),
        coefficients=coeffs,
        ray_count=spec.ray_count,
    )


def generate_statistical(
    geometries: list[list[LinkGeometry]],
    spec: ChannelProviderSpec,
    rf: RfConstants,
) -> LinkGainTensor:
    """Street-canyon LOS path loss with unit-mean Rician fading."""
    dist = _distance_matrix(geometries)
    mm, ll = dist.shape
    lam = SPEED_OF_LIGHT / rf.carrier_hz
    k_lin = 10.0 ** (spec.rician_k_db / 10.0)
    los_frac = math.sqrt(k_lin / (k_lin + 1.0))
    scatter_frac = math.sqrt(1.0 / (k_lin + 1.0))

    coeffs = np.empty((mm, ll, 1), dtype=np.complex128)
    for m in range(mm):
        for l in range(ll):
            d = dist[m, l]
            pl_db = (
                32.4
                + 21.0 * math.log10(d)
                + 20.0 * math.log10(rf.carrier_hz / 1e9)
            )
            amp = 10.0 ** (-pl_db / 20.0)
            rng = _link_rng(spec.seed, m, l)
            g = rng.standard_normal(2)
            fading = los_frac * _unit_phasor(2.0 * math.pi * d / lam) + scatter_frac * (
                g[0] + 1j * g[1]
            ) / math.sqrt(2.0)
            coeffs[m, l, 0] = amp * fading
    return LinkGainTensor(
        power_gains=aggregate_power(coeffs), coefficients=coeffs, ray_count=None
    )


def degrade(
    tensor: LinkGainTensor, target_ray_count: int, seed: int
) -> LinkGainTensor:
    """Re-estimate a tensor at a coarser ray count.

    Each link's power is jittered by an independent mean-one Gamma factor
    with variance 1/target_ray_count (the variance of a target_ray_count-ray
    power average), so expectation is preserved while per-link deviation from
    the source grows as the ray count drops. A target equal to the source
    fidelity is a no-op.
    """
    if target_ray_count < 1:
        raise ValueError(f"target_ray_count must be >= 1, got {target_ray_count}")
    if tensor.ray_count is not None and target_ray_count == tensor.ray_count:
        return LinkGainTensor(
            power_gains=tensor.power_gains.copy(),
            coefficients=None if tensor.coefficients is None else tensor.coefficients.copy(),
            ray_count=tensor.ray_count,
        )
    gamma = np.empty((tensor.m, tensor.l), dtype=float)
    for m in range(tensor.m):
        for l in range(tensor.l):
            rng = _link_rng(seed, m, l)
            gamma[m, l] = rng.gamma(shape=target_ray_count, scale=1.0 / target_ray_count)
    if tensor.coefficients is not None:
        coeffs = tensor.coefficients * np.sqrt(gamma)[:, :, None]
        power = aggregate_power(coeffs)  # keep the aggregation rule bit-exact
    else:
        coeffs = None
        power = tensor.power_gains * gamma
    return LinkGainTensor(
        power_gains=power, coefficients=coeffs, ray_count=target_ray_count
    )


def generate(
    geometries: list[list[LinkGeometry]],
    spec: ChannelProviderSpec,
    rf: RfConstants,
) -> LinkGainTensor:
    """Dispatch to the provider named by ``spec.kind``."""
    if spec.kind == "few_ray":
        return generate_few_ray(geometries, spec, rf)
    if spec.kind == "statistical":
        return generate_statistical(geometries, spec, rf)
    if spec.kind == "import":
        if spec.import_path is None:
            raise TensorFormatError("import provider needs an import_path")
        return import_tensor(spec.import_path)
    raise ValueError(f"unknown channel provider kind {spec.kind!r}")


# --------------------------------------------------------------------------
# Tensor file format
#
# Binary, little-endian:
#   magic "CTNS" | u16 version (=1) | u32 m | u32 l | u32 n_elems
#   | u8 has_coefficients
#   | if has_coefficients: m*l*n_elems float64 (re, im) pairs, row-major (m, l, k)
#   | m*l float64 power gains, row-major (m, l)
#
# JSON mirror with the same field names is accepted for hand-written
# fixtures: {"m":, "l":, "n_elems":, "has_coefficients":,
#            "coefficients": [[[ [re, im], ...]]] or null,
#            "power_gains": [[...]]}
# --------------------------------------------------------------------------

_MAGIC = b"CTNS"
_VERSION = 1
_HEADER = struct.Struct("<4sHIIIB")


def export_tensor(tensor: LinkGainTensor, path: str | Path) -> None:
    """Write a tensor in the binary file format."""
    has_coeff = tensor.coefficients is not None
    blob = _HEADER.pack(
        _MAGIC, _VERSION, tensor.m, tensor.l, tensor.n_elems, int(has_coeff)
    )
    if has_coeff:
        blob += np.ascontiguousarray(tensor.coefficients, dtype="<c16").tobytes()
    blob += np.ascontiguousarray(tensor.power_gains, dtype="<f8").tobytes()
    Path(path).write_bytes(blob)


def import_tensor(path: str | Path) -> LinkGainTensor:
    """Load a tensor from the binary or JSON file format.

    When coefficients are present the power gains are recomputed from them
    via the mean-element-power rule; the header dimensions must match the
    payload exactly.
    """
    p = Path(path)
    if not p.exists():
        raise TensorFormatError(f"channel tensor file not found: {p}")
    raw = p.read_bytes()
    if raw[:4] == _MAGIC:
        return _import_binary(raw, p)
    return _import_json(raw, p)


def _finish_import(
    mm: int, ll: int, kk: int, coeffs: np.ndarray | None, power: np.ndarray, p: Path
) -> LinkGainTensor:
    if coeffs is not None:
        if not np.all(np.isfinite(coeffs.view(float))):
            raise TensorFormatError(f"{p}: non-finite coefficient values")
        power = aggregate_power(coeffs)
    if not np.all(np.isfinite(power)):
        raise TensorFormatError(f"{p}: non-finite power gains")
    if np.any(power < 0.0):
        raise TensorFormatError(f"{p}: negative power gains")
    return LinkGainTensor(power_gains=power, coefficients=coeffs, ray_count=None)


def _import_binary(raw: bytes, p: Path) -> LinkGainTensor:
    if len(raw) < _HEADER.size:
        raise TensorFormatError(f"{p}: truncated header")
    magic, version, mm, ll, kk, has_coeff = _HEADER.unpack_from(raw)
    if version != _VERSION:
        raise TensorFormatError(f"{p}: unsupported version {version}")
    offset = _HEADER.size
    coeffs = None
    if has_coeff:
        n_bytes = mm * ll * kk * 16
        if len(raw) < offset + n_bytes:
            raise TensorFormatError(
                f"{p}: dimension mismatch, header says {mm}x{ll}x{kk} coefficients "
                f"but only {len(raw) - offset} payload bytes remain"
            )
        coeffs = (
            np.frombuffer(raw, dtype="<c16", count=mm * ll * kk, offset=offset)
            .reshape(mm, ll, kk)
            .astype(np.complex128)
        )
        offset += n_bytes
    n_bytes = mm * ll * 8
    if len(raw) != offset + n_bytes:
        raise TensorFormatError(
            f"{p}: dimension mismatch, header says {mm}x{ll} power gains but "
            f"{len(raw) - offset} payload bytes remain (expected {n_bytes})"
        )
    power = (
        np.frombuffer(raw, dtype="<f8", count=mm * ll, offset=offset)
        .reshape(mm, ll)
        .astype(float)
    )
    return _finish_import(mm, ll, kk, coeffs, power, p)


def _import_json(raw: bytes, p: Path) -> LinkGainTensor:
    try:
        doc = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"{p}: malformed header, neither CTNS nor JSON") from exc
    try:
        mm, ll, kk = int(doc["m"]), int(doc["l"]), int(doc["n_elems"])
        has_coeff = bool(doc["has_coefficients"])
        power_field = doc["power_gains"]
    except KeyError as exc:
        raise TensorFormatError(f"{p}: missing field {exc}") from exc
    coeffs = None
    if has_coeff:
        try:
            arr = np.asarray(doc.get("coefficients"), dtype=float)
        except (TypeError, ValueError) as exc:
            raise TensorFormatError(f"{p}: coefficients are not a numeric array") from exc
        if arr.shape != (mm, ll, kk, 2):
            raise TensorFormatError(
                f"{p}: dimension mismatch, coefficients shape {arr.shape} vs "
                f"header ({mm}, {ll}, {kk}, 2)"
            )
        coeffs = arr[..., 0] + 1j * arr[..., 1]
    power = np.asarray(power_field, dtype=float)
    if power.shape != (mm, ll):
        raise TensorFormatError(
            f"{p}: dimension mismatch, power_gains shape {power.shape} vs header ({mm}, {ll})"
        )
    return _finish_import(mm, ll, kk, coeffs, power, p)


def with_seed(spec: ChannelProviderSpec, seed: int) -> ChannelProviderSpec:
    """Copy of `spec` with a different seed."""
    return replace(spec, seed=seed)
