"""Interference, SINR, and Shannon-rate scoring of an assignment.

The same scoring path serves the optimized allocator and every baseline:
the serving term of UAV m is P * |h[m,l]|^2 * 10^(G/10) with G taken from
the stage-1 table at the serving (m, l, n); interference comes from every
other BS l' whose scheduled UAVs m' beam toward their own targets, with the
gain evaluated at the victim's angles toward l' but at the interferer's
chosen scan angle. Rates are Shannon capacity over `bandwidth_hz` per
scheduled resource block.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .allocator import Assignment, BeamGainTable, serving_beam
from .antenna import AntennaConfig, SteeringDirection, total_gain
from .channel import LinkGainTensor, RfConstants
from .geometry import LinkGeometry


@dataclass
class EvaluationConfig:
    """Resource-block schedule and the interference-term conventions.

    `rrb_schedule` is a binary (M, L, R) indicator of which RRBs a UAV is
    scheduled on at a BS; None means all-ones. `beta_reading` selects whose
    association gates an interference term: the interfering UAV's
    ("interferer", default) or the victim's ("victim", which zeroes the sum
    because a UAV is associated with exactly one BS). `power_divisor`
    divides the per-BS transmit power, e.g. by N when power is split across
    beams.
    """

    num_rrbs: int = 1
    rrb_schedule: np.ndarray | None = None
    beta_reading: str = "interferer"
    power_divisor: float = 1.0


@dataclass
class ThroughputReport:
    """Per-UAV SINR/rate and aggregates for one scored assignment."""

    per_uav_sinr: np.ndarray  # linear, first RRB
    per_uav_rate_bps: np.ndarray
    total_rate_bps: float
    mean_rate_bps: float
    seed: int
    config_digest: str
    timings: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "per_uav_sinr": [float(s) for s in self.per_uav_sinr],
            "per_uav_rate_bps": [float(r) for r in self.per_uav_rate_bps],
            "total_rate_bps": float(self.total_rate_bps),
            "mean_rate_bps": float(self.mean_rate_bps),
            "seed": int(self.seed),
            "config_digest": self.config_digest,
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        return out


def _schedule(eval_cfg: EvaluationConfig, mm: int, ll: int) -> np.ndarray:
    if eval_cfg.rrb_schedule is not None:
        return np.asarray(eval_cfg.rrb_schedule)
    return np.ones((mm, ll, eval_cfg.num_rrbs), dtype=np.int8)


def interference_at(
    m: int,
    assignment: Assignment,
    gains: LinkGainTensor,
    beam_table: BeamGainTable,
    geometries: list[list[LinkGeometry]],
    antenna_cfg: AntennaConfig,
    rf: RfConstants,
    eval_cfg: EvaluationConfig | None = None,
    rrb: int = 0,
) -> float:
    """Aggregate interference power (watts) received by UAV m on one RRB."""
    eval_cfg = eval_cfg or EvaluationConfig()
    mm, ll = gains.power_gains.shape
    alpha = _schedule(eval_cfg, mm, ll)
    serving_l, _ = serving_beam(assignment, m)
    p_eff = rf.tx_power_w / eval_cfg.power_divisor
    total = 0.0
    for m_prime in range(mm):
        if m_prime == m:
            continue
        l_prime, n_prime = serving_beam(assignment, m_prime)
        if l_prime == serving_l:
            continue
        if eval_cfg.beta_reading == "victim":
            if not assignment.beta[m, l_prime]:
                continue
        elif not assignment.beta[m_prime, l_prime]:
            continue
        if not alpha[m_prime, l_prime, rrb]:
            continue
        geom = geometries[m][l_prime]
        direction = SteeringDirection(theta=geom.theta, phi=geom.phi)
        g_db = total_gain(direction, beam_table.phi_star[m_prime, l_prime, n_prime], antenna_cfg)
        total += p_eff * gains.power_gains[m, l_prime] * 10.0 ** (g_db / 10.0)
    return total


def sinr(
    m: int,
    assignment: Assignment,
    gains: LinkGainTensor,
    beam_table: BeamGainTable,
    geometries: list[list[LinkGeometry]],
    antenna_cfg: AntennaConfig,
    rf: RfConstants,
    eval_cfg: EvaluationConfig | None = None,
    rrb: int = 0,
) -> float:
    """Linear SINR of UAV m on one RRB: serving power over interference + noise."""
    eval_cfg = eval_cfg or EvaluationConfig()
    l, n = serving_beam(assignment, m)
    p_eff = rf.tx_power_w / eval_cfg.power_divisor
    signal = (
        p_eff
        * gains.power_gains[m, l]
        * 10.0 ** (beam_table.gain_db[m, l, n] / 10.0)
    )
    noise_plus_i = (
        interference_at(
            m, assignment, gains, beam_table, geometries, antenna_cfg, rf, eval_cfg, rrb
        )
        + rf.noise_power_w
    )
    return signal / noise_plus_i


def throughput(
    m: int,
    assignment: Assignment,
    gains: LinkGainTensor,
    beam_table: BeamGainTable,
    geometries: list[list[LinkGeometry]],
    antenna_cfg: AntennaConfig,
    rf: RfConstants,
    eval_cfg: EvaluationConfig | None = None,
) -> float:
    """Shannon rate of UAV m in bits/s, summed over its scheduled RRBs."""
    eval_cfg = eval_cfg or EvaluationConfig()
    rate = 0.0
    for r in range(eval_cfg.num_rrbs):
        s = sinr(
            m, assignment, gains, beam_table, geometries, antenna_cfg, rf, eval_cfg, r
        )
        rate += rf.bandwidth_hz * np.log2(1.0 + s)
    return float(rate)


def evaluate_all(
    assignment: Assignment,
    gains: LinkGainTensor,
    beam_table: BeamGainTable,
    geometries: list[list[LinkGeometry]],
    antenna_cfg: AntennaConfig,
    rf: RfConstants,
    eval_cfg: EvaluationConfig | None = None,
    seed: int = 0,
    config_digest: str = "",
) -> ThroughputReport:
    """Score every UAV and aggregate into a ThroughputReport."""
    eval_cfg = eval_cfg or EvaluationConfig()
    t0 = time.perf_counter()
    mm = gains.power_gains.shape[0]
    sinrs = np.array(
        [
            sinr(m, assignment, gains, beam_table, geometries, antenna_cfg, rf, eval_cfg)
            for m in range(mm)
        ]
    )
    rates = np.array(
        [
            throughput(
                m, assignment, gains, beam_table, geometries, antenna_cfg, rf, eval_cfg
            )
            for m in range(mm)
        ]
    )
    return ThroughputReport(
        per_uav_sinr=sinrs,
        per_uav_rate_bps=rates,
        total_rate_bps=float(rates.sum()),
        mean_rate_bps=float(rates.mean()),
        seed=seed,
        config_digest=config_digest,
        timings={"evaluation_seconds": time.perf_counter() - t0},
    )


def validate(assignment: Assignment, mm: int, ll: int, nn: int) -> list[str]:
    """Constraint check; returns one message per violation, empty when clean.

    C1: each UAV associates with exactly one BS. C2: no BS carries more than
    N UAVs. C3: each UAV rides exactly one active beam. C4: no beam serves
    two UAVs. Plus beta/x consistency: an active beam implies association.
    """
    violations: list[str] = []
    beta, x = assignment.beta, assignment.x
    if beta.shape != (mm, ll) or x.shape != (mm, ll, nn):
        violations.append(
            f"shape mismatch: beta {beta.shape} x {x.shape} vs ({mm}, {ll}, {nn})"
        )
        return violations
    row_sums = beta.sum(axis=1)
    for m in np.flatnonzero(row_sums != 1):
        violations.append(f"C1: UAV {m} associates with {row_sums[m]} BSs, expected 1")
    col_sums = beta.sum(axis=0)
    for l in np.flatnonzero(col_sums > nn):
        violations.append(f"C2: BS {l} serves {col_sums[l]} UAVs, limit {nn}")
    active = (beta[:, :, None] * x).reshape(mm, -1).sum(axis=1)
    for m in np.flatnonzero(active != 1):
        violations.append(f"C3: UAV {m} rides {active[m]} active beams, expected 1")
    beam_load = x.sum(axis=0)
    for l, n in zip(*np.nonzero(beam_load > 1)):
        violations.append(f"C4: beam ({l}, {n}) serves {beam_load[l, n]} UAVs, limit 1")
    for m, l, n in zip(*np.nonzero(x)):
        if not beta[m, l]:
            violations.append(
                f"beta/x consistency: x[{m}, {l}, {n}] = 1 but beta[{m}, {l}] = 0"
            )
    return violations
