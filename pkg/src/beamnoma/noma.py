"""Power-domain NOMA: user association, decode order, power ladder, rates.

Each access point superposes the signals of its served users with a
geometric power ladder.  The user with the weakest summed channel gain is
decoded first and, with the default ladder direction, receives the largest
power share.  Receivers cancel already-decoded users and treat later ones
as interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DataError, ParameterError, UnservableUserError
from .geometry import ApConfig, Vec3

LADDER_DIRECTIONS = ("weak_first", "strong_first")
LADDER_DOMAINS = ("electrical", "optical")


@dataclass
class UserState:
    """Per-user channel knowledge and NOMA bookkeeping."""

    id: int
    position: Vec3
    gains: Dict[int, float] = field(default_factory=dict)
    csi_sum: float = 0.0
    serving_ap: Optional[int] = None
    decode_rank: Optional[int] = None  # 1 = decoded first


@dataclass(frozen=True)
class LinkMetrics:
    sinr: float
    rate: float


@dataclass(frozen=True)
class ApAllocation:
    """Power levels of one AP, ordered by decode rank (rank 1 first)."""

    user_ids: tuple
    powers: np.ndarray       # electrical powers P_k
    amplitudes: np.ndarray   # optical levels eta * sqrt(P_k)
    transmit_peak: float     # sum of amplitudes, the AP peak intensity


@dataclass
class NomaAllocation:
    per_ap: Dict[int, ApAllocation] = field(default_factory=dict)


def associate(users: Sequence[UserState], aps: Sequence[ApConfig],
              gains: np.ndarray) -> Dict[int, List[int]]:
    """Assign every user to the AP with the largest aimed-beam LOS gain.

    `gains[l, j]` is the candidate gain from AP index l to user j.  Ties go
    to the lowest AP index.  Users whose gains are all zero cannot be served
    and abort the assignment.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (len(aps), len(users)):
        raise DataError(
            f"gain matrix shape {gains.shape} does not match "
            f"{len(aps)} APs x {len(users)} users"
        )
    dead = [users[j].id for j in range(len(users)) if gains[:, j].max() <= 0.0]
    if dead:
        raise UnservableUserError(dead)

    assignment: Dict[int, List[int]] = {}
    for j, user in enumerate(users):
        best = int(np.argmax(gains[:, j]))  # argmax keeps the lowest index on ties
        assignment.setdefault(best, []).append(user.id)
    return assignment


def decoding_order(members: Sequence[UserState]) -> List[UserState]:
    """Sort one AP's users weakest channel first; ties break on user id."""
    if len(members) < 1:
        raise ParameterError("decoding_order needs at least one user")
    return sorted(members, key=lambda u: (u.csi_sum, u.id))


def allocate_power(order: Sequence[UserState], alpha: float, ap: ApConfig,
                   direction: str = "weak_first",
                   domain: str = "electrical") -> ApAllocation:
    """Geometric power ladder scaled to the AP's peak-intensity budget.

    With `direction='weak_first'` the rank-1 (weakest, first-decoded) user
    receives the largest electrical power and each later rank is scaled by
    alpha.  The global scale is fixed so that the summed optical levels
    eta * sqrt(P_k) equal the AP peak power.  `domain='optical'` applies the
    ladder to the optical levels instead (electrical ratio alpha^2); it
    exists for sensitivity studies and is not the default behavior.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if direction not in LADDER_DIRECTIONS:
        raise ParameterError(f"unknown ladder direction {direction!r}")
    if domain not in LADDER_DOMAINS:
        raise ParameterError(f"unknown ladder domain {domain!r}")
    n = len(order)
    if n < 1:
        raise ParameterError("allocate_power needs at least one user")

    ratio = alpha if domain == "electrical" else alpha * alpha
    weights = np.ones(n)
    if n > 1:
        weights[1:] = np.cumprod(np.full(n - 1, ratio))
    if direction == "strong_first":
        weights = weights[::-1].copy()

    sqrt_w = np.sqrt(weights)
    # Peak-intensity constraint: eta * sqrt(s) * sum(sqrt_w) = peak_power.
    sqrt_s = ap.peak_power / (ap.quantum_efficiency * float(sqrt_w.sum()))
    amplitudes = ap.quantum_efficiency * sqrt_s * sqrt_w
    powers = (sqrt_s * sqrt_s) * weights
    return ApAllocation(
        user_ids=tuple(u.id for u in order),
        powers=powers,
        amplitudes=amplitudes,
        transmit_peak=float(amplitudes.sum()),
    )


def sinr(user: UserState, allocation: NomaAllocation, sigma2: float,
         responsivity: float, interference_mode: str = "full") -> float:
    """Post-cancellation SINR of one user.

    Users decoded after this one (higher rank in the same serving set)
    cannot be cancelled and count as interference; in `full` mode the peak
    emissions of all other APs leak in through this user's gains to them.
    """
    if interference_mode not in ("intra", "full"):
        raise ParameterError(f"unknown interference mode {interference_mode!r}")
    entry = allocation.per_ap.get(user.serving_ap)
    if entry is None:
        raise DataError(f"user {user.id} has no allocated serving AP")
    try:
        k = entry.user_ids.index(user.id)
    except ValueError:
        raise DataError(f"user {user.id} missing from its serving allocation")
    if user.serving_ap not in user.gains:
        raise DataError(f"user {user.id} lacks a gain for AP {user.serving_ap}")

    h = user.gains[user.serving_ap]
    scale = responsivity * h
    signal = (entry.amplitudes[k] * scale) ** 2
    interference = float(np.sum((entry.amplitudes[k + 1:] * scale) ** 2))

    if interference_mode == "full":
        for ap_id, other in allocation.per_ap.items():
            if ap_id == user.serving_ap:
                continue
            if ap_id not in user.gains:
                raise DataError(
                    f"user {user.id} lacks a gain for AP {ap_id}"
                )
            leak = other.transmit_peak * responsivity * user.gains[ap_id]
            interference += leak * leak

    denom = sigma2 + interference
    if denom == 0.0:
        return math.inf
    return signal / denom


def rate(sinr_value: float, bandwidth: float) -> float:
    """Achievable rate in bits/s, halved for the Hermitian-symmetric signal."""
    if sinr_value < 0:
        raise ParameterError("sinr must be >= 0")
    if not bandwidth > 0:
        raise ParameterError("bandwidth must be > 0")
    return 0.5 * bandwidth * math.log2(1.0 + sinr_value)


def sum_rate(rates: Iterable[float]) -> float:
    return float(sum(rates))
