"""Performance metrics: per-link SINR/rate and per-terminal GDOP.

Rates follow the single-satellite interference model: satellites transmit on
orthogonal frequencies, so only beams of the same satellite interfere.
GDOP uses a 3-column geometry matrix (position only, no clock column): the
receiver clock error is treated as fixed.
"""

import math

import numpy as np

SINGULAR_EIGENVALUE_THRESHOLD = 1e-10


class LinkAssignment:
    """Binary service indicator matrix (satellites x terminals)."""

    def __init__(self, alpha):
        alpha = np.asarray(alpha, dtype=bool)
        if alpha.ndim != 2:
            raise ValueError("alpha must be a 2-D matrix")
        self.alpha = alpha

    @classmethod
    def from_coalitions(cls, coalitions, n_satellites):
        """Build from a mapping terminal -> iterable of serving satellite ids."""
        n_ues = len(coalitions)
        alpha = np.zeros((n_satellites, n_ues), dtype=bool)
        for c, sats in coalitions.items():
            for s in sats:
                alpha[s, c] = True
        return cls(alpha)

    @property
    def n_satellites(self):
        return self.alpha.shape[0]

    @property
    def n_ues(self):
        return self.alpha.shape[1]

    def ues_of(self, s):
        """Terminals served by satellite s, ascending."""
        return tuple(int(c) for c in np.flatnonzero(self.alpha[s]))

    def sats_of(self, c):
        """Satellites serving terminal c, ascending."""
        return tuple(int(s) for s in np.flatnonzero(self.alpha[:, c]))

    def active_links(self):
        return [(int(s), int(c)) for s, c in zip(*np.nonzero(self.alpha))]

    def is_complete(self, serving_count):
        """True when every terminal is served by exactly `serving_count` satellites."""
        return bool(np.all(self.alpha.sum(axis=0) == serving_count))


def sinr(s, c, channels, beamformers, assignment, noise_power):
    """SINR of the link satellite s -> terminal c.

    Interference is summed over the other beams of the same satellite only.
    Raises ValueError when queried on an inactive link.
    """
    if not assignment.alpha[s, c]:
        raise ValueError(f"link ({s}, {c}) is not active")
    h = channels[(s, c)].h
    signal = abs(np.vdot(h, beamformers[(s, c)])) ** 2
    interference = 0.0
    for other in assignment.ues_of(s):
        if other != c:
            interference += abs(np.vdot(h, beamformers[(s, other)])) ** 2
    return signal / (interference + noise_power)


def rate(bandwidth, sinr_value):
    """Shannon rate in bits/s."""
    if sinr_value < 0.0:
        raise ValueError("SINR must be nonnegative")
    return bandwidth * math.log2(1.0 + sinr_value)


def satellite_rates(s, ue_ids, channels, beamformers, noise_power, bandwidth):
    """Rates of all beams of one satellite, as a dict terminal -> bits/s."""
    ue_ids = list(ue_ids)
    if not ue_ids:
        return {}
    h_rows = np.array([channels[(s, c)].h for c in ue_ids])
    w_cols = np.array([beamformers[(s, c)] for c in ue_ids]).T
    gains = np.abs(h_rows.conj() @ w_cols) ** 2  # [c, beam]
    totals = gains.sum(axis=1)
    own = np.diagonal(gains)
    rates = bandwidth * np.log2(1.0 + own / (totals - own + noise_power))
    return {c: float(r) for c, r in zip(ue_ids, rates)}


def per_ue_rates(channels, beamformers, assignment, radio):
    """Total rate of each terminal, summed over its serving satellites."""
    out = np.zeros(assignment.n_ues)
    for s in range(assignment.n_satellites):
        ue_ids = assignment.ues_of(s)
        for c, r in satellite_rates(s, ue_ids, channels, beamformers,
                                    radio.noise_power_w, radio.bandwidth_hz).items():
            out[c] += r
    return out


def sum_rate(channels, beamformers, assignment, radio):
    """Network sum rate over all active links, in bits/s."""
    return float(per_ue_rates(channels, beamformers, assignment, radio).sum())


def geometry_matrix(ue, sat_positions):
    """Unit direction rows (terminal minus satellite) / distance.

    One row per satellite; requires strictly positive distances.
    """
    ue = np.asarray(ue, dtype=float)
    rows = []
    for pos in sat_positions:
        diff = ue - np.asarray(pos, dtype=float)
        d = np.linalg.norm(diff)
        if d <= 0.0:
            raise ValueError("satellite coincides with the terminal")
        rows.append(diff / d)
    if not rows:
        raise ValueError("need at least one satellite")
    return np.array(rows)


def gdop(g_matrix):
    """Geometric dilution of precision sqrt(trace((G^T G)^-1)).

    Needs at least three direction rows. Returns ``math.inf`` when the
    directions are (near-)coplanar, i.e. the smallest eigenvalue of G^T G
    falls below ``SINGULAR_EIGENVALUE_THRESHOLD``, so callers can treat the
    geometry as infeasible.
    """
    g_matrix = np.asarray(g_matrix, dtype=float)
    if g_matrix.ndim != 2 or g_matrix.shape[1] != 3:
        raise ValueError("geometry matrix must be k x 3")
    if g_matrix.shape[0] < 3:
        raise ValueError("GDOP needs at least three satellites")
    gram = g_matrix.T @ g_matrix
    eigenvalues = np.linalg.eigvalsh(gram)
    if eigenvalues[0] < SINGULAR_EIGENVALUE_THRESHOLD:
        return math.inf
    return float(math.sqrt(np.sum(1.0 / eigenvalues)))
