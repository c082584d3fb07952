"""Satellite-to-ground channel vectors for planar-array downlinks.

Each link is a free-space path: an amplitude set by path loss, atmospheric
attenuation and array size, a random carrier phase, and a planar-array
response whose phase progression follows the link's steering coordinates.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import SatelliteState, Scenario, RadioParams, distance, upa_angles


@dataclass(frozen=True)
class ChannelVector:
    """Complex channel of one satellite-terminal link plus its generators.

    The random carrier phase is common to all antennas, so co-satellite
    channels stay correlated through their steering vectors; every entry of
    ``h`` has the same magnitude sqrt(path_gain * atmosphere_gain).
    """

    h: np.ndarray
    path_gain: float
    atmosphere_gain: float
    phase: float
    theta_x: float
    theta_y: float


def path_loss(wavelength_m, distance_m):
    """Free-space power gain (wavelength / (4 pi distance))**2."""
    if distance_m <= 0.0:
        raise ValueError("distance must be positive")
    if wavelength_m <= 0.0:
        raise ValueError("wavelength must be positive")
    ratio = wavelength_m / (4.0 * math.pi * distance_m)
    return ratio * ratio


def upa_response(theta_x, theta_y, nx, ny):
    """Unit-norm planar-array response vector.

    Kronecker product of the two per-axis responses with entries
    exp(-j*pi*(m*theta_x + n*theta_y)) / sqrt(nx*ny); the x index is the
    major (slow) index of the flattened vector.
    """
    if nx < 1 or ny < 1:
        raise ValueError("array dimensions must be at least 1")
    vx = np.exp(-1j * math.pi * theta_x * np.arange(nx)) / math.sqrt(nx)
    vy = np.exp(-1j * math.pi * theta_y * np.arange(ny)) / math.sqrt(ny)
    return np.kron(vx, vy)


def channel_vector(sat: SatelliteState, ue, radio: RadioParams, rng) -> ChannelVector:
    """Draw the channel of one link; deterministic given the generator state."""
    theta_x, theta_y = upa_angles(sat, ue)
    gain = path_loss(radio.wavelength_m, distance(sat.position, ue))
    phase = rng.uniform(0.0, 2.0 * math.pi)
    amplitude = math.sqrt(gain * radio.atmosphere_gain * radio.n_antennas)
    response = upa_response(theta_x, theta_y, radio.nx, radio.ny)
    h = amplitude * np.exp(-1j * phase) * response
    h.setflags(write=False)
    return ChannelVector(
        h=h,
        path_gain=gain,
        atmosphere_gain=radio.atmosphere_gain,
        phase=phase,
        theta_x=theta_x,
        theta_y=theta_y,
    )


def build_channel_map(scenario: Scenario, rng):
    """Channels for every (satellite, terminal) pair, drawn in fixed order."""
    channels = {}
    for sat in scenario.satellites:
        for c in range(scenario.n_ues):
            channels[(sat.id, c)] = channel_vector(sat, scenario.ues[c], scenario.radio, rng)
    return channels


def write_channel_csv(channels, path):
    """Dump a channel map to CSV: sat, ue, then interleaved re/im entries."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        n = len(next(iter(channels.values())).h) if channels else 0
        header = ["sat", "ue"]
        for i in range(n):
            header += [f"re{i}", f"im{i}"]
        writer.writerow(header)
        for (s, c) in sorted(channels):
            h = channels[(s, c)].h
            row = [s, c]
            for value in h:
                row += [repr(float(value.real)), repr(float(value.imag))]
            writer.writerow(row)
