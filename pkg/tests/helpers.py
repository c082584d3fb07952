"""Shared helpers for the test suite."""

import numpy as np

from leoican.channel import ChannelVector


def make_channel(h):
    """Wrap a raw vector in a ChannelVector with placeholder metadata."""
    h = np.asarray(h, dtype=complex)
    return ChannelVector(h=h, path_gain=1.0, atmosphere_gain=1.0,
                         phase=0.0, theta_x=0.0, theta_y=0.0)


def random_unit(rng, n):
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return u / np.linalg.norm(u)


def random_psd(rng, n, trace):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = a @ a.conj().T
    return m * (trace / float(np.trace(m).real))


def random_feasible_set(rng, ids, n, power_cap):
    """Random PSD matrices with traces strictly inside the cap."""
    return {c: random_psd(rng, n, rng.uniform(0.05, 0.95) * power_cap) for c in ids}


def random_hermitian(rng, n):
    d = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (d + d.conj().T)
