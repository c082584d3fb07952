"""Randomized invariant battery behind the `leoican validate` subcommand."""

import math

import numpy as np

from . import oracles
from .beamforming import mrt_weight, rank1_extract, zf_satellite
from .channel import build_channel_map, upa_response
from .convex_kernel import SurrogateProblem, solve_surrogate, surrogate_gradient
from .geometry import ScenarioSpec, distance, generate_scenario, upa_angles
from .metrics import gdop, geometry_matrix


def _random_unit_rows(rng, count):
    rows = rng.standard_normal((count, 3))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _random_rotation(rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def run_validation(seed=0):
    """Run all invariant checks; returns a list of (name, ok, detail)."""
    rng = np.random.default_rng(seed)
    checks = []

    def check(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    # distance is a metric
    worst = 0.0
    for _ in range(200):
        a, b, c = rng.standard_normal((3, 3)) * 1e6
        violation = distance(a, c) - (distance(a, b) + distance(b, c))
        worst = max(worst, violation)
        worst = max(worst, abs(distance(a, b) - distance(b, a)))
    check("distance metric properties", worst <= 1e-6, f"worst violation {worst:.2e}")

    # planar-array response: unit norm and Kronecker indexing
    worst = 0.0
    for _ in range(100):
        nx, ny = rng.integers(1, 9, size=2)
        tx, ty = rng.uniform(-1.0, 1.0, size=2)
        v = upa_response(tx, ty, nx, ny)
        worst = max(worst, abs(np.linalg.norm(v) - 1.0))
        m, n = rng.integers(0, nx), rng.integers(0, ny)
        expected = np.exp(-1j * math.pi * (m * tx + n * ty)) / math.sqrt(nx * ny)
        worst = max(worst, abs(v[m * ny + n] - expected))
    check("array response norm/indexing", worst <= 1e-12, f"worst error {worst:.2e}")

    # steering angles match direction cosines on a generated scenario
    scenario = generate_scenario(ScenarioSpec(), seed=seed + 1)
    worst = 0.0
    for sat in scenario.satellites:
        for ue in scenario.ues:
            tx, ty = upa_angles(sat, ue)
            rx, ry = oracles.upa_angles_reference(sat, ue)
            worst = max(worst, abs(tx - rx), abs(ty - ry))
            worst = max(worst, max(0.0, tx * tx - (1.0 - ty * ty) - 1e-12))
    check("steering angle identities", worst <= 1e-12, f"worst error {worst:.2e}")

    # channel norm identity
    channels = build_channel_map(scenario, np.random.default_rng(seed + 2))
    radio = scenario.radio
    worst = 0.0
    for value in channels.values():
        target = value.path_gain * value.atmosphere_gain * radio.n_antennas
        worst = max(worst, abs(np.linalg.norm(value.h) ** 2 / target - 1.0))
    check("channel norm identity", worst <= 1e-9, f"worst rel error {worst:.2e}")

    # GDOP: rotation invariance, monotonicity, cofactor cross-check
    worst = 0.0
    mono = 0.0
    for _ in range(100):
        rows = _random_unit_rows(rng, rng.integers(4, 9))
        value = gdop(rows)
        if math.isinf(value):
            continue
        rotated = gdop(rows @ _random_rotation(rng).T)
        worst = max(worst, abs(rotated - value) / value)
        worst = max(worst, abs(oracles.gdop_cofactor(rows) - value) / value)
        extra = gdop(np.vstack([rows, _random_unit_rows(rng, 1)]))
        mono = max(mono, extra - value)
    check("gdop invariances", worst <= 1e-9 and mono <= 1e-9,
          f"rel err {worst:.2e}, monotonicity slack {mono:.2e}")

    # minorant property and solver ascent on random small instances
    worst_minorant = -math.inf
    worst_ascent = -math.inf
    worst_grad = 0.0
    for _ in range(20):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(2, 5))
        h = {c: rng.standard_normal(n) + 1j * rng.standard_normal(n) for c in range(k)}
        power = 2.0

        def random_feasible():
            q = {}
            for c in range(k):
                a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                m = a @ a.conj().T
                q[c] = m * (rng.uniform(0.1, 1.0) * power / np.trace(m).real)
            return q

        anchor = random_feasible()
        problem = SurrogateProblem(h, anchor, 1.0, 1.0, power)
        from .beamforming import taylor_g_bar, dc_split_rate
        point = random_feasible()
        f_vals, g_vals = dc_split_rate(point, h, 1.0, 1.0)
        for c in range(k):
            bar = taylor_g_bar(point, anchor, h[c], c, 1.0, 1.0)
            worst_minorant = max(worst_minorant, (g_vals[c] - bar) / max(abs(g_vals[c]), 1.0))
        solution = solve_surrogate(problem)
        from .convex_kernel import surrogate_objective
        worst_ascent = max(worst_ascent,
                           surrogate_objective(problem, anchor) - solution.objective)
        grad = surrogate_gradient(problem, point)
        directions = {}
        for c in range(k):
            d = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            directions[c] = 0.5 * (d + d.conj().T)
        analytic = sum(float(np.trace(grad[c] @ directions[c]).real) for c in range(k))
        numeric = oracles.finite_difference_directional(problem, point, directions, 1e-4 * power)
        worst_grad = max(worst_grad, abs(analytic - numeric) / max(abs(numeric), 1e-12))
    check("surrogate minorant/ascent/gradient",
          worst_minorant <= 1e-9 and worst_ascent <= 1e-9 and worst_grad <= 1e-5,
          f"minorant {worst_minorant:.2e}, ascent {worst_ascent:.2e}, grad {worst_grad:.2e}")

    # beamformer normalizations and zero-forcing nulling
    worst_power = 0.0
    worst_null = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        power = float(rng.uniform(0.5, 4.0))
        h = {c: rng.standard_normal(n) + 1j * rng.standard_normal(n) for c in range(k)}
        w = mrt_weight(h[0], power)
        worst_power = max(worst_power, abs(np.linalg.norm(w) ** 2 / power - 1.0))
        beams = zf_satellite(h, power)
        total = sum(float(np.linalg.norm(beams[c]) ** 2) for c in beams)
        worst_power = max(worst_power, abs(total / (power * k) - 1.0))
        beta = abs(np.vdot(h[0], beams[0]))  # common diagonal gain
        for c in beams:
            for cp in beams:
                if c != cp:
                    cross = abs(np.vdot(h[c], beams[cp])) / beta
                    worst_null = max(worst_null, cross)
    check("beamformer power/nulling", worst_power <= 1e-9 and worst_null <= 1e-8,
          f"power rel err {worst_power:.2e}, nulling {worst_null:.2e}")

    # rank-1 extraction is the best rank-1 approximation
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 6))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q = a @ a.conj().T
        w = rank1_extract(q)
        eigenvalues = np.linalg.eigvalsh(q)
        residual = np.linalg.norm(q - np.outer(w, w.conj())) ** 2
        expected = float(np.sum(eigenvalues[:-1] ** 2))
        worst = max(worst, abs(residual - expected) / max(expected, 1e-12))
    check("rank-1 extraction optimality", worst <= 1e-8, f"worst rel err {worst:.2e}")

    # scenario generation determinism
    s1 = generate_scenario(ScenarioSpec(), seed=seed + 3)
    s2 = generate_scenario(ScenarioSpec(), seed=seed + 3)
    same = np.array_equal(s1.ues, s2.ues) and all(
        np.array_equal(a.position, b.position) and np.array_equal(a.frame, b.frame)
        for a, b in zip(s1.satellites, s2.satellites))
    check("scenario determinism", same)

    return checks
