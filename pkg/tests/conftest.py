"""Shared geometry factories for the test suite."""

import numpy as np
import pytest

from isoflow import ClosedCurve


def make_perturbed_equator(seed, n=256, amp=0.18, modes=(3, 5, 8)):
    """Unit circle with a few random low-frequency radial bumps.

    Stays simple (star-shaped) for the default amplitude and carries
    curvature energy well above the round value 2*pi.
    """
    rng = np.random.default_rng(seed)
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    rho = np.ones(n)
    for m in modes:
        rho += amp / len(modes) * rng.normal() * np.cos(m * th + rng.uniform(0.0, 2.0 * np.pi))
    pts = np.column_stack([rho * np.cos(th), rho * np.sin(th)])
    return ClosedCurve(pts)


def make_dumbbell(waist=1e-4, m=96):
    """Two overlapping disks whose outline pinches to width 2*waist at x=0."""
    half = 1.0
    radius = np.sqrt(half ** 2 + waist ** 2)
    alpha = np.arcsin(waist / radius)
    a_r = np.linspace(-np.pi + alpha, np.pi - alpha, 2 * m, endpoint=True)
    right = np.column_stack([half + radius * np.cos(a_r), radius * np.sin(a_r)])
    a_l = np.linspace(alpha, 2.0 * np.pi - alpha, 2 * m, endpoint=False)[1:]
    left = np.column_stack([-half + radius * np.cos(a_l), radius * np.sin(a_l)])
    return ClosedCurve(np.vstack([right, left]))


def make_three_lobe(waist=1e-4, m=96):
    """Chain of three overlapping disks: throats at both x=-1 and x=+1.

    The two pinches sit two units apart, so neither can be preferred on
    distance grounds.
    """
    half = 1.0
    radius = np.sqrt(half ** 2 + waist ** 2)
    alpha = np.arcsin(waist / radius)
    a_r = np.linspace(-np.pi + alpha, np.pi - alpha, 2 * m, endpoint=True)
    right = np.column_stack([2.0 + radius * np.cos(a_r), radius * np.sin(a_r)])
    a_top = np.linspace(alpha, np.pi - alpha, m, endpoint=True)[1:]
    top = np.column_stack([radius * np.cos(a_top), radius * np.sin(a_top)])
    a_l = np.linspace(alpha, 2.0 * np.pi - alpha, 2 * m, endpoint=True)[1:]
    left = np.column_stack([-2.0 + radius * np.cos(a_l), radius * np.sin(a_l)])
    a_bot = np.linspace(np.pi + alpha, 2.0 * np.pi - alpha, m, endpoint=False)[1:]
    bottom = np.column_stack([radius * np.cos(a_bot), radius * np.sin(a_bot)])
    return ClosedCurve(np.vstack([right, top, left, bottom]))


def make_star(seed, n=64, base=1.0, wobble=0.35):
    """Random star-shaped polygon; always simple by construction."""
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
    # blend toward uniform spacing so no edge degenerates
    th = (th + np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)) / 2.0
    rho = base * (1.0 + wobble * rng.uniform(-1.0, 1.0, n))
    pts = np.column_stack([rho * np.cos(th), rho * np.sin(th)])
    return ClosedCurve(pts)


def make_square(side=1.0, n_per_edge=16, center=(0.0, 0.0)):
    """Axis-aligned square traversed counterclockwise."""
    s = side / 2.0
    t = np.linspace(-s, s, n_per_edge, endpoint=False)
    pts = np.concatenate([
        np.column_stack([t, np.full_like(t, -s)]),
        np.column_stack([np.full_like(t, s), t]),
        np.column_stack([-t, np.full_like(t, s)]),
        np.column_stack([np.full_like(t, -s), -t]),
    ])
    return ClosedCurve(pts + np.asarray(center, dtype=float))


@pytest.fixture
def perturbed_equator():
    return make_perturbed_equator


@pytest.fixture
def dumbbell():
    return make_dumbbell


@pytest.fixture
def three_lobe():
    return make_three_lobe


@pytest.fixture
def star():
    return make_star


@pytest.fixture
def square():
    return make_square
