"""Shared fixtures for routing tests: constructed network layouts."""

import numpy as np

from scglab.model import ModelParams, Window
from scglab.point_process import PointSet
from scglab.protocol import NetworkRealization


def wall_fixture(seed: int, lam: float = 3.0, beta_e: float = 0.8,
                 height: float = 12.0, spacing: float = 0.12
                 ) -> NetworkRealization:
    """Random legit layout plus a dense double column of eavesdroppers
    bisecting the window at x = 6: every direct-path wall crossing violates
    the eavesdropper condition, while relaxed-security paths cross freely.
    Node 0 and node 1 are deterministic anchors left and right of the wall.
    """
    params = ModelParams(lambda_l=lam, lambda_e=0.0, p=0.4, eta=1.0,
                         beta_l=0.5, beta_e=beta_e)
    window = Window(0.0, 0.0, 12.0, height)
    rng = np.random.default_rng(seed)
    n = rng.poisson(params.lambda_l * window.area)
    xs = rng.uniform(0, 12, n)
    ys = rng.uniform(0, height, n)
    anchor_y = height * 0.625
    xs = np.concatenate(([1.5, 10.5], xs))
    ys = np.concatenate(([anchor_y, anchor_y], ys))
    legit = PointSet(xs, ys, window)
    wall_y = np.arange(spacing / 2, height, spacing)
    ex = np.concatenate([np.full(wall_y.size, 5.95), np.full(wall_y.size, 6.05)])
    ey = np.concatenate([wall_y, wall_y])
    eds = PointSet(ex, ey, window)
    return NetworkRealization(params, window, legit, eds)
