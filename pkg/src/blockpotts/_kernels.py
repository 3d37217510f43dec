"""Numba kernels for the raster-scan and cluster updates.

Randomness enters only through pre-drawn uniform arrays so that one numpy
Generator, owned by the caller, controls every trajectory.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def gibbs_sweep_kernel(field, interaction, potentials, uniforms, K, diagonal):
    """One in-place raster pass of single-site conditional draws."""
    h, w = field.shape
    weights = np.empty(K)
    for r in range(h):
        for c in range(w):
            for k in range(K):
                weights[k] = potentials[r, c, k]
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    if dr == 0 and dc == 0:
                        continue
                    if not diagonal and dr != 0 and dc != 0:
                        continue
                    rr = r + dr
                    cc = c + dc
                    if 0 <= rr < h and 0 <= cc < w:
                        weights[field[rr, cc]] += interaction
            top = weights[0]
            for k in range(1, K):
                if weights[k] > top:
                    top = weights[k]
            total = 0.0
            for k in range(K):
                weights[k] = np.exp(weights[k] - top)
                total += weights[k]
            u = uniforms[r, c] * total
            chosen = K - 1
            acc = 0.0
            for k in range(K):
                acc += weights[k]
                if u < acc:
                    chosen = k
                    break
            field[r, c] = chosen
    return field


@njit(cache=True)
def icm_sweep_kernel(field, interaction, potentials, K, diagonal):
    """One in-place raster pass of greedy conditional-mode updates.

    Returns the number of sites that changed; ties pick the smallest color.
    """
    h, w = field.shape
    weights = np.empty(K)
    changed = 0
    for r in range(h):
        for c in range(w):
            for k in range(K):
                weights[k] = potentials[r, c, k]
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    if dr == 0 and dc == 0:
                        continue
                    if not diagonal and dr != 0 and dc != 0:
                        continue
                    rr = r + dr
                    cc = c + dc
                    if 0 <= rr < h and 0 <= cc < w:
                        weights[field[rr, cc]] += interaction
            best = 0
            for k in range(1, K):
                if weights[k] > weights[best]:
                    best = k
            if best != field[r, c]:
                field[r, c] = best
                changed += 1
    return changed


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def swendsen_wang_kernel(field, interaction, K, diagonal, edge_uniforms, color_uniforms):
    """One in-place cluster update: open bonds on matching edges, recolor clusters."""
    h, w = field.shape
    n = h * w
    parent = np.arange(n)
    p_open = 1.0 - np.exp(-interaction)
    ndirs = 4 if diagonal else 2
    for r in range(h):
        for c in range(w):
            i = r * w + c
            for d in range(ndirs):
                if d == 0:
                    rr, cc = r, c + 1
                elif d == 1:
                    rr, cc = r + 1, c
                elif d == 2:
                    rr, cc = r + 1, c + 1
                else:
                    rr, cc = r + 1, c - 1
                if 0 <= rr < h and 0 <= cc < w:
                    if field[rr, cc] == field[r, c] and edge_uniforms[r, c, d] < p_open:
                        ra = _find(parent, i)
                        rb = _find(parent, rr * w + cc)
                        if ra != rb:
                            parent[rb] = ra
    for r in range(h):
        for c in range(w):
            root = _find(parent, r * w + c)
            color = int(color_uniforms[root] * K)
            if color >= K:
                color = K - 1
            field[r, c] = color
    return field


@njit(cache=True)
def gibbs_chain_codes(field, interaction, potentials, uniforms, K, diagonal, codes):
    """Run one sweep per uniforms slice, recording each state as a base-K code."""
    n_sweeps = uniforms.shape[0]
    h, w = field.shape
    for t in range(n_sweeps):
        gibbs_sweep_kernel(field, interaction, potentials, uniforms[t], K, diagonal)
        code = 0
        for r in range(h):
            for c in range(w):
                code = code * K + field[r, c]
        codes[t] = code
    return field
