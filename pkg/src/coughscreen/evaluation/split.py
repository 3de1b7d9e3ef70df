"""Stratified, optionally recording-grouped train/test partitioning."""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from ..errors import InsufficientData
from ..models.common import encode_labels


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(labels, fraction: float = 0.8, seed: int = 0, groups=None):
    """Partition indices into ``(train_idx, test_idx)``.

    Each class keeps ``fraction`` of its examples on the training side. With
    ``groups`` (e.g. parent recording ids) whole groups move together, so the
    per-class counts are met as closely as group sizes allow. Deterministic
    for a fixed seed; both outputs are sorted.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    y = encode_labels(labels)
    n = len(y)
    if groups is None:
        groups = np.arange(n).astype(str)
    groups = np.asarray([str(g) for g in groups])
    if len(groups) != n:
        raise ValueError("groups must align with labels")

    members = defaultdict(list)
    for i, g in enumerate(groups):
        members[g].append(i)

    rng = np.random.default_rng(seed)
    test = []
    for cls in (0, 1):
        # A group is filed under the label of its first member.
        cls_groups = sorted(g for g, idx in members.items() if y[idx[0]] == cls)
        n_cls = sum(len(members[g]) for g in cls_groups)
        if n_cls < 2 or len(cls_groups) < 2:
            raise InsufficientData(f"class {cls} needs at least two examples/groups, has "
                                   f"{n_cls} examples in {len(cls_groups)} groups")
        target = min(max(_half_up((1.0 - fraction) * n_cls), 1), n_cls - 1)
        order = rng.permutation(len(cls_groups))
        taken = 0
        chosen = 0
        for j in order:
            g = cls_groups[j]
            size = len(members[g])
            if taken >= target:
                break
            if chosen == len(cls_groups) - 1:
                break
            if abs(taken + size - target) < abs(taken - target) or taken == 0:
                test.extend(members[g])
                taken += size
                chosen += 1
    test_idx = np.array(sorted(test), dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx
