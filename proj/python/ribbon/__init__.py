#  This source code is licensed under the Apache 2.0 License
#  (found in the LICENSE file in the root directory).

"""Ribbon filters: compact static approximate-membership structures."""

from __future__ import annotations

import json
from typing import Iterable, Optional, Union

from . import _ribbon
from ._ribbon import ConstructionFailed, FormatError, hash_key, recommended_epsilon, space_overhead

__all__ = [
    "ConstructionFailed",
    "Filter",
    "FormatError",
    "add_till_failure",
    "build",
    "failure_rate",
    "fpr",
    "hash_key",
    "recommended_epsilon",
    "space_overhead",
]

Key = Union[str, bytes, int]


def _key_hash(key: Key) -> int:
    """Strings and bytes are hashed; integers are taken as 64-bit key hashes."""
    if isinstance(key, int):
        return key & 0xFFFFFFFFFFFFFFFF
    if isinstance(key, str):
        key = key.encode()
    return hash_key(key)


class Filter:
    """A built, immutable filter. `report` is set for freshly built filters."""

    def __init__(self, core: _ribbon.Filter, report: Optional[dict] = None):
        self._core = core
        self.report = report

    def __contains__(self, key: Key) -> bool:
        return self._core.contains_hash(_key_hash(key))

    def contains(self, key: Key) -> bool:
        return key in self

    def contains_many(self, keys: Iterable[Key]) -> list[bool]:
        return self._core.contains_hashes([_key_hash(k) for k in keys])

    @property
    def variant(self) -> str:
        return self._core.variant

    @property
    def w(self) -> int:
        return self._core.w

    @property
    def num_keys(self) -> int:
        return self._core.num_keys

    @property
    def total_bits(self) -> int:
        return self._core.total_bits

    @property
    def bits_per_key(self) -> float:
        return self._core.bits_per_key

    def drop_columns(self, k: int) -> "Filter":
        return Filter(self._core.drop_columns(k))

    def serialize(self) -> bytes:
        return self._core.serialize()

    @staticmethod
    def deserialize(data: bytes) -> "Filter":
        return Filter(_ribbon.Filter.deserialize(data))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Filter) and self._core == other._core


def build(
    keys: Iterable[Key],
    variant: str = "standard",
    *,
    w: int = 64,
    r: float = 7.0,
    epsilon: Optional[float] = None,
    smash: Optional[int] = None,
    seed: int = 0,
    max_retries: int = 8,
    column_major: bool = False,
) -> Filter:
    hashes = [_key_hash(k) for k in keys]
    core, report = _ribbon.build(hashes, variant, w, r, epsilon, smash, seed, max_retries, column_major)
    return Filter(core, json.loads(report))


def fpr(filter: Filter, trials: int = 10_000_000, seed: int = 0) -> dict:
    return json.loads(_ribbon.fpr(filter._core, trials, seed))


def failure_rate(
    w: int, m: int, epsilon: float, *, smash: int = 0, r: int = 16, trials: int = 200, seed: int = 0
) -> dict:
    return json.loads(_ribbon.failure_rate(w, m, epsilon, smash, r, trials, seed))


def add_till_failure(w: int, m: int, *, smash: int = 0, r: int = 16, trials: int = 201, seed: int = 0) -> dict:
    return json.loads(_ribbon.add_till_failure(w, m, smash, r, trials, seed))
