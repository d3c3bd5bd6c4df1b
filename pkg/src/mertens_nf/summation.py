"""Compensated accumulation helpers."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np


class NeumaierSum:
    """Running sum with Neumaier's improvement of Kahan compensation."""

    __slots__ = ("total", "comp")

    def __init__(self, start: float = 0.0) -> None:
        self.total = float(start)
        self.comp = 0.0

    def add(self, value: float) -> None:
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.comp += (self.total - t) + value
        else:
            self.comp += (value - t) + self.total
        self.total = t

    def __float__(self) -> float:
        return self.total + self.comp


def neumaier_sum(values: Iterable[float]) -> float:
    acc = NeumaierSum()
    for v in values:
        acc.add(v)
    return float(acc)


def two_sum(a, b):
    """Error-free transformation a + b = s + e (works on scalars and arrays)."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


class VectorNeumaier:
    """Elementwise compensated accumulator over numpy arrays of fixed shape."""

    def __init__(self, shape) -> None:
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, values: np.ndarray) -> None:
        s, e = two_sum(self.total, values)
        self.total = s
        self.comp += e

    def value(self) -> np.ndarray:
        return self.total + self.comp


def exact_sum(values: np.ndarray) -> float:
    return math.fsum(np.asarray(values, dtype=float).tolist())
