"""Second-order forward jets.

A :class:`Jet2` carries a value together with its gradient and Hessian with
respect to a fixed set of coordinates. All three may carry a leading batch
shape so that many sample points are propagated through one expression walk.
"""
from __future__ import annotations

import numpy as np


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


class Jet2:
    """Value, gradient and Hessian of a scalar, possibly batched.

    ``value`` has shape ``B``, ``grad`` ``B + (d,)`` and ``hess`` ``B + (d, d)``.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, c: float, batch: tuple, dim: int) -> "Jet2":
        return cls(np.full(batch, float(c)), np.zeros(batch + (dim,)),
                   np.zeros(batch + (dim, dim)))

    @classmethod
    def variable(cls, values: np.ndarray, index: int, dim: int) -> "Jet2":
        values = np.asarray(values, dtype=float)
        grad = np.zeros(values.shape + (dim,))
        grad[..., index] = 1.0
        return cls(values, grad, np.zeros(values.shape + (dim, dim)))

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad,
                    self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad,
                    self.hess - other.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        av, bv = a.value[..., None], b.value[..., None]
        # the two outer products sum to a bitwise-symmetric matrix
        cross = _outer(a.grad, b.grad) + _outer(b.grad, a.grad)
        return Jet2(a.value * b.value, av * b.grad + bv * a.grad,
                    av[..., None] * b.hess + bv[..., None] * a.hess + cross)

    def compose(self, f0, f1, f2) -> "Jet2":
        """Chain rule for a scalar function with values ``f0`` and
        derivatives ``f1``, ``f2`` already evaluated at ``self.value``."""
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        return Jet2(f0, f1[..., None] * self.grad,
                    f1[..., None, None] * self.hess
                    + f2[..., None, None] * _outer(self.grad, self.grad))

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"
