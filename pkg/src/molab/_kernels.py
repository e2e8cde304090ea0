"""Compiled inner loops (Neumaier-compensated accumulation)."""

import numba
import numpy as np


@numba.njit(cache=True)
def neumaier_prefix(x, s, c, out):
    # out[i] = compensated sum of everything so far including x[i]
    for i in range(x.size):
        xi = x[i]
        t = s + xi
        if abs(s) >= abs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
        out[i] = s + c
    return s, c


@numba.njit(cache=True)
def neumaier_accumulate(x, s, c):
    for i in range(x.size):
        xi = x[i]
        t = s + xi
        if abs(s) >= abs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
    return s, c


class NeumaierState:
    """Running compensated sum of a complex stream, re and im kept separately."""

    __slots__ = ("re", "re_c", "im", "im_c")

    def __init__(self):
        self.re = self.re_c = self.im = self.im_c = 0.0

    def add(self, values: np.ndarray) -> None:
        v = np.asarray(values, dtype=np.complex128)
        self.re, self.re_c = neumaier_accumulate(np.ascontiguousarray(v.real), self.re, self.re_c)
        self.im, self.im_c = neumaier_accumulate(np.ascontiguousarray(v.imag), self.im, self.im_c)

    def prefix(self, values: np.ndarray) -> np.ndarray:
        """Prefix sums of ``values`` continuing from the current state."""
        v = np.asarray(values, dtype=np.complex128)
        out = np.empty(v.size, dtype=np.complex128)
        re = np.empty(v.size)
        im = np.empty(v.size)
        self.re, self.re_c = neumaier_prefix(np.ascontiguousarray(v.real), self.re, self.re_c, re)
        self.im, self.im_c = neumaier_prefix(np.ascontiguousarray(v.imag), self.im, self.im_c, im)
        out.real = re
        out.imag = im
        return out

    @property
    def total(self) -> complex:
        return complex(self.re + self.re_c, self.im + self.im_c)
