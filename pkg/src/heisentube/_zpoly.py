"""Exact polynomials in (z_1..z_n, conj z_1..conj z_n).

Every gauge used here is polynomial in the real and imaginary parts of the
coordinates, so first and second Wirtinger derivatives can be obtained by
formal differentiation with exact (dyadic rational) coefficients.  This is
deliberately tiny: add, multiply, differentiate, evaluate.
"""

import numpy as np


class ZPoly:
    """Polynomial in z_1..z_n and their conjugates.

    Terms map (alpha, beta) -> coefficient, where alpha and beta are the
    multi-indices of the z and conj(z) powers.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = int(n)
        self.terms = {}
        if terms:
            for key, c in terms.items():
                c = complex(c)
                if c != 0:
                    self.terms[key] = c

    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, n, c):
        zero = (0,) * n
        return cls(n, {(zero, zero): c})

    @classmethod
    def var(cls, n, k):
        alpha = [0] * n
        alpha[k] = 1
        return cls(n, {(tuple(alpha), (0,) * n): 1.0})

    @classmethod
    def var_conj(cls, n, k):
        beta = [0] * n
        beta[k] = 1
        return cls(n, {((0,) * n, tuple(beta)): 1.0})

    @classmethod
    def re(cls, n, k):
        return 0.5 * (cls.var(n, k) + cls.var_conj(n, k))

    @classmethod
    def im(cls, n, k):
        # (z - conj z) / (2i) = -i/2 * (z - conj z)
        return (-0.5j) * (cls.var(n, k) - cls.var_conj(n, k))

    # ------------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ZPoly):
            other = ZPoly.constant(self.n, other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0.0) + c
        return ZPoly(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return ZPoly(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ZPoly):
            other = ZPoly.constant(self.n, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ZPoly):
            return ZPoly(self.n, {k: c * other for k, c in self.terms.items()})
        out = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (
                    tuple(x + y for x, y in zip(a1, a2)),
                    tuple(x + y for x, y in zip(b1, b2)),
                )
                out[key] = out.get(key, 0.0) + c1 * c2
        return ZPoly(self.n, out)

    __rmul__ = __mul__

    # ------------------------------------------------------------------
    def diff_z(self, k):
        out = {}
        for (alpha, beta), c in self.terms.items():
            if alpha[k] == 0:
                continue
            a = list(alpha)
            coeff = c * a[k]
            a[k] -= 1
            key = (tuple(a), beta)
            out[key] = out.get(key, 0.0) + coeff
        return ZPoly(self.n, out)

    def diff_zbar(self, k):
        out = {}
        for (alpha, beta), c in self.terms.items():
            if beta[k] == 0:
                continue
            b = list(beta)
            coeff = c * b[k]
            b[k] -= 1
            key = (alpha, tuple(b))
            out[key] = out.get(key, 0.0) + coeff
        return ZPoly(self.n, out)

    # ------------------------------------------------------------------
    def __call__(self, pts):
        z = np.asarray(pts, dtype=complex)
        scalar = z.ndim == 1
        if scalar:
            z = z[None, :]
        if z.shape[-1] != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {z.shape[-1]}")
        zc = np.conj(z)
        out = np.zeros(z.shape[0], dtype=complex)
        for (alpha, beta), c in self.terms.items():
            term = np.full(z.shape[0], c)
            for k, a in enumerate(alpha):
                if a:
                    term = term * z[:, k] ** a
            for k, b in enumerate(beta):
                if b:
                    term = term * zc[:, k] ** b
            out += term
        return out[0] if scalar else out

    def __repr__(self):
        return f"ZPoly(n={self.n}, {len(self.terms)} terms)"
