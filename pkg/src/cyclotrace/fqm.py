"""Even lattices, discriminant forms, and vector-valued sparse q-series.

The series type VVSeries stores a map (component, rational exponent) ->
rational coefficient together with a weight tag and a pi-power tag, and
supports tensor products, restriction and trace along a finite-index
sublattice, Rankin--Cohen brackets, and the constant-term pairing.
Numeric helpers evaluate Weil representation matrices, truncated series,
and the Siegel theta function of a signature (1,2) lattice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import (
    GammaPole,
    IncompatibleEmbedding,
    InsufficientPrecision,
    NotPositiveDefinite,
    SingularGram,
)

__all__ = [
    "IntLattice",
    "FQModule",
    "LatticeEmbedding",
    "VVSeries",
    "disc_group",
    "theta_series",
    "tensor",
    "restrict",
    "trace_up",
    "rankin_cohen",
    "ct_pairing",
    "weil_matrices",
    "milgram_defect",
    "eval_series",
    "siegel_theta_eval",
]


# ----------------------------------------------------------------------
# exact linear algebra helpers (small integer matrices)


def _mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _det(M) -> Fraction:
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        inv = 1 / A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] * inv
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return det


def _inverse(M) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise SingularGram("matrix is singular")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _signature(gram) -> tuple[int, int]:
    """(number of positive, number of negative) eigenvalue signs, exact."""
    n = len(gram)
    A = [[Fraction(x) for x in row] for row in gram]
    pos = neg = 0
    idx = 0
    while idx < n:
        if A[idx][idx] == 0:
            j = next((j for j in range(idx + 1, n) if A[idx][j] != 0 or A[j][j] != 0), None)
            if j is None:
                idx += 1
                continue
            if A[j][j] != 0:
                A[idx], A[j] = A[j], A[idx]
                for row in A:
                    row[idx], row[j] = row[j], row[idx]
            else:
                # A[idx][j] != 0: add row/col j to idx to create a pivot
                for t in range(n):
                    A[idx][t] += A[j][t]
                for t in range(n):
                    A[t][idx] += A[t][j]
        d = A[idx][idx]
        if d == 0:
            idx += 1
            continue
        if d > 0:
            pos += 1
        else:
            neg += 1
        for r in range(idx + 1, n):
            f = A[r][idx] / d
            if f:
                for t in range(idx, n):
                    A[r][t] -= f * A[idx][t]
                for t in range(idx, n):
                    A[t][r] = A[r][t]
        idx += 1
    return pos, neg


def smith_normal_form(M):
    """U, D, V with U M V = D diagonal, d1 | d2 | ..., U, V unimodular."""
    A = [row[:] for row in M]
    n, m = len(A), len(A[0])
    U, V = _identity(n), _identity(m)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for row in A:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    def negate_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]

    t = 0
    while t < min(n, m):
        # find a nonzero pivot
        piv = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j]:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            # clear column t
            changed = False
            for i in range(t + 1, n):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(t, i, -q)
                    if A[i][t]:
                        swap_rows(t, i)
                    changed = True
            for j in range(t + 1, m):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(t, j, -q)
                    if A[t][j]:
                        swap_cols(t, j)
                    changed = True
            if not changed:
                break
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    # enforce divisibility d1 | d2 | ... (fixpoint; folds can disturb later slots)
    k = min(n, m)
    while True:
        dirty = False
        for i in range(k):
            if A[i][i] < 0:
                negate_row(i)
            for j in range(i + 1, k):
                if A[i][i] and A[j][j] % A[i][i]:
                    dirty = True
                    add_col(j, i, 1)
                    while True:
                        changed = False
                        for r in range(i + 1, n):
                            if A[r][i]:
                                q = A[r][i] // A[i][i]
                                add_row(i, r, -q)
                                if A[r][i]:
                                    swap_rows(i, r)
                                changed = True
                        for c in range(i + 1, m):
                            if A[i][c]:
                                q = A[i][c] // A[i][i]
                                add_col(i, c, -q)
                                if A[i][c]:
                                    swap_cols(i, c)
                                changed = True
                        if not changed:
                            break
        if not dirty:
            break
    for i in range(k):
        if A[i][i] < 0:
            negate_row(i)
    return U, A, V


# ----------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class IntLattice:
    """An even lattice given by a symmetric integer Gram matrix.

    The quadratic form is q(x) = x . gram . x / 2, integer-valued on
    lattice vectors because the diagonal is even.
    """

    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = self.gram
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("gram must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram must be symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise ValueError("gram diagonal must be even (even lattice)")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        d = _det(self.gram)
        assert d.denominator == 1
        return int(d)

    @property
    def signature(self) -> tuple[int, int]:
        return _signature(self.gram)

    @property
    def is_positive_definite(self) -> bool:
        pos, neg = self.signature
        return neg == 0 and pos == self.rank

    def q(self, v) -> Fraction:
        acc = Fraction(0)
        g = self.gram
        n = self.rank
        for i in range(n):
            for j in range(n):
                acc += Fraction(v[i]) * g[i][j] * Fraction(v[j])
        return acc / 2

    def bilinear(self, v, w) -> Fraction:
        acc = Fraction(0)
        g = self.gram
        n = self.rank
        for i in range(n):
            for j in range(n):
                acc += Fraction(v[i]) * g[i][j] * Fraction(w[j])
        return acc


def _frac_mod1(x: Fraction) -> Fraction:
    return x - Fraction(math.floor(x))


class FQModule:
    """Finite quadratic module L'/L of an even lattice.

    Elements are tuples over Z/d_i (the elementary divisors of the Gram
    matrix); each element knows a representative vector in the dual
    lattice, its Q/Z-valued quadratic form value, and the bilinear form
    mod 1.  Direct sums keep the factor structure so that component
    tuples of a tensor product are concatenations.
    """

    def __init__(self, lattice: IntLattice):
        if lattice.det == 0:
            raise SingularGram("gram matrix is singular")
        self.lattice = lattice
        n = lattice.rank
        U, Dm, V = smith_normal_form([list(r) for r in lattice.gram])
        self.orders = tuple(Dm[i][i] for i in range(n))
        Uinv = _inverse(U)
        Ginv = _inverse(lattice.gram)
        self._ginv = Ginv
        # element tuple t -> integer vector m = U^{-1} t; dual vector x = G^{-1} m
        self._uinv = Uinv
        self._u = [[Fraction(x) for x in row] for row in U]
        self.elements = [tuple(t) for t in product(*(range(d) for d in self.orders))]
        self.index = {t: i for i, t in enumerate(self.elements)}
        self._rep = {}
        for t in self.elements:
            m = [sum(Uinv[i][j] * t[j] for j in range(n)) for i in range(n)]
            x = tuple(
                sum(Ginv[i][j] * m[j] for j in range(n)) for i in range(n)
            )
            self._rep[t] = x
        pos, neg = lattice.signature
        self.signature_mod_8 = (pos - neg) % 8

    @property
    def order(self) -> int:
        return len(self.elements)

    def rep_vector(self, t) -> tuple[Fraction, ...]:
        """A representative of the coset t in the dual lattice (basis coords)."""
        return self._rep[tuple(t)]

    def q_value(self, t) -> Fraction:
        return _frac_mod1(self.lattice.q(self.rep_vector(t)))

    def bilinear_value(self, t1, t2) -> Fraction:
        return _frac_mod1(self.lattice.bilinear(self.rep_vector(t1), self.rep_vector(t2)))

    def neg(self, t) -> tuple:
        return tuple((-a) % d for a, d in zip(t, self.orders))

    def element_of_vector(self, x) -> tuple:
        """The coset of a dual vector x (lattice basis coords, Fractions)."""
        n = self.lattice.rank
        g = self.lattice.gram
        m = [sum(Fraction(g[i][j]) * x[j] for j in range(n)) for i in range(n)]
        if any(mi.denominator != 1 for mi in m):
            raise ValueError(f"{x} is not in the dual lattice")
        t = []
        for i in range(n):
            val = sum(self._u[i][j] * int(m[j]) for j in range(n))
            assert val.denominator == 1
            t.append(int(val) % self.orders[i])
        return tuple(t)

    @staticmethod
    def direct_sum(A: "FQModule", B: "FQModule") -> "FQModule":
        ga, gb = A.lattice.gram, B.lattice.gram
        na, nb = len(ga), len(gb)
        rows = []
        for i in range(na):
            rows.append(tuple(ga[i]) + (0,) * nb)
        for i in range(nb):
            rows.append((0,) * na + tuple(gb[i]))
        out = FQModule.__new__(FQModule)
        out.lattice = IntLattice(tuple(rows))
        out.orders = A.orders + B.orders
        out.elements = [ta + tb for ta in A.elements for tb in B.elements]
        out.index = {t: i for i, t in enumerate(out.elements)}
        out._rep = {
            (ta + tb): A._rep[ta] + B._rep[tb] for ta in A.elements for tb in B.elements
        }
        out._ginv = None
        out._uinv = None
        out._u = None
        out.signature_mod_8 = (A.signature_mod_8 + B.signature_mod_8) % 8
        return out

    def q_values(self) -> list[Fraction]:
        return [self.q_value(t) for t in self.elements]


def disc_group(L: IntLattice) -> FQModule:
    """The discriminant form L'/L with exact q-values mod 1."""
    return FQModule(L)


def milgram_defect(M: FQModule) -> float:
    """| sum_mu e(q(mu)) - sqrt(|M|) e(sig/8) |, should vanish."""
    s = sum(cmath.exp(2j * cmath.pi * float(M.q_value(t))) for t in M.elements)
    target = math.sqrt(M.order) * cmath.exp(2j * cmath.pi * M.signature_mod_8 / 8)
    return abs(s - target)


# ----------------------------------------------------------------------
# vector-valued sparse q-series


@dataclass
class VVSeries:
    """Sparse vector-valued q-series.

    terms maps (component index, scaled exponent) -> Fraction where the
    true exponent is scaled/den.  The series represents
    pi^pi_power * sum c(mu, n) q^n e_mu, complete for exponents < prec.
    sigma in {+1, -1, None} tags which of n ≡ ±q(mu) (mod 1) the
    exponents satisfy (None when mixed, e.g. after tensor products).
    """

    module: FQModule
    weight: Fraction
    den: int
    terms: dict
    prec: Fraction
    pi_power: int = 0
    sigma: int | None = None

    def coefficient(self, comp: int, exponent: Fraction) -> Fraction:
        n = Fraction(exponent) * self.den
        if n.denominator != 1:
            return Fraction(0)
        return self.terms.get((comp, int(n)), Fraction(0))

    def exponent_floor(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return Fraction(min(n for (_, n) in self.terms), self.den)

    def nonzero_components(self) -> set[int]:
        return {c for (c, _n) in self.terms}

    def validate_support(self) -> None:
        """Check the sigma-congruence n ≡ sigma q(mu) (mod 1) for all terms."""
        if self.sigma is None:
            return
        for (c, n) in self.terms:
            mu = self.module.elements[c]
            want = _frac_mod1(self.sigma * self.module.q_value(mu))
            got = _frac_mod1(Fraction(n, self.den))
            assert got == want, (c, Fraction(n, self.den), want)

    def scale(self, factor: Fraction) -> "VVSeries":
        f = Fraction(factor)
        return VVSeries(
            module=self.module,
            weight=self.weight,
            den=self.den,
            terms={k: f * v for k, v in self.terms.items()},
            prec=self.prec,
            pi_power=self.pi_power,
            sigma=self.sigma,
        )

    def theta_q(self) -> "VVSeries":
        """The exponent-multiplication operator q d/dq (keeps rationality)."""
        return VVSeries(
            module=self.module,
            weight=self.weight + 2,
            den=self.den,
            terms={k: v * Fraction(k[1], self.den) for k, v in self.terms.items()},
            prec=self.prec,
            pi_power=self.pi_power,
            sigma=self.sigma,
        )

    def __add__(self, other: "VVSeries") -> "VVSeries":
        if self.module.orders != other.module.orders or self.den != other.den:
            raise ValueError("incompatible series")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        terms = {k: v for k, v in terms.items() if v != 0}
        assert self.pi_power == other.pi_power and self.weight == other.weight
        return VVSeries(
            module=self.module,
            weight=self.weight,
            den=self.den,
            terms=terms,
            prec=min(self.prec, other.prec),
            pi_power=self.pi_power,
            sigma=self.sigma if self.sigma == other.sigma else None,
        )

    # -- serialization (line-based text format) --

    def to_text(self) -> str:
        prec_scaled = Fraction(self.prec) * self.den
        head = (
            f"weight={self.weight} pi_power={self.pi_power} "
            f"sigma={self.sigma if self.sigma is not None else 0} "
            f"den={self.den} prec={prec_scaled}"
        )
        lines = [head]
        for (c, n) in sorted(self.terms):
            v = self.terms[(c, n)]
            lines.append(f"{c}\t{n}\t{v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str, module: FQModule) -> "VVSeries":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = dict(item.split("=") for item in lines[0].split())
        den = int(head["den"])
        sigma = int(head["sigma"]) or None
        terms = {}
        for ln in lines[1:]:
            c, n, v = ln.split("\t")
            num, denom = v.split("/")
            terms[(int(c), int(n))] = Fraction(int(num), int(denom))
        return VVSeries(
            module=module,
            weight=Fraction(head["weight"]),
            den=den,
            terms=terms,
            prec=Fraction(head["prec"]) / den,
            pi_power=int(head["pi_power"]),
            sigma=sigma,
        )


def theta_series(K: IntLattice, prec, module: FQModule | None = None) -> VVSeries:
    """Vector-valued theta series of a positive definite even lattice.

    Coefficient at (mu, n) counts vectors of norm q = n in the coset
    K + mu; weight rank/2, complete for exponents < prec.
    """
    if not K.is_positive_definite:
        raise NotPositiveDefinite("theta series needs a positive definite lattice")
    M = module if module is not None else FQModule(K)
    prec = Fraction(prec)
    den = _exponent_denominator(M)
    terms = {}
    n = K.rank
    for ci, t in enumerate(M.elements):
        shift = M.rep_vector(t)
        for v in _enumerate_coset(K, shift, prec):
            qv = K.q(v)
            key = (ci, int(qv * den))
            terms[key] = terms.get(key, Fraction(0)) + 1
    return VVSeries(
        module=M,
        weight=Fraction(K.rank, 2),
        den=den,
        terms=terms,
        prec=prec,
        pi_power=0,
        sigma=+1,
    )


def _exponent_denominator(M: FQModule) -> int:
    den = 1
    for t in M.elements:
        den = den * M.q_value(t).denominator // math.gcd(den, M.q_value(t).denominator)
    return den


def _enumerate_coset(K: IntLattice, shift, prec: Fraction):
    """All vectors x = shift + v, v integral, with q(x) < prec."""
    n = K.rank
    gram = [[Fraction(x) for x in row] for row in K.gram]
    # exact Cholesky-style bounds: q(x) = sum_i d_i (x_i + sum_{j>i} r_ij x_j)^2
    d = [Fraction(0)] * n
    r = [[Fraction(0)] * n for _ in range(n)]
    A = [row[:] for row in gram]
    for i in range(n):
        d[i] = A[i][i] / 2
        for j in range(i + 1, n):
            r[i][j] = A[i][j] / (2 * d[i])
        for k in range(i + 1, n):
            for l in range(i + 1, n):
                A[k][l] -= (A[i][k] * A[i][l]) / A[i][i]
    out = []

    def rec(idx, partial, budget):
        # remaining coordinates idx..0; budget = prec - q(contributions above)
        if idx < 0:
            out.append(tuple(partial[::-1]))
            return
        # x_idx + shift_idx + sum_{j>idx} r[idx][j]*(x_j+shift_j) bounded by sqrt(budget/d_idx)
        off = Fraction(shift[idx])
        for j in range(idx + 1, n):
            off += r[idx][j] * (partial[n - 1 - j] + Fraction(shift[j]))
        bound = budget / d[idx]
        lim = math.isqrt(int(bound) + 1) + 2
        base = -off
        lo = math.floor(float(base) - float(lim)) - 2
        hi = math.ceil(float(base) + float(lim)) + 2
        for x in range(lo, hi + 1):
            val = d[idx] * (x + off) ** 2
            if val < budget:
                rec(idx - 1, partial + [x], budget - val)

    rec(n - 1, [], prec)
    return [tuple(Fraction(shift[i]) + v[i] for i in range(n)) for v in out]


def tensor(f: VVSeries, g: VVSeries, module: FQModule | None = None) -> VVSeries:
    """Componentwise tensor product over the direct-sum module."""
    M = module if module is not None else FQModule.direct_sum(f.module, g.module)
    den = _lcm(f.den, g.den)
    nf, ng = len(f.module.elements), len(g.module.elements)
    floor_f, floor_g = f.exponent_floor(), g.exponent_floor()
    prec = min(f.prec + floor_g, g.prec + floor_f)
    terms = {}
    for (cf, nf_), vf in f.terms.items():
        for (cg, ng_), vg in g.terms.items():
            e = Fraction(nf_, f.den) + Fraction(ng_, g.den)
            if e >= prec:
                continue
            key = (cf * ng + cg, int(e * den))
            terms[key] = terms.get(key, Fraction(0)) + vf * vg
    terms = {k: v for k, v in terms.items() if v != 0}
    return VVSeries(
        module=M,
        weight=f.weight + g.weight,
        den=den,
        terms=terms,
        prec=prec,
        pi_power=f.pi_power + g.pi_power,
        sigma=f.sigma if f.sigma == g.sigma else None,
    )


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class LatticeEmbedding:
    """A finite-index inclusion K ⊂ L of even lattices of equal rank.

    `matrix` has the K-basis vectors as columns, written in L-coordinates.
    """

    source: FQModule
    target: FQModule
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        K, L = self.source.lattice, self.target.lattice
        n = K.rank
        if L.rank != n:
            raise IncompatibleEmbedding("ranks differ")
        M = [list(r) for r in self.matrix]
        GL = [list(r) for r in L.gram]
        MT = [[M[j][i] for j in range(n)] for i in range(n)]
        gram_K = _mat_mul(_mat_mul(MT, GL), M)
        if any(gram_K[i][j] != K.gram[i][j] for i in range(n) for j in range(n)):
            raise IncompatibleEmbedding("gram matrices incompatible with the inclusion")
        idx = self.index
        if idx * idx * self.target.order != self.source.order:
            raise IncompatibleEmbedding("index^2 |L'/L| != |K'/K|")

    @property
    def index(self) -> int:
        d = _det(self.matrix)
        assert d.denominator == 1 and d != 0
        return abs(int(d))

    def source_vector_in_target(self, x) -> tuple[Fraction, ...]:
        n = self.source.lattice.rank
        return tuple(
            sum(Fraction(self.matrix[i][j]) * x[j] for j in range(n)) for i in range(n)
        )

    def in_target_dual(self, t_source) -> bool:
        """Does the coset t of K'/K lie in L'/K?"""
        xL = self.source_vector_in_target(self.source.rep_vector(t_source))
        GL = self.target.lattice.gram
        n = len(GL)
        for i in range(n):
            if sum(Fraction(GL[i][j]) * xL[j] for j in range(n)).denominator != 1:
                return False
        return True

    def bar(self, t_source) -> tuple:
        """The image of t in L'/L (requires t in L'/K)."""
        xL = self.source_vector_in_target(self.source.rep_vector(t_source))
        return self.target.element_of_vector(xL)


def restrict(f: VVSeries, E: LatticeEmbedding) -> VVSeries:
    """Restriction along K ⊂ L: component mu of K'/K reads f at its image
    in L'/L when mu is in L'/K, and is zero otherwise."""
    if f.module.orders != E.target.orders:
        raise IncompatibleEmbedding("series does not live on the target module")
    den = _lcm(f.den, _exponent_denominator(E.source))
    terms = {}
    tgt_index = E.target.index
    for ti, t in enumerate(E.source.elements):
        if not E.in_target_dual(t):
            continue
        bar = E.bar(t)
        ci = tgt_index[bar]
        for (c, n), v in f.terms.items():
            if c == ci:
                terms[(ti, n * (den // f.den))] = v
    return VVSeries(
        module=E.source,
        weight=f.weight,
        den=den,
        terms=terms,
        prec=f.prec,
        pi_power=f.pi_power,
        sigma=f.sigma,
    )


def trace_up(g: VVSeries, E: LatticeEmbedding) -> VVSeries:
    """Trace along K ⊂ L: component mu-bar of L'/L sums g over the fiber
    of L'/K -> L'/L above it."""
    if g.module.orders != E.source.orders:
        raise IncompatibleEmbedding("series does not live on the source module")
    den = _lcm(g.den, _exponent_denominator(E.target))
    terms = {}
    tgt_index = E.target.index
    for ti, t in enumerate(E.source.elements):
        if not E.in_target_dual(t):
            continue
        ci = tgt_index[E.bar(t)]
        for (c, n), v in g.terms.items():
            if c == ti:
                key = (ci, n * (den // g.den))
                terms[key] = terms.get(key, Fraction(0)) + v
    terms = {k: v for k, v in terms.items() if v != 0}
    return VVSeries(
        module=E.target,
        weight=g.weight,
        den=den,
        terms=terms,
        prec=g.prec,
        pi_power=g.pi_power,
        sigma=g.sigma,
    )


def _gamma_ratio_product(kappa: Fraction, n: int, s: int) -> Fraction:
    """Gamma(kappa+n) / (Gamma(s+1) Gamma(kappa+n-s)) as an exact rational."""
    num = Fraction(1)
    for i in range(1, s + 1):
        num *= kappa + n - i
    den = math.factorial(s)
    return num / den


def rankin_cohen(f: VVSeries, g: VVSeries, n: int, module: FQModule | None = None) -> VVSeries:
    """n-th Rankin--Cohen bracket via the exponent operator q d/dq.

    [f, g]_n = sum_{r+s=n} (-1)^r C(kappa, s) C(ell, r) theta^r f ⊗ theta^s g
    with C(kappa, s) = Gamma(kappa+n)/(Gamma(s+1) Gamma(kappa+n-s)) evaluated
    as rational rising-factorial quotients; weight kappa + ell + 2n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    kappa, ell = Fraction(f.weight), Fraction(g.weight)
    for w in (kappa + n, ell + n):
        if w.denominator == 1 and w <= 0:
            raise GammaPole(f"Gamma ratio undefined for weight {w - n} with n={n}")
    M = module if module is not None else FQModule.direct_sum(f.module, g.module)
    out = None
    fr = f
    theta_fs = []
    for r in range(n + 1):
        theta_fs.append(fr)
        fr = fr.theta_q()
    gs = g
    theta_gs = []
    for s in range(n + 1):
        theta_gs.append(gs)
        gs = gs.theta_q()
    for r in range(n + 1):
        s = n - r
        coeff = (-1) ** r * _gamma_ratio_product(kappa, n, s) * _gamma_ratio_product(ell, n, r)
        if coeff == 0:
            continue
        piece = tensor(theta_fs[r], theta_gs[s], module=M).scale(coeff)
        piece.weight = kappa + ell + 2 * n
        out = piece if out is None else out + piece
    if out is None:
        out = VVSeries(module=M, weight=kappa + ell + 2 * n, den=_lcm(f.den, g.den),
                       terms={}, prec=min(f.prec, g.prec), pi_power=f.pi_power + g.pi_power)
    out.weight = kappa + ell + 2 * n
    return out


def ct_pairing(f: VVSeries, g: VVSeries) -> tuple[Fraction, int]:
    """Constant term of the bilinear pairing: sum_mu sum_n f(mu,n) g(mu,-n).

    Components are identified through equal element tuples; the result is
    (rational value, combined pi power).  Raises InsufficientPrecision if
    either series could have unknown coefficients meeting the other's
    stored ones.
    """
    if f.module.orders != g.module.orders:
        raise ValueError("component groups differ")
    need_g = -f.exponent_floor()
    need_f = -g.exponent_floor()
    if g.prec <= need_g:
        raise InsufficientPrecision(
            f"second series complete only below {g.prec}, need > {need_g}",
            required=need_g,
        )
    if f.prec <= need_f:
        raise InsufficientPrecision(
            f"first series complete only below {f.prec}, need > {need_f}",
            required=need_f,
        )
    total = Fraction(0)
    for (c, nf), vf in f.terms.items():
        e = Fraction(nf, f.den)
        ng = -e * g.den
        if ng.denominator != 1:
            continue
        total += vf * g.terms.get((c, int(ng)), Fraction(0))
    return total, f.pi_power + g.pi_power


# ----------------------------------------------------------------------
# numeric helpers


def weil_matrices(M: FQModule) -> tuple[np.ndarray, np.ndarray]:
    """Numeric matrices of rho(T) and rho(S) on the group ring of M.

    rho(T) e_mu = e(q(mu)) e_mu;
    rho(S) e_mu = e((s-r)/8)/sqrt(|M|) * sum_nu e(-(nu,mu)) e_nu.
    """
    m = M.order
    T = np.zeros((m, m), dtype=complex)
    S = np.zeros((m, m), dtype=complex)
    phase = cmath.exp(-2j * cmath.pi * M.signature_mod_8 / 8)
    for i, mu in enumerate(M.elements):
        T[i, i] = cmath.exp(2j * cmath.pi * float(M.q_value(mu)))
        for j, nu in enumerate(M.elements):
            S[j, i] = cmath.exp(-2j * cmath.pi * float(M.bilinear_value(nu, mu)))
    S *= phase / math.sqrt(m)
    return T, S


def eval_series(f: VVSeries, tau: complex, include_pi: bool = True) -> np.ndarray:
    """Numeric component vector of the truncated series at tau."""
    out = np.zeros(len(f.module.elements), dtype=complex)
    for (c, n), v in f.terms.items():
        out[c] += float(v) * cmath.exp(2j * cmath.pi * Fraction(n, f.den) * tau)
    if include_pi and f.pi_power:
        out *= math.pi**f.pi_power
    return out


def siegel_theta_eval(
    module: FQModule,
    form_map,
    tau: complex,
    z: complex,
    cutoff: int = 10,
) -> np.ndarray:
    """Siegel theta function of a signature (1,2) lattice of binary forms.

    form_map sends lattice basis coordinates to form coefficients [a,b,c];
    with p_X(z) = (a|z|^2 + bx + c)/y and Q_X(z) = az^2 + bz + c the sum is

        v * sum_mu sum_X e( q(X_z) tau + q(X_{z perp}) conj(tau) ) e_mu,

    q(X_z) = p_X(z)^2/4 and q(X_{z perp}) = -|Q_X(z)|^2 / (4 y^2).
    Truncated to |coords| <= cutoff (Gaussian tail).
    """
    v = tau.imag
    y = z.imag
    x = z.real
    out = np.zeros(len(module.elements), dtype=complex)
    assert module.lattice.rank == 3
    F = np.array([[float(form_map[i][j]) for j in range(3)] for i in range(3)])
    rng = np.arange(-cutoff, cutoff + 1)
    g0, g1, g2 = np.meshgrid(rng, rng, rng, indexing="ij")
    grid = np.stack([g0.ravel(), g1.ravel(), g2.ravel()], axis=1).astype(float)
    for ci, t in enumerate(module.elements):
        shift = np.array([float(s) for s in module.rep_vector(t)])
        abc = (grid + shift) @ F.T
        a, b, c = abc[:, 0], abc[:, 1], abc[:, 2]
        p = (a * (x * x + y * y) + b * x + c) / y
        Q = a * (z * z) + b * z + c
        qz = p * p / 4
        qperp = -np.abs(Q) ** 2 / (4 * y * y)
        out[ci] = np.sum(np.exp(2j * np.pi * (qz * tau + qperp * np.conj(tau))))
    return v * out
