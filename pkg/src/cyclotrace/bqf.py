"""Integral binary quadratic forms and their geometry.

Gauss reduction and class enumeration for definite forms, reduced-cycle
("river") enumeration for indefinite forms, automorphs from the Pell
equation, CM points, the signature (1,2) pairing, and the exact check
that no CM point of discriminant d lies on a geodesic of discriminant D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .arith import is_square
from .errors import NotDefinite, SquareDiscriminant

__all__ = [
    "BQF",
    "SL2Z",
    "CMPoint",
    "GeodesicArc",
    "disc",
    "reduce_definite",
    "definite_class_reps",
    "indefinite_class_reps",
    "reduced_cycle",
    "equivalent_indefinite",
    "pell_automorph",
    "pell_fundamental",
    "cm_point",
    "pairing",
    "stabilizer_order",
    "hypothesis_check",
    "on_geodesic_forms",
    "enumerate_definite",
    "sqrt_mod_roots",
]


@dataclass(frozen=True)
class BQF:
    """Integral binary quadratic form [a, b, c] = a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_positive_definite(self) -> bool:
        return self.disc < 0 and self.a > 0

    def content(self) -> int:
        return gcd(gcd(abs(self.a), abs(self.b)), abs(self.c))

    def value(self, z: complex) -> complex:
        """Q(z, 1) = a z^2 + b z + c."""
        return self.a * z * z + self.b * z + self.c

    def apply(self, g: "SL2Z") -> "BQF":
        """The form g.Q with (g.Q)(v) = Q(g^{-1} v), so z_{g.Q} = g(z_Q)."""
        a, b, c = self.a, self.b, self.c
        p, q, r, s = g.a, g.b, g.c, g.d
        aa = a * s * s - b * s * r + c * r * r
        bb = -2 * a * q * s + b * (p * s + q * r) - 2 * c * p * r
        cc = a * q * q - b * q * p + c * p * p
        return BQF(aa, bb, cc)

    def __neg__(self) -> "BQF":
        return BQF(-self.a, -self.b, -self.c)

    def __repr__(self) -> str:
        return f"[{self.a},{self.b},{self.c}]"


@dataclass(frozen=True)
class SL2Z:
    """Integer matrix [[a, b], [c, d]] of determinant 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")

    @staticmethod
    def identity() -> "SL2Z":
        return SL2Z(1, 0, 0, 1)

    def __mul__(self, other: "SL2Z") -> "SL2Z":
        return SL2Z(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "SL2Z":
        return SL2Z(self.d, -self.b, -self.c, self.a)

    def neg(self) -> "SL2Z":
        return SL2Z(-self.a, -self.b, -self.c, -self.d)

    def moebius(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def cocycle(self, z: complex) -> complex:
        """The automorphy factor j(g, z) = c z + d."""
        return self.c * z + self.d

    def __repr__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


S_FLIP = SL2Z(0, -1, 1, 0)


def disc(Q: BQF) -> int:
    return Q.disc


def reduce_definite(Q: BQF) -> tuple[BQF, SL2Z]:
    """Gauss-reduce a positive definite form.

    Returns the reduced form (|b| <= a <= c, with b >= 0 if |b| = a or
    a = c) and g with g.Q equal to it.
    """
    if not Q.is_positive_definite:
        raise NotDefinite(f"{Q} is not positive definite")
    a, b, c = Q.a, Q.b, Q.c
    g = SL2Z.identity()
    D = Q.disc
    while True:
        if not (-a < b <= a):
            n = (a - b) // (2 * a)
            b = b + 2 * a * n
            c = (b * b - D) // (4 * a)
            # T^{-n} sends b to b + 2an
            g = SL2Z(1, -n, 0, 1) * g
        if a > c:
            a, b, c = c, -b, a
            g = S_FLIP * g
            continue
        if a == c and b < 0:
            a, b, c = c, -b, a
            g = S_FLIP * g
        break
    red = BQF(a, b, c)
    assert red == Q.apply(g)
    return red, g


def is_reduced_definite(Q: BQF) -> bool:
    a, b, c = Q.a, Q.b, Q.c
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def definite_class_reps(d: int) -> list[BQF]:
    """All reduced positive definite forms of discriminant d < 0."""
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not a negative discriminant")
    reps = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            reps.append(BQF(a, b, c))
        a += 1
    return sorted(reps, key=lambda Q: (Q.a, Q.b, Q.c))


def enumerate_definite(d: int, a_max: int, translates: int = 0) -> list[BQF]:
    """Positive definite forms of discriminant d with 1 <= a <= a_max.

    For each a, b runs over the residues mod 2a with b^2 ≡ d (mod 4a),
    taken in (-a, a]; `translates` widens each residue to b + 2a*t with
    |t| <= translates (the T-orbit neighbours, used by brute-force sums).
    """
    if a_max < 1:
        raise ValueError("a_max must be >= 1")
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not a negative discriminant")
    forms = []
    for a in range(1, a_max + 1):
        for b0 in sqrt_mod_roots(d, a):
            for t in range(-translates, translates + 1):
                b = b0 + 2 * a * t
                forms.append(BQF(a, b, (b * b - d) // (4 * a)))
    return forms


# ----------------------------------------------------------------------
# square roots modulo 4a


def sqrt_mod_roots(d: int, a: int) -> list[int]:
    """Residues b mod 2a, taken in (-a, a], with b^2 ≡ d (mod 4a)."""
    m = 4 * a
    roots = {x % (2 * a) for x in sqrt_mod(d % m, m)}
    return sorted(x - 2 * a if x > a else x for x in roots)


def sqrt_mod(n: int, m: int) -> list[int]:
    """All solutions of x^2 ≡ n (mod m)."""
    if m == 1:
        return [0]
    n %= m
    sols = [0]
    mod = 1
    for p, e in _factor(m):
        pe = p**e
        local = _sqrt_mod_prime_power(n % pe, p, e)
        if not local:
            return []
        new = []
        for x in sols:
            for y in local:
                # z ≡ x (mod mod), z ≡ y (mod pe); mod and pe are coprime
                z = x + mod * ((y - x) * pow(mod, -1, pe) % pe)
                new.append(z % (mod * pe))
        sols = new
        mod *= pe
    return sorted(set(sols))


def _factor(m: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        out.append((m, 1))
    return out


def _sqrt_mod_prime_power(n: int, p: int, e: int) -> list[int]:
    pe = p**e
    n %= pe
    if p == 2:
        base_mod = min(8, pe)
        sols = [x for x in range(base_mod) if (x * x - n) % base_mod == 0]
        mod = base_mod
        while mod < pe:
            mod *= 2
            sols = sorted(
                {y % mod for x in sols for y in (x, x + mod // 2) if (y * y - n) % mod == 0}
            )
        return sols
    if n == 0:
        half = (e + 1) // 2
        return list(range(0, pe, p**half))
    if n % p == 0:
        k = 0
        m = n
        while m % p == 0:
            m //= p
            k += 1
        if k % 2:
            return []
        base = _sqrt_mod_prime_power(m, p, e - k)
        if not base:
            return []
        shift = p ** (k // 2)
        step = p ** (e - k // 2)
        out = set()
        for y in base:
            root = y * shift % pe
            for t in range(0, pe, step):
                out.add((root + t) % pe)
        return sorted(out)
    roots = _sqrt_mod_prime(n, p)
    if not roots:
        return []
    if e == 1:
        return roots
    x = roots[0]
    mod = p
    while mod < pe:
        mod *= p
        inv = pow(2 * x % mod, -1, mod)
        x = (x - (x * x - n) * inv) % mod
    return sorted({x % pe, (-x) % pe})


def _sqrt_mod_prime(n: int, p: int) -> list[int]:
    n %= p
    if p == 2:
        return [n]
    if n == 0:
        return [0]
    if pow(n, (p - 1) // 2, p) != 1:
        return []
    if p % 4 == 3:
        x = pow(n, (p + 1) // 4, p)
        return sorted({x, p - x})
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return sorted({r, p - r})


# ----------------------------------------------------------------------
# indefinite forms: reduced cycles, class representatives, automorphs


def is_reduced_indefinite(Q: BQF) -> bool:
    D = Q.disc
    if D <= 0 or is_square(D):
        return False
    b, a2 = Q.b, 2 * abs(Q.a)
    if b <= 0 or b * b >= D:
        return False
    return (b - a2) ** 2 < D < (b + a2) ** 2


def _rho(Q: BQF) -> tuple[BQF, SL2Z]:
    """One neighbouring step along the river of reduced indefinite forms.

    rho([a,b,c]) = [c, b', (b'^2 - D)/(4c)] with b' ≡ -b (mod 2|c|) in the
    window (sqrt(D) - 2|c|, sqrt(D)).  The returned g satisfies g.Q = rho(Q).
    """
    D = Q.disc
    b, c = Q.b, Q.c
    s = isqrt(D)
    m = 2 * abs(c)
    r = (-b) % m
    b1 = r + ((s - r) // m) * m
    c1 = (b1 * b1 - D) // (4 * c)
    new = BQF(c, b1, c1)
    n = -(b + b1) // (2 * c)
    g = SL2Z(n, -1, 1, 0)
    assert Q.apply(g) == new, (Q, new, g)
    return new, g


def _reduce_indefinite_with_matrix(Q: BQF) -> tuple[BQF, SL2Z]:
    cur, g = Q, SL2Z.identity()
    while not is_reduced_indefinite(cur):
        cur, step = _rho(cur)
        g = step * g
    return cur, g


def reduced_cycle(Q: BQF) -> tuple[list[BQF], SL2Z]:
    """The cycle of reduced forms equivalent to Q, plus the cycle automorph.

    Returns (cycle, g) where cycle[0] is the first reduced form reached from
    Q and g (the composition of the rho-steps once around) stabilises it.
    """
    D = Q.disc
    if D <= 0 or is_square(D):
        raise SquareDiscriminant(f"disc {D} is not positive non-square")
    start, _ = _reduce_indefinite_with_matrix(Q)
    cycle = [start]
    cur = start
    total = SL2Z.identity()
    while True:
        cur, g = _rho(cur)
        total = g * total
        if cur == start:
            break
        cycle.append(cur)
    assert start.apply(total) == start
    return cycle, total


def indefinite_class_reps(D: int) -> list[BQF]:
    """One reduced representative per SL(2,Z)-class of forms of disc D."""
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise SquareDiscriminant(f"{D} must be a positive non-square discriminant")
    s = isqrt(D)
    all_reduced = []
    for b in range(1, s + 1):
        if (D - b * b) % 4:
            continue
        prod = (b * b - D) // 4
        for a2 in range(max(2, s - b), s + b + 1):
            if a2 % 2:
                continue
            a = a2 // 2
            if prod % a:
                continue
            for aa in (a, -a):
                Q = BQF(aa, b, prod // aa)
                if is_reduced_indefinite(Q):
                    all_reduced.append(Q)
    remaining = set(all_reduced)
    reps = []
    for Q in sorted(all_reduced, key=lambda f: (abs(f.a), f.a, f.b)):
        if Q not in remaining:
            continue
        cycle, _ = reduced_cycle(Q)
        reps.append(Q)
        remaining -= set(cycle)
    return reps


def equivalent_indefinite(Q1: BQF, Q2: BQF) -> bool:
    """Exact SL(2,Z)-equivalence test via reduction-cycle membership."""
    if Q1.disc != Q2.disc:
        return False
    cycle, _ = reduced_cycle(Q1)
    start, _ = _reduce_indefinite_with_matrix(Q2)
    return start in cycle


@dataclass(frozen=True)
class GeodesicArc:
    """The closed geodesic attached to an indefinite form.

    The semicircle a|z|^2 + b x + c = 0 has center -b/(2a) and radius
    sqrt(D)/(2|a|); the automorph cuts out one period.  (t, u) is the
    minimal positive solution of t^2 - D0 u^2 = 4 for the discriminant
    D0 of the primitive part of the form: the stabiliser of m*Q' equals
    the stabiliser of Q', so for imprimitive forms the generator's
    parameters live at the primitive discriminant.
    """

    form: BQF
    automorph: SL2Z
    t: int
    u: int
    primitive_disc: int

    @property
    def center(self) -> Fraction:
        return Fraction(-self.form.b, 2 * self.form.a)

    @property
    def radius_squared(self) -> Fraction:
        return Fraction(self.form.disc, 4 * self.form.a * self.form.a)

    @property
    def period_length(self) -> float:
        """Hyperbolic length of the closed cycle: 2 log of the automorph's
        larger eigenvalue (t + sqrt(t^2 - 4)) / 2."""
        return 2 * math.log((self.t + math.sqrt(self.t * self.t - 4)) / 2)


def pell_automorph(Q: BQF) -> GeodesicArc:
    """The generator of the stabiliser of Q in SL(2,Z) modulo ±1.

    For primitive Q this is gamma_Q = [[(t+bu)/2, cu], [-au, (t-bu)/2]]
    with (t, u) minimal positive solving t^2 - D u^2 = 4; computed
    exactly by composing the reduction cycle once around and normalising
    signs.  An imprimitive form m*Q' has the same stabiliser as Q', with
    (t, u) taken at disc(Q').
    """
    D = Q.disc
    if D <= 0 or is_square(D):
        raise SquareDiscriminant(f"disc {D} must be positive non-square")
    m = Q.content()
    Qp = BQF(Q.a // m, Q.b // m, Q.c // m)
    Dp = Qp.disc
    _, h = _reduce_indefinite_with_matrix(Qp)
    _, g0 = reduced_cycle(Qp)
    g = h.inverse() * g0 * h
    assert Qp.apply(g) == Qp
    t = g.a + g.d
    if t < 0:
        g = g.neg()
        t = -t
    u = -g.c // Qp.a
    if u < 0:
        g = g.inverse()
        u = -u
    assert t > 0 and u > 0 and t * t - Dp * u * u == 4
    assert 2 * g.a == t + Qp.b * u and g.b == Qp.c * u and -g.c == Qp.a * u
    assert Q.apply(g) == Q
    return GeodesicArc(form=Q, automorph=g, t=t, u=u, primitive_disc=Dp)


def pell_fundamental(D: int) -> tuple[int, int]:
    """Minimal (t, u), t, u > 0, with t^2 - D u^2 = 4."""
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise SquareDiscriminant(f"{D} must be a positive non-square discriminant")
    if D % 4 == 0:
        Q = BQF(1, 0, -(D // 4))
    else:
        Q = BQF(1, 1, (1 - D) // 4)
    arc = pell_automorph(Q)
    return arc.t, arc.u


# ----------------------------------------------------------------------
# CM points, pairing, hypothesis check


@dataclass(frozen=True)
class CMPoint:
    """Exact CM point (-b + i sqrt(|d|)) / (2a) stored as (-b, |d|, 2a)."""

    minus_b: int
    abs_d: int
    two_a: int

    @property
    def x(self) -> Fraction:
        return Fraction(self.minus_b, self.two_a)

    @property
    def y_squared(self) -> Fraction:
        return Fraction(self.abs_d, self.two_a * self.two_a)

    def as_complex(self) -> complex:
        return complex(self.x) + 1j * math.sqrt(self.abs_d) / self.two_a


def cm_point(Q: BQF) -> CMPoint:
    """The root of Q(z, 1) = 0 in the upper half-plane, exactly."""
    if not Q.is_positive_definite:
        raise NotDefinite(f"{Q} is not positive definite")
    return CMPoint(minus_b=-Q.b, abs_d=-Q.disc, two_a=2 * Q.a)


def pairing(Q1: BQF, Q2: BQF) -> Fraction:
    """(X, Y) = a c' + a' c - b b' / 2 on the signature (1,2) space.

    pairing(Q, Q) = 2 q(X_Q) = -disc(Q)/2, and SL(2,Z) acts by isometries.
    """
    return Fraction(2 * (Q1.a * Q2.c + Q2.a * Q1.c) - Q1.b * Q2.b, 2)


def stabilizer_order(d: int) -> int:
    """Order of the stabiliser in PSL(2,Z) of a CM point of disc d < 0."""
    if d >= 0:
        raise ValueError("d must be negative")
    if d == -4:
        return 2
    if d == -3:
        return 3
    return 1


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _orthogonal_basis(Q0: BQF) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Basis of the rank-2 lattice of integral forms orthogonal to Q0.

    Orthogonality under the pairing reads n . (a, b, c) = 0 with
    n = (2 c0, -b0, 2 a0).
    """
    n = (2 * Q0.c, -Q0.b, 2 * Q0.a)
    g01, x, y = _ext_gcd(n[0], n[1])
    v1 = (n[1] // g01, -n[0] // g01, 0)
    g, _, _ = _ext_gcd(g01, n[2])
    s, t = n[2] // g, -(g01 // g)
    v2 = (x * s, y * s, t)
    for v in (v1, v2):
        assert n[0] * v[0] + n[1] * v[1] + n[2] * v[2] == 0
    return v1, v2


def _pairing_vec(v: tuple[int, int, int], w: tuple[int, int, int]) -> Fraction:
    return Fraction(2 * (v[0] * w[2] + w[0] * v[2]) - v[1] * w[1], 2)


def on_geodesic_forms(D: int, d: int) -> list[BQF]:
    """All forms of disc D whose geodesic passes through a CM point of disc d.

    A form X lies on the geodesic through z_{Q0} exactly when
    pairing(X, Q0) = 0, which confines X to the negative definite rank-2
    lattice orthogonal to Q0; representations of disc D there are finite.
    CM points of every class of discriminant d are considered.
    """
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise SquareDiscriminant(f"{D} must be a positive non-square discriminant")
    found = []
    for Q0 in definite_class_reps(d):
        v1, v2 = _orthogonal_basis(Q0)
        # integral Gram of the positive definite form -(X, X) on Z v1 + Z v2,
        # doubled: h11 x^2 + 2 h12 x y + h22 y^2 = D
        h11 = -int(2 * _pairing_vec(v1, v1))
        h12 = -int(2 * _pairing_vec(v1, v2))
        h22 = -int(2 * _pairing_vec(v2, v2))
        det = h11 * h22 - h12 * h12
        assert h11 > 0 and det > 0
        xmax = isqrt(D * h22 // det) + 1
        for xv in range(-xmax, xmax + 1):
            delta = h12 * h12 * xv * xv - h22 * (h11 * xv * xv - D)
            if delta < 0:
                continue
            r = isqrt(delta)
            if r * r != delta:
                continue
            for sgn in (1, -1) if r else (1,):
                num = -h12 * xv + sgn * r
                if num % h22:
                    continue
                yv = num // h22
                v = tuple(xv * v1[i] + yv * v2[i] for i in range(3))
                if v == (0, 0, 0):
                    continue
                Q = BQF(*v)
                assert Q.disc == D
                found.append(Q)
    return found


def hypothesis_check(D: int, d: int = -4) -> bool:
    """True when no CM point of disc d lies on any geodesic of disc D.

    For d = -4 this is equivalent to D not being representable as
    b^2 + 4a^2 with a != 0.
    """
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise SquareDiscriminant(f"{D} must be a positive non-square discriminant")
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not a negative discriminant")
    return not on_geodesic_forms(D, d)
