"""Built-in invariant suite for `cyclotrace selftest`.

Each check is a named callable returning True on success; the runner
prints one PASS/FAIL line per check and the total counts.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from math import isqrt

import numpy as np


def _check_kronecker() -> bool:
    from .arith import kronecker

    for p in (3, 5, 7, 11, 13, 17):
        squares = {x * x % p for x in range(1, p)}
        for a in range(1, p):
            want = 1 if a in squares else -1
            if kronecker(a, p) != want:
                return False
    rng = random.Random(11)
    for _ in range(200):
        a, m, n = rng.randint(-80, 80), rng.randint(1, 60), rng.randint(1, 60)
        if kronecker(a, m * n) != kronecker(a, m) * kronecker(a, n):
            return False
    return True


def _check_L_values() -> bool:
    from .arith import cohen_H, dirichlet_L_value

    return (
        dirichlet_L_value(5, -1) == Fraction(-2, 5)
        and dirichlet_L_value(12, -1) == -2
        and cohen_H(2, 0) == Fraction(1, 120)
        and all(cohen_H(2, D) == dirichlet_L_value(D, -1)
                for D in range(5, 60) if D % 4 in (0, 1) and isqrt(D) ** 2 != D)
    )


def _check_hurwitz() -> bool:
    from .special_forms import hurwitz, hurwitz_table, hurwitz_table_recursive

    if hurwitz_table(120) != hurwitz_table_recursive(120):
        return False
    for n in range(1, 51):
        lhs = sum(hurwitz(4 * n - s * s) for s in range(-isqrt(4 * n), isqrt(4 * n) + 1)
                  if s * s <= 4 * n)
        rhs = sum(max(d, n // d) for d in range(1, n + 1) if n % d == 0)
        if lhs != rhs:
            return False
    return hurwitz(0) == Fraction(-1, 12)


def _check_reduction() -> bool:
    from .bqf import BQF, reduce_definite

    rng = random.Random(5)
    for _ in range(300):
        a = rng.randint(1, 40)
        b = rng.randint(-40, 40)
        cmin = (b * b) // (4 * a) + 1
        c = rng.randint(cmin, cmin + 40)
        Q = BQF(a, b, c)
        if not Q.is_positive_definite:
            continue
        red, g = reduce_definite(Q)
        if Q.apply(g) != red or reduce_definite(red)[0] != red:
            return False
    return True


def _check_pell() -> bool:
    from .arith import is_square
    from .bqf import pell_fundamental

    for D in range(5, 150):
        if D % 4 not in (0, 1) or is_square(D):
            continue
        t, u = pell_fundamental(D)
        if t * t - D * u * u != 4 or t <= 0 or u <= 0:
            return False
        uu = 1
        while uu < u:
            if is_square(4 + D * uu * uu):
                return False
            uu += 1
    return True


def _check_hypothesis() -> bool:
    from .arith import is_square
    from .bqf import hypothesis_check

    for D in range(5, 151):
        if D % 4 not in (0, 1) or is_square(D):
            continue
        brute = any(
            b * b + 4 * a * a == D
            for a in range(1, isqrt(D) // 2 + 2)
            for b in range(0, isqrt(D) + 1)
        )
        if hypothesis_check(D, -4) != (not brute):
            return False
    return True


def _check_exact_oracle() -> bool:
    from .arith import is_square
    from .bqf import hypothesis_check
    from .special_forms import closed_formula, rhs_trace

    for D in range(5, 61):
        if D % 4 not in (0, 1) or is_square(D) or not hypothesis_check(D, -4):
            continue
        for k in (2, 4):
            if rhs_trace(k, D) != closed_formula(k, D):
                return False
    return True


def _check_milgram_weil() -> bool:
    from .fqm import milgram_defect, weil_matrices
    from .special_forms import module_L, module_N_minus, module_P

    for M in (module_P(), module_N_minus(), module_L()):
        if milgram_defect(M) > 1e-10:
            return False
        _, S = weil_matrices(M)
        if np.max(np.abs(S @ S.conj().T - np.eye(M.order))) > 1e-12:
            return False
    return True


def _check_siegel_split() -> bool:
    from .fqm import eval_series, siegel_theta_eval, theta_series
    from .special_forms import lattice_P, module_K, module_P, theta_N_minus

    tau, z = 2j, 1j
    MK = module_K()
    FK = ((-1, 1, 0), (0, 0, 2), (-1, -1, 0))
    thK = siegel_theta_eval(MK, FK, tau, z, cutoff=8)
    thP = eval_series(theta_series(lattice_P(), 30, module=module_P()), tau)
    thNm = eval_series(theta_N_minus(30), tau)
    split = np.array([p * tau.imag * np.conj(q) for p in thP for q in thNm])
    return float(np.max(np.abs(thK - split))) < 1e-8


def _check_hyp2f1() -> bool:
    from .analytic import _hyp_series, hyp2f1

    ok = abs(hyp2f1(1, 1, 2, 0.5) - 2 * math.log(2)) < 1e-12
    ok = ok and abs(hyp2f1(0.5, 0.5, 1.5, 0.25) - math.pi / 3) < 1e-12
    for k in (2, 3, 4):
        # both branches at the same point: direct series vs transformation
        w = 0.5 + 1e-13
        direct = float(_hyp_series(k / 2, k / 2, k + 0.5, w))
        transformed = hyp2f1(k / 2, k / 2, k + 0.5, w)
        ok = ok and abs(direct - transformed) < 1e-11 * max(1.0, abs(direct))
    return ok


def _check_proportionality() -> bool:
    from .analytic import eisenstein_oracle, get_evaluator

    pts = np.array([complex(0.03 + 0.04 * j, 1.05 + 0.06 * j) for j in range(10)])
    ev = get_evaluator(2, -4)
    vals, _, _ = ev.eval_adaptive(pts, 1e-8)
    ratios = []
    for z, f in zip(pts, vals):
        E4, E6, Delta = eisenstein_oracle(complex(z))
        ratios.append((f / (E4 * Delta / E6**2)).real)
    spread = (max(ratios) - min(ratios)) / abs(sum(ratios) / len(ratios))
    return spread < 1e-6


def _check_three_way() -> bool:
    from .analytic import lhs_geodesic, lhs_latticesum
    from .special_forms import rhs_trace

    ex = float(rhs_trace(2, 12))
    g = lhs_geodesic(2, 12, -4, tol=1e-5)
    l = lhs_latticesum(2, 12, -4, tol=1e-3)
    return abs(g.value - ex) < 1e-6 * (1 + abs(ex)) and abs(l.value - ex) < 1e-4 * (
        1 + abs(ex)
    )


CHECKS = [
    ("kronecker multiplicativity", _check_kronecker),
    ("L-values and Cohen numbers", _check_L_values),
    ("hurwitz two-algorithm agreement", _check_hurwitz),
    ("definite reduction idempotence", _check_reduction),
    ("pell minimality", _check_pell),
    ("hypothesis detection", _check_hypothesis),
    ("exact trace vs closed formula", _check_exact_oracle),
    ("milgram and weil unitarity", _check_milgram_weil),
    ("siegel theta splitting", _check_siegel_split),
    ("gauss 2F1 oracles", _check_hyp2f1),
    ("meromorphic-form proportionality", _check_proportionality),
    ("three-way trace agreement (2,12)", _check_three_way),
]


def run() -> tuple[int, int]:
    passed = failed = 0
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as e:  # a crashing check is a failing check
            print(f"FAIL {name}: {type(e).__name__}: {e}")
            failed += 1
            continue
        if ok:
            print(f"PASS {name}")
            passed += 1
        else:
            print(f"FAIL {name}")
            failed += 1
    return passed, failed
