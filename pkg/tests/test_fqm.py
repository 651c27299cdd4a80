import cmath
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from cyclotrace.errors import (
    GammaPole,
    IncompatibleEmbedding,
    InsufficientPrecision,
    NotPositiveDefinite,
    SingularGram,
)
from cyclotrace.fqm import (
    FQModule,
    IntLattice,
    LatticeEmbedding,
    VVSeries,
    ct_pairing,
    disc_group,
    eval_series,
    milgram_defect,
    rankin_cohen,
    restrict,
    siegel_theta_eval,
    smith_normal_form,
    tensor,
    theta_series,
    trace_up,
    weil_matrices,
)
from cyclotrace.special_forms import (
    embedding_PN_in_L,
    lattice_L,
    lattice_N_minus,
    lattice_P,
    module_K,
    module_L,
    module_N_minus,
    module_P,
    theta_N_minus,
)

GOLDEN = Path(__file__).parent / "golden"


def test_smith_normal_form_random():
    from cyclotrace.fqm import _det, _mat_mul

    rng = random.Random(4)
    for _ in range(200):
        n = rng.randint(1, 4)
        while True:
            M = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(n)]
            if _det(M) != 0:
                break
        U, D, V = smith_normal_form(M)
        assert _mat_mul(_mat_mul(U, M), V) == D
        assert abs(_det(U)) == 1 and abs(_det(V)) == 1
        diag = [D[i][i] for i in range(n)]
        assert all(x > 0 for x in diag)
        assert all(diag[i + 1] % diag[i] == 0 for i in range(n - 1))


def test_disc_group_examples():
    MP = module_P()
    assert MP.orders == (2,)
    assert sorted(MP.q_values()) == [Fraction(0), Fraction(1, 4)]
    MNm = module_N_minus()
    assert MNm.orders == (2, 2)
    reps = {t: MNm.rep_vector(t) for t in MNm.elements}
    half = [t for t, v in reps.items() if v in ((Fraction(1, 2), Fraction(0)), (Fraction(0), Fraction(1, 2)))]
    assert all(MNm.q_value(t) == Fraction(1, 4) for t in half)
    # unimodular gram: trivial group
    assert FQModule(IntLattice(((0, 1), (1, 0)))).order == 1
    with pytest.raises(SingularGram):
        disc_group(IntLattice(((2, 2), (2, 2))))
    ML = module_L()
    assert ML.order == 2
    assert sorted(ML.q_values()) == [Fraction(0), Fraction(3, 4)]
    assert ML.lattice.signature == (1, 2)


def test_milgram():
    for M in (module_P(), module_N_minus(), module_L(), module_K()):
        assert milgram_defect(M) < 1e-10
    fancy = disc_group(IntLattice(((4, 1), (1, 4))))
    assert milgram_defect(fancy) < 1e-10


def test_theta_series_examples():
    th = theta_N_minus(3)
    M = th.module
    i00 = M.index[(0, 0)]
    assert th.coefficient(i00, 0) == 1
    assert th.coefficient(i00, 1) == 4
    assert th.coefficient(i00, 2) == 4
    thP = theta_series(lattice_P(), 2, module=module_P())
    # component of the half-integer coset: two vectors ±1/2 of norm 1/4
    i1 = module_P().index[(1,)]
    assert thP.coefficient(i1, Fraction(1, 4)) == 2
    assert thP.coefficient(module_P().index[(0,)], 0) == 1
    th.validate_support()
    thP.validate_support()
    with pytest.raises(NotPositiveDefinite):
        theta_series(IntLattice(((-2,),)), 3)


def test_theta_trace_compatibility_positive_definite():
    # Theta_L = (Theta_K)^L for the index-3 inclusion 3Z ⊂ Z (gram 18 ⊂ 2)
    L = IntLattice(((2,),))
    K = IntLattice(((18,),))
    ML, MK = FQModule(L), FQModule(K)
    E = LatticeEmbedding(source=MK, target=ML, matrix=((3,),))
    assert E.index == 3
    prec = 110
    thL = theta_series(L, prec, module=ML)
    thK = theta_series(K, prec, module=MK)
    lifted = trace_up(thK, E)
    assert lifted.module is ML
    exps = {Fraction(n, thL.den) for (_, n) in thL.terms}
    exps |= {Fraction(n, lifted.den) for (_, n) in lifted.terms}
    assert len(exps) >= 20
    for e in exps:
        for ci in range(ML.order):
            assert thL.coefficient(ci, e) == lifted.coefficient(ci, e), (ci, e)


def test_tensor_examples():
    MP = module_P()
    MNm = module_N_minus()
    one = VVSeries(module=MP, weight=Fraction(0), den=4, terms={(0, 0): Fraction(1)},
                   prec=Fraction(10**9))
    f = VVSeries(module=MP, weight=Fraction(1, 2), den=4,
                 terms={(1, 5): Fraction(3)}, prec=Fraction(10**9))
    t = tensor(f, one)
    # identity up to the component relabelling mu -> (mu, 0)
    assert list(t.terms.items()) == [((1 * MP.order + 0, 5), Fraction(3))]
    assert t.module.elements[1 * MP.order + 0] == (1, 0)
    # q^a e_mu ⊗ q^b e_nu = q^(a+b) e_(mu,nu)
    g = VVSeries(module=MNm, weight=Fraction(1), den=4,
                 terms={(2, 9): Fraction(5)}, prec=Fraction(10**9))
    tg = tensor(f, g)
    assert tg.terms == {(1 * 4 + 2, 14): Fraction(15)}
    assert tg.weight == Fraction(3, 2)
    # Theta_P ⊗ Theta_{N^-} coefficient at ((0,0,0), 2) by brute convolution
    thP = theta_series(lattice_P(), 5, module=MP)
    thN = theta_N_minus(5)
    tt = tensor(thP, thN)
    want = sum(
        thP.coefficient(0, j) * thN.coefficient(0, 2 - j) for j in range(3)
    )
    assert tt.coefficient(0, 2) == want
    assert want == 1 * 4 + 2 * 4  # r_P(0) r_N(2) + r_P(1) r_N(1); r_P(2) = 0


def test_restrict_examples():
    E = embedding_PN_in_L()
    th = theta_N_minus(4)
    # index-1 embedding acts as the identity
    MNm = module_N_minus()
    E1 = LatticeEmbedding(source=FQModule(lattice_N_minus()), target=MNm,
                          matrix=((1, 0), (0, 1)))
    assert restrict(th, E1).terms == th.terms
    assert trace_up(th, E1).terms == th.terms
    # the concrete index-2 embedding spreads e_0 to <= |L'/K| = 4 components
    ML = module_L()
    f = VVSeries(module=ML, weight=Fraction(1), den=4,
                 terms={(0, 4): Fraction(1), (1, 3): Fraction(2)}, prec=Fraction(10))
    fK = restrict(f, E)
    comps = {c for (c, _) in fK.terms}
    assert len(comps) == 4
    assert len([c for (c, n) in fK.terms if n == 4]) == 2
    in_dual = [t for t in E.source.elements if E.in_target_dual(t)]
    assert len(in_dual) == 4  # = [L:K] |L'/L|


def test_adjointness_random():
    E = embedding_PN_in_L()
    ML, MK = module_L(), module_K()
    rng = random.Random(7)
    for _ in range(100):
        fterms = {
            (rng.randrange(ML.order), rng.randint(-8, 8)): Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            for _ in range(rng.randint(1, 6))
        }
        gterms = {
            (rng.randrange(MK.order), rng.randint(-8, 8)): Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            for _ in range(rng.randint(1, 6))
        }
        f = VVSeries(module=ML, weight=Fraction(1), den=4, terms=fterms, prec=Fraction(100))
        g = VVSeries(module=MK, weight=Fraction(1), den=4, terms=gterms, prec=Fraction(100))
        assert ct_pairing(f, trace_up(g, E)) == ct_pairing(restrict(f, E), g)


def test_embedding_validation():
    with pytest.raises(IncompatibleEmbedding):
        LatticeEmbedding(source=module_K(), target=module_L(),
                         matrix=((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def test_rankin_cohen():
    MP, MNm = module_P(), module_N_minus()
    thP = theta_series(lattice_P(), 6, module=MP)
    thN = theta_N_minus(6)
    # n = 0 reduces to the tensor product
    assert rankin_cohen(thP, thN, 0).terms == tensor(thP, thN).terms
    # [q^a e_mu, q^b e_nu]_1 = (kappa b - ell a) q^(a+b)
    f = VVSeries(module=MP, weight=Fraction(3, 2), den=4,
                 terms={(0, 8): Fraction(1)}, prec=Fraction(10**9))
    g = VVSeries(module=MNm, weight=Fraction(1), den=4,
                 terms={(2, 12): Fraction(1)}, prec=Fraction(10**9))
    rc = rankin_cohen(f, g, 1)
    assert rc.terms == {(2, 20): Fraction(3, 2) * 3 - Fraction(1) * 2}
    assert rc.weight == Fraction(3, 2) + 1 + 2
    # constant term of [f, g]_n vanishes for n >= 1 on non-negative supports
    br = rankin_cohen(thP, thN, 1)
    assert all(n > 0 for (_, n) in br.terms)
    # bilinearity
    f2 = VVSeries(module=MP, weight=Fraction(3, 2), den=4,
                  terms={(1, 5): Fraction(2)}, prec=Fraction(10**9))
    s = VVSeries(module=MP, weight=Fraction(3, 2), den=4,
                 terms={**f.terms, **f2.terms}, prec=min(f.prec, f2.prec))
    left = rankin_cohen(s, g, 1)
    r1, r2 = rankin_cohen(f, g, 1), rankin_cohen(f2, g, 1)
    combined = dict(r1.terms)
    for kk, vv in r2.terms.items():
        combined[kk] = combined.get(kk, Fraction(0)) + vv
    assert left.terms == {k: v for k, v in combined.items() if v != 0}
    with pytest.raises(GammaPole):
        bad = VVSeries(module=MP, weight=Fraction(-2), den=4,
                       terms={(0, 0): Fraction(1)}, prec=Fraction(10))
        rankin_cohen(bad, g, 1)


def test_ct_pairing():
    MP = module_P()
    a = VVSeries(module=MP, weight=Fraction(1), den=4,
                 terms={(1, -4): Fraction(1)}, prec=Fraction(1))
    b = VVSeries(module=MP, weight=Fraction(1), den=4,
                 terms={(1, 4): Fraction(1)}, prec=Fraction(2))
    assert ct_pairing(a, b) == (Fraction(1), 0)
    # distinct components pair to zero
    b2 = VVSeries(module=MP, weight=Fraction(1), den=4,
                  terms={(0, 4): Fraction(1)}, prec=Fraction(2))
    assert ct_pairing(a, b2)[0] == 0
    # symmetry on finite series
    rng = random.Random(12)
    for _ in range(50):
        t1 = {(rng.randrange(2), rng.randint(-6, 6)): Fraction(rng.randint(-4, 4))
              for _ in range(4)}
        t2 = {(rng.randrange(2), rng.randint(-6, 6)): Fraction(rng.randint(-4, 4))
              for _ in range(4)}
        u = VVSeries(module=MP, weight=Fraction(1), den=4, terms=t1, prec=Fraction(99))
        v = VVSeries(module=MP, weight=Fraction(1), den=4, terms=t2, prec=Fraction(99))
        assert ct_pairing(u, v) == ct_pairing(v, u)
    with pytest.raises(InsufficientPrecision) as err:
        ct_pairing(a, VVSeries(module=MP, weight=Fraction(1), den=4,
                               terms={}, prec=Fraction(1, 2)))
    assert err.value.required == 1


def test_weil_matrices():
    triv = FQModule(IntLattice(((0, 1), (1, 0))))
    T, S = weil_matrices(triv)
    assert T.shape == (1, 1) and abs(T[0, 0] - 1) < 1e-14
    assert abs(abs(S[0, 0]) - 1) < 1e-14
    T, S = weil_matrices(module_P())
    assert abs(T[0, 0] - 1) < 1e-14 and abs(T[1, 1] - 1j) < 1e-14
    for M in (module_P(), module_N_minus(), module_L()):
        T, S = weil_matrices(M)
        assert np.max(np.abs(T @ T.conj().T - np.eye(M.order))) < 1e-12
        assert np.max(np.abs(S @ S.conj().T - np.eye(M.order))) < 1e-12
        # S^2 is a global phase times the negation permutation
        P = np.zeros_like(S)
        for i, t in enumerate(M.elements):
            P[M.index[M.neg(t)], i] = 1
        R = (S @ S) @ np.linalg.inv(P)
        assert np.max(np.abs(R - R[0, 0] * np.eye(M.order))) < 1e-12


def test_theta_transformation_vs_weil():
    tau0 = 0.3 + 1j
    for K, M in ((lattice_P(), module_P()), (lattice_N_minus(), module_N_minus())):
        th = theta_series(K, 60, module=M)
        T, S = weil_matrices(M)
        n = K.rank
        assert np.max(np.abs(eval_series(th, tau0 + 1) - T @ eval_series(th, tau0))) < 1e-6
        lhs = eval_series(th, -1 / tau0)
        rhs = cmath.sqrt(tau0) ** n * (S @ eval_series(th, tau0))
        assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_siegel_theta_splitting():
    tau, z = 2j, 1j
    MK = module_K()
    FK = ((-1, 1, 0), (0, 0, 2), (-1, -1, 0))
    thK = siegel_theta_eval(MK, FK, tau, z, cutoff=9)
    thP = eval_series(theta_series(lattice_P(), 40, module=module_P()), tau)
    thNm = eval_series(theta_N_minus(40), tau)
    split = np.array([p * tau.imag * np.conj(q) for p in thP for q in thNm])
    assert np.max(np.abs(thK - split)) < 1e-8
    # trace compatibility with the full lattice
    ML = module_L()
    FL = ((1, 0, 0), (0, 2, 0), (0, 0, 1))
    thL = siegel_theta_eval(ML, FL, tau, z, cutoff=9)
    E = embedding_PN_in_L()
    agg = np.zeros(ML.order, dtype=complex)
    for ti, t in enumerate(MK.elements):
        if E.in_target_dual(t):
            agg[ML.index[E.bar(t)]] += thK[ti]
    assert np.max(np.abs(thL - agg)) < 1e-8
    # doubling the cutoff is inert (Gaussian decay)
    assert np.max(np.abs(thL - siegel_theta_eval(ML, FL, tau, z, cutoff=18))) < 1e-10
    # tau -> tau + 1 matches the Weil T action
    T, _ = weil_matrices(ML)
    thL_T = siegel_theta_eval(ML, FL, tau + 1, z, cutoff=9)
    assert np.max(np.abs(thL_T - T @ thL)) < 1e-8


def test_serialization_roundtrip_and_golden():
    th = theta_N_minus(3)
    text = th.to_text()
    back = VVSeries.from_text(text, module_N_minus())
    assert back.terms == th.terms
    assert back.weight == th.weight and back.prec == th.prec
    assert back.pi_power == th.pi_power and back.sigma == th.sigma
    golden = (GOLDEN / "theta_n_minus_prec3.txt").read_text()
    assert text == golden
    from cyclotrace.special_forms import hurwitz_gen

    g = hurwitz_gen(2)
    golden_g = (GOLDEN / "hurwitz_gen_prec2.txt").read_text()
    assert g.to_text() == golden_g
