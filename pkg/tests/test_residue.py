"""Iterated residues: engines against each other and against fixed points."""

import itertools
import random

import pytest

from jetres.exactalg import DPoly, HD_CTX, MultiPoly, Q, VarContext, truncate_h
from jetres.localization import fibre_integral_fixed_points
from jetres.residue import (
    NotResidueIntegrableError,
    ResidueForm,
    SegreData,
    demailly_integrand,
    fibre_residue_integrand,
    grassmannian_omega,
    hypersurface_integrand,
    integral_over_tower,
    integrate_over_X,
    orientation_sign,
    reflect_payload,
    residue_expand,
    residue_stepwise,
    segre_hypersurface,
    tower_context,
    _zsum,
)
from jetres.exactalg import HClass

Z2CTX = VarContext(("z1", "z2"))
TZ1 = MultiPoly.variable(Z2CTX, "z1")
TZ2 = MultiPoly.variable(Z2CTX, "z2")


def both_engines(form):
    a = residue_expand(form)
    b = residue_stepwise(form)
    assert a == b, (a.to_text(), b.to_text())
    return a


def test_toy_residue_single_zero_pair():
    # 1/(z1 (z1+z2)): the two-variable form whose expansion on |z1| << |z2|
    # is sum (-1)^i z1^(i-1) z2^(-i-1); its residue is exactly 1
    form = ResidueForm(MultiPoly.const(Z2CTX, 1), [(TZ1, 1), (TZ1 + TZ2, 1)], ("z1", "z2"))
    assert both_engines(form) == 1


def test_toy_residue_weighted_pair():
    # z2^2/(z1^2 (z1-z2)(2 z1-z2)) = 3: the coefficient the worked example
    # extracts from (1/z2^2)(1+z1/z2+...)(1+2 z1/z2+...)
    form = ResidueForm(
        TZ2**2, [(TZ1, 2), (TZ1 - TZ2, 1), (2 * TZ1 - TZ2, 1)], ("z1", "z2")
    )
    assert both_engines(form) == 3


def test_toy_residue_literal_difference_pair_vanishes():
    # the two factors share their leading variable, so no negative z1 powers
    # ever appear and the residue is identically zero (both engines)
    form = ResidueForm(
        MultiPoly.const(Z2CTX, 1), [(TZ1 - TZ2, 1), (2 * TZ1 - TZ2, 1)], ("z1", "z2")
    )
    assert both_engines(form).is_zero


def test_toy_series_product_coefficients():
    # the expansion of 1/((z1-z2)(2 z1-z2)) on |z1| << |z2| is
    # (1/z2^2) sum_m (2^(m+1)-1) (z1/z2)^m; pin the coefficients by shifting
    # the target monomial with z2^(m+1)/z1^(m+1)
    for m in range(5):
        form = ResidueForm(
            TZ2 ** (m + 1),
            [(TZ1, m + 1), (TZ1 - TZ2, 1), (2 * TZ1 - TZ2, 1)],
            ("z1", "z2"),
        )
        assert both_engines(form) == 2 ** (m + 1) - 1


def test_orientation_normalization():
    # Res dz/(z1...zk) = (-1)^k under the single orientation constant
    for k in (1, 2, 3):
        ctx = VarContext(tuple(f"z{i}" for i in range(1, k + 1)))
        factors = [(MultiPoly.variable(ctx, f"z{i}"), 1) for i in range(1, k + 1)]
        form = ResidueForm(MultiPoly.const(ctx, 1), factors, ctx.names)
        assert both_engines(form) == orientation_sign(k)
        assert orientation_sign(k) == Q(-1) ** k


def test_grassmannian_form_both_engines():
    sym = grassmannian_omega()
    val = both_engines(sym)
    assert val == MultiPoly.const(sym.ctx, 2)
    num = grassmannian_omega([1, Q(3, 2), -2, 5])
    assert both_engines(num) == 2


def test_zfree_factor_rejected():
    ctx = VarContext(("z1", "h"))
    h = MultiPoly.variable(ctx, "h")
    form = ResidueForm(MultiPoly.const(ctx, 1), [(h + 1, 1)], ("z1",))
    with pytest.raises(NotResidueIntegrableError):
        residue_expand(form)
    with pytest.raises(NotResidueIntegrableError):
        residue_stepwise(form)


def test_nonlinear_factor_rejected():
    with pytest.raises(NotResidueIntegrableError):
        ResidueForm(MultiPoly.const(Z2CTX, 1), [(TZ1 * TZ2, 1)], ("z1", "z2"))


def random_residue_form(rng, k=3, coeff_ctx=()):
    ctx = VarContext(tuple(f"z{i}" for i in range(1, k + 1)) + tuple(coeff_ctx))
    factors = []
    for _ in range(rng.randint(k, k + 3)):
        while True:
            zc = [rng.randint(-2, 2) for _ in range(k)]
            if any(zc):
                break
        terms = {}
        for i, c in enumerate(zc):
            if c:
                e = [0] * len(ctx)
                e[i] = 1
                terms[tuple(e)] = Q(c)
        const = rng.randint(-3, 3)
        if const:
            terms[(0,) * len(ctx)] = Q(const)
        factors.append((MultiPoly(ctx, terms), 1))
    # moderate numerator
    terms = {}
    for _ in range(rng.randint(1, 4)):
        e = [0] * len(ctx)
        for i in range(k):
            e[i] = rng.randint(0, 2)
        terms[tuple(e)] = terms.get(tuple(e), Q(0)) + Q(rng.randint(-5, 5))
    numerator = MultiPoly(ctx, terms)
    if numerator.is_zero:
        numerator = MultiPoly.const(ctx, 1)
    return ResidueForm(numerator, factors, tuple(f"z{i}" for i in range(1, k + 1)))


def test_engines_agree_on_random_forms():
    rng = random.Random(100)
    done = 0
    while done < 50:
        k = rng.choice((1, 2, 3))
        form = random_residue_form(rng, k)
        a = residue_expand(form)
        b = residue_stepwise(form)
        assert a == b, (form.numerator.to_text(), a.to_text(), b.to_text())
        done += 1


def random_homogeneous(rng, ctx, zvars, deg, with_h=False):
    names = list(zvars) + (["h"] if with_h else [])
    terms = {}
    for combo in itertools.combinations_with_replacement(names, deg):
        c = rng.randint(-4, 4)
        if not c:
            continue
        e = [0] * len(ctx)
        for v in combo:
            e[ctx.index(v)] += 1
        terms[tuple(e)] = Q(c)
    return MultiPoly(ctx, terms)


def distinct_lambdas(rng, n):
    while True:
        vals = [Q(rng.randint(-40, 40), rng.randint(1, 9)) for _ in range(n)]
        if len(set(vals)) == n and all(vals):
            return vals


def safe_lambdas(rng, n, k):
    # redraw until no weight collision occurs anywhere in the tower
    from jetres.tower import enumerate_fixed_points, euler_value

    while True:
        lams = distinct_lambdas(rng, n)
        if all(euler_value(fp, lams) != 0 for fp in enumerate_fixed_points(n, k)):
            return lams


def test_fibre_residue_equals_fixed_points_deep_tower():
    # four levels over the line: 16 chains, degree-4 payloads
    rng = random.Random(40)
    n, k = 2, 4
    ctx = tower_context(k)
    zvars = [f"z{i}" for i in range(1, k + 1)]
    for _ in range(3):
        P = random_homogeneous(rng, ctx, zvars, k * (n - 1))
        lams = safe_lambdas(rng, n, k)
        fp = fibre_integral_fixed_points(n, k, P, lams)
        assert fp == both_engines(fibre_residue_integrand(n, k, P, lams))


def test_fibre_residue_equals_fixed_points():
    rng = random.Random(41)
    for n, k in ((2, 2), (3, 2), (2, 3), (3, 3)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        for _ in range(5):
            P = random_homogeneous(rng, ctx, zvars, k * (n - 1))
            lams = safe_lambdas(rng, n, k)
            fp = fibre_integral_fixed_points(n, k, P, lams)
            form = fibre_residue_integrand(n, k, P, lams)
            assert fp == both_engines(form)


def test_fibre_integrand_structure():
    # numerator sign-bearing factor count (k-1)k/2; z-only denominator factor
    # count (k-1)k/2; total degree of the fraction with the payload is -k
    for n, k in ((2, 2), (3, 3), (2, 4)):
        ctx = tower_context(k, n=n)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        P = MultiPoly.monomial(ctx, {"z1": k * (n - 1)})
        form = fibre_residue_integrand(n, k, P)
        lfs = form.linear_forms()
        z_only = [
            lf
            for lf, _ in lfs
            if lf.constant.is_zero
        ]
        assert len(z_only) == (k - 1) * k // 2
        assert len(lfs) == (k - 1) * k // 2 + n * k
        num_deg = form.numerator.total_degree()
        assert num_deg == k * (n - 1) + (k - 1) * k // 2
        den_deg = sum(m for _, m in form.factors)
        assert num_deg - den_deg == -k


def test_fibre_residue_symbolic_lambdas_small():
    # symbolic weights at n=2, k=2: matches the numeric evaluation
    rng = random.Random(43)
    n, k = 2, 2
    ctx = tower_context(k, n=n)
    zvars = [f"z{i}" for i in range(1, k + 1)]
    P = random_homogeneous(rng, ctx, zvars, k * (n - 1))
    sym = residue_expand(fibre_residue_integrand(n, k, P))
    for _ in range(3):
        lams = distinct_lambdas(rng, n)
        numeric = sym.evaluate({"L1": lams[0], "L2": lams[1]})
        restricted = P.restrict(tower_context(k))
        direct = fibre_integral_fixed_points(n, k, restricted, lams)
        assert numeric == direct.constant()


def test_segre_hypersurface_values():
    seg = segre_hypersurface(1)
    h = MultiPoly.variable(HD_CTX, "h")
    d = MultiPoly.variable(HD_CTX, "d")
    assert seg.classes[0] == HClass(1, (d - 3) * h)
    # c * s = 1 mod h^(n+1) for n <= 6
    for n in range(1, 7):
        seg = segre_hypersurface(n)
        c = ((1 + h) ** (n + 2) * (1 + d * h).series_inverse(2 * n)).truncate("h", n)
        s = MultiPoly.const(HD_CTX, 1)
        for cls in seg.classes:
            s = s + cls.poly
        assert (c * s).truncate("h", n) == MultiPoly.const(HD_CTX, 1)
    # d = 0 placeholder: s(X) = (1+h)^-(n+2) truncated
    seg0 = segre_hypersurface(3, 0)
    inv = ((1 + h) ** 5).series_inverse(3).truncate("h", 3)
    total = MultiPoly.const(HD_CTX, 1)
    for cls in seg0.classes:
        total = total + cls.poly
    assert total == inv


def test_hypersurface_integrand_structure_n2_k2():
    ctx = tower_context(2)
    P = MultiPoly.monomial(ctx, {"z1": 4})
    form = hypersurface_integrand(2, 2, P)
    z1 = MultiPoly.variable(ctx, "z1")
    z2 = MultiPoly.variable(ctx, "z2")
    h = MultiPoly.variable(ctx, "h")
    d = MultiPoly.variable(ctx, "d")
    # denominator (-z1+z2)(z1+h)^4(z1+z2+h)^4
    expected_factors = {(z2 - z1, 1), (z1 + h, 4), (z1 + z2 + h, 4)}
    assert set(form.factors) == expected_factors
    # numerator z1*z2*(z1+z2)*(z1+dh)(z1+z2+dh)*P, sign (+1)^k at k=2
    expected = (
        z1 * z2 * (z1 + z2) * (z1 + d * h) * (z1 + z2 + d * h) * P
    ).truncate("h", 2)
    assert form.numerator == expected


def test_route_equality_hypersurface_vs_segre():
    rng = random.Random(45)
    for k in (1, 2):
        n = 2
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        seg = segre_hypersurface(n)
        for _ in range(10):
            P = random_homogeneous(rng, ctx, zvars, n + k * (n - 1), with_h=True)
            v1 = integrate_over_X(
                truncate_h(residue_expand(hypersurface_integrand(n, k, P)).restrict(HD_CTX), n)
            )
            v2 = integrate_over_X(
                truncate_h(residue_expand(demailly_integrand(n, k, P, seg)).restrict(HD_CTX), n)
            )
            assert v1 == v2


def test_trivial_segre_matches_reflected_fibre_form():
    # s(X) = 1 (trivial tangent data): the Segre route equals the fibre
    # machinery with all weights zero, after bridging the two payload
    # conventions by z -> -z
    rng = random.Random(46)
    for n, k in ((2, 1), (2, 2), (3, 2)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        P = random_homogeneous(rng, ctx, zvars, k * (n - 1))
        via_segre = residue_expand(demailly_integrand(n, k, P, SegreData.trivial(n)))
        refl = reflect_payload(P, k)
        numerator = refl
        for t1 in range(2, k + 1):
            for t2 in range(t1, k + 1):
                numerator = numerator * (-_zsum(ctx, t1, t2))
        factors = []
        for s1 in range(1, k + 1):
            for s2 in range(s1 + 1, k + 1):
                factors.append(
                    (MultiPoly.variable(ctx, f"z{s1}") - _zsum(ctx, s1 + 1, s2), 1)
                )
        for j in range(1, k + 1):
            factors.append((-_zsum(ctx, 1, j), n))
        via_fibre = residue_expand(ResidueForm(numerator, factors, zvars))
        assert via_segre.restrict(HD_CTX) == via_fibre.restrict(HD_CTX)


def test_degree_mismatch_integrates_to_zero():
    rng = random.Random(47)
    n, k = 2, 2
    ctx = tower_context(k)
    zvars = [f"z{i}" for i in range(1, k + 1)]
    target = n + k * (n - 1)
    for deg in (target - 2, target - 1, target + 1):
        P = random_homogeneous(rng, ctx, zvars, deg, with_h=True)
        form = hypersurface_integrand(n, k, P)
        assert not form.degree_matched
        value = integrate_over_X(truncate_h(residue_expand(form).restrict(HD_CTX), n))
        assert value.is_zero


def test_integrate_over_X_rules():
    for n in (2, 3):
        h = MultiPoly.variable(HD_CTX, "h")
        d = MultiPoly.variable(HD_CTX, "d")
        assert integrate_over_X(HClass(n, h**n)) == DPoly([0, 1])
        assert integrate_over_X(HClass.const(n, 1)).is_zero
        cls = HClass(n, (3 + 5 * d) * h**n + h ** (n - 1))
        assert integrate_over_X(cls) == DPoly([0, 3, 5])


def test_k1_hypersurface_pipeline_values():
    # n = 2 hand-checked values for the honest tautological class
    ctx = tower_context(1)
    z1 = MultiPoly.variable(ctx, "z1")
    h = MultiPoly.variable(ctx, "h")
    cases = [
        (z1**3, DPoly([0, 10, -4])),
        (z1**2 * h, DPoly([0, -4, 1])),
        (z1 * h**2, DPoly([0, 1])),
        (h**3, DPoly([])),
    ]
    for P, expected in cases:
        assert integral_over_tower(2, 1, P) == expected
        assert integral_over_tower(2, 1, P, engine="stepwise") == expected


def test_engines_agree_on_hypersurface_integrands():
    rng = random.Random(48)
    for n, k in ((2, 1), (2, 2)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        P = random_homogeneous(rng, ctx, zvars, n + k * (n - 1), with_h=True)
        form = hypersurface_integrand(n, k, P)
        both_engines(form)


def test_engines_agree_on_segre_integrands():
    rng = random.Random(50)
    for n, k in ((2, 1), (2, 2)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        seg = segre_hypersurface(n)
        P = random_homogeneous(rng, ctx, zvars, n + k * (n - 1), with_h=True)
        both_engines(demailly_integrand(n, k, P, seg))


def test_route_equality_hypersurface_vs_segre_n3():
    rng = random.Random(51)
    for n, k in ((3, 1), (3, 2), (2, 3)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        seg = segre_hypersurface(n)
        P = random_homogeneous(rng, ctx, zvars, n + k * (n - 1), with_h=True)
        v1 = integrate_over_X(
            truncate_h(residue_expand(hypersurface_integrand(n, k, P)).restrict(HD_CTX), n)
        )
        v2 = integrate_over_X(
            truncate_h(residue_expand(demailly_integrand(n, k, P, seg)).restrict(HD_CTX), n)
        )
        assert v1 == v2


def test_demailly_degree_mismatch_integrates_to_zero():
    rng = random.Random(52)
    n, k = 2, 2
    ctx = tower_context(k)
    seg = segre_hypersurface(n)
    for deg in (2, 3, 5):
        P = random_homogeneous(rng, ctx, ["z1", "z2"], deg, with_h=True)
        form = demailly_integrand(n, k, P, seg)
        assert not form.degree_matched
        value = integrate_over_X(truncate_h(residue_expand(form).restrict(HD_CTX), n))
        assert value.is_zero


@pytest.mark.slow
def test_engines_agree_on_hypersurface_integrands_n3():
    rng = random.Random(49)
    for n, k in ((3, 1), (3, 2), (2, 3), (3, 3)):
        ctx = tower_context(k)
        zvars = [f"z{i}" for i in range(1, k + 1)]
        P = random_homogeneous(rng, ctx, zvars, n + k * (n - 1), with_h=True)
        form = hypersurface_integrand(n, k, P)
        both_engines(form)


def test_k_below_one_rejected():
    ctx = tower_context(1)
    P = MultiPoly.variable(ctx, "z1")
    with pytest.raises(ValueError):
        fibre_residue_integrand(2, 0, P)
    with pytest.raises(ValueError):
        hypersurface_integrand(2, 0, P)
