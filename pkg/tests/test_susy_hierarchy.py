import math

import pytest

from ptwell import (
    EliminationPlan,
    IllegalPlanError,
    LevelAnnihilated,
    PlanChoice,
    build_hierarchy,
    classify_spectrum,
    hierarchy_relations_check,
    intertwine,
    partner_potential,
    potential_V3,
    solve_real_spectrum,
    square_well_potential,
    superpotential_W1,
    superpotential_next,
)
from ptwell.susy_hierarchy import _logderiv_superpotential, _pair_correction, _pair_denominator
from ptwell.wavefunctions import chebyshev_grid, limit_form, schrodinger_residual

INTERIOR = (-0.85, -0.4, -0.15, 0.2, 0.55, 0.9)


def test_plan_parsing():
    plan = EliminationPlan.from_text("real, clower ,cupper")
    assert plan.choices == (PlanChoice.LOWEST_REAL, PlanChoice.COMPLEX_LOWER, PlanChoice.COMPLEX_UPPER)


@pytest.mark.parametrize("text", ["", "  ", "real,bogus", "ground"])
def test_plan_parsing_rejects(text):
    with pytest.raises(IllegalPlanError):
        EliminationPlan.from_text(text)


def test_square_well_potential_values():
    V = square_well_potential(2.0)
    assert V(0.5) == -2.0j
    assert V(-0.5) == 2.0j
    assert V.endpoint_exponent == 1
    assert V.pt_symmetric


def test_superpotential_w1_zero_coupling_is_tangent():
    spec = classify_spectrum(0.0, 3)
    W = superpotential_W1(spec, 0)
    for x in INTERIOR:
        assert W(x) == pytest.approx((math.pi / 2) * math.tan(math.pi * x / 2), abs=1e-12)


def test_superpotential_w1_continuous_and_singular_at_walls():
    spec = classify_spectrum(2.0, 3)
    W = superpotential_W1(spec, 0)
    assert abs(W(1e-12) - W(-1e-12)) < 1e-9
    assert abs(W(1.0 - 1e-9)) > 1e5


def test_superpotential_w1_rejects_excited_real_level():
    spec = classify_spectrum(2.0, 4)
    with pytest.raises(IllegalPlanError):
        superpotential_W1(spec, 1)


def test_factorization_recovers_source_potential():
    # V = W^2 - W' + E_f must reproduce the well the level was taken from
    V1 = square_well_potential(2.0)
    spec = classify_spectrum(2.0, 3)
    W = superpotential_W1(spec, 0)
    for x in INTERIOR:
        back = W(x) ** 2 - W.derivative(x) + W.factorization_energy
        assert back == pytest.approx(V1(x), abs=1e-12)


def test_partner_potential_identity_against_difference_quotient():
    spec = classify_spectrum(2.0, 3)
    W = superpotential_W1(spec, 0)
    V2 = partner_potential(W)
    h = 1e-6
    for x in INTERIOR:
        dW = (W(x + h) - W(x - h)) / (2 * h)
        assert V2(x) == pytest.approx(W(x) ** 2 + dW + W.factorization_energy, abs=1e-7)


def test_partner_exponent_inference():
    spec = classify_spectrum(2.0, 3)
    V2 = partner_potential(superpotential_W1(spec, 0))
    assert V2.endpoint_exponent == 2


def test_v3_symmetric_in_elimination_order():
    from ptwell.susy_hierarchy import _closed_V3

    spec = classify_spectrum(8.0, 4)
    a, b = spec.levels[0], spec.levels[1]
    Vab = _closed_V3(8.0, a, b)
    Vba = _closed_V3(8.0, b, a)
    for x in INTERIOR:
        assert Vab(x) == pytest.approx(Vba(x), rel=1e-12)


def test_pair_correction_series_matches_direct():
    import cmath

    ra, rb = 0.42232333391384685 - 2.6400931214530665j, 2.069076966969682 - 3.327583836182065j
    for w in (0.05, 0.12, 0.19):
        num = rb**2 * cmath.sinh(ra * w) ** 2 - ra**2 * cmath.sinh(rb * w) ** 2
        direct = -2.0 * (rb**2 - ra**2) * num / _pair_denominator(w, ra, rb) ** 2
        assert _pair_correction(w, ra, rb) == pytest.approx(direct, rel=1e-10)


def test_pair_correction_wall_asymptote():
    ra, rb = 0.5 - 2.6j, 2.0 - 3.3j
    w = 1e-6
    assert _pair_correction(w, ra, rb).real == pytest.approx(6.0 / w**2, rel=1e-8)


def test_hierarchy_chain_shape():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real,real,real"), 4, levels=8)
    assert [m.depth for m in h] == [1, 2, 3, 4]
    assert [m.potential.endpoint_exponent for m in h] == [1, 2, 3, 4]
    assert all(m.potential.pt_symmetric for m in h)
    # each elimination removes exactly the lowest level
    for prev, nxt in zip(h, h[1:]):
        assert len(nxt.spectrum.levels) == len(prev.spectrum.levels) - 1
        assert nxt.spectrum.levels[0].energy == pytest.approx(prev.spectrum.levels[1].energy)


def test_hierarchy_eigenfunctions_satisfy_their_equations():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real,real"), 3, levels=8)
    for member in h[1:]:
        for n in range(3):
            f = member.eigenfunctions(n)
            E = member.spectrum.levels[n].energy
            assert abs(f(1e-13) - f(-1e-13)) < 1e-9
            for x in INTERIOR:
                r = schrodinger_residual(f, member.potential, E, x, 1e-4)
                assert abs(r) < 1e-4 * (1 + abs(E))


def test_intertwine_drops_index_and_matches_closed_form():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real"), 2, levels=8)
    W = h[0].superpotential
    phi = intertwine(W, h[0].eigenfunctions(1))
    assert phi.level.index == 0
    assert phi.level.energy == pytest.approx(h[1].spectrum.levels[0].energy)
    psi = h[1].eigenfunctions(0)
    ref_phi, ref_psi = phi(0.32), psi(0.32)
    for x in chebyshev_grid(50):
        assert phi(x) / ref_phi == pytest.approx(psi(x) / ref_psi, abs=1e-9)


def test_intertwine_annihilates_eliminated_level():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real"), 2, levels=6)
    with pytest.raises(LevelAnnihilated):
        intertwine(h[0].superpotential, h[0].eigenfunctions(0))


def test_second_step_superpotential_routes_agree():
    # closed two-level form vs dividing out the member-2 ground state
    h = build_hierarchy(2.0, EliminationPlan.from_text("real,real"), 3, levels=8)
    m2 = h[1]
    W_closed = m2.superpotential
    W_log = _logderiv_superpotential(m2.eigenfunctions(0), m2.potential)
    for x in INTERIOR:
        assert W_closed(x) == pytest.approx(W_log(x), abs=1e-9)


def test_second_step_superpotential_mirror():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real,real"), 3, levels=8)
    W2 = h[1].superpotential
    for x in (0.2, 0.5, 0.8):
        assert W2(-x) == pytest.approx(-W2(x).conjugate(), abs=1e-12)


def test_logderiv_superpotential_rejects_nodes():
    h = build_hierarchy(0.0, EliminationPlan.from_text("real"), 1, levels=4)
    psi1 = h[0].eigenfunctions(1)  # odd level, node at the origin
    W = _logderiv_superpotential(psi1, h[0].potential)
    with pytest.raises(ZeroDivisionError):
        W(0.0)


def test_superpotential_next_requires_pending_choice():
    h = build_hierarchy(2.0, EliminationPlan.from_text("real"), 2, levels=6)
    with pytest.raises(IllegalPlanError):
        superpotential_next(h[1])


def test_build_hierarchy_validation():
    plan = EliminationPlan.from_text("real")
    with pytest.raises(ValueError):
        build_hierarchy(2.0, plan, 0)
    with pytest.raises(IllegalPlanError):
        build_hierarchy(2.0, plan, 3)
    with pytest.raises(ValueError):
        build_hierarchy(2.0, plan, 3, levels=2)


def test_pair_elimination_bookkeeping():
    h = build_hierarchy(8.0, EliminationPlan.from_text("clower"), 2, levels=8)
    m2 = h[1]
    assert m2.spectrum.levels[0].energy.imag > 0
    assert m2.spectrum.broken_pairs == ()
    assert not m2.potential.pt_symmetric
    assert len(m2.eliminated) == 1
    assert m2.eliminated[0].energy.imag < 0


def test_pair_elimination_requires_a_pair():
    with pytest.raises(IllegalPlanError):
        build_hierarchy(8.0, EliminationPlan.from_text("clower,clower"), 3)
    with pytest.raises(IllegalPlanError):
        build_hierarchy(2.0, EliminationPlan.from_text("cupper"), 2)


def test_zero_coupling_family_law():
    # V_m - V_1 collapses to (pi^2/4) m(m-1) sec^2(pi x/2) as the coupling vanishes
    h = build_hierarchy(0.0, EliminationPlan.from_text("real,real"), 3, levels=6)
    for m, member in enumerate(h, start=1):
        for x in INTERIOR:
            expected = (math.pi**2 / 4) * m * (m - 1) / math.cos(math.pi * x / 2) ** 2
            assert member.potential(x) == pytest.approx(expected, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_zero_coupling_eigenfunctions_proportional_to_limit_forms(m):
    h = build_hierarchy(0.0, EliminationPlan.from_text("real,real"), 3, levels=8)
    grid = [x / 10 for x in range(-9, 10) if x != 0]
    for n in range(5):
        f = h[m - 1].eigenfunctions(n)
        fv = [f(x) for x in grid]
        gv = [limit_form(m, n, x) for x in grid]
        c = sum(a * b for a, b in zip(fv, gv)) / sum(b * b for b in gv)
        dev = max(abs(a - c * b) for a, b in zip(fv, gv)) / max(abs(a) for a in fv)
        assert dev < 1e-10


def test_relations_check_window_guard():
    with pytest.raises(ValueError):
        hierarchy_relations_check(2.0)
    with pytest.raises(ValueError):
        hierarchy_relations_check(14.0)


def test_relations_check_structure():
    rel = hierarchy_relations_check(8.0, levels=2)
    assert rel["coupling"] == 8.0
    assert rel["member2_mirror_dev"] < 1e-10
    assert rel["member3_same_dev"] < 1e-10
    assert rel["member3_pt_symmetric"] is True
    assert rel["member2_pt_symmetric"] is False
    assert rel["member2_eigenfunction_pt_defect"] > 0.01
    assert set(rel["eigenfunction_mirror"]) == {
        "member2_level0", "member2_level1", "member3_level0", "member3_level1",
    }
    for stats in rel["eigenfunction_mirror"].values():
        assert stats["ratio_variance"] < 1e-10
        assert stats["ratio_imag_frac"] < 1e-10
