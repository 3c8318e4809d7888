import math

import numpy as np
import pytest

from oucontract.wiener import (
    BM,
    BRIDGE,
    KLBasis,
    affine_level_spec,
    basel_partial_sum,
    constant_epigraph,
    cylindrical_curvature_audit,
    cylindrical_domain,
    epigraph_curvature_audit,
    functional_spec_from_dict,
    gauss_ridge_epigraph,
    pathwise_level_value,
    rational_reference_spec,
    resolvent_convergence_study,
    trace_density,
    validate_functional,
)
from oucontract.domains import gaussian_curvature, project_to_boundary


class TestSeries:
    def test_basel_first_term(self):
        assert basel_partial_sum(1) == 4.0

    def test_basel_limit(self):
        assert abs(basel_partial_sum(1000) - math.pi**2 / 2) <= 2e-3

    def test_basel_monotone_bounded(self):
        prev = 0.0
        for m in (1, 5, 50, 500):
            val = basel_partial_sum(m)
            assert val > prev
            assert val < math.pi**2 / 2
            prev = val

    def test_trace_density_empty_sum(self):
        basis = KLBasis.build(BM, 1)
        assert trace_density(0.37, 0, basis) == 0.0

    def test_bm_trace_integral(self):
        basis = KLBasis.build(BM, 1, n_panels=200)
        f200 = trace_density(basis.s_nodes, 200, basis)
        assert abs(float(f200 @ basis.s_weights) - 0.5) <= 1e-3

    def test_bm_trace_integral_increases_with_m(self):
        basis = KLBasis.build(BM, 1, n_panels=256)
        vals = [float(trace_density(basis.s_nodes, m, basis) @ basis.s_weights)
                for m in (10, 50, 200)]
        assert vals[0] < vals[1] < vals[2] < 0.5

    def test_bridge_trace_limit(self):
        basis = KLBasis.build(BRIDGE, 1)
        s = np.linspace(0, 1, 101)
        sup_err = np.max(np.abs(trace_density(s, 500, basis) - (s - s * s)))
        assert sup_err <= 2e-3
        assert trace_density(0.5, 500, basis) == pytest.approx(0.25, abs=1e-3)


class TestKLBasis:
    @pytest.mark.parametrize("kind", [BM, BRIDGE])
    def test_orthonormal_in_h(self, kind):
        basis = KLBasis.build(kind, 8)
        gram = basis.gram_H()
        assert np.max(np.abs(gram - np.eye(8))) < 1e-10

    def test_eigenvalues(self):
        bm = KLBasis.build(BM, 3)
        assert np.allclose(bm.lambdas, [1 / (math.pi * (n - 0.5)) ** 2 for n in (1, 2, 3)])
        br = KLBasis.build(BRIDGE, 3)
        assert np.allclose(br.lambdas, [1 / (math.pi * n) ** 2 for n in (1, 2, 3)])

    @pytest.mark.parametrize("kind", [BM, BRIDGE])
    def test_sup_norm_bounded_by_h_norm(self, kind):
        basis = KLBasis.build(kind, 6)
        rng = np.random.default_rng(3)
        for _ in range(10):
            c = rng.standard_normal(6)
            path = c @ basis.h_table
            assert np.max(np.abs(path)) <= np.linalg.norm(c) * (1 + 1e-9)

    def test_quadrature_refinement_stable(self):
        # polynomial profile: doubling s-nodes moves G_m by < 1e-10
        spec = functional_spec_from_dict({
            "g": {"type": "poly", "coeffs": [0.0, 1.0, 0.0, 0.02]},
            "c": 0.5, "alpha1": 1.0, "alpha2": 3.2, "beta1": -1.0, "beta2": 1.0,
            "r": -1.0, "gpp_sup": 3.0,
        })
        xi = np.array([0.7, -0.3])
        vals = []
        for panels in (16, 32):
            basis = KLBasis.build(BM, 2, n_panels=panels)
            vals.append(pathwise_level_value(spec, basis, xi))
        assert abs(vals[0] - vals[1]) < 1e-10


class TestFunctionalValidation:
    def test_affine_accepted(self):
        assert validate_functional(affine_level_spec(r=-1.0)).ok

    def test_affine_wrong_level_rejected(self):
        report = validate_functional(affine_level_spec(r=1.0))
        assert not report.ok
        assert "threshold" in report.failures

    def test_envelope_violation_carries_witness(self):
        # alpha2 = 1 cannot envelope xi g' for g = xi + xi^3/100
        spec = functional_spec_from_dict({
            "g": {"type": "poly", "coeffs": [0.0, 1.0, 0.0, 0.01]},
            "c": 0.5, "alpha1": 1.0, "alpha2": 1.0, "beta1": -1.0, "beta2": 1.0,
            "r": -2.0, "gpp_sup": 2.0,
        })
        report = validate_functional(spec)
        assert not report.ok
        assert "envelope_upper" in report.failures
        assert "envelope_upper" in report.witness

    def test_reference_specs_accepted(self):
        assert validate_functional(rational_reference_spec(kind=BM)).ok
        assert validate_functional(rational_reference_spec(kind=BRIDGE)).ok

    def test_rational_derivatives_consistent(self):
        spec = rational_reference_spec()
        xi = np.linspace(-5, 5, 101)
        h = 1e-5
        gp_fd = (spec.g(xi + h) - spec.g(xi - h)) / (2 * h)
        gpp_fd = (spec.g(xi + h) - 2 * spec.g(xi) + spec.g(xi - h)) / h**2
        assert np.max(np.abs(spec.gp(xi) - gp_fd)) < 1e-8
        assert np.max(np.abs(spec.gpp(xi) - gpp_fd)) < 1e-4


class TestCylindricalDomain:
    def test_affine_level_closed_form(self):
        # G(e1) = int h_1 ds - r = 4 sqrt(2)/pi^2 - r
        basis = KLBasis.build(BM, 2)
        spec = affine_level_spec(r=-1.0)
        expected = 4 * math.sqrt(2) / math.pi**2 + 1.0
        assert pathwise_level_value(spec, basis, np.array([1.0, 0.0])) == pytest.approx(
            expected, abs=1e-12
        )

    def test_zero_path_value(self):
        basis = KLBasis.build(BM, 3)
        spec = rational_reference_spec()
        assert pathwise_level_value(spec, basis, np.zeros(3)) == pytest.approx(
            float(spec.g(0.0)) - spec.r, abs=1e-12
        )

    def test_analytic_gradient_matches_fd(self):
        basis = KLBasis.build(BM, 3)
        dom = cylindrical_domain(rational_reference_spec(), basis)
        rng = np.random.default_rng(5)
        xi = rng.standard_normal(3)
        g0 = dom.gradient(xi)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (dom.value(xi + e) - dom.value(xi - e)) / (2 * h)
            assert g0[i] == pytest.approx(fd, abs=1e-8)

    def test_invalid_spec_rejected_at_build(self):
        basis = KLBasis.build(BM, 2)
        with pytest.raises(ValueError, match="rejected"):
            cylindrical_domain(affine_level_spec(r=1.0), basis)


class TestCurvatureAudits:
    def test_affine_reduces_to_halfspace(self):
        basis = KLBasis.build(BM, 2)
        spec = affine_level_spec(r=-1.0)
        dom = cylindrical_domain(spec, basis)
        rng = np.random.default_rng(0)
        for _ in range(5):
            bp = project_to_boundary(dom, rng.standard_normal(2))
            # flat level set: Hgamma = -<x, nu> = distance of the plane
            assert gaussian_curvature(dom, bp.x) == pytest.approx(1.7341, abs=1e-3)

    @pytest.mark.parametrize("name,factory", [
        ("affine", lambda: affine_level_spec(r=-1.0)),
        ("bm", rational_reference_spec),
        ("bridge", lambda: rational_reference_spec(kind=BRIDGE)),
    ])
    def test_shipped_specs_pass_audit(self, name, factory):
        spec = factory()
        basis = KLBasis.build(spec.kind, 2)
        audit = cylindrical_curvature_audit(spec, basis, 32, seed=2, tol=1e-6)
        assert audit.ok
        assert audit.min_h_gamma >= -1e-6
        assert audit.first_coord_min >= audit.first_coord_floor

    def test_audit_at_max_truncation(self):
        basis = KLBasis.build(BM, 4)
        audit = cylindrical_curvature_audit(rational_reference_spec(), basis,
                                            16, seed=9)
        assert audit.ok

    def test_audit_truncation_cap(self):
        basis = KLBasis.build(BM, 5)
        with pytest.raises(ValueError, match="m <= 4"):
            cylindrical_curvature_audit(rational_reference_spec(), basis, 4, seed=0)

    def test_epigraph_constant_levels(self):
        for c, m in ((2.0, 3), (0.0, 2)):
            audit = epigraph_curvature_audit(constant_epigraph(c), m, 24, seed=4)
            assert audit.ok
            assert audit.min_h_gamma == pytest.approx(c, abs=1e-8)

    def test_epigraph_gauss_ridge(self):
        spec = gauss_ridge_epigraph(2.0, 0.5, [1.0, 0.0])
        audit = epigraph_curvature_audit(spec, 3, 24, seed=4)
        assert audit.ok
        assert audit.min_bound_slack >= -1e-6

    def test_epigraph_margin_guard(self):
        with pytest.raises(ValueError, match="constants violate"):
            gauss_ridge_epigraph(0.5, 1.0, [1.0])

    def test_epigraph_spec_files(self, tmp_path):
        import json

        from oucontract.wiener import load_epigraph_spec, load_functional_spec

        e_path = tmp_path / "epi.json"
        e_path.write_text(json.dumps(
            {"kind": "gauss_ridge", "c0": 2.0, "amp": 0.5, "weights": [1.0, 0.0]}
        ))
        spec = load_epigraph_spec(e_path)
        assert spec.C == 2.0 and spec.C1 == 0.5

        f_path = tmp_path / "fun.json"
        f_path.write_text(json.dumps({
            "g": {"type": "rational", "num": [0.0, -0.5, 0.0, -1.0],
                  "den": [1.0, 0.0, 1.0]},
            "c": 0.5, "alpha1": 1.0, "alpha2": 1.0,
            "beta1": -0.33, "beta2": 0.33, "r": -0.75, "gpp_sup": 0.75,
            "kind": "brownian_motion", "name": "file-spec",
        }))
        fspec = load_functional_spec(f_path)
        assert validate_functional(fspec).ok
        ref = rational_reference_spec()
        xi = np.linspace(-3, 3, 11)
        assert np.allclose(fspec.g(xi), ref.g(xi))

    def test_epigraph_false_constants_rejected(self):
        spec = gauss_ridge_epigraph(2.0, 0.5, [1.0, 0.0])
        lying = type(spec)(spec.phi, spec.phi_grad, spec.phi_hess,
                           C=3.0, C1=spec.C1, C2=spec.C2, C3=spec.C3)
        audit = epigraph_curvature_audit(lying, 3, 24, seed=4)
        assert not audit.ok
        assert "phi_floor" in audit.constant_failures


class TestConvergenceStudy:
    def test_cylindrical_family_gives_vanishing_differences(self):
        # a first-coordinate-cylindrical domain solves the same 1-D
        # problem at every truncation: differences sit at solver accuracy
        from oucontract.domains import halfspace

        spec = affine_level_spec(r=-1.0)
        rows = resolvent_convergence_study(
            spec, 1.0, dims=(1,), bump_center=-3.2, bump_radius=1.0,
            box=6.0, h=0.1, gh_nodes=16,
            domain_for=lambda n: halfspace(n, 1.75),
        )
        assert rows[0].d_l2 <= 1e-6
        assert rows[0].d_grad <= 1e-5

    def test_reference_spec_rows_finite(self):
        spec = rational_reference_spec()
        rows = resolvent_convergence_study(
            spec, 1.0, dims=(1,), bump_center=3.2, bump_radius=1.0,
            box=6.0, h=0.15, gh_nodes=12,
        )
        assert rows[0].finite()

    def test_identity_limit_small(self):
        spec = rational_reference_spec()
        rows = resolvent_convergence_study(
            spec, 1e-4, dims=(1,), bump_center=3.2, bump_radius=1.0,
            box=6.0, h=0.15, gh_nodes=12,
        )
        assert rows[0].d_l2 <= 0.02

    def test_deterministic(self):
        spec = rational_reference_spec()
        kwargs = dict(dims=(1,), bump_center=3.2, bump_radius=1.0,
                      box=5.0, h=0.2, gh_nodes=10)
        a = resolvent_convergence_study(spec, 1.0, **kwargs)
        b = resolvent_convergence_study(spec, 1.0, **kwargs)
        assert a[0].d_l2 == b[0].d_l2
        assert a[0].d_grad == b[0].d_grad
