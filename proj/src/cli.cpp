#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qlab/cgo.hpp"
#include "qlab/cli.hpp"
#include "qlab/dnmap.hpp"
#include "qlab/gauge.hpp"
#include "qlab/recon.hpp"

namespace qlab {

namespace {

constexpr const char* kVersion = "0.1.0";

CoefficientSet load_set(const RunConfig& cfg, const GridSpec& g) {
    CoefficientSet set = preset_set(cfg.preset, g);
    if (!cfg.sigma_csv.empty()) set.sigma = read_field_csv(cfg.sigma_csv);
    if (!cfg.q_csv.empty()) set.q = read_field_csv(cfg.q_csv);
    if (!cfg.f_csv.empty()) set.F = read_field_csv(cfg.f_csv);
    require_same_grid(set.sigma, set.q, "load_set");
    require_same_grid(set.sigma, set.F, "load_set");
    if (set.sigma.grid.n != g.n) {
        throw usage_error("field CSV grid does not match --grid_n");
    }
    return set;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

void check_ge(Report& rep, const std::string& name, double attained, double threshold) {
    if (attained >= threshold) {
        rep.pass(name);
    } else {
        rep.fail(name, attained, threshold, "expected >= threshold");
    }
}

void cmd_forward(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    const CoefficientSet set = load_set(cfg, g);
    const ForwardSolution sol = solve_quasilinear(set, set.f0, nullptr, cfg.tol);
    const ConditionReport cond = check_conditions(set, sol.u0);

    rep.metric("newton_iters", sol.newton_iters);
    rep.metric("final_residual", sol.final_residual);
    rep.metric("ellipticity_margin", cond.ellipticity_margin);
    rep.metric("sign_condition_max", cond.sign_max);
    rep.metric("nondegeneracy_margin", cond.nondegeneracy_margin);
    rep.metric("structural_margin", cond.structural_margin);
    rep.check_le("newton_converged", sol.final_residual, cfg.tol);
    rep.check_le("ellipticity", -cond.ellipticity_margin, 0.0);
    rep.check_le("sign_condition", cond.sign_max, cond.sign_slack);
    if (cfg.preset == "manufactured") {
        auto [mset, exact] = manufactured_solution(g);
        rep.metric("err_inf_vs_exact", max_abs(sol.u0 - exact));
    }
    if (cond.structural_ok) {
        rep.pass("structural_condition");
    } else {
        rep.indeterminate("structural_condition", "grad(sigma/q) vanishes on this preset");
    }
    write_field_csv(out_path(cfg, "u0.csv"), sol.u0);
}

void cmd_dn(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    const CoefficientSet set = load_set(cfg, g);
    const BoundaryBasis basis = make_fourier_basis(g, cfg.k_max);
    const DNMatrix dn = fd_linearize_first(set, set.f0, basis, cfg.eps, cfg.tol);
    write_dn_csv(out_path(cfg, "dn_matrix.csv"), g, dn);
    rep.metric("dn_matrix_max", dn.entries.cwiseAbs().maxCoeff());
    rep.metric("eps_box", largest_converged_eps(set, set.f0, basis, cfg.tol));
    rep.pass("dn_computed");
}

void cmd_linearize(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    const CoefficientSet set = load_set(cfg, g);
    const BoundaryBasis basis = make_fourier_basis(g, cfg.k_max);
    const ForwardSolution base = solve_quasilinear(set, set.f0, nullptr, cfg.tol);
    auto [L, Lstar] = build_linearized(set, base.u0);

    const DNMatrix fd1 = fd_linearize_first(set, set.f0, basis, cfg.eps, cfg.tol);
    double worst1 = 0.0;
    for (int m = 0; m < basis.size(); ++m) {
        const Field V = solve_linearized(L, basis.mode(m), cfg.tol);
        const auto nd = noncorner_normal_derivative(V);
        double scale = 0.0, diff = 0.0;
        for (size_t r = 0; r < nd.size(); ++r) {
            scale = std::max(scale, std::abs(nd[r]));
            diff = std::max(diff, std::abs(fd1.entries(static_cast<int>(r), m) - nd[r].real()));
        }
        const double gap = diff / std::max(scale, 1e-300);
        rep.metric("gap_first_" + basis.mode_name(m), gap);
        worst1 = std::max(worst1, gap);
    }
    rep.metric("gap_first_max", worst1);
    rep.check_le("linearization_first", worst1, 1e-3);

    const int j = 0, k = basis.size() > 1 ? 1 : 0;
    const auto fd2 = fd_linearize_second(set, set.f0, basis, j, k, cfg.eps, cfg.tol);
    const Field V1 = solve_linearized(L, basis.mode(j), cfg.tol);
    const Field V2 = solve_linearized(L, basis.mode(k), cfg.tol);
    const Field w = solve_second(L, set.q, V1, V2, cfg.tol);
    const auto ndw = noncorner_normal_derivative(w);
    double scale2 = 0.0, diff2 = 0.0;
    for (size_t r = 0; r < ndw.size(); ++r) {
        scale2 = std::max(scale2, std::abs(ndw[r]));
        diff2 = std::max(diff2, std::abs(fd2[r] - ndw[r].real()));
    }
    const double gap2 = diff2 / std::max(scale2, 1e-300);
    rep.metric("gap_second", gap2);
    rep.check_le("linearization_second", gap2, 1e-2);
}

void cmd_verify(const RunConfig& cfg, Report& rep) {
    const GridSpec gc = build_grid(cfg.grid_n);
    const GridSpec gf = build_grid(2 * cfg.grid_n - 1);

    struct Stage {
        CoefficientSet set;
        Field u0;
        EllipticProblem L, Lstar;
        MagneticData mag;
    };
    auto make_stage = [&](const GridSpec& g) {
        Stage s;
        s.set = preset_set(cfg.preset, g);
        s.u0 = solve_quasilinear(s.set, s.set.f0, nullptr, cfg.tol).u0;
        auto pair = build_linearized(s.set, s.u0);
        s.L = pair.first;
        s.Lstar = pair.second;
        s.mag = build_magnetic(s.set, s.u0);
        return s;
    };
    const Stage sc = make_stage(gc);
    const Stage sf = make_stage(gf);

    {
        const TwoGridReport adj =
            verify_adjoint_pairing(sc.L, sc.Lstar, sf.L, sf.Lstar, 20, cfg.seed);
        rep.metric("adjoint_gap_coarse", adj.gap_coarse);
        rep.metric("adjoint_gap_fine", adj.gap_fine);
        rep.metric("adjoint_ratio", adj.ratio);
        if (adj.pass) {
            rep.pass("adjoint_order2");
        } else {
            rep.fail("adjoint_order2", adj.ratio, 4.0, "expected ratio in [3,5]");
        }
    }
    {
        auto phi_of = [](const GridSpec& g) {
            return make_field(g, [](double x, double y) {
                const double b = x * x * (1 - x) * (1 - x) * y * y * (1 - y) * (1 - y);
                return cplx(0.0, b);
            });
        };
        auto v_of = [](const GridSpec& g) {
            return make_field(g, [](double x, double y) { return cplx(std::exp(x + y), 0.0); });
        };
        const double rc = gauge_conjugation_residual(sc.mag, phi_of(gc), v_of(gc));
        const double rf = gauge_conjugation_residual(sf.mag, phi_of(gf), v_of(gf));
        rep.metric("gauge_conj_residual_coarse", rc);
        rep.metric("gauge_conj_residual_fine", rf);
        const double ratio = rf > 0.0 ? rc / rf : 0.0;
        rep.metric("gauge_conj_ratio", ratio);
        rep.check_range("gauge_conj_order2", ratio, 3.0, 5.0);

        const double r0 = gauge_conjugation_residual(sc.mag, Field(gc, 0.0), v_of(gc));
        rep.metric("gauge_conj_phi0_residual", r0);
        rep.check_le("gauge_conj_phi0_floor", r0, 1e-12);
    }
    {
        // identities that are near-exact for a preset sit at rounding level
        // and cannot decay further; 5e-12 is well below any h^2 signal here
        auto check_decay = [&](const std::string& name, double coarse, double fine) {
            if (fine <= std::max(coarse / 2.5, 5e-12)) {
                rep.pass(name);
            } else {
                rep.fail(name, fine, coarse / 2.5);
            }
        };
        rep.metric("magnetic_q_route_gap_coarse", sc.mag.q_route_gap);
        rep.metric("magnetic_q_route_gap_fine", sf.mag.q_route_gap);
        check_decay("magnetic_q_two_routes", sc.mag.q_route_gap, sf.mag.q_route_gap);

        // L_{A,Q} v vs -(1/Theta) L v on a random smooth field.
        auto op_gap = [&](const Stage& s) {
            const Field v = random_smooth_field(s.u0.grid, cfg.seed + 101);
            const Field lhs = apply_magnetic(s.mag.Ax, s.mag.Ay, s.mag.Q, v);
            const Field Lv = apply_elliptic(s.L, v);
            double worst = 0.0;
            const GridSpec& g = s.u0.grid;
            for (int jj = 1; jj < g.n - 1; ++jj)
                for (int ii = 1; ii < g.n - 1; ++ii) {
                    const cplx r = lhs.at(ii, jj) + Lv.at(ii, jj) / s.mag.Theta.at(ii, jj);
                    worst = std::max(worst, std::abs(r));
                }
            return worst / std::max(max_abs(v), 1e-300);
        };
        const double mc = op_gap(sc), mf = op_gap(sf);
        rep.metric("magnetic_vs_L_gap_coarse", mc);
        rep.metric("magnetic_vs_L_gap_fine", mf);
        check_decay("magnetic_vs_L", mc, mf);

        // Z relation: qZ + grad q = -q^2 grad(sigma/q)/Theta.
        auto z_gap = [](const Stage& s) {
            const GridSpec& g = s.u0.grid;
            auto [qx, qy] = gradient(s.set.q);
            Field ratio(g, 0.0, true);
            for (int k = 0; k < g.node_count(); ++k) ratio[k] = s.set.sigma[k] / s.set.q[k];
            auto [rx, ry] = gradient(ratio);
            double worst = 0.0;
            for (int k = 0; k < g.node_count(); ++k) {
                const cplx q = s.set.q[k];
                const cplx ex = q * s.mag.Zx[k] + qx[k] + q * q * rx[k] / s.mag.Theta[k];
                const cplx ey = q * s.mag.Zy[k] + qy[k] + q * q * ry[k] / s.mag.Theta[k];
                worst = std::max(worst, std::hypot(std::abs(ex), std::abs(ey)));
            }
            return worst;
        };
        const double zc = z_gap(sc), zf = z_gap(sf);
        rep.metric("z_relation_gap_coarse", zc);
        rep.metric("z_relation_gap_fine", zf);
        check_decay("z_relation", zc, zf);
    }
}

void cmd_gauge_demo(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    const BoundaryBasis basis = make_fourier_basis(g, cfg.k_max);
    const std::vector<cplx> f0(g.boundary_count(), 0.0);

    // Remark-style linear pair: interior-supported phi keeps the discrete
    // Cauchy data bit-identical, so the DN gap sits at the solver floor.
    {
        const Field sigma = make_real_field(g, [](double, double) { return 1.0; });
        const Field F = make_real_field(g, [](double, double) { return -1.0; });
        const Field phi = interior_bump(g, 0.01);
        const GaugePair pair = build_linear_counterexample(sigma, F, phi);
        const DNComparison cmp = compare_dn(pair.base, pair.transformed, f0, basis, cfg.eps, cfg.tol);
        const double f_change = max_abs(pair.transformed.F - pair.base.F);
        rep.metric("counterexample_f_change", f_change);
        rep.metric("counterexample_margin0", cmp.margin0);
        rep.metric("counterexample_margin1", cmp.margin1);
        rep.metric("counterexample_margin2", cmp.margin2);
        rep.metric("counterexample_floor0", cmp.floor.order0);
        rep.metric("counterexample_floor1", cmp.floor.order1);
        rep.metric("counterexample_floor2", cmp.floor.order2);
        check_ge(rep, "counterexample_f_change_ge_0.1", f_change, 0.1);
        rep.check_le("counterexample_dn_equal_0", cmp.margin0, 10.0 * cmp.floor.order0);
        rep.check_le("counterexample_dn_equal_1", cmp.margin1, 10.0 * cmp.floor.order1);
        rep.check_le("counterexample_dn_equal_2", cmp.margin2, 10.0 * cmp.floor.order2);
        write_field_csv(out_path(cfg, "phi.csv"), phi);
        write_field_csv(out_path(cfg, "f_diff.csv"), pair.transformed.F - pair.base.F);
    }
    if (cfg.linear_only) return;

    {
        const GaugePair pair = build_scaling_gauge(preset_set("constant", g));
        const DNComparison cmp = compare_dn(pair.base, pair.transformed, f0, basis, cfg.eps, cfg.tol);
        rep.metric("scaling_margin0", cmp.margin0);
        rep.metric("scaling_margin1", cmp.margin1);
        rep.metric("scaling_floor0", cmp.floor.order0);
        rep.metric("scaling_floor1", cmp.floor.order1);
        rep.metric("scaling_obstruction_expected", pair.obstruction_expected ? 1.0 : 0.0);
        rep.check_le("scaling_dn_equal_0", cmp.margin0, 10.0 * cmp.floor.order0);
        rep.check_le("scaling_dn_equal_1", cmp.margin1, 10.0 * cmp.floor.order1);
    }
    {
        const GaugePair pair = build_scaling_gauge(preset_set("affine", g));
        const DNComparison cmp = compare_dn(pair.base, pair.transformed, f0, basis, cfg.eps, cfg.tol);
        rep.metric("scaling_flagged_margin1", cmp.margin1);
        rep.metric("scaling_flagged_floor1", cmp.floor.order1);
        rep.metric("scaling_flagged_obstruction_expected", pair.obstruction_expected ? 1.0 : 0.0);
        check_ge(rep, "scaling_flagged_discriminated", cmp.margin1, 100.0 * cmp.floor.order1);
    }
    {
        const Field phi = interior_bump(g, 0.01);
        CoefficientSet nonlinear = preset_set("manufactured", g);
        const GaugeBreakReport broke = gauge_break_experiment(nonlinear, phi, basis, cfg.eps, cfg.tol);

        CoefficientSet control = nonlinear;
        control.q = Field(g, 0.0, true);
        const GaugeBreakReport ctrl = gauge_break_experiment(control, phi, basis, cfg.eps, cfg.tol);

        rep.metric("break_transformed_residual", broke.transformed_residual);
        rep.metric("break_margin0", broke.cmp.margin0);
        rep.metric("break_margin1", broke.cmp.margin1);
        rep.metric("break_margin2", broke.cmp.margin2);
        rep.metric("break_floor1", broke.cmp.floor.order1);
        rep.metric("control_margin1", ctrl.cmp.margin1);
        rep.metric("control_margin2", ctrl.cmp.margin2);
        rep.check_le("break_cauchy_data_match", broke.cmp.margin0, 10.0 * broke.cmp.floor.order0);
        check_ge(rep, "gauge_break_margin_ratio",
                 broke.cmp.margin1 / std::max(ctrl.cmp.margin1, 1e-300), 10.0);
    }
}

void cmd_cgo_probe(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    if (g.n % 2 == 0) throw usage_error("cgo-probe: grid_n must be odd");
    const CoefficientSet set = load_set(cfg, g);
    const ForwardSolution base = solve_quasilinear(set, set.f0, nullptr, cfg.tol);
    const MagneticData mag = build_magnetic(set, base.u0);

    const int center = g.id((g.n - 1) / 2, (g.n - 1) / 2);
    std::ofstream csv(out_path(cfg, "cgo_probe.csv"));
    csv << "tau,re_D,im_D,re_P,im_P,remainder_sup\n";

    const ComplexFrequency f_dir = make_frequency({1.0, 0.0}, 1.0);
    const Field phase = solve_transport(mag, f_dir);

    // tau*h <= 0.35 for asserted verdicts; the larger taus up to the hard
    // build_cgo guard are computed and reported but resolution-capped.
    std::vector<double> errs;
    cplx P = 0.0;
    int capped = 0;
    char buf[220];
    for (double tau : cfg.tau_list) {
        if (tau * g.h > 1.5) {
            rep.indeterminate("tau_" + std::to_string(static_cast<int>(tau)),
                              "skipped: tau*h > 1.5 (unresolved oscillation)");
            continue;
        }
        const ComplexFrequency freq = make_frequency({1.0, 0.0}, tau);
        const CGOSolution sol = build_cgo(set, base.u0, freq, phase, cfg.tol);
        const cplx D = probe_value(sol, set, center);
        P = probe_limit(set, base.u0, freq, center);
        const double err = std::abs(D - P);
        if (tau * g.h <= 0.35) {
            errs.push_back(err);
        } else {
            ++capped;
        }
        std::snprintf(buf, sizeof(buf), "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n", tau, D.real(),
                      D.imag(), P.real(), P.imag(), sol.remainder_sup_inner);
        csv << buf;
        rep.metric("transport_residual_tau" + std::to_string(static_cast<int>(tau)),
                   sol.transport_res);
        rep.metric("probe_err_tau" + std::to_string(static_cast<int>(tau)), err);
        rep.metric("remainder_sup_tau" + std::to_string(static_cast<int>(tau)),
                   sol.remainder_sup_inner);
    }
    rep.metric("probe_limit_re", P.real());
    rep.metric("probe_limit_im", P.imag());
    rep.metric("probe_taus_resolution_capped", capped);

    bool decreasing = !errs.empty();
    for (size_t k = 1; k < errs.size(); ++k) decreasing = decreasing && errs[k] < errs[k - 1];
    if (std::abs(P) < 1e-8) {
        rep.indeterminate("probe_error_decreasing", "limit P vanishes on this preset");
    } else if (errs.size() < 2) {
        rep.indeterminate("probe_error_decreasing",
                          "fewer than two taus with tau*h <= 0.35; raise grid_n");
    } else if (decreasing) {
        rep.pass("probe_error_decreasing");
    } else {
        rep.fail("probe_error_decreasing", errs.back(), 0.0,
                 "expected strictly decreasing |D - P| over the resolved taus");
    }
    if (errs.size() >= 2 && std::abs(P) > 1e-8) {
        rep.check_le("probe_final_rel_err", errs.back() / std::abs(P), 0.10);
    }
}

void cmd_recon(const RunConfig& cfg, Report& rep) {
    const GridSpec g = build_grid(cfg.grid_n);
    if (g.n % 2 == 0) throw usage_error("recon: grid_n must be odd");
    const BoundaryBasis basis = make_fourier_basis(g, cfg.k_max);

    {
        const Field q = make_real_field(g, [](double x, double) { return 1.0 + 0.5 * x; });
        const BRecoveryReport b = verify_B_recovery(q, nullptr, cfg.tol);
        rep.metric("b_recovery_deviation", b.deviation_from_one);
        rep.check_le("b_recovery", b.deviation_from_one, 1e-8);
    }

    const CoefficientSet affine = preset_set("affine", g);
    const ForwardSolution aff_base = solve_quasilinear(affine, affine.f0, nullptr, cfg.tol);

    {
        std::vector<int> probes;
        for (double px : {0.25, 0.5, 0.75})
            for (double py : {0.25, 0.5, 0.75})
                probes.push_back(g.id(static_cast<int>(std::lround(px * (g.n - 1))),
                                      static_cast<int>(std::lround(py * (g.n - 1)))));
        // certificates need the oscillation well resolved, tighter than the
        // bare build_cgo guard
        double tau = 0.0;
        for (double t : cfg.tau_list)
            if (t * g.h <= 0.35) tau = std::max(tau, t);
        if (tau <= 0.0) throw usage_error("recon: no resolved tau in tau_list (need tau*h <= 0.35)");
        rep.metric("a_recovery_tau", tau);

        const ARecoveryReport ra =
            verify_A_recovery(affine, aff_base.u0, probes, tau, {1.0, 0.0}, nullptr, cfg.tol);
        rep.metric("a_recovery_structural_certified", ra.certified_count);
        check_ge(rep, "a_recovery_structural", ra.certified_count, 9.0);

        CoefficientSet flat = preset_set("manufactured", g);
        flat.F = Field(g, 0.0, true);
        flat.f0.assign(g.boundary_count(), 0.0);
        const Field u0_flat(g, 0.0, true);
        const ARecoveryReport rb =
            verify_A_recovery(flat, u0_flat, probes, tau, {1.0, 0.0}, nullptr, cfg.tol);
        rep.metric("a_recovery_constant_ratio_certified", rb.certified_count);
        rep.check_le("a_recovery_constant_ratio", rb.certified_count, 0.0);
    }

    {
        const BoundaryDeterminationReport bd = boundary_sigma_determination(
            affine, affine, affine.f0, basis.mode(0), cfg.eps, 1e-6, cfg.tol);
        rep.metric("boundary_det_determinate_count", bd.determinate_count);
        rep.metric("boundary_det_max_inconsistency", bd.max_inconsistency);
        check_ge(rep, "boundary_det_probes_fire", bd.determinate_count, 1.0);
        rep.check_le("boundary_det_consistency", bd.max_inconsistency, 1e-10);
    }

    {
        CoefficientSet bumped = affine;
        bumped.sigma = affine.sigma + boundary_flat_bump(g, [](double, double) {
                           return 0.01 * 256.0 * 256.0;  // normalized so max sigma_hat = 0.01
                       });
        const ForwardSolution bump_base = solve_quasilinear(bumped, bumped.f0, nullptr, cfg.tol);

        const SystemResidual equal = system_residual(affine, aff_base.u0, affine, aff_base.u0);
        const SystemResidual bump = system_residual(affine, aff_base.u0, bumped, bump_base.u0);
        rep.metric("detM_identity_gap", equal.detM_identity_gap);
        rep.metric("system_equal_r1", equal.r1_norm);
        rep.metric("system_equal_r2", equal.r2_norm);
        rep.metric("system_bump_r1", bump.r1_norm);
        rep.metric("system_bump_r2", bump.r2_norm);
        rep.check_le("detM_identity", equal.detM_identity_gap, 1e-12);
        rep.check_le("system_equal_floor", std::max(equal.r1_norm, equal.r2_norm), 1e-13);
        const double floor_sys = std::max({equal.r1_norm, equal.r2_norm, 1e-15});
        check_ge(rep, "system_bump_detected", std::min(bump.r1_norm, bump.r2_norm),
                 100.0 * floor_sys);
        write_field_csv(out_path(cfg, "r1.csv"), bump.r1);
        write_field_csv(out_path(cfg, "r2.csv"), bump.r2);
        write_field_csv(out_path(cfg, "detM.csv"), bump.detM);

        const UniquenessRow row1 =
            uniqueness_experiment("identical", affine, affine, affine.f0, basis, cfg.eps, cfg.tol);
        const UniquenessRow row2 =
            uniqueness_experiment("sigma_bump", affine, bumped, affine.f0, basis, cfg.eps, cfg.tol);
        const Field sigma1 = make_real_field(g, [](double, double) { return 1.0; });
        const Field Fc = make_real_field(g, [](double, double) { return -1.0; });
        const GaugePair ce = build_linear_counterexample(sigma1, Fc, interior_bump(g, 0.01));
        const UniquenessRow row3 = uniqueness_experiment("linear_counterexample", ce.base,
                                                         ce.transformed, ce.base.f0, basis,
                                                         cfg.eps, cfg.tol);
        for (const auto& row : {row1, row2, row3}) {
            rep.prov("uniqueness_" + row.name, row.verdict);
            rep.metric("uniq_" + row.name + "_margin0", row.cmp.margin0);
            rep.metric("uniq_" + row.name + "_margin1", row.cmp.margin1);
            rep.metric("uniq_" + row.name + "_margin2", row.cmp.margin2);
        }
        auto expect = [&](const UniquenessRow& row, const std::string& want) {
            if (row.verdict == want) {
                rep.pass("uniqueness_" + row.name);
            } else {
                rep.fail("uniqueness_" + row.name, 0.0, 0.0, "got " + row.verdict + ", expected " + want);
            }
        };
        expect(row1, "indistinguishable");
        expect(row2, "discriminated");
        expect(row3, "indistinguishable");
    }
}

}  // namespace

Report run(const RunConfig& cfg_in) {
    if (cfg_in.command.empty()) throw usage_error("no command given");
    RunConfig cfg = cfg_in;
    if (cfg.preset.empty()) {
        // the CGO-side commands live on the structural background
        cfg.preset = (cfg.command == "cgo-probe" || cfg.command == "recon") ? "affine"
                                                                            : "manufactured";
    }
    std::filesystem::create_directories(cfg.output_dir);

    char num[40];
    Report rep;
    rep.command = cfg.command;
    rep.prov("command", cfg.command);
    rep.prov("grid_n", std::to_string(cfg.grid_n));
    std::snprintf(num, sizeof(num), "%.6e", cfg.eps);
    rep.prov("eps", num);
    std::snprintf(num, sizeof(num), "%.6e", cfg.tol);
    rep.prov("tol", num);
    rep.prov("seed", std::to_string(cfg.seed));
    rep.prov("preset", cfg.preset);
    rep.prov("kmax", std::to_string(cfg.k_max));
    {
        std::string taus;
        for (double t : cfg.tau_list) {
            std::snprintf(num, sizeof(num), "%g", t);
            taus += (taus.empty() ? "" : ",") + std::string(num);
        }
        rep.prov("tau_list", taus);
    }
    rep.prov("version", kVersion);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (cfg.command == "forward") {
            cmd_forward(cfg, rep);
        } else if (cfg.command == "dn") {
            cmd_dn(cfg, rep);
        } else if (cfg.command == "linearize") {
            cmd_linearize(cfg, rep);
        } else if (cfg.command == "verify") {
            cmd_verify(cfg, rep);
        } else if (cfg.command == "gauge-demo") {
            cmd_gauge_demo(cfg, rep);
        } else if (cfg.command == "cgo-probe") {
            cmd_cgo_probe(cfg, rep);
        } else if (cfg.command == "recon") {
            cmd_recon(cfg, rep);
        } else {
            throw usage_error("unknown command: " + cfg.command);
        }
    } catch (const usage_error&) {
        throw;
    } catch (const std::exception& e) {
        rep.fail("module_error", 0.0, 0.0, e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    rep.prov("wall_time_s",
             std::to_string(std::chrono::duration<double>(t1 - t0).count()) +
                 " (excluded from the determinism contract)");

    rep.write((std::filesystem::path(cfg.output_dir) / "report.txt").string());
    return rep;
}

int run_main(const std::vector<std::string>& args) {
    try {
        const RunConfig cfg = parse_config(args);
        const Report rep = run(cfg);
        std::cout << rep.to_text();
        return rep.any_fail() ? 1 : 0;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qlab
