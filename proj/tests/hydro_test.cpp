#include "dripsim/hydro.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace dripsim;
using hydro::PlantConfig;
using hydro::PlantState;

namespace {

PlantConfig nominal_config() {
    PlantConfig cfg;
    cfg.supply_pressure_kpa = 180.0;
    cfg.k_filter_clean = 1e-4;
    cfg.k_lateral = 5e-5;
    cfg.emitter_count = 10;
    cfg.k_emitter = 0.4;
    cfg.emitter_exponent = 0.5;
    return cfg;
}

PlantState open_state() {
    PlantState s;
    s.valve_open = true;
    s.shutoff_open = true;
    return s;
}

// Frozen from the fixed-point / closed-form oracles (tolerance 1e-12 between
// routes) for supply 180, N=10, k_e=0.4, x=0.5, k_filter=1e-4, k_lateral=5e-5.
constexpr double kNominalFlowLph = 53.612046193052436;
constexpr double kNominalP3 = 179.712574850299404;
constexpr double kNominalPEnd = 179.568862275449106;

}  // namespace

TEST(SolveFlow, ClosedValveHoldsRegulatorPressureOnly) {
    PlantState s;
    s.valve_open = false;
    const auto sol = hydro::solve_flow(nominal_config(), s);
    EXPECT_EQ(sol.flow_lph, 0.0);
    EXPECT_EQ(sol.stations.p1_regulator, 180.0);
    EXPECT_EQ(sol.stations.p2_pre_filter, 0.0);
    EXPECT_EQ(sol.stations.p3_post_filter, 0.0);
    EXPECT_EQ(sol.stations.p_head, 0.0);
    EXPECT_EQ(sol.stations.p_end, 0.0);
}

TEST(SolveFlow, ClosedShutoffZeroesEverything) {
    PlantState s = open_state();
    s.shutoff_open = false;
    const auto sol = hydro::solve_flow(nominal_config(), s);
    EXPECT_EQ(sol.flow_lph, 0.0);
    EXPECT_EQ(sol.stations.p1_regulator, 0.0);
    EXPECT_EQ(sol.stations.p_end, 0.0);
}

TEST(SolveFlow, FullyCloggedEmittersGiveZeroLateralDrop) {
    PlantState s = open_state();
    s.emitter_clog = 1.0;
    const auto sol = hydro::solve_flow(nominal_config(), s);
    EXPECT_EQ(sol.flow_lph, 0.0);
    EXPECT_EQ(sol.stations.p_head, sol.stations.p_end);
    EXPECT_EQ(sol.stations.p_head, 180.0);  // static line, no friction losses
}

TEST(SolveFlow, NominalMatchesIndependentOracles) {
    const PlantConfig cfg = nominal_config();
    const double k_demand = cfg.emitter_count * cfg.k_emitter;
    const double closed_form = oracles::flow_closed_form_x05(
        cfg.supply_pressure_kpa, cfg.k_filter_clean, cfg.k_lateral, k_demand);
    const double fixed_point = oracles::flow_fixed_point(
        cfg.supply_pressure_kpa, cfg.k_filter_clean, cfg.k_lateral, k_demand,
        cfg.emitter_exponent);
    ASSERT_NEAR(closed_form, fixed_point, 1e-12 * closed_form);
    ASSERT_NEAR(closed_form, kNominalFlowLph, 1e-12 * closed_form);

    const auto sol = hydro::solve_flow(cfg, open_state());
    EXPECT_NEAR(sol.flow_lph, kNominalFlowLph, 1e-9);
    EXPECT_NEAR(sol.stations.p2_pre_filter, 180.0, 1e-12);
    EXPECT_NEAR(sol.stations.p3_post_filter, kNominalP3, 1e-9);
    EXPECT_NEAR(sol.stations.p_head, kNominalP3, 1e-9);
    EXPECT_NEAR(sol.stations.p_end, kNominalPEnd, 1e-9);
}

TEST(SolveFlow, NonFiniteConfigRejected) {
    PlantConfig cfg = nominal_config();
    cfg.k_lateral = std::nan("");
    EXPECT_THROW(hydro::solve_flow(cfg, open_state()), ConfigError);
    cfg = nominal_config();
    cfg.supply_pressure_kpa = std::numeric_limits<double>::infinity();
    EXPECT_THROW(hydro::solve_flow(cfg, open_state()), ConfigError);
}

TEST(SolveFlow, ResidualWithinTolerance) {
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> supply(150.0, 200.0);
    std::uniform_real_distribution<double> resist(1e-5, 5e-3);
    std::uniform_real_distribution<double> ke(0.05, 2.0);
    std::uniform_real_distribution<double> expx(0.3, 0.8);
    std::uniform_real_distribution<double> clog(0.0, 0.95);
    std::uniform_int_distribution<int> count(1, 50);

    for (int i = 0; i < 1000; ++i) {
        PlantConfig cfg;
        cfg.supply_pressure_kpa = supply(gen);
        cfg.k_filter_clean = resist(gen);
        cfg.k_lateral = resist(gen);
        cfg.emitter_count = count(gen);
        cfg.k_emitter = ke(gen);
        cfg.emitter_exponent = expx(gen);
        PlantState s = open_state();
        s.filter_clog = clog(gen);
        s.emitter_clog = clog(gen);

        const auto sol = hydro::solve_flow(cfg, s);
        const double q = sol.flow_lph;
        const double k_filter = cfg.k_filter_clean / ((1 - s.filter_clog) * (1 - s.filter_clog));
        const double p_op = cfg.supply_pressure_kpa - (k_filter + 0.5 * cfg.k_lateral) * q * q;
        const double demand = p_op > 0 ? cfg.emitter_count * (1 - s.emitter_clog) *
                                             cfg.k_emitter * std::pow(p_op, cfg.emitter_exponent)
                                       : 0.0;
        EXPECT_LE(std::abs(q - demand), 1e-9 * std::max(1.0, q))
            << "residual too large at case " << i;
    }
}

TEST(SolveFlow, FlowMonotoneInBothClogFractions) {
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> supply(150.0, 200.0);
    std::uniform_real_distribution<double> resist(1e-5, 5e-3);
    std::uniform_real_distribution<double> ke(0.05, 2.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int i = 0; i < 1000; ++i) {
        PlantConfig cfg;
        cfg.supply_pressure_kpa = supply(gen);
        cfg.k_filter_clean = resist(gen);
        cfg.k_lateral = resist(gen);
        cfg.emitter_count = 10;
        cfg.k_emitter = ke(gen);

        PlantState lo = open_state(), hi = open_state();
        const double c1 = 0.9 * u01(gen), c2 = 0.9 * u01(gen);
        lo.filter_clog = std::min(c1, c2);
        hi.filter_clog = std::max(c1, c2);
        EXPECT_LE(hydro::solve_flow(cfg, hi).flow_lph,
                  hydro::solve_flow(cfg, lo).flow_lph + 1e-9);

        lo = open_state();
        hi = open_state();
        const double e1 = u01(gen), e2 = u01(gen);
        lo.emitter_clog = std::min(e1, e2);
        hi.emitter_clog = std::max(e1, e2);
        EXPECT_LE(hydro::solve_flow(cfg, hi).flow_lph,
                  hydro::solve_flow(cfg, lo).flow_lph + 1e-9);
    }
}

TEST(SolveFlow, PressureOrderingHoldsWheneverFlowing) {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> supply(150.0, 200.0);
    std::uniform_real_distribution<double> resist(1e-5, 5e-3);
    std::uniform_real_distribution<double> ke(0.05, 2.0);
    std::uniform_real_distribution<double> clog(0.0, 0.9);

    for (int i = 0; i < 1000; ++i) {
        PlantConfig cfg;
        cfg.supply_pressure_kpa = supply(gen);
        cfg.k_filter_clean = resist(gen);
        cfg.k_lateral = resist(gen);
        cfg.emitter_count = 10;
        cfg.k_emitter = ke(gen);
        PlantState s = open_state();
        s.filter_clog = clog(gen);
        s.emitter_clog = clog(gen);

        const auto sol = hydro::solve_flow(cfg, s);
        if (sol.flow_lph <= 0) continue;
        const auto& st = sol.stations;
        EXPECT_GE(st.p2_pre_filter, st.p3_post_filter);
        EXPECT_GE(st.p3_post_filter, st.p_head);
        EXPECT_GE(st.p_head, st.p_end);
        EXPECT_GE(st.p_end, 0.0);
    }
}

TEST(SolveFlow, HeadEndDropVanishesExactlyWhenFlowStops) {
    PlantConfig cfg = nominal_config();  // k_lateral > 0
    PlantState flowing = open_state();
    const auto sol_flowing = hydro::solve_flow(cfg, flowing);
    ASSERT_GT(sol_flowing.flow_lph, 0.0);
    EXPECT_GT(sol_flowing.stations.p_head - sol_flowing.stations.p_end, 0.0);

    PlantState clogged = open_state();
    clogged.emitter_clog = 1.0;
    const auto sol_clogged = hydro::solve_flow(cfg, clogged);
    EXPECT_EQ(sol_clogged.flow_lph, 0.0);
    EXPECT_EQ(sol_clogged.stations.p_head - sol_clogged.stations.p_end, 0.0);

    std::mt19937 gen(21);
    std::uniform_real_distribution<double> clogf(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        PlantState s = open_state();
        s.emitter_clog = i % 7 == 0 ? 1.0 : clogf(gen);
        const auto sol = hydro::solve_flow(cfg, s);
        EXPECT_EQ(sol.flow_lph == 0.0, sol.stations.p_head - sol.stations.p_end == 0.0);
    }
}

TEST(Step, NoSourceNoSinkLeavesMoistureUntouched) {
    PlantConfig cfg = nominal_config();
    cfg.et_rate = 0.0;
    PlantState s;  // valve closed -> no inflow
    s.soil_moisture = 0.5;
    const PlantState next = hydro::step(cfg, s, 10.0);
    EXPECT_EQ(next.soil_moisture, 0.5);
    EXPECT_EQ(next.tick, s.tick + 1);
}

TEST(Step, LinearDrawdownUnderEvapotranspiration) {
    PlantConfig cfg = nominal_config();
    cfg.et_rate = 1e-4;
    PlantState s;
    s.soil_moisture = 0.5;
    const PlantState next = hydro::step(cfg, s, 10.0);
    EXPECT_NEAR(next.soil_moisture, 0.499, 1e-12);
}

TEST(Step, MoistureClampsAtFieldCapacity) {
    PlantConfig cfg = nominal_config();
    cfg.et_rate = 0.0;
    cfg.soil_capacity_l = 0.01;  // overwhelming inflow
    PlantState s = open_state();
    s.soil_moisture = 0.999;
    const PlantState next = hydro::step(cfg, s, 10.0);
    EXPECT_EQ(next.soil_moisture, 1.0);
}

TEST(Step, MoistureClampsAtZero) {
    PlantConfig cfg = nominal_config();
    cfg.et_rate = 0.5;
    PlantState s;
    s.soil_moisture = 0.1;
    const PlantState next = hydro::step(cfg, s, 10.0);
    EXPECT_EQ(next.soil_moisture, 0.0);
}

TEST(Step, MassBalanceAccumulates) {
    PlantConfig cfg = nominal_config();
    cfg.soil_capacity_l = 50.0;
    cfg.et_rate = 5e-5;
    PlantState s = open_state();
    s.soil_moisture = 0.3;

    const double dt = 0.1;
    double expected_delta = 0.0;
    const double theta0 = s.soil_moisture;
    for (int i = 0; i < 5000; ++i) {
        if (i == 2000) s.valve_open = false;  // include a regime change
        if (i == 3500) s.valve_open = true;
        s = hydro::step(cfg, s, dt);
        expected_delta +=
            dt * (cfg.infiltration_efficiency * s.flow_lph / 3600.0 / cfg.soil_capacity_l -
                  cfg.et_rate);
        ASSERT_GT(s.soil_moisture, 0.0);  // clamp must stay disengaged
        ASSERT_LT(s.soil_moisture, 1.0);
    }
    EXPECT_NEAR(s.soil_moisture - theta0, expected_delta, 1e-9 * 5000);
}

TEST(ApplyFault, SupplyLossClosesShutoff) {
    PlantState s = open_state();
    const PlantState lost = hydro::apply_fault(s, hydro::SupplyLoss{});
    EXPECT_FALSE(lost.shutoff_open);
    const auto sol = hydro::solve_flow(nominal_config(), lost);
    EXPECT_EQ(sol.stations.p1_regulator, 0.0);
    const PlantState restored = hydro::apply_fault(lost, hydro::SupplyRestore{});
    EXPECT_TRUE(restored.shutoff_open);
}

TEST(ApplyFault, SettersTouchOnlyTheirField) {
    PlantState s = open_state();
    s.soil_moisture = 0.42;
    const PlantState f = hydro::apply_fault(s, hydro::FilterClog{0.8});
    EXPECT_EQ(f.filter_clog, 0.8);
    EXPECT_EQ(f.emitter_clog, s.emitter_clog);
    EXPECT_EQ(f.soil_moisture, 0.42);
    EXPECT_EQ(f.valve_open, s.valve_open);
    EXPECT_EQ(f.tick, s.tick);

    const PlantState e = hydro::apply_fault(s, hydro::EmitterClog{1.0});
    EXPECT_EQ(e.emitter_clog, 1.0);
    EXPECT_EQ(e.filter_clog, s.filter_clog);
}

TEST(ApplyFault, FullEmitterClogShowsThePaperSignature) {
    PlantState s = open_state();
    const PlantState clogged = hydro::apply_fault(s, hydro::EmitterClog{1.0});
    const auto sol = hydro::solve_flow(nominal_config(), clogged);
    EXPECT_EQ(sol.stations.p_head - sol.stations.p_end, 0.0);
}

TEST(ApplyFault, OutOfRangeLevelsRejected) {
    PlantState s;
    EXPECT_THROW(hydro::apply_fault(s, hydro::FilterClog{1.0}), FaultError);
    EXPECT_THROW(hydro::apply_fault(s, hydro::FilterClog{-0.1}), FaultError);
    EXPECT_THROW(hydro::apply_fault(s, hydro::EmitterClog{1.5}), FaultError);
    EXPECT_THROW(hydro::apply_fault(s, hydro::EmitterClog{std::nan("")}), FaultError);
}
