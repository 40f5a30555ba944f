#include "orpco/discrete_policy.hpp"

#include "orpco/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace orpco;

TEST_SUITE("bayesopt") {

TEST_CASE("config validation") {
    BoConfig bad;
    bad.n_init = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.n_init = 2;
    bad.n_iter = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("known 1-D optimum is located within tolerance") {
    auto f = [](const Eigen::VectorXd& u) { return -(u[0] - 0.3) * (u[0] - 0.3); };
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_iter = 20;
    const auto trace = bayesopt_maximize(f, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                                         cfg, 17);
    const auto& best = trace.probes[static_cast<std::size_t>(trace.best_index)];
    CHECK(std::fabs(best.u[0] - 0.3) <= 0.02);
    CHECK(trace.probes.size() == 25);
}

TEST_CASE("n_iter = 0 degenerates to the best random probe") {
    int calls = 0;
    auto f = [&](const Eigen::VectorXd& u) {
        ++calls;
        return u[0];
    };
    BoConfig cfg;
    cfg.n_init = 7;
    cfg.n_iter = 0;
    const auto trace = bayesopt_maximize(f, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                                         cfg, 3);
    CHECK(calls == 7);
    CHECK(trace.probes.size() == 7);
    double best = -1;
    for (const auto& p : trace.probes) best = std::max(best, p.value);
    CHECK(trace.best_value == doctest::Approx(best));
}

TEST_CASE("constant objective keeps the first probe by the tie rule") {
    auto f = [](const Eigen::VectorXd&) { return 1.0; };
    BoConfig cfg;
    cfg.n_init = 4;
    cfg.n_iter = 5;
    const auto trace = bayesopt_maximize(f, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2),
                                         cfg, 5);
    CHECK(trace.best_index == 0);
}

TEST_CASE("feasibility, monotone best, argmax consistency, determinism") {
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, 2.0;
    hi << 1.0, 5.0;
    auto f = [](const Eigen::VectorXd& u) {
        return std::sin(3 * u[0]) + 0.2 * u[1] - 0.05 * u[1] * u[1];
    };
    BoConfig cfg;
    cfg.n_init = 6;
    cfg.n_iter = 15;
    const auto t1 = bayesopt_maximize(f, lo, hi, cfg, 11);
    const auto t2 = bayesopt_maximize(f, lo, hi, cfg, 11);
    REQUIRE(t1.probes.size() == t2.probes.size());
    double running = -1e300;
    for (std::size_t i = 0; i < t1.probes.size(); ++i) {
        for (int d = 0; d < 2; ++d) {
            CHECK(t1.probes[i].u[d] >= lo[d]);
            CHECK(t1.probes[i].u[d] <= hi[d]);
        }
        CHECK(t1.probes[i].u == t2.probes[i].u); // determinism
        running = std::max(running, t1.probes[i].value);
    }
    CHECK(t1.best_value == doctest::Approx(running));
    CHECK(t1.probes[static_cast<std::size_t>(t1.best_index)].value == t1.best_value);
}

TEST_CASE("evaluator failures surface with a probe index") {
    int calls = 0;
    auto f = [&](const Eigen::VectorXd&) -> double {
        if (++calls == 3) throw NumericalError("boom");
        return 0.0;
    };
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_iter = 0;
    CHECK_THROWS_AS(static_cast<void>(bayesopt_maximize(f, Eigen::VectorXd::Zero(1),
                                                        Eigen::VectorXd::Ones(1), cfg, 1)),
                    NumericalError);
}

} // TEST_SUITE
