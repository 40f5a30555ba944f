#include "orpco/dataset.hpp"

#include "orpco/errors.hpp"
#include "orpco/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace orpco;
using orpco::test::TempDir;
namespace fs = std::filesystem;

namespace {

Schema small_schema() {
    return Schema({{"x0", VarKind::conditional, 0.0, 1.0},
                   {"x1", VarKind::conditional, -2.0, 2.0},
                   {"u0", VarKind::control, 0.0, 10.0},
                   {"y0", VarKind::result, -5.0, 5.0}});
}

ProcessDataset random_dataset(int n, std::uint64_t seed) {
    const Schema schema = small_schema();
    Rng rng = make_rng(seed);
    std::vector<ProcessRecord> recs;
    for (int i = 0; i < n; ++i) {
        ProcessRecord r;
        r.x = Eigen::Vector2d(uniform(rng, 0, 1), uniform(rng, -2, 2));
        r.u = Eigen::VectorXd::Constant(1, uniform(rng, 0, 10));
        r.y = Eigen::VectorXd::Constant(1, uniform(rng, -5, 5));
        recs.push_back(std::move(r));
    }
    ProcessDataset ds(schema, std::move(recs));
    ds.fit_normalization();
    return ds;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("schema rejects bad declarations") {
    CHECK_THROWS_AS(Schema({{"a", VarKind::conditional, 1.0, 1.0},
                            {"u0", VarKind::control, 0, 1},
                            {"y0", VarKind::result, 0, 1}}),
                    ConfigError);
    CHECK_THROWS_AS(Schema({{"u0", VarKind::control, 0, 1},
                            {"u0", VarKind::control, 0, 1},
                            {"y0", VarKind::result, 0, 1}}),
                    ConfigError);
    // result before control breaks the block order
    CHECK_THROWS_AS(Schema({{"y0", VarKind::result, 0, 1}, {"u0", VarKind::control, 0, 1}}),
                    ConfigError);
}

TEST_CASE("normalization maps to [0,1] and round-trips") {
    auto ds = random_dataset(200, 7);
    const auto xn = ds.normalized_x();
    const auto un = ds.normalized_u();
    const auto yn = ds.normalized_y();
    CHECK(xn.minCoeff() >= 0.0);
    CHECK(xn.maxCoeff() <= 1.0 + 1e-12);
    CHECK(un.minCoeff() >= 0.0);
    CHECK(yn.maxCoeff() <= 1.0 + 1e-12);
    for (std::size_t i = 0; i < ds.size(); i += 17) {
        const auto& r = ds.records()[i];
        const Eigen::VectorXd back = ds.normalization().denormalize_y(
            ds.normalization().normalize_y(r.y));
        for (Eigen::Index d = 0; d < r.y.size(); ++d)
            CHECK(back[d] == doctest::Approx(r.y[d]).epsilon(1e-9));
    }
}

TEST_CASE("csv round trip is bit exact") {
    auto ds = random_dataset(57, 12);
    TempDir tmp;
    const auto csv = (tmp.path / "data.csv").string();
    ds.save_csv(csv);
    auto loaded = ProcessDataset::load_csv(csv, ds.schema());
    REQUIRE(loaded.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(loaded.records()[i].x == ds.records()[i].x);
        CHECK(loaded.records()[i].u == ds.records()[i].u);
        CHECK(loaded.records()[i].y == ds.records()[i].y);
    }
}

TEST_CASE("loading validates header, rows and bounds") {
    TempDir tmp;
    const Schema schema = small_schema();
    const auto path = (tmp.path / "d.csv").string();
    {
        std::ofstream out(path);
        out << "x0,x1,u0,y0\n0.5,0.0,3.0,1.0\n0.5,0.0,11.0,1.0\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(ProcessDataset::load_csv(path, schema)),
                         doctest::Contains("u0"), DataError);
    {
        std::ofstream out(path);
        out << "x0,x1,u0,y0\n0.5,0.0,3.0\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(ProcessDataset::load_csv(path, schema)),
                         doctest::Contains("row 0"), DataError);
    {
        std::ofstream out(path);
        out << "x0,x1,wrong,y0\n";
    }
    CHECK_THROWS_AS(static_cast<void>(ProcessDataset::load_csv(path, schema)), DataError);
}

TEST_CASE("empty file with valid header loads as empty dataset") {
    TempDir tmp;
    const auto path = (tmp.path / "empty.csv").string();
    {
        std::ofstream out(path);
        out << "x0,x1,u0,y0\n";
    }
    auto ds = ProcessDataset::load_csv(path, small_schema());
    CHECK(ds.size() == 0);
    CHECK_FALSE(ds.normalization().fitted());
}

TEST_CASE("split partitions exactly and deterministically") {
    auto ds = random_dataset(100, 3);
    auto parts = ds.split({0.8, 0.2}, 7);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() == 80);
    CHECK(parts[1].size() == 20);

    auto parts3 = ds.split({0.6, 0.2, 0.2}, 11);
    CHECK(parts3[0].size() + parts3[1].size() + parts3[2].size() == 100);

    // disjoint cover: key on the y value, unique per record here
    std::multiset<double> all;
    for (const auto& p : parts3)
        for (const auto& r : p.records()) all.insert(r.y[0]);
    std::multiset<double> orig;
    for (const auto& r : ds.records()) orig.insert(r.y[0]);
    CHECK(all == orig);

    auto again = ds.split({0.6, 0.2, 0.2}, 11);
    for (int p = 0; p < 3; ++p) {
        REQUIRE(again[p].size() == parts3[p].size());
        for (std::size_t i = 0; i < again[p].size(); ++i)
            CHECK(again[p].records()[i].y[0] == parts3[p].records()[i].y[0]);
    }

    CHECK_THROWS_AS(static_cast<void>(ds.split({0.5, 0.6}, 1)), ConfigError);
    CHECK_THROWS_AS(static_cast<void>(ds.split({1.2, -0.2}, 1)), ConfigError);
}

TEST_CASE("split partition property holds across ratios and seeds") {
    auto ds = random_dataset(83, 5);
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        for (auto ratios : std::vector<std::vector<double>>{{0.5, 0.5}, {0.7, 0.2, 0.1}}) {
            auto parts = ds.split(ratios, seed);
            std::size_t total = 0;
            std::multiset<double> keys;
            for (const auto& p : parts) {
                total += p.size();
                for (const auto& r : p.records()) keys.insert(r.y[0]);
            }
            CHECK(total == ds.size());
            CHECK(keys.size() == ds.size());
        }
    }
}

TEST_CASE("randomize_dims changes exactly the requested count") {
    auto ds = random_dataset(5, 21);
    const auto& rec = ds.records()[0];
    const auto& schema = ds.schema();

    const auto same = randomize_dims(rec, schema, 0, 42);
    CHECK(same.x == rec.x);
    CHECK(same.u == rec.u);

    const auto all = randomize_dims(rec, schema, 3, 42);
    int changed = (all.x[0] != rec.x[0]) + (all.x[1] != rec.x[1]) + (all.u[0] != rec.u[0]);
    CHECK(changed == 3);
    CHECK(all.y == rec.y);
    CHECK(all.x[0] >= 0.0);
    CHECK(all.x[0] <= 1.0);
    CHECK(all.u[0] >= 0.0);
    CHECK(all.u[0] <= 10.0);

    const auto two = randomize_dims(rec, schema, 2, 43);
    changed = (two.x[0] != rec.x[0]) + (two.x[1] != rec.x[1]) + (two.u[0] != rec.u[0]);
    CHECK(changed == 2);

    CHECK_THROWS(static_cast<void>(randomize_dims(rec, schema, 4, 1)));
    CHECK_THROWS(static_cast<void>(randomize_dims(rec, schema, -1, 1)));
}

TEST_CASE("trajectory chaining is validated") {
    Trajectory t;
    TrajectoryStep s1{Eigen::Vector2d(0, 0), Eigen::VectorXd::Constant(1, 1), 0.5,
                      Eigen::Vector2d(1, 1)};
    TrajectoryStep s2{Eigen::Vector2d(1, 1), Eigen::VectorXd::Constant(1, 2), 0.25,
                      Eigen::Vector2d(2, 2)};
    t.steps = {s1, s2};
    CHECK_NOTHROW(t.validate());
    t.steps[1].x = Eigen::Vector2d(9, 9);
    CHECK_THROWS_AS(t.validate(), DataError);
}

} // TEST_SUITE
