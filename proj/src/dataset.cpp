#include "orpco/dataset.hpp"

#include "orpco/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace orpco {

// ---------------------------------------------------------------------------
// Normalizer

Normalizer Normalizer::fit_min_max(const Schema& schema, const std::vector<ProcessRecord>& records) {
    Normalizer n;
    const int d = schema.dim_total();
    n.dim_x_ = schema.dim_x();
    n.dim_u_ = schema.dim_u();
    n.dim_y_ = schema.dim_y();
    if (records.empty()) return n; // unfitted
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
    for (const auto& r : records) {
        for (int i = 0; i < n.dim_x_; ++i) {
            lo[i] = std::min(lo[i], r.x[i]);
            hi[i] = std::max(hi[i], r.x[i]);
        }
        for (int i = 0; i < n.dim_u_; ++i) {
            lo[n.dim_x_ + i] = std::min(lo[n.dim_x_ + i], r.u[i]);
            hi[n.dim_x_ + i] = std::max(hi[n.dim_x_ + i], r.u[i]);
        }
        for (int i = 0; i < n.dim_y_; ++i) {
            lo[n.dim_x_ + n.dim_u_ + i] = std::min(lo[n.dim_x_ + n.dim_u_ + i], r.y[i]);
            hi[n.dim_x_ + n.dim_u_ + i] = std::max(hi[n.dim_x_ + n.dim_u_ + i], r.y[i]);
        }
    }
    n.shift_ = lo;
    n.scale_ = hi - lo;
    for (int i = 0; i < d; ++i)
        if (n.scale_[i] <= 0.0) n.scale_[i] = 1.0; // constant column
    n.fitted_ = true;
    return n;
}

double Normalizer::normalize(int var_index, double raw) const {
    if (!fitted_) throw DataError("normalization not fitted");
    return (raw - shift_[var_index]) / scale_[var_index];
}

double Normalizer::denormalize(int var_index, double normalized) const {
    if (!fitted_) throw DataError("normalization not fitted");
    return normalized * scale_[var_index] + shift_[var_index];
}

Eigen::VectorXd Normalizer::norm_segment(const Eigen::VectorXd& v, int offset) const {
    if (!fitted_) throw DataError("normalization not fitted");
    return (v - shift_.segment(offset, v.size())).cwiseQuotient(scale_.segment(offset, v.size()));
}

Eigen::VectorXd Normalizer::denorm_segment(const Eigen::VectorXd& v, int offset) const {
    if (!fitted_) throw DataError("normalization not fitted");
    return v.cwiseProduct(scale_.segment(offset, v.size())) + shift_.segment(offset, v.size());
}

Eigen::VectorXd Normalizer::normalize_x(const Eigen::VectorXd& x) const { return norm_segment(x, 0); }
Eigen::VectorXd Normalizer::normalize_u(const Eigen::VectorXd& u) const { return norm_segment(u, dim_x_); }
Eigen::VectorXd Normalizer::normalize_y(const Eigen::VectorXd& y) const { return norm_segment(y, dim_x_ + dim_u_); }
Eigen::VectorXd Normalizer::denormalize_y(const Eigen::VectorXd& yn) const { return denorm_segment(yn, dim_x_ + dim_u_); }
Eigen::VectorXd Normalizer::denormalize_u(const Eigen::VectorXd& un) const { return denorm_segment(un, dim_x_); }
Eigen::VectorXd Normalizer::denormalize_x(const Eigen::VectorXd& xn) const { return denorm_segment(xn, 0); }

nlohmann::json Normalizer::to_json() const {
    nlohmann::json j;
    j["fitted"] = fitted_;
    j["dims"] = {dim_x_, dim_u_, dim_y_};
    if (fitted_) {
        j["shift"] = std::vector<double>(shift_.data(), shift_.data() + shift_.size());
        j["scale"] = std::vector<double>(scale_.data(), scale_.data() + scale_.size());
    }
    return j;
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
    Normalizer n;
    n.fitted_ = j.at("fitted").get<bool>();
    auto dims = j.at("dims").get<std::vector<int>>();
    n.dim_x_ = dims.at(0);
    n.dim_u_ = dims.at(1);
    n.dim_y_ = dims.at(2);
    if (n.fitted_) {
        auto sh = j.at("shift").get<std::vector<double>>();
        auto sc = j.at("scale").get<std::vector<double>>();
        n.shift_ = Eigen::Map<const Eigen::VectorXd>(sh.data(), static_cast<Eigen::Index>(sh.size()));
        n.scale_ = Eigen::Map<const Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
    }
    return n;
}

// ---------------------------------------------------------------------------
// ProcessDataset

void validate_record(const Schema& schema, const ProcessRecord& r, long row_index) {
    auto where = [&]() {
        return row_index >= 0 ? " at row " + std::to_string(row_index) : std::string{};
    };
    if (r.x.size() != schema.dim_x() || r.u.size() != schema.dim_u() || r.y.size() != schema.dim_y())
        throw DataError("record dimensions do not match schema" + where());
    auto check = [&](double v, const VariableSpace& var) {
        if (!std::isfinite(v))
            throw DataError("non-finite value for variable '" + var.name + "'" + where());
        if (v < var.lower || v > var.upper)
            throw DataError("value " + std::to_string(v) + " of variable '" + var.name +
                            "' outside declared bounds [" + std::to_string(var.lower) + ", " +
                            std::to_string(var.upper) + "]" + where());
    };
    for (int i = 0; i < schema.dim_x(); ++i) check(r.x[i], schema.x_var(i));
    for (int i = 0; i < schema.dim_u(); ++i) check(r.u[i], schema.u_var(i));
    for (int i = 0; i < schema.dim_y(); ++i) check(r.y[i], schema.y_var(i));
}

ProcessDataset::ProcessDataset(Schema schema, std::vector<ProcessRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
    long row = 0;
    for (const auto& r : records_) validate_record(schema_, r, row++);
}

void ProcessDataset::fit_normalization() {
    norm_ = Normalizer::fit_min_max(schema_, records_);
}

Eigen::MatrixXd ProcessDataset::normalized_x() const {
    Eigen::MatrixXd m(records_.size(), schema_.dim_x());
    for (std::size_t i = 0; i < records_.size(); ++i) m.row(i) = norm_.normalize_x(records_[i].x);
    return m;
}

Eigen::MatrixXd ProcessDataset::normalized_u() const {
    Eigen::MatrixXd m(records_.size(), schema_.dim_u());
    for (std::size_t i = 0; i < records_.size(); ++i) m.row(i) = norm_.normalize_u(records_[i].u);
    return m;
}

Eigen::MatrixXd ProcessDataset::normalized_y() const {
    Eigen::MatrixXd m(records_.size(), schema_.dim_y());
    for (std::size_t i = 0; i < records_.size(); ++i) m.row(i) = norm_.normalize_y(records_[i].y);
    return m;
}

Eigen::MatrixXd ProcessDataset::normalized_xu() const {
    Eigen::MatrixXd m(records_.size(), schema_.dim_input());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        m.row(i).head(schema_.dim_x()) = norm_.normalize_x(records_[i].x);
        m.row(i).tail(schema_.dim_u()) = norm_.normalize_u(records_[i].u);
    }
    return m;
}

std::vector<ProcessDataset> ProcessDataset::split(const std::vector<double>& ratios,
                                                  std::uint64_t seed) const {
    if (ratios.empty()) throw ConfigError("split: no ratios given");
    double sum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw ConfigError("split: ratios must be positive");
        sum += r;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split: ratios must sum to 1");

    std::vector<std::size_t> idx(records_.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, {0x5917ULL});
    std::shuffle(idx.begin(), idx.end(), rng);

    // cumulative rounding keeps the partition exact
    std::vector<std::size_t> cuts{0};
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < ratios.size(); ++k) {
        acc += ratios[k];
        cuts.push_back(static_cast<std::size_t>(std::llround(acc * static_cast<double>(idx.size()))));
    }
    cuts.push_back(idx.size());

    std::vector<ProcessDataset> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        std::vector<ProcessRecord> part;
        part.reserve(cuts[k + 1] - cuts[k]);
        for (std::size_t i = cuts[k]; i < cuts[k + 1]; ++i) part.push_back(records_[idx[i]]);
        ProcessDataset ds(schema_, std::move(part));
        ds.set_normalization(norm_);
        out.push_back(std::move(ds));
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

void ProcessDataset::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (std::size_t i = 0; i < schema_.vars().size(); ++i)
        out << (i ? "," : "") << schema_.vars()[i].name;
    out << "\n";
    for (const auto& r : records_) {
        bool first = true;
        auto emit = [&](const Eigen::VectorXd& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                out << (first ? "" : ",") << format_double(v[i]);
                first = false;
            }
        };
        emit(r.x);
        emit(r.u);
        emit(r.y);
        out << "\n";
    }
}

ProcessDataset ProcessDataset::load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset file has no header: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() != schema.vars().size())
        throw DataError("header has " + std::to_string(header.size()) + " columns, schema declares " +
                        std::to_string(schema.vars().size()));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != schema.vars()[i].name)
            throw DataError("header column '" + header[i] + "' does not match schema variable '" +
                            schema.vars()[i].name + "'");

    std::vector<ProcessRecord> records;
    long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != schema.vars().size())
            throw DataError("malformed row " + std::to_string(row) + ": expected " +
                            std::to_string(schema.vars().size()) + " cells, got " +
                            std::to_string(cells.size()));
        Eigen::VectorXd all(schema.dim_total());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* b = cells[c].data();
            const char* e = b + cells[c].size();
            double v = 0.0;
            auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc{} || res.ptr != e)
                throw DataError("malformed row " + std::to_string(row) + ": cannot parse cell '" +
                                cells[c] + "'");
            all[static_cast<Eigen::Index>(c)] = v;
        }
        ProcessRecord r;
        r.x = all.head(schema.dim_x());
        r.u = all.segment(schema.dim_x(), schema.dim_u());
        r.y = all.tail(schema.dim_y());
        validate_record(schema, r, row);
        records.push_back(std::move(r));
        ++row;
    }
    ProcessDataset ds(schema, std::move(records));
    if (ds.empty()) {
        std::cerr << "warning: dataset " << path << " has a valid header but no records;"
                  << " normalization left unfitted\n";
    } else {
        ds.fit_normalization();
    }
    return ds;
}

ProcessRecord randomize_dims(const ProcessRecord& record, const Schema& schema, int n_dims,
                             std::uint64_t seed) {
    const int total = schema.dim_input();
    if (n_dims < 0 || n_dims > total)
        throw std::invalid_argument("randomize_dims: n_dims out of [0, dim(x)+dim(u)]");
    ProcessRecord out = record;
    Rng rng = make_rng(seed, {0xd1a5ULL});
    std::vector<int> dims(total);
    std::iota(dims.begin(), dims.end(), 0);
    // partial Fisher-Yates picks the dims to resample
    for (int i = 0; i < n_dims; ++i) {
        std::uniform_int_distribution<int> pick(i, total - 1);
        std::swap(dims[i], dims[pick(rng)]);
    }
    for (int i = 0; i < n_dims; ++i) {
        const int d = dims[i];
        if (d < schema.dim_x()) {
            const auto& var = schema.x_var(d);
            out.x[d] = uniform(rng, var.lower, var.upper);
        } else {
            const auto& var = schema.u_var(d - schema.dim_x());
            out.u[d - schema.dim_x()] = uniform(rng, var.lower, var.upper);
        }
    }
    return out;
}

void Trajectory::validate() const {
    for (std::size_t t = 0; t + 1 < steps.size(); ++t)
        if (!steps[t].x_next.isApprox(steps[t + 1].x))
            throw DataError("trajectory broken at step " + std::to_string(t) +
                            ": x_next does not chain to next x");
}

nlohmann::json Trajectory::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : steps) {
        arr.push_back({{"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
                       {"u", std::vector<double>(s.u.data(), s.u.data() + s.u.size())},
                       {"reward", s.reward},
                       {"x_next", std::vector<double>(s.x_next.data(), s.x_next.data() + s.x_next.size())}});
    }
    return nlohmann::json{{"steps", arr}};
}

Trajectory Trajectory::from_json(const nlohmann::json& j) {
    Trajectory tr;
    for (const auto& s : j.at("steps")) {
        TrajectoryStep st;
        auto x = s.at("x").get<std::vector<double>>();
        auto u = s.at("u").get<std::vector<double>>();
        auto xn = s.at("x_next").get<std::vector<double>>();
        st.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        st.u = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
        st.x_next = Eigen::Map<const Eigen::VectorXd>(xn.data(), static_cast<Eigen::Index>(xn.size()));
        st.reward = s.at("reward").get<double>();
        tr.steps.push_back(std::move(st));
    }
    return tr;
}

} // namespace orpco
