#include "orpco/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace orpco {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("stddev_of: need at least 2 values");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

// midranks (average rank for ties), 1-based
std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = mean_of(a), mb = mean_of(b);
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0 || db == 0) return 0.0;
    return num / std::sqrt(da * db);
}

// regularized incomplete beta function via Lentz continued fraction
double betacf(double a, double b, double x) {
    const int max_it = 200;
    const double eps = 3e-14, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_it; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

} // namespace

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman_rho: mismatched or too-short inputs");
    return pearson(midranks(a), midranks(b));
}

double auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) throw std::invalid_argument("auroc: empty class");
    std::vector<double> all;
    all.reserve(pos.size() + neg.size());
    all.insert(all.end(), pos.begin(), pos.end());
    all.insert(all.end(), neg.begin(), neg.end());
    const auto ranks = midranks(all);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) rank_sum_pos += ranks[i];
    const double n1 = static_cast<double>(pos.size());
    const double n2 = static_cast<double>(neg.size());
    const double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n2);
}

double student_t_two_sided_p(double t, double df) {
    const double x = df / (df + t * t);
    return ibeta(df / 2.0, 0.5, x);
}

std::pair<double, double> paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired_t_test: mismatched or too-short inputs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double m = mean_of(d);
    const double s = stddev_of(d);
    const double n = static_cast<double>(d.size());
    if (s == 0.0) return {m == 0.0 ? 0.0 : std::numeric_limits<double>::infinity(), m == 0.0 ? 1.0 : 0.0};
    const double t = m / (s / std::sqrt(n));
    return {t, student_t_two_sided_p(t, n - 1.0)};
}

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const auto na = a.rows(), nb = b.rows();
    if (na < 1 || nb < 1) throw std::invalid_argument("energy_distance: empty sample");
    auto mean_cross = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            for (Eigen::Index j = 0; j < q.rows(); ++j)
                s += (p.row(i) - q.row(j)).norm();
        return s / static_cast<double>(p.rows() * q.rows());
    };
    return 2.0 * mean_cross(a, b) - mean_cross(a, a) - mean_cross(b, b);
}

} // namespace orpco
