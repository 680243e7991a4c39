#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selfnorm/errors.hpp"
#include "selfnorm/normal.hpp"
#include "selfnorm/quadrature.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

/// E|Z|^3 for standard normal Z.
inline constexpr double kNormalAbs3 = 1.5957691216057307117597842397375;
/// E|Z|^5 for standard normal Z ( = 16 * phi(0) ).
inline constexpr double kNormalAbs5 = 6.3830764864229228470391369589501;

/// The five indicator-truncated moment functionals at tilting scale b,
/// together with the untruncated second/third moments they interpolate.
struct TruncatedMomentSet {
    double b = 0.0;     ///< tilting scale
    double m2 = 0.0;    ///< E X^2
    double m3 = 0.0;    ///< E X^3
    double a3 = 0.0;    ///< E |X|^3
    double m4le = 0.0;  ///< E X^4   I{|bX| <= 1}
    double a3gt = 0.0;  ///< E |X|^3 I{|bX| >  1}
    double a5le = 0.0;  ///< E |X|^5 I{|bX| <= 1}
    double m3le = 0.0;  ///< E X^3   I{|bX| <= 1}
    double m2le = 0.0;  ///< E X^2   I{|bX| <= 1}

    void validate() const {
        const double slack = 1e-9 * a3 + 1e-300;
        if (!(b > 0.0)) throw DomainError("TruncatedMomentSet: b must be > 0");
        if (!(m2 > 0.0))
            throw DegenerateDistribution("TruncatedMomentSet: E X^2 = 0");
        if (a3gt < -slack || a3gt > a3 + slack)
            throw DomainError("TruncatedMomentSet: a3gt outside [0, a3]");
        if (b * m4le > a3 + slack)
            throw DomainError("TruncatedMomentSet: b*m4le > a3");
        if (b * b * a5le > a3 + slack)
            throw DomainError("TruncatedMomentSet: b^2*a5le > a3");
        if (std::abs(m3) > a3 + slack)
            throw DomainError("TruncatedMomentSet: |m3| > a3");
    }
};

/// One centered law of a cohort member.  Analytic kinds carry closed-form
/// moments; DensityTable and EmpiricalSample are numerical conveniences.
class DistributionSpec {
public:
    enum class Kind {
        Normal,
        Rademacher,
        TwoPoint,
        CenteredUniform,
        DensityTable,
        EmpiricalSample
    };

    static DistributionSpec normal(double sigma, std::string label = "normal") {
        if (!(sigma > 0.0))
            throw DegenerateDistribution("normal: sigma must be > 0");
        DistributionSpec d(Kind::Normal, std::move(label));
        d.sigma_ = sigma;
        return d;
    }

    static DistributionSpec rademacher(std::string label = "rademacher") {
        return DistributionSpec(Kind::Rademacher, std::move(label));
    }

    /// P(X = a) = p, P(X = other) = 1-p; the pair must already be centered.
    static DistributionSpec two_point(double p, double a, double other,
                                      std::string label = "twopoint") {
        if (!(p > 0.0 && p < 1.0))
            throw DegenerateDistribution("two_point: p must be in (0,1)");
        DistributionSpec d(Kind::TwoPoint, std::move(label));
        d.p_ = p;
        d.a_ = a;
        d.b2_ = other;
        const double m2 = p * a * a + (1.0 - p) * other * other;
        if (!(m2 > 0.0))
            throw DegenerateDistribution("two_point: zero second moment");
        const double mean = p * a + (1.0 - p) * other;
        if (std::abs(mean) > 1e-8 * std::sqrt(m2))
            throw DegenerateDistribution("two_point: atoms are not centered");
        return d;
    }

    static DistributionSpec centered_uniform(double halfwidth,
                                             std::string label = "uniform") {
        if (!(halfwidth > 0.0))
            throw DegenerateDistribution("centered_uniform: halfwidth must be > 0");
        DistributionSpec d(Kind::CenteredUniform, std::move(label));
        d.h_ = halfwidth;
        return d;
    }

    /// Piecewise-linear density on an ascending grid.  Must integrate to 1
    /// within 1e-8 and have mean within 1e-8 * sqrt(EX^2) of zero; beyond the
    /// grid the density is treated as zero.
    static DistributionSpec density_table(std::vector<double> xs,
                                          std::vector<double> fs,
                                          std::string label = "table") {
        if (xs.size() < 2 || xs.size() != fs.size())
            throw DegenerateDistribution("density_table: need matching grids, >= 2 points");
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            if (!(xs[i] < xs[i + 1]))
                throw DegenerateDistribution("density_table: grid must ascend");
        for (double f : fs)
            if (!(f >= 0.0))
                throw DegenerateDistribution("density_table: negative density");
        DistributionSpec d(Kind::DensityTable, std::move(label));
        d.xs_ = std::move(xs);
        d.fs_ = std::move(fs);
        double mass = 0.0, mean = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i + 1 < d.xs_.size(); ++i) {
            // exact trapezoid/polynomial integrals of the linear segment
            const double x0 = d.xs_[i], x1 = d.xs_[i + 1];
            const double f0 = d.fs_[i], f1 = d.fs_[i + 1];
            const double w = x1 - x0;
            mass += 0.5 * w * (f0 + f1);
            mean += w * (f0 * (2 * x0 + x1) + f1 * (x0 + 2 * x1)) / 6.0;
            m2 += w * (f0 * (3 * x0 * x0 + 2 * x0 * x1 + x1 * x1) +
                       f1 * (x0 * x0 + 2 * x0 * x1 + 3 * x1 * x1)) / 12.0;
        }
        if (std::abs(mass - 1.0) > 1e-8)
            throw DegenerateDistribution("density_table: does not integrate to 1");
        if (!(m2 > 0.0))
            throw DegenerateDistribution("density_table: zero second moment");
        if (std::abs(mean) > 1e-8 * std::sqrt(m2))
            throw DegenerateDistribution("density_table: mean is not zero");
        d.edge_warning_ = d.fs_.front() > 1e-12 || d.fs_.back() > 1e-12;
        d.build_table_cdf();
        return d;
    }

    /// Plug-in law of a centered sample (one atom per observation).
    static DistributionSpec empirical(std::vector<double> data,
                                      std::string label = "empirical") {
        if (data.empty())
            throw DegenerateDistribution("empirical: no observations");
        DistributionSpec d(Kind::EmpiricalSample, std::move(label));
        d.data_ = std::move(data);
        double mean = 0.0, m2 = 0.0;
        for (double v : d.data_) mean += v;
        mean /= static_cast<double>(d.data_.size());
        for (double v : d.data_) m2 += v * v;
        m2 /= static_cast<double>(d.data_.size());
        if (!(m2 > 0.0))
            throw DegenerateDistribution("empirical: zero second moment");
        if (std::abs(mean) > 1e-8 * std::sqrt(m2))
            throw DegenerateDistribution("empirical: sample mean is not zero");
        return d;
    }

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    bool edge_warning() const { return edge_warning_; }

    bool is_discrete() const {
        return kind_ == Kind::Rademacher || kind_ == Kind::TwoPoint ||
               kind_ == Kind::EmpiricalSample;
    }

    /// Point masses of the (plug-in) law; only valid for discrete kinds.
    std::vector<std::pair<double, double>> atoms() const {
        switch (kind_) {
        case Kind::Rademacher:
            return {{-1.0, 0.5}, {1.0, 0.5}};
        case Kind::TwoPoint:
            return {{a_, p_}, {b2_, 1.0 - p_}};
        case Kind::EmpiricalSample: {
            std::vector<std::pair<double, double>> out;
            out.reserve(data_.size());
            const double w = 1.0 / static_cast<double>(data_.size());
            for (double v : data_) out.emplace_back(v, w);
            return out;
        }
        default:
            throw DomainError("atoms(): not a discrete law");
        }
    }

    double second_moment() const {
        switch (kind_) {
        case Kind::Normal: return sigma_ * sigma_;
        case Kind::Rademacher: return 1.0;
        case Kind::TwoPoint: return p_ * a_ * a_ + (1.0 - p_) * b2_ * b2_;
        case Kind::CenteredUniform: return h_ * h_ / 3.0;
        default: return raw_moment(2);
        }
    }

    /// E X^k for integer k >= 1.
    double raw_moment(int k) const {
        switch (kind_) {
        case Kind::Normal:
            return (k % 2 == 1) ? 0.0 : std::pow(sigma_, k) * double_factorial(k - 1);
        case Kind::Rademacher:
            return (k % 2 == 1) ? 0.0 : 1.0;
        case Kind::TwoPoint:
            return p_ * std::pow(a_, k) + (1.0 - p_) * std::pow(b2_, k);
        case Kind::CenteredUniform:
            return (k % 2 == 1) ? 0.0 : std::pow(h_, k) / (k + 1.0);
        case Kind::DensityTable:
            return expect([k](double x) { return std::pow(x, k); });
        case Kind::EmpiricalSample: {
            double s = 0.0;
            for (double v : data_) s += std::pow(v, k);
            return s / static_cast<double>(data_.size());
        }
        }
        return 0.0;
    }

    /// E |X|^r for real r >= 0.
    double abs_moment(double r) const {
        switch (kind_) {
        case Kind::Normal:
            return std::pow(sigma_, r) * std::pow(2.0, 0.5 * r) *
                   std::tgamma(0.5 * (r + 1.0)) /
                   1.7724538509055160272981674833411;
        case Kind::Rademacher:
            return 1.0;
        case Kind::TwoPoint:
            return p_ * std::pow(std::abs(a_), r) +
                   (1.0 - p_) * std::pow(std::abs(b2_), r);
        case Kind::CenteredUniform:
            return std::pow(h_, r) / (r + 1.0);
        case Kind::DensityTable:
            return expect([r](double x) { return std::pow(std::abs(x), r); });
        case Kind::EmpiricalSample: {
            double s = 0.0;
            for (double v : data_) s += std::pow(std::abs(v), r);
            return s / static_cast<double>(data_.size());
        }
        }
        return 0.0;
    }

    /// E f(X).  Discrete kinds sum atoms exactly; continuous kinds use the
    /// adaptive engine with panels pre-split at `cuts` (and at table knots).
    double expect(const std::function<double(double)>& f,
                  std::vector<double> cuts = {}, double tol = 1e-12) const {
        switch (kind_) {
        case Kind::Rademacher:
            return 0.5 * (f(-1.0) + f(1.0));
        case Kind::TwoPoint:
            return p_ * f(a_) + (1.0 - p_) * f(b2_);
        case Kind::EmpiricalSample: {
            double s = 0.0, comp = 0.0;
            for (double v : data_) { // Neumaier-compensated plug-in mean
                const double y = f(v);
                const double t = s + y;
                comp += (std::abs(s) >= std::abs(y)) ? (s - t) + y : (y - t) + s;
                s = t;
            }
            return (s + comp) / static_cast<double>(data_.size());
        }
        case Kind::Normal: {
            const double R = 48.0 * sigma_;
            auto g = [&](double x) { return f(x) * normal_pdf(x / sigma_) / sigma_; };
            return integrate_cuts(g, -R, R, cuts, tol).value;
        }
        case Kind::CenteredUniform: {
            auto g = [&](double x) { return f(x) / (2.0 * h_); };
            return integrate_cuts(g, -h_, h_, cuts, tol).value;
        }
        case Kind::DensityTable: {
            for (double x : xs_) cuts.push_back(x);
            auto g = [&](double x) { return f(x) * table_density(x); };
            return integrate_cuts(g, xs_.front(), xs_.back(), cuts, tol,
                                  4000 + 16 * static_cast<int>(xs_.size()))
                .value;
        }
        }
        return 0.0;
    }

    /// Truncated moment functionals at tilting scale b.  Analytic kinds use
    /// closed forms; DensityTable integrates with panels split at +-1/b;
    /// EmpiricalSample uses plug-in averages.
    TruncatedMomentSet moments(double b) const {
        if (!(b > 0.0)) throw DomainError("moments: b must be > 0");
        TruncatedMomentSet t;
        t.b = b;
        switch (kind_) {
        case Kind::Normal: {
            const double s = sigma_;
            const double c = 1.0 / (b * s); // threshold in Z units
            const double pc = normal_pdf(c);
            const double e = std::erf(c / kSqrt2);
            t.m2 = s * s;
            t.m3 = 0.0;
            t.a3 = s * s * s * kNormalAbs3;
            t.m4le = s * s * s * s * (3.0 * e - 2.0 * pc * (c * c * c + 3.0 * c));
            t.a3gt = s * s * s * 2.0 * (c * c + 2.0) * pc;
            t.a5le = std::pow(s, 5) *
                     (kNormalAbs5 - 2.0 * pc * (std::pow(c, 4) + 4.0 * c * c + 8.0));
            t.m3le = 0.0;
            t.m2le = s * s * (e - 2.0 * c * pc);
            break;
        }
        case Kind::CenteredUniform: {
            const double c = std::min(1.0 / b, h_);
            t.m2 = h_ * h_ / 3.0;
            t.m3 = 0.0;
            t.a3 = h_ * h_ * h_ / 4.0;
            t.m4le = std::pow(c, 5) / (5.0 * h_);
            t.a3gt = (1.0 / b < h_) ? (std::pow(h_, 4) - std::pow(c, 4)) / (4.0 * h_) : 0.0;
            t.a5le = std::pow(c, 6) / (6.0 * h_);
            t.m3le = 0.0;
            t.m2le = std::pow(c, 3) / (3.0 * h_);
            break;
        }
        case Kind::Rademacher:
        case Kind::TwoPoint:
        case Kind::EmpiricalSample: {
            // Neumaier-compensated accumulation; empirical laws can carry
            // millions of atoms
            double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            double comp[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            auto add = [&](int i, double y) {
                const double tsum = acc[i] + y;
                comp[i] +=
                    (std::abs(acc[i]) >= std::abs(y)) ? (acc[i] - tsum) + y
                                                      : (y - tsum) + acc[i];
                acc[i] = tsum;
            };
            for (const auto& [x, w] : atoms()) {
                add(0, w * x * x);
                add(1, w * x * x * x);
                add(2, w * std::abs(x * x * x));
                if (std::abs(b * x) <= 1.0) {
                    add(3, w * std::pow(x, 4));
                    add(4, w * std::pow(std::abs(x), 5));
                    add(5, w * x * x * x);
                    add(6, w * x * x);
                } else {
                    add(7, w * std::abs(x * x * x));
                }
            }
            t.m2 = acc[0] + comp[0];
            t.m3 = acc[1] + comp[1];
            t.a3 = acc[2] + comp[2];
            t.m4le = acc[3] + comp[3];
            t.a5le = acc[4] + comp[4];
            t.m3le = acc[5] + comp[5];
            t.m2le = acc[6] + comp[6];
            t.a3gt = acc[7] + comp[7];
            break;
        }
        case Kind::DensityTable: {
            const double cut = 1.0 / b;
            std::vector<double> cuts{-cut, cut};
            auto trunc = [&](auto&& g, bool inside) {
                return expect(
                    [&](double x) {
                        const bool in = std::abs(b * x) <= 1.0;
                        return (in == inside) ? g(x) : 0.0;
                    },
                    cuts, 1e-10);
            };
            t.m2 = expect([](double x) { return x * x; }, cuts, 1e-10);
            t.m3 = expect([](double x) { return x * x * x; }, cuts, 1e-10);
            t.a3 = expect([](double x) { return std::abs(x * x * x); }, cuts, 1e-10);
            t.m4le = trunc([](double x) { return std::pow(x, 4); }, true);
            t.a3gt = trunc([](double x) { return std::abs(x * x * x); }, false);
            t.a5le = trunc([](double x) { return std::pow(std::abs(x), 5); }, true);
            t.m3le = trunc([](double x) { return x * x * x; }, true);
            t.m2le = trunc([](double x) { return x * x; }, true);
            break;
        }
        }
        if (!(t.m2 > 0.0)) throw DegenerateDistribution("moments: E X^2 = 0");
        t.validate();
        return t;
    }

    /// Number of observations with |b x_i| <= 1 (EmpiricalSample diagnostic).
    long window_count(double b) const {
        if (kind_ != Kind::EmpiricalSample)
            throw DomainError("window_count: only for empirical samples");
        long c = 0;
        for (double v : data_)
            if (std::abs(b * v) <= 1.0) ++c;
        return c;
    }

    double sample(CounterRng& rng) const {
        switch (kind_) {
        case Kind::Normal:
            return sigma_ * rng.normal();
        case Kind::Rademacher:
            return rng.uniform() <= 0.5 ? -1.0 : 1.0;
        case Kind::TwoPoint:
            return rng.uniform() <= p_ ? a_ : b2_;
        case Kind::CenteredUniform:
            return h_ * (2.0 * rng.uniform() - 1.0);
        case Kind::EmpiricalSample: {
            const auto n = data_.size();
            auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            return data_[std::min(i, n - 1)];
        }
        case Kind::DensityTable:
            return table_sample(rng);
        }
        return 0.0;
    }

    /// The law of -X (used for lower tails).
    DistributionSpec negated() const {
        switch (kind_) {
        case Kind::Normal:
        case Kind::Rademacher:
        case Kind::CenteredUniform:
            return *this;
        case Kind::TwoPoint:
            return two_point(p_, -a_, -b2_, label_);
        case Kind::DensityTable: {
            std::vector<double> xs(xs_.rbegin(), xs_.rend());
            std::vector<double> fs(fs_.rbegin(), fs_.rend());
            for (double& x : xs) x = -x;
            return density_table(std::move(xs), std::move(fs), label_);
        }
        case Kind::EmpiricalSample: {
            std::vector<double> d = data_;
            for (double& v : d) v = -v;
            return empirical(std::move(d), label_);
        }
        }
        return *this;
    }

    // parameter accessors (valid only for the matching kind)
    double sigma() const { return sigma_; }
    double halfwidth() const { return h_; }
    double tp_p() const { return p_; }
    double tp_a() const { return a_; }
    double tp_b() const { return b2_; }
    const std::vector<double>& data() const { return data_; }

private:
    explicit DistributionSpec(Kind k, std::string label)
        : kind_(k), label_(std::move(label)) {}

    static double double_factorial(int k) {
        double v = 1.0;
        for (int j = k; j >= 2; j -= 2) v *= j;
        return v;
    }

    double table_density(double x) const {
        if (x <= xs_.front() || x >= xs_.back()) {
            // on-knot evaluation at the edges still counts
            if (x == xs_.front()) return fs_.front();
            if (x == xs_.back()) return fs_.back();
            return 0.0;
        }
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return fs_[i] + t * (fs_[i + 1] - fs_[i]);
    }

    void build_table_cdf() {
        cdf_.assign(xs_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            cdf_[i + 1] = cdf_[i] + 0.5 * (xs_[i + 1] - xs_[i]) * (fs_[i] + fs_[i + 1]);
        table_mass_ = cdf_.back();
        for (double& c : cdf_) c /= table_mass_;
    }

    double table_sample(CounterRng& rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        if (i > 0) --i;
        if (i + 1 >= xs_.size()) i = xs_.size() - 2;
        const double w = xs_[i + 1] - xs_[i];
        const double f0 = fs_[i];
        const double slope = (fs_[i + 1] - f0) / w;
        // invert f0*t + slope*t^2/2 = raw mass beyond the segment start
        const double target = (u - cdf_[i]) * table_mass_;
        double t;
        if (std::abs(slope) * w < 1e-14 * std::max(f0, 1e-300)) {
            t = target / std::max(f0, 1e-300);
        } else {
            t = (-f0 + std::sqrt(std::max(f0 * f0 + 2.0 * slope * target, 0.0))) / slope;
        }
        return xs_[i] + std::clamp(t, 0.0, w);
    }

    Kind kind_;
    std::string label_;
    double sigma_ = 0.0, h_ = 0.0;
    double p_ = 0.0, a_ = 0.0, b2_ = 0.0;
    std::vector<double> xs_, fs_, cdf_;
    std::vector<double> data_;
    double table_mass_ = 1.0;
    bool edge_warning_ = false;
};

/// An ordered cohort of independent members.  Runs of identical laws are
/// stored as one group with a count, so iid(n) costs O(1) per operation.
class CohortSpec {
public:
    struct Group {
        DistributionSpec spec;
        long count;
    };

    static CohortSpec iid(DistributionSpec spec, long n) {
        if (n <= 0) throw DomainError("CohortSpec: n must be positive");
        CohortSpec c;
        c.groups_.push_back({std::move(spec), n});
        c.finish();
        return c;
    }

    static CohortSpec of(std::vector<DistributionSpec> members) {
        if (members.empty()) throw DomainError("CohortSpec: empty member list");
        CohortSpec c;
        for (auto& m : members) c.groups_.push_back({std::move(m), 1});
        c.finish();
        return c;
    }

    static CohortSpec of_groups(std::vector<Group> groups) {
        CohortSpec c;
        c.groups_ = std::move(groups);
        if (c.groups_.empty()) throw DomainError("CohortSpec: empty group list");
        for (const auto& g : c.groups_)
            if (g.count <= 0) throw DomainError("CohortSpec: group count must be positive");
        c.finish();
        return c;
    }

    const std::vector<Group>& groups() const { return groups_; }
    long n() const { return n_; }
    double bn2() const { return bn2_; }
    double bn() const { return std::sqrt(bn2_); }

    double sum_raw_moment(int k) const {
        double s = 0.0;
        for (const auto& g : groups_)
            s += static_cast<double>(g.count) * g.spec.raw_moment(k);
        return s;
    }

    double sum_abs_moment(double r) const {
        double s = 0.0;
        for (const auto& g : groups_)
            s += static_cast<double>(g.count) * g.spec.abs_moment(r);
        return s;
    }

    double sup_abs_moment(double r) const {
        double s = 0.0;
        for (const auto& g : groups_) s = std::max(s, g.spec.abs_moment(r));
        return s;
    }

    CohortSpec negated() const {
        CohortSpec c;
        for (const auto& g : groups_) c.groups_.push_back({g.spec.negated(), g.count});
        c.finish();
        return c;
    }

    bool all_same_kind(DistributionSpec::Kind k) const {
        for (const auto& g : groups_)
            if (g.spec.kind() != k) return false;
        return true;
    }

private:
    void finish() {
        n_ = 0;
        double s = 0.0, comp = 0.0;
        for (const auto& g : groups_) {
            n_ += g.count;
            const double y = static_cast<double>(g.count) * g.spec.second_moment();
            const double t = s + y;
            comp += (std::abs(s) >= std::abs(y)) ? (s - t) + y : (y - t) + s;
            s = t;
        }
        bn2_ = s + comp;
        if (!(bn2_ > 0.0)) throw DegenerateDistribution("CohortSpec: B_n^2 = 0");
        // cached value must match an independent re-summation
        double check = 0.0;
        for (auto it = groups_.rbegin(); it != groups_.rend(); ++it)
            check += static_cast<double>(it->count) * it->spec.second_moment();
        if (std::abs(check - bn2_) > 1e-10 * bn2_)
            throw DomainError("CohortSpec: cached B_n^2 inconsistent");
    }

    std::vector<Group> groups_;
    long n_ = 0;
    double bn2_ = 0.0;
};

/// Per-group truncated moments of a cohort, all at the shared b = x / B_n.
struct CohortMoments {
    struct Entry {
        TruncatedMomentSet tm;
        long count;
    };
    double b = 0.0;
    std::vector<Entry> entries;

    double sum(double TruncatedMomentSet::* field) const {
        double s = 0.0, comp = 0.0;
        for (const auto& e : entries) {
            const double y = static_cast<double>(e.count) * (e.tm.*field);
            const double t = s + y;
            comp += (std::abs(s) >= std::abs(y)) ? (s - t) + y : (y - t) + s;
            s = t;
        }
        return s + comp;
    }
};

inline CohortMoments cohort_moments(const CohortSpec& cohort, double x) {
    if (!(x > 0.0)) throw DomainError("cohort_moments: x must be > 0");
    CohortMoments out;
    out.b = x / cohort.bn();
    long index = 0;
    for (const auto& g : cohort.groups()) {
        try {
            out.entries.push_back({g.spec.moments(out.b), g.count});
        } catch (const Error& e) {
            throw DomainError("member " + std::to_string(index) + " (" +
                              g.spec.label() + "): " + e.what());
        }
        index += g.count;
    }
    return out;
}

/// Flat per-member form of cohort_moments (small cohorts / tests).
inline std::vector<TruncatedMomentSet> cohort_moments_expanded(
    const CohortSpec& cohort, double x) {
    CohortMoments grouped = cohort_moments(cohort, x);
    std::vector<TruncatedMomentSet> out;
    for (const auto& e : grouped.entries)
        for (long i = 0; i < e.count; ++i) out.push_back(e.tm);
    return out;
}

} // namespace selfnorm
