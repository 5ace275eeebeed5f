#include "jumpflow/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jumpflow {

namespace {

std::string describe_point(double t, const Vector& x) {
    std::ostringstream os;
    os << "t=" << t << ", x=[";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
    os << "]";
    return os.str();
}

template <typename M>
void require_finite(const M& value, const char* what, double t, const Vector& x) {
    if (!value.allFinite()) {
        throw NonFiniteError(std::string(what) + " is not finite at " + describe_point(t, x));
    }
}

/// Corners of the sample box that random sampling would never hit exactly:
/// t in {0, horizon} crossed with x in {0, +-radius e_i}.
std::vector<std::pair<double, Vector>> anchor_points(const SampleBox& box, std::size_t dim) {
    std::vector<std::pair<double, Vector>> out;
    for (double t : {0.0, box.horizon}) {
        out.emplace_back(t, Vector::Zero(static_cast<Eigen::Index>(dim)));
        for (std::size_t i = 0; i < dim; ++i) {
            for (double sign : {1.0, -1.0}) {
                Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
                x(static_cast<Eigen::Index>(i)) = sign * box.radius;
                out.emplace_back(t, std::move(x));
            }
        }
    }
    return out;
}

ValidationReport make_report(std::string id, const RngStream& stream) {
    ValidationReport r;
    r.assumption = std::move(id);
    r.seed = stream.master_seed();
    r.path_id = stream.path_id();
    r.role = stream.role();
    return r;
}

void require_samples(const SampleBox& box) {
    if (box.samples < 1) throw std::invalid_argument("validator: samples must be >= 1");
    if (!(box.radius > 0.0)) throw std::invalid_argument("validator: radius must be positive");
    if (!(box.horizon >= 0.0)) throw std::invalid_argument("validator: horizon must be >= 0");
}

}  // namespace

CoefficientSet CoefficientSet::zero(std::size_t d, std::size_t k, std::size_t m) {
    const auto di = static_cast<Eigen::Index>(d);
    const auto ki = static_cast<Eigen::Index>(k);
    return CoefficientSet{
        d,
        k,
        m,
        [di](double, const Vector&) -> Vector { return Vector::Zero(di); },
        [di, ki](double, const Vector&) -> Matrix { return Matrix::Zero(di, ki); },
        [di](double, const Vector&, const Vector&) -> Vector { return Vector::Zero(di); },
        [di](double, const Vector&) -> Vector { return Vector::Zero(di); },
    };
}

void CoefficientSet::require_complete() const {
    if (!drift || !diffusion || !jump || !compensator) {
        throw std::invalid_argument("CoefficientSet: drift, diffusion, jump and compensator are required");
    }
    if (state_dim == 0) throw std::invalid_argument("CoefficientSet: state dimension must be positive");
}

CoefficientSet ScenarioSequence::at(int n) const {
    if (n < 0) throw std::invalid_argument("ScenarioSequence: index must be >= 0");
    CoefficientSet cs = coefficient_family(n);
    cs.require_complete();
    if (cs.mark_dim != jumps.mark_dim()) {
        throw std::invalid_argument("ScenarioSequence: mark dimension differs from the jump measure");
    }
    if (n != 0) {
        const CoefficientSet lim = coefficient_family(0);
        if (lim.state_dim != cs.state_dim || lim.wiener_dim != cs.wiener_dim ||
            lim.mark_dim != cs.mark_dim) {
            throw std::invalid_argument("ScenarioSequence: members must share (d, k, m)");
        }
    }
    return cs;
}

Vector ScenarioSequence::x0(int n) const {
    Vector x = initial_family(n);
    if (!x.allFinite()) throw NonFiniteError("ScenarioSequence: initial state is not finite");
    return x;
}

BarrierFunction ScenarioSequence::barrier(int n) const {
    if (!barrier_family) throw std::logic_error("ScenarioSequence: no barrier configured");
    return barrier_family(n);
}

double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

std::pair<double, Vector> sample_point(const SampleBox& box, std::size_t dim, RngStream& stream) {
    const double t = box.horizon * stream.uniform();
    Vector dir(static_cast<Eigen::Index>(dim));
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = stream.normal();
        norm = dir.norm();
    } while (norm == 0.0);
    const double r = box.radius * std::pow(stream.uniform(), 1.0 / static_cast<double>(dim));
    return {t, (r / norm) * dir};
}

MarkIntegral integrate_marks(const JumpMeasureSpec& spec,
                             const std::function<double(const Vector&)>& integrand,
                             std::size_t draws, RngStream& stream) {
    MarkIntegral out;
    if (draws == 0) return out;
    const double n = static_cast<double>(draws);
    auto accumulate = [&](double weight, auto&& draw) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < draws; ++i) {
            const double f = integrand(draw());
            if (!std::isfinite(f)) throw NonFiniteError("mark integrand is not finite");
            sum += f;
            sum_sq += f * f;
        }
        const double mean = sum / n;
        const double var = draws > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
        out.value += weight * mean;
        out.standard_error = std::hypot(out.standard_error, weight * std::sqrt(var / n));
    };
    if (spec.sampled_mass() > 0.0) {
        accumulate(spec.sampled_mass(), [&] { return spec.draw_mark(stream); });
    }
    if (spec.gaussian_small_jumps()) {
        const Matrix root = covariance_root(spec.truncated_part()->small_jump_covariance);
        Vector z(root.cols());
        accumulate(1.0, [&]() -> Vector {
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream.normal();
            return root * z;
        });
    }
    return out;
}

ValidationReport check_linear_growth(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                     const SampleBox& box, RngStream stream) {
    cs.require_complete();
    require_samples(box);
    ValidationReport report = make_report("A1", stream);

    auto ratio_at = [&](double t, const Vector& x) {
        const Vector a = cs.drift(t, x);
        const Matrix b = cs.diffusion(t, x);
        require_finite(a, "drift", t, x);
        require_finite(b, "diffusion", t, x);
        const MarkIntegral jump_sq = integrate_marks(
            jumps,
            [&](const Vector& mark) { return cs.jump(t, x, mark).squaredNorm(); },
            box.mark_samples, stream);
        const double bn = operator_norm(b);
        return (a.squaredNorm() + bn * bn + jump_sq.value) / (1.0 + x.squaredNorm());
    };

    auto visit = [&](double t, const Vector& x) {
        const double ratio = ratio_at(t, x);
        ++report.samples;
        if (!report.witness || ratio > report.estimate) {
            report.estimate = ratio;
            report.witness = Witness{t, x, {}, {}};
        }
    };
    for (const auto& [t, x] : anchor_points(box, cs.state_dim)) visit(t, x);
    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = sample_point(box, cs.state_dim, stream);
        visit(t, x);
    }
    report.pass = std::isfinite(report.estimate);
    report.detail = "max (|a|^2+|b|^2+int|c|^2 dmu)/(1+|x|^2) over sampled points";
    return report;
}

ValidationReport check_local_lipschitz(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                       const SampleBox& box, RngStream stream) {
    cs.require_complete();
    require_samples(box);
    ValidationReport report = make_report("A2", stream);

    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = sample_point(box, cs.state_dim, stream);
        const Vector y = sample_point(box, cs.state_dim, stream).second;
        const double dist_sq = (x - y).squaredNorm();
        if (dist_sq == 0.0) continue;

        const Vector ax = cs.drift(t, x), ay = cs.drift(t, y);
        const Matrix bx = cs.diffusion(t, x), by = cs.diffusion(t, y);
        require_finite(ax, "drift", t, x);
        require_finite(ay, "drift", t, y);
        require_finite(bx, "diffusion", t, x);
        require_finite(by, "diffusion", t, y);
        const MarkIntegral jump_sq = integrate_marks(
            jumps,
            [&](const Vector& mark) { return (cs.jump(t, x, mark) - cs.jump(t, y, mark)).squaredNorm(); },
            box.mark_samples, stream);
        const double bn = operator_norm(bx - by);
        const double ratio = ((ax - ay).squaredNorm() + bn * bn + jump_sq.value) / dist_sq;

        ++report.samples;
        if (!report.witness || ratio > report.estimate) {
            report.estimate = ratio;
            report.witness = Witness{t, x, y, {}};
        }
    }
    report.pass = report.samples > 0 && std::isfinite(report.estimate);
    report.detail = "max squared-difference ratio over sampled pairs in the ball";
    return report;
}

double check_coefficient_convergence(const ScenarioSequence& seq, int n, const SampleBox& box,
                                     RngStream stream) {
    if (n < 1) throw std::invalid_argument("check_coefficient_convergence: n must be >= 1");
    require_samples(box);
    const CoefficientSet lim = seq.limit();
    const CoefficientSet cur = seq.at(n);

    auto gap_at = [&](double t, const Vector& x) {
        const Vector da = cur.drift(t, x) - lim.drift(t, x);
        const Matrix db = cur.diffusion(t, x) - lim.diffusion(t, x);
        require_finite(da, "drift difference", t, x);
        require_finite(db, "diffusion difference", t, x);
        const MarkIntegral jump_sq = integrate_marks(
            seq.jumps,
            [&](const Vector& mark) { return (cur.jump(t, x, mark) - lim.jump(t, x, mark)).squaredNorm(); },
            box.mark_samples, stream);
        return da.norm() + operator_norm(db) + std::sqrt(jump_sq.value);
    };

    double worst = 0.0;
    for (const auto& [t, x] : anchor_points(box, lim.state_dim)) worst = std::max(worst, gap_at(t, x));
    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = sample_point(box, lim.state_dim, stream);
        worst = std::max(worst, gap_at(t, x));
    }
    return worst;
}

ValidationReport check_initial_convergence(const ScenarioSequence& seq,
                                           const std::vector<int>& schedule) {
    ValidationReport report;
    report.assumption = "C2";
    const Vector limit = seq.x0(0);
    std::vector<double> gaps;
    for (int n : schedule) {
        if (n < 1) continue;
        gaps.push_back((seq.x0(n) - limit).norm());
    }
    report.samples = gaps.size();
    constexpr double tiny = 1e-12;
    bool shrinking = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) shrinking &= gaps[i] <= gaps[i - 1] + tiny;
    if (!gaps.empty()) {
        report.estimate = gaps.back();
        shrinking &= gaps.back() <= tiny || gaps.back() < gaps.front();
    }
    report.pass = shrinking;
    std::ostringstream os;
    os << "|x0(n)-x0(0)| along schedule:";
    for (double g : gaps) os << ' ' << g;
    report.detail = os.str();
    return report;
}

ValidationReport check_small_jump_envelope(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                           const EnvelopeStateFn& h, const EnvelopeMarkFn& g,
                                           const SampleBox& box, RngStream stream) {
    cs.require_complete();
    require_samples(box);
    ValidationReport report = make_report("A4", stream);
    const auto m = static_cast<Eigen::Index>(jumps.mark_dim());
    const auto& trunc = jumps.truncated_part();

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = sample_point(box, cs.state_dim, stream);
        Vector mark;
        // Alternate between the mark law and the small-jump ball when there is one.
        if (trunc && (s % 2 == 1 || !jumps.has_sampler())) {
            SampleBox ball{0.0, trunc->truncation_level, 1, 0};
            mark = sample_point(ball, static_cast<std::size_t>(m), stream).second;
        } else if (jumps.has_sampler()) {
            mark = jumps.draw_mark(stream);
        } else {
            mark = Vector::Zero(m);
        }
        const Vector c = cs.jump(t, x, mark);
        require_finite(c, "jump coefficient", t, x);
        const double bound = h(t, x) * g(mark);
        if (!std::isfinite(bound)) throw NonFiniteError("envelope is not finite at " + describe_point(t, x));
        const double margin = c.norm() - bound;
        ++report.samples;
        if (margin > worst) {
            worst = margin;
            report.witness = Witness{t, x, {}, mark};
        }
    }
    report.estimate = std::max(0.0, worst);
    report.pass = report.estimate == 0.0;
    report.detail = "worst violation of |c| <= h(t,x) g(theta) (0 means none)";
    return report;
}

ValidationReport check_compensator(const CoefficientSet& cs, const JumpMeasureSpec& jumps,
                                   const SampleBox& box, RngStream stream) {
    cs.require_complete();
    require_samples(box);
    ValidationReport report = make_report("compensator", stream);
    // Only the sampled (outer) part of mu is compensated through the callable.
    JumpMeasureSpec outer = jumps;
    if (jumps.gaussian_small_jumps()) {
        TruncatedInfinite part = *jumps.truncated_part();
        part.small_jump_policy = SmallJumpPolicy::drop;
        outer = JumpMeasureSpec::truncated(jumps.mark_dim(), std::move(part));
    }

    double worst_z = 0.0;
    bool ok = true;
    for (std::size_t s = 0; s < box.samples; ++s) {
        const auto [t, x] = s == 0 ? std::pair<double, Vector>{0.0, Vector::Zero(static_cast<Eigen::Index>(cs.state_dim))}
                                   : sample_point(box, cs.state_dim, stream);
        const Vector mc = cs.compensator(t, x);
        require_finite(mc, "compensator", t, x);
        for (Eigen::Index i = 0; i < mc.size(); ++i) {
            const MarkIntegral est = integrate_marks(
                outer, [&](const Vector& mark) { return cs.jump(t, x, mark)(i); },
                box.mark_samples, stream);
            const double diff = std::abs(mc(i) - est.value);
            const double tol = 4.0 * est.standard_error + 1e-9 * (1.0 + std::abs(mc(i)));
            const double z = est.standard_error > 0.0 ? diff / est.standard_error
                                                      : (diff > tol ? std::numeric_limits<double>::infinity() : 0.0);
            if (diff > tol) ok = false;
            if (z > worst_z || !report.witness) {
                worst_z = std::max(worst_z, z);
                report.witness = Witness{t, x, {}, {}};
            }
        }
        ++report.samples;
    }
    report.estimate = worst_z;
    report.pass = ok;
    report.detail = "max |mc - MC estimate| in standard errors";
    return report;
}

}  // namespace jumpflow
