#include "ushape/wls.hpp"

#include <limits>
#include <set>
#include <stdexcept>

#include "ushape/error.hpp"

namespace ushape {

std::optional<Eigen::Index> FitResult::index(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<Eigen::Index>(i);
    return std::nullopt;
}

double FitResult::coefficient(std::string_view label) const {
    if (auto i = index(label)) return coefficients(*i);
    throw std::out_of_range("no coefficient '" + std::string(label) + "'");
}

double FitResult::t_stat(std::string_view label) const {
    if (auto i = index(label)) return t_stats(*i);
    throw std::out_of_range("no coefficient '" + std::string(label) + "'");
}

namespace {

RankReport make_report(const DesignMatrix& design, const WeightedSolution<double>& sol) {
    RankReport report;
    report.rank = sol.rank;
    report.cols = design.cols();
    std::set<Eigen::Index> suspects;
    for (const auto& dep : sol.dependencies) {
        std::vector<std::string> names;
        for (Eigen::Index j : dep) {
            names.push_back(design.column_labels[static_cast<std::size_t>(j)]);
            suspects.insert(j);
        }
        report.dependencies.push_back(std::move(names));
    }
    for (Eigen::Index j : suspects) report.suspect_columns.push_back(design.column_labels[static_cast<std::size_t>(j)]);
    return report;
}

}  // namespace

RankReport rank_check(const DesignMatrix& design, double tolerance) {
    return make_report(design, solve_weighted<double>(design.values, design.response, design.row_weights, tolerance));
}

FitResult fit_wls(const DesignMatrix& design, double tolerance) {
    if ((design.row_weights.array() <= 0.0).any()) throw DataError("row weights must be positive");
    const auto sol = solve_weighted<double>(design.values, design.response, design.row_weights, tolerance);
    if (sol.rank < design.cols()) {
        RankReport report = make_report(design, sol);
        std::string what = "rank-deficient design (rank " + std::to_string(sol.rank) + " of " +
                           std::to_string(design.cols()) + "); dependent columns:";
        for (const auto& s : report.suspect_columns) what += " " + s;
        throw RankDeficientError(what, report.suspect_columns);
    }
    const Eigen::Index n = design.rows();
    if (n <= sol.rank) throw NoResidualDofError("no residual degrees of freedom (n = " + std::to_string(n) + ")");

    FitResult fit;
    fit.labels = design.column_labels;
    fit.coefficients = sol.coefficients;
    fit.n_obs = n;
    fit.rank = sol.rank;
    fit.dof = n - sol.rank;
    fit.weighted_rss = sol.weighted_rss;
    fit.residual_variance = sol.weighted_rss / static_cast<double>(fit.dof);
    fit.covariance = fit.residual_variance * sol.unscaled_covariance;
    fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_stats.resize(fit.coefficients.size());
    for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
        fit.t_stats(i) = fit.std_errors(i) > 0.0 ? std::abs(fit.coefficients(i)) / fit.std_errors(i)
                                                 : std::numeric_limits<double>::quiet_NaN();
    }
    fit.converged_rank_ok = true;
    return fit;
}

Eigen::VectorXd fitted_values(const DesignMatrix& design, const FitResult& fit) {
    return design.values * fit.coefficients;
}

}  // namespace ushape
