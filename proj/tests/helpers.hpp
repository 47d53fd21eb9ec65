#pragma once

#include <string>
#include <vector>

#include "ushape/dataset.hpp"
#include "ushape/design.hpp"

namespace testing_helpers {

inline ushape::DesignMatrix make_design(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                        std::vector<std::string> labels = {}) {
    ushape::DesignMatrix d;
    d.values = x;
    d.response = y;
    d.row_weights = w;
    if (labels.empty())
        for (Eigen::Index j = 0; j < x.cols(); ++j) labels.push_back("x" + std::to_string(j));
    d.column_labels = std::move(labels);
    return d;
}

inline ushape::SurveyRecord record(std::string country, int round, int age, double happiness, double weight = 1.0) {
    ushape::SurveyRecord r;
    r.country = std::move(country);
    r.round = round;
    r.period_year = 2000 + 2 * round;
    r.age = age;
    r.birth_year = r.period_year - age;
    r.happiness = happiness;
    r.weight = weight;
    return r;
}

}  // namespace testing_helpers
