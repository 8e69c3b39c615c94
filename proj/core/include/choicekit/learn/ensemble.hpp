#pragma once

#include <vector>

#include <Eigen/Dense>

namespace choicekit::learn {

// Componentwise arithmetic mean of k prediction vectors. k >= 1
// (Errc::empty_group) and all lengths equal (Errc::length_mismatch).
Eigen::VectorXd ensemble_average(const std::vector<Eigen::VectorXd>& predictions);

}  // namespace choicekit::learn
