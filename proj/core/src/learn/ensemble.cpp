#include "choicekit/learn/ensemble.hpp"

#include <string>

#include "choicekit/errors.hpp"

namespace choicekit::learn {

Eigen::VectorXd ensemble_average(const std::vector<Eigen::VectorXd>& predictions) {
  if (predictions.empty()) throw Error(Errc::empty_group, "ensemble of zero predictors");
  Eigen::VectorXd sum = predictions.front();
  for (std::size_t j = 1; j < predictions.size(); ++j) {
    if (predictions[j].size() != sum.size())
      throw Error(Errc::length_mismatch,
                  "predictor " + std::to_string(j) + " has " +
                      std::to_string(predictions[j].size()) + " predictions, expected " +
                      std::to_string(sum.size()));
    sum += predictions[j];
  }
  return sum / static_cast<double>(predictions.size());
}

}  // namespace choicekit::learn
