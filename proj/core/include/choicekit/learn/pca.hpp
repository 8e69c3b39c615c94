#pragma once

#include <string>

#include <Eigen/Dense>

namespace choicekit::learn {

// Principal components of the centered covariance, ordered by decreasing
// explained variance. Output dimensionality is fixed by the retain fraction
// alone: max(1, floor(retain_fraction * input_dim)).
struct PcaTransform {
  Eigen::VectorXd mean;                // input_dim
  Eigen::MatrixXd components;          // input_dim x output_dim, orthonormal columns
  Eigen::VectorXd explained_variance;  // eigenvalues, descending, zero past the data rank
  double total_variance = 0.0;         // trace of the covariance

  int input_dim() const { return static_cast<int>(components.rows()); }
  int output_dim() const { return static_cast<int>(components.cols()); }
  double retained_variance() const { return explained_variance.sum(); }
};

int pca_output_dim(int input_dim, double retain_fraction);

// Rows of X are observations. Needs >= 2 rows and some variance somewhere
// (Errc::degenerate_data otherwise); retain_fraction in (0, 1]. When the
// data has fewer rows than columns the eigenproblem is solved on the Gram
// matrix, and any requested components beyond the data rank are filled with
// an orthonormal complement carrying zero variance.
PcaTransform pca_fit(const Eigen::MatrixXd& X, double retain_fraction);

Eigen::MatrixXd pca_apply(const PcaTransform& t, const Eigen::MatrixXd& X);
Eigen::MatrixXd pca_inverse(const PcaTransform& t, const Eigen::MatrixXd& Z);

// Versioned JSON persistence, exact double round-trip.
std::string pca_to_json(const PcaTransform& t);
PcaTransform pca_from_json(const std::string& text);          // Errc::schema_violation
void pca_save(const PcaTransform& t, const std::string& path);  // Errc::file_unwritable
PcaTransform pca_load(const std::string& path);                 // Errc::file_unreadable

}  // namespace choicekit::learn
