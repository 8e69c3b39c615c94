#include "choicekit/learn/pca.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "choicekit/errors.hpp"

namespace choicekit::learn {

int pca_output_dim(int input_dim, double retain_fraction) {
  if (!(retain_fraction > 0.0 && retain_fraction <= 1.0))
    throw Error(Errc::invalid_hyperparameter, "retain_fraction must be in (0, 1]");
  if (retain_fraction == 1.0) return input_dim;
  int k = static_cast<int>(std::floor(retain_fraction * static_cast<double>(input_dim)));
  return std::max(1, k);
}

PcaTransform pca_fit(const Eigen::MatrixXd& X, double retain_fraction) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) throw Error(Errc::degenerate_data, "need at least two rows");
  int out_dim = pca_output_dim(static_cast<int>(d), retain_fraction);

  PcaTransform t;
  t.mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - t.mean.transpose();
  double denom = static_cast<double>(n - 1);
  t.total_variance = centered.squaredNorm() / denom;
  if (!(t.total_variance > 0.0))
    throw Error(Errc::degenerate_data, "zero variance in every direction");

  Eigen::VectorXd eigenvalues;   // ascending, as the solver returns them
  Eigen::MatrixXd basis;         // d x m candidate components, same order
  if (d <= n) {
    Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
      throw Error(Errc::degenerate_data, "eigendecomposition failed");
    eigenvalues = solver.eigenvalues();
    basis = solver.eigenvectors();
  } else {
    // Gram trick: the n x n problem shares the nonzero spectrum with the
    // d x d covariance, and its eigenvectors map back through X.
    Eigen::MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
      throw Error(Errc::degenerate_data, "eigendecomposition failed");
    eigenvalues = solver.eigenvalues();
    // Eigenvalues below the relative cutoff count as rank deficiency; mapping
    // them back through X would just normalize round-off noise.
    double cutoff = eigenvalues.maxCoeff() * 1e-12;
    basis.resize(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double lambda = eigenvalues(i);
      if (lambda > cutoff) {
        basis.col(i) = centered.transpose() * solver.eigenvectors().col(i) /
                       std::sqrt(denom * lambda);
      } else {
        basis.col(i).setZero();
        eigenvalues(i) = 0.0;
      }
    }
  }

  const auto available = basis.cols();
  const double cutoff = eigenvalues.maxCoeff() * 1e-12;
  t.components.resize(d, out_dim);
  t.explained_variance = Eigen::VectorXd::Zero(out_dim);
  Eigen::Index usable = std::min<Eigen::Index>(out_dim, available);
  for (Eigen::Index i = 0; i < usable; ++i) {
    Eigen::Index src = available - 1 - i;  // flip ascending to descending
    if (eigenvalues(src) > cutoff) {
      t.components.col(i) = basis.col(src);
      t.explained_variance(i) = eigenvalues(src);
    } else {
      usable = i;
      break;
    }
  }

  if (usable < out_dim) {
    // Requested components past the data rank: any orthonormal complement
    // serves, each explaining zero variance.
    Eigen::MatrixXd held = t.components.leftCols(usable);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(held);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, out_dim);
    t.components.rightCols(out_dim - usable) = q.rightCols(out_dim - usable);
  }
  return t;
}

Eigen::MatrixXd pca_apply(const PcaTransform& t, const Eigen::MatrixXd& X) {
  if (X.cols() != t.components.rows())
    throw Error(Errc::dimension_mismatch,
                "expected " + std::to_string(t.components.rows()) + " columns, got " +
                    std::to_string(X.cols()));
  return (X.rowwise() - t.mean.transpose()) * t.components;
}

Eigen::MatrixXd pca_inverse(const PcaTransform& t, const Eigen::MatrixXd& Z) {
  if (Z.cols() != t.components.cols())
    throw Error(Errc::dimension_mismatch,
                "expected " + std::to_string(t.components.cols()) + " columns, got " +
                    std::to_string(Z.cols()));
  return (Z * t.components.transpose()).rowwise() + t.mean.transpose();
}

std::string pca_to_json(const PcaTransform& t) {
  using nlohmann::json;
  json doc;
  doc["format"] = "choicekit-pca";
  doc["version"] = 1;
  doc["total_variance"] = t.total_variance;
  json mean = json::array(), explained = json::array();
  for (Eigen::Index i = 0; i < t.mean.size(); ++i) mean.push_back(t.mean(i));
  for (Eigen::Index i = 0; i < t.explained_variance.size(); ++i)
    explained.push_back(t.explained_variance(i));
  doc["mean"] = std::move(mean);
  doc["explained_variance"] = std::move(explained);
  json components = json::array();
  for (Eigen::Index i = 0; i < t.components.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < t.components.cols(); ++j) row.push_back(t.components(i, j));
    components.push_back(std::move(row));
  }
  doc["components"] = std::move(components);
  return doc.dump(2);
}

PcaTransform pca_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "choicekit-pca" ||
        doc.at("version").get<int>() != 1)
      throw Error(Errc::schema_violation, "unsupported pca format or version");
    PcaTransform t;
    t.total_variance = doc.at("total_variance").get<double>();
    const json& mean = doc.at("mean");
    t.mean.resize(static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < mean.size(); ++i)
      t.mean(static_cast<Eigen::Index>(i)) = mean[i].get<double>();
    const json& explained = doc.at("explained_variance");
    t.explained_variance.resize(static_cast<Eigen::Index>(explained.size()));
    for (std::size_t i = 0; i < explained.size(); ++i)
      t.explained_variance(static_cast<Eigen::Index>(i)) = explained[i].get<double>();
    const json& components = doc.at("components");
    t.components.resize(static_cast<Eigen::Index>(components.size()),
                        static_cast<Eigen::Index>(explained.size()));
    for (std::size_t i = 0; i < components.size(); ++i)
      for (std::size_t j = 0; j < components[i].size(); ++j)
        t.components(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            components[i][j].get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema_violation, std::string("pca file: ") + e.what());
  }
}

void pca_save(const PcaTransform& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::file_unwritable, "cannot write " + path);
  out << pca_to_json(t) << '\n';
}

PcaTransform pca_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::file_unreadable, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return pca_from_json(buffer.str());
}

}  // namespace choicekit::learn
