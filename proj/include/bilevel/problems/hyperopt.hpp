#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilevel/problem.hpp"

namespace bilevel {

/// Labeled dense dataset: rows are samples, labels are 0..n_classes-1.
struct Dataset {
  Eigen::MatrixXd features;  // n x F
  std::vector<int> labels;
  int n_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }
};

namespace detail {

struct RawCsv {
  Eigen::MatrixXd features;
  std::vector<long> labels;  // original integer values
};

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

/// Comma-separated file, optional header (detected by a non-numeric first
/// row), trailing integer label column.
inline RawCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<long> labels;
  std::string line;
  long line_no = 0;
  Eigen::Index n_cols = -1;
  bool first_content_row = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");

    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_double(cells[i], values[i])) {
        numeric = false;
        break;
      }
    }

    if (!numeric) {
      if (first_content_row) {
        first_content_row = false;  // header row
        continue;
      }
      throw std::runtime_error(path + ": malformed CSV at row " + std::to_string(line_no));
    }
    first_content_row = false;

    if (cells.size() < 2)
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               " needs at least one feature and a label");
    if (n_cols < 0) n_cols = static_cast<Eigen::Index>(cells.size());
    if (static_cast<Eigen::Index>(cells.size()) != n_cols)
      throw std::runtime_error(path + ": inconsistent column count at row " +
                               std::to_string(line_no));

    const double label_raw = values.back();
    const double rounded = std::round(label_raw);
    if (std::abs(label_raw - rounded) > 1e-9)
      throw std::runtime_error(path + ": non-integer label at row " + std::to_string(line_no));
    labels.push_back(static_cast<long>(rounded));
    values.pop_back();
    rows.push_back(std::move(values));
  }

  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  RawCsv out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), n_cols - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index j = 0; j + 1 < n_cols; ++j)
      out.features(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  out.labels = std::move(labels);
  return out;
}

/// Row-wise softmax cross-entropy machinery shared by the callbacks. All
/// weights live in a single F*C vector (column-major reshape of W).
struct SoftmaxData {
  Eigen::MatrixXd x;          // n x F
  Eigen::MatrixXi onehot_idx; // n x 1 (class index per sample)
  Eigen::Index f = 0;
  int c = 0;

  Eigen::Index dim() const { return f * c; }

  Eigen::MatrixXd scores(const Eigen::VectorXd& w) const {
    const Eigen::Map<const Eigen::MatrixXd> wm(w.data(), f, c);
    return x * wm;
  }

  static Eigen::MatrixXd softmax_rows(Eigen::MatrixXd s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double mx = s.row(i).maxCoeff();
      s.row(i) = (s.row(i).array() - mx).exp();
      s.row(i) /= s.row(i).sum();
    }
    return s;
  }

  double cross_entropy(const Eigen::VectorXd& w) const {
    const Eigen::MatrixXd s = scores(w);
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double mx = s.row(i).maxCoeff();
      const double lse = mx + std::log((s.row(i).array() - mx).exp().sum());
      total += lse - s(i, onehot_idx(i, 0));
    }
    return total / static_cast<double>(s.rows());
  }

  Eigen::VectorXd cross_entropy_grad(const Eigen::VectorXd& w) const {
    Eigen::MatrixXd p = softmax_rows(scores(w));
    for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, onehot_idx(i, 0)) -= 1.0;
    const Eigen::MatrixXd g = x.transpose() * p / static_cast<double>(p.rows());
    return Eigen::Map<const Eigen::VectorXd>(g.data(), dim());
  }

  Eigen::VectorXd cross_entropy_hvp(const Eigen::VectorXd& w, const Eigen::VectorXd& v) const {
    const Eigen::MatrixXd p = softmax_rows(scores(w));
    const Eigen::Map<const Eigen::MatrixXd> vm(v.data(), f, c);
    const Eigen::MatrixXd u = x * vm;  // n x C
    Eigen::MatrixXd t = p.cwiseProduct(u);
    t -= p.cwiseProduct((p.cwiseProduct(u)).rowwise().sum().replicate(1, c));
    const Eigen::MatrixXd h = x.transpose() * t / static_cast<double>(p.rows());
    return Eigen::Map<const Eigen::VectorXd>(h.data(), dim());
  }

  double accuracy(const Eigen::VectorXd& w) const {
    const Eigen::MatrixXd s = scores(w);
    long correct = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      Eigen::Index best = 0;
      s.row(i).maxCoeff(&best);
      if (static_cast<int>(best) == onehot_idx(i, 0)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(s.rows());
  }
};

}  // namespace detail

/// Bilevel hyperparameter optimization: the outer variable is one log-scale
/// ridge weight per model weight, the inner variable is the weight vector of
/// a softmax classifier.
///   inner  g(lambda, w) = CE_train(w) + sum_i exp(lambda_i) w_i^2
///   outer  f(lambda, w) = CE_val(w)
/// The exponential keeps every ridge coefficient positive while lambda lives
/// in a box.
struct HyperOptProblem {
  ProblemSpec spec;
  Dataset train;
  Dataset val;
  Eigen::Index n_features = 0;
  int n_classes = 0;
  std::shared_ptr<const detail::SoftmaxData> val_data;

  double val_accuracy(const VectorPair& z) const { return val_data->accuracy(z.y); }
};

/// Loads two CSVs and builds the bilevel spec. The files must agree on the
/// feature count; validation labels must be a subset of the training labels.
inline HyperOptProblem load_hyperopt(const std::string& train_csv, const std::string& val_csv,
                                     double reg_lo = -6.0, double reg_hi = 0.0,
                                     double weight_bound = 5.0) {
  if (!(reg_lo <= reg_hi)) throw std::invalid_argument("load_hyperopt: reg_lo > reg_hi");
  const detail::RawCsv train_raw = detail::read_csv(train_csv);
  const detail::RawCsv val_raw = detail::read_csv(val_csv);
  if (train_raw.features.cols() != val_raw.features.cols())
    throw std::runtime_error("load_hyperopt: feature count differs between files");

  std::set<long> classes(train_raw.labels.begin(), train_raw.labels.end());
  for (std::size_t i = 0; i < val_raw.labels.size(); ++i) {
    if (!classes.count(val_raw.labels[i]))
      throw std::runtime_error("load_hyperopt: label " + std::to_string(val_raw.labels[i]) +
                               " in validation file is absent from the training file");
  }
  std::vector<long> ordered(classes.begin(), classes.end());
  auto to_index = [&ordered](long lbl) {
    return static_cast<int>(std::lower_bound(ordered.begin(), ordered.end(), lbl) -
                            ordered.begin());
  };

  HyperOptProblem hp;
  hp.n_features = train_raw.features.cols();
  hp.n_classes = static_cast<int>(ordered.size());

  auto fill = [&](const detail::RawCsv& raw, Dataset& ds) {
    ds.features = raw.features;
    ds.n_classes = hp.n_classes;
    ds.labels.reserve(raw.labels.size());
    for (long lbl : raw.labels) ds.labels.push_back(to_index(lbl));
  };
  fill(train_raw, hp.train);
  fill(val_raw, hp.val);

  auto make_sm = [&](const Dataset& ds) {
    auto sm = std::make_shared<detail::SoftmaxData>();
    sm->x = ds.features;
    sm->f = hp.n_features;
    sm->c = hp.n_classes;
    sm->onehot_idx.resize(ds.size(), 1);
    for (Eigen::Index i = 0; i < ds.size(); ++i) sm->onehot_idx(i, 0) = ds.labels[static_cast<std::size_t>(i)];
    return sm;
  };
  const auto train_sm = make_sm(hp.train);
  const auto val_sm = make_sm(hp.val);
  hp.val_data = val_sm;

  const Eigen::Index dim = hp.n_features * hp.n_classes;
  ProblemSpec& p = hp.spec;
  p.dim_x = dim;
  p.dim_y = dim;
  p.set_x = FeasibleSet::cube(dim, reg_lo, reg_hi);
  p.set_y = FeasibleSet::cube(dim, -weight_bound, weight_bound);

  p.f_value = [val_sm](const Eigen::VectorXd&, const Eigen::VectorXd& w) {
    return val_sm->cross_entropy(w);
  };
  p.f_grad = [val_sm, dim](const Eigen::VectorXd&, const Eigen::VectorXd& w) {
    return VectorPair{Eigen::VectorXd::Zero(dim), val_sm->cross_entropy_grad(w)};
  };
  p.g_value = [train_sm](const Eigen::VectorXd& lam, const Eigen::VectorXd& w) {
    return train_sm->cross_entropy(w) + (lam.array().exp() * w.array().square()).sum();
  };
  p.g_grad = [train_sm](const Eigen::VectorXd& lam, const Eigen::VectorXd& w) {
    const Eigen::ArrayXd e = lam.array().exp();
    Eigen::VectorXd gx = (e * w.array().square()).matrix();
    Eigen::VectorXd gy = train_sm->cross_entropy_grad(w) + (2.0 * e * w.array()).matrix();
    return VectorPair{std::move(gx), std::move(gy)};
  };
  p.hvp_g_yy = [train_sm](const Eigen::VectorXd& lam, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& v) {
    return Eigen::VectorXd(train_sm->cross_entropy_hvp(w, v) +
                           (2.0 * lam.array().exp() * v.array()).matrix());
  };
  p.hvp_g_xy = [](const Eigen::VectorXd& lam, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& v) {
    return Eigen::VectorXd((2.0 * lam.array().exp() * w.array() * v.array()).matrix());
  };
  p.hvp_f_yy = [val_sm](const Eigen::VectorXd&, const Eigen::VectorXd& w,
                        const Eigen::VectorXd& v) {
    return val_sm->cross_entropy_hvp(w, v);
  };
  p.hvp_f_xy = [dim](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(dim));
  };

  p.constants = estimate_constants(p, 128, 0x5eedu);
  // Sampling can miss the largest ridge curvature; the closed-form bounds on
  // the regularizer blocks give a floor: d^2/dw^2 adds 2 e^hi, d^2/dlam^2 is
  // at most e^hi w^2, the cross block at most 2 e^hi |w|.
  const double e_hi = std::exp(reg_hi);
  const double w_max = weight_bound;
  const double reg_block =
      e_hi * std::max({2.0, w_max * w_max, 2.0 * w_max});
  p.constants.rho_g = std::max(p.constants.rho_g, 2.0 * reg_block);
  p.constants.mu = 0.0;
  return hp;
}

}  // namespace bilevel
