#include "tht/targets/sensor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tht {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// -log(1 - e^{-z}) for z > 0, accurate at both ends.
double neg_log_one_minus_exp(double z) {
  if (z > 0.6931471805599453) return -std::log1p(-std::exp(-z));
  return -std::log(-std::expm1(-z));
}

double pair_distance(const Vec& locs, const Mat& known, int n_unknown, int t,
                     int u, Eigen::Vector2d* diff = nullptr) {
  auto point = [&](int s) -> Eigen::Vector2d {
    if (s < n_unknown) return Eigen::Vector2d(locs[2 * s], locs[2 * s + 1]);
    return known.row(s - n_unknown).transpose();
  };
  const Eigen::Vector2d delta = point(t) - point(u);
  if (diff != nullptr) *diff = delta;
  return delta.norm();
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SensorDataset::SensorDataset(int n_unknown, Mat known,
                             std::vector<std::pair<int, int>> observed,
                             std::vector<double> distances, double range,
                             double noise, std::optional<Mat> truth)
    : n_unknown_(n_unknown),
      known_(std::move(known)),
      observed_(std::move(observed)),
      distances_(std::move(distances)),
      range_(range),
      noise_(noise),
      truth_(std::move(truth)) {
  if (n_unknown_ < 1) {
    throw std::invalid_argument("need at least one unknown sensor");
  }
  if (known_.rows() < 1 || known_.cols() != 2) {
    throw std::invalid_argument("known positions must be an n x 2 matrix");
  }
  for (Eigen::Index s = 0; s < known_.rows(); ++s) {
    if (known_(s, 0) < 0.0 || known_(s, 0) > 1.0 || known_(s, 1) < 0.0 ||
        known_(s, 1) > 1.0) {
      throw std::invalid_argument("known positions must lie in the unit square");
    }
  }
  if (observed_.size() != distances_.size()) {
    throw std::invalid_argument("observed pairs and distances must align");
  }
  if (!(range_ > 0.0) || !(noise_ > 0.0)) {
    throw std::invalid_argument("range and noise must be positive");
  }
  if (truth_ && (truth_->rows() != n_unknown_ || truth_->cols() != 2)) {
    throw std::invalid_argument("truth size must match the unknown count");
  }
  const int total = n_total();
  pair_lookup_.assign(static_cast<std::size_t>(total) * total, -1);
  for (std::size_t i = 0; i < observed_.size(); ++i) {
    auto [t, u] = observed_[i];
    if (t < 0 || u < 0 || t >= total || u >= total || t == u) {
      throw std::invalid_argument("observed pair indices out of range");
    }
    pair_lookup_[static_cast<std::size_t>(t) * total + u] = static_cast<int>(i);
    pair_lookup_[static_cast<std::size_t>(u) * total + t] = static_cast<int>(i);
  }
}

int SensorDataset::pair_index(int t, int u) const {
  return pair_lookup_[static_cast<std::size_t>(t) * n_total() + u];
}

double SensorDataset::measured_distance(int t, int u) const {
  const int i = pair_index(t, u);
  if (i < 0) throw std::out_of_range("pair was not observed");
  return distances_[static_cast<std::size_t>(i)];
}

Vec SensorDataset::truth_flat() const {
  if (!truth_) throw std::logic_error("dataset carries no truth");
  Vec flat(2 * n_unknown_);
  for (int s = 0; s < n_unknown_; ++s) {
    flat[2 * s] = (*truth_)(s, 0);
    flat[2 * s + 1] = (*truth_)(s, 1);
  }
  return flat;
}

std::string SensorDataset::to_json() const {
  std::ostringstream os;
  os << "{\n  \"known\": [";
  for (Eigen::Index s = 0; s < known_.rows(); ++s) {
    os << (s == 0 ? "" : ", ") << "[" << format17(known_(s, 0)) << ", "
       << format17(known_(s, 1)) << "]";
  }
  os << "],\n  \"obs\": [";
  for (std::size_t i = 0; i < observed_.size(); ++i) {
    os << (i == 0 ? "" : ", ") << "[" << observed_[i].first << ", "
       << observed_[i].second << "]";
  }
  os << "],\n  \"dist\": [";
  for (std::size_t i = 0; i < distances_.size(); ++i) {
    os << (i == 0 ? "" : ", ") << format17(distances_[i]);
  }
  os << "],\n  \"R\": " << format17(range_)
     << ",\n  \"sigma_e\": " << format17(noise_);
  if (truth_) {
    os << ",\n  \"truth\": [";
    for (int s = 0; s < n_unknown_; ++s) {
      os << (s == 0 ? "" : ", ") << "[" << format17((*truth_)(s, 0)) << ", "
         << format17((*truth_)(s, 1)) << "]";
    }
    os << "]";
  }
  os << "\n}\n";
  return os.str();
}

SensorDataset SensorDataset::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const auto& known_rows = j.at("known");
  Mat known(known_rows.size(), 2);
  for (std::size_t s = 0; s < known_rows.size(); ++s) {
    known(static_cast<Eigen::Index>(s), 0) = known_rows.at(s).at(0).get<double>();
    known(static_cast<Eigen::Index>(s), 1) = known_rows.at(s).at(1).get<double>();
  }
  std::vector<std::pair<int, int>> observed;
  for (const auto& p : j.at("obs")) {
    observed.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  }
  std::vector<double> distances = j.at("dist").get<std::vector<double>>();
  std::optional<Mat> truth;
  int n_unknown = kDefaultUnknown;
  if (j.contains("truth")) {
    const auto& rows = j.at("truth");
    n_unknown = static_cast<int>(rows.size());
    Mat t(rows.size(), 2);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      t(static_cast<Eigen::Index>(s), 0) = rows.at(s).at(0).get<double>();
      t(static_cast<Eigen::Index>(s), 1) = rows.at(s).at(1).get<double>();
    }
    truth = std::move(t);
  }
  return SensorDataset(n_unknown, std::move(known), std::move(observed),
                       std::move(distances), j.at("R").get<double>(),
                       j.at("sigma_e").get<double>(), std::move(truth));
}

void SensorDataset::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_json();
}

SensorDataset SensorDataset::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_json(buf.str());
}

SensorDataset generate_sensor_data(const Mat& positions, double range,
                                   double noise, RngStream& rng,
                                   int n_unknown) {
  const int total = static_cast<int>(positions.rows());
  if (positions.cols() != 2 || n_unknown < 1 || n_unknown >= total) {
    throw std::invalid_argument("positions must hold unknowns then anchors");
  }
  if (positions.minCoeff() < 0.0 || positions.maxCoeff() > 1.0) {
    throw std::invalid_argument("positions must lie in the unit square");
  }
  std::vector<std::pair<int, int>> observed;
  std::vector<double> distances;
  for (int t = 0; t < total; ++t) {
    for (int u = t + 1; u < total; ++u) {
      const double d = (positions.row(t) - positions.row(u)).norm();
      const double p_obs = std::exp(-d * d / (2.0 * range * range));
      if (rng.uniform01() < p_obs) {
        observed.emplace_back(t, u);
        distances.push_back(d + noise * rng.normal());
      }
    }
  }
  Mat truth = positions.topRows(n_unknown);
  Mat known = positions.bottomRows(total - n_unknown);
  return SensorDataset(n_unknown, std::move(known), std::move(observed),
                       std::move(distances), range, noise, std::move(truth));
}

SensorDataset default_sensor_dataset(std::uint64_t seed) {
  Mat positions(SensorDataset::kDefaultUnknown + SensorDataset::kDefaultKnown,
                2);
  RngStream truth_rng = RngStream::derive(seed, 0);
  for (int s = 0; s < SensorDataset::kDefaultUnknown; ++s) {
    positions(s, 0) = truth_rng.uniform01();
    positions(s, 1) = truth_rng.uniform01();
  }
  positions.row(8) << 0.45, 0.52;
  positions.row(9) << 0.55, 0.48;
  positions.row(10) << 0.90, 0.50;
  RngStream data_rng = RngStream::derive(seed, 1);
  return generate_sensor_data(positions, 0.3, 0.02, data_rng);
}

SensorModel::SensorModel(const SensorDataset& ds, double range, double noise)
    : ds_(&ds),
      range_(range),
      noise_(noise),
      box_(Box::unit_square(2 * ds.n_unknown())) {
  if (!(range_ > 0.0) || !(noise_ > 0.0)) {
    throw std::invalid_argument("range and noise must be positive");
  }
}

double SensorModel::potential(const Vec& locs) const {
  const int n_unknown = ds_->n_unknown();
  const int total = ds_->n_total();
  const double r2 = range_ * range_;
  const double s2 = noise_ * noise_;
  const double log_norm = 0.5 * kLogTwoPi + std::log(noise_);
  double u = 0.0;
  for (int t = 0; t < n_unknown; ++t) {
    for (int v = t + 1; v < total; ++v) {
      const double d = pair_distance(locs, ds_->known(), n_unknown, t, v);
      if (ds_->is_observed(t, v)) {
        const double resid = ds_->measured_distance(t, v) - d;
        u += d * d / (2.0 * r2) + resid * resid / (2.0 * s2) + log_norm;
      } else {
        const double z = d * d / (2.0 * r2);
        if (z == 0.0) return kInf;  // coincident unobserved pair
        u += neg_log_one_minus_exp(z);
      }
    }
  }
  return u;
}

Vec SensorModel::gradient(const Vec& locs) const {
  const int n_unknown = ds_->n_unknown();
  const int total = ds_->n_total();
  const double r2 = range_ * range_;
  const double s2 = noise_ * noise_;
  Vec grad = Vec::Zero(locs.size());
  Eigen::Vector2d diff;
  for (int t = 0; t < n_unknown; ++t) {
    for (int v = t + 1; v < total; ++v) {
      const double d =
          pair_distance(locs, ds_->known(), n_unknown, t, v, &diff);
      if (d == 0.0) continue;  // undefined direction, measure zero
      double du_dd;
      if (ds_->is_observed(t, v)) {
        du_dd = d / r2 - (ds_->measured_distance(t, v) - d) / s2;
      } else {
        const double z = d * d / (2.0 * r2);
        du_dd = -(d / r2) / std::expm1(z);
      }
      const Eigen::Vector2d g = (du_dd / d) * diff;
      grad.segment<2>(2 * t) += g;
      if (v < n_unknown) grad.segment<2>(2 * v) -= g;
    }
  }
  return grad;
}

HyperPotential::HyperPotential(const SensorDataset& ds, const Vec& locs,
                               Kind kind, double prior_rate)
    : kind_(kind), prior_rate_(prior_rate) {
  const int n_unknown = ds.n_unknown();
  const int total = ds.n_total();
  for (int t = 0; t < total; ++t) {
    for (int v = t + 1; v < total; ++v) {
      PairTerm term;
      term.dist = pair_distance(locs, ds.known(), n_unknown, t, v);
      term.observed = ds.is_observed(t, v);
      term.measured = term.observed ? ds.measured_distance(t, v) : 0.0;
      pairs_.push_back(term);
    }
  }
}

HyperPotential::HyperPotential(const SensorDataset& ds, const Vec& locs,
                               Kind kind)
    : HyperPotential(ds, locs, kind,
                     kind == Kind::kRange ? kRangePriorRate
                                          : kNoisePriorRate) {}

double HyperPotential::potential(const Vec& theta) const {
  const double th = theta[0];
  const double inv_sq = std::exp(-2.0 * th);
  double u = prior_rate_ * std::exp(th) - th - std::log(prior_rate_);
  for (const auto& p : pairs_) {
    if (kind_ == Kind::kRange) {
      const double z = 0.5 * p.dist * p.dist * inv_sq;
      if (p.observed) {
        u += z;
      } else {
        if (z == 0.0) return kInf;
        u += neg_log_one_minus_exp(z);
      }
    } else if (p.observed) {
      const double resid = p.measured - p.dist;
      u += 0.5 * resid * resid * inv_sq + 0.5 * kLogTwoPi + th;
    }
  }
  return u;
}

Vec HyperPotential::gradient(const Vec& theta) const {
  const double th = theta[0];
  const double inv_sq = std::exp(-2.0 * th);
  double g = prior_rate_ * std::exp(th) - 1.0;
  for (const auto& p : pairs_) {
    if (kind_ == Kind::kRange) {
      const double z = 0.5 * p.dist * p.dist * inv_sq;
      if (p.observed) {
        g += -2.0 * z;
      } else if (z > 0.0) {
        g += 2.0 * z / std::expm1(z);
      }
    } else if (p.observed) {
      const double resid = p.measured - p.dist;
      g += -resid * resid * inv_sq + 1.0;
    }
  }
  Vec out(1);
  out[0] = g;
  return out;
}

double sensor_joint_log_posterior(const SensorDataset& ds, const Vec& locs,
                                  double range, double noise) {
  for (Index i = 0; i < locs.size(); ++i) {
    if (locs[i] < 0.0 || locs[i] > 1.0) return -kInf;
  }
  const int n_unknown = ds.n_unknown();
  const int total = ds.n_total();
  const double r2 = range * range;
  const double s2 = noise * noise;
  const double log_norm = 0.5 * kLogTwoPi + std::log(noise);
  double lp = 0.0;
  for (int t = 0; t < total; ++t) {
    for (int v = t + 1; v < total; ++v) {
      const double d = pair_distance(locs, ds.known(), n_unknown, t, v);
      if (ds.is_observed(t, v)) {
        const double resid = ds.measured_distance(t, v) - d;
        lp -= d * d / (2.0 * r2) + resid * resid / (2.0 * s2) + log_norm;
      } else {
        const double z = d * d / (2.0 * r2);
        if (z == 0.0) return -kInf;
        lp -= neg_log_one_minus_exp(z);
      }
    }
  }
  lp += std::log(kRangePriorRate) - kRangePriorRate * range;
  lp += std::log(kNoisePriorRate) - kNoisePriorRate * noise;
  return lp;
}

Vec mirror_configuration(const SensorDataset& ds, const Vec& locs) {
  // Least-squares line through the anchors: centroid plus the principal
  // axis of their 2x2 scatter.
  const Mat& known = ds.known();
  const Eigen::Vector2d centroid = known.colwise().mean().transpose();
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (Eigen::Index s = 0; s < known.rows(); ++s) {
    const Eigen::Vector2d c = known.row(s).transpose() - centroid;
    scatter += c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  const Eigen::Vector2d axis = eig.eigenvectors().col(1);  // largest eigenvalue
  const Eigen::Matrix2d reflect =
      2.0 * axis * axis.transpose() - Eigen::Matrix2d::Identity();
  Vec out(locs.size());
  for (Index s = 0; s < locs.size() / 2; ++s) {
    const Eigen::Vector2d p(locs[2 * s], locs[2 * s + 1]);
    const Eigen::Vector2d q = centroid + reflect * (p - centroid);
    out[2 * s] = q[0];
    out[2 * s + 1] = q[1];
  }
  return out;
}

}  // namespace tht
