#include "semoff/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semoff {

AccuracyModel::AccuracyModel(LogisticCurve curve) : curve_(curve) {
  if (!(curve.epsilon_max > 0.0 && curve.epsilon_max <= 1.0))
    throw std::invalid_argument("accuracy curve: epsilon_max must lie in (0, 1]");
  if (!(curve.slope_per_db > 0.0))
    throw std::invalid_argument("accuracy curve: slope_per_db must be positive");
}

AccuracyModel AccuracyModel::from_table(std::vector<Point> points) {
  if (points.size() < 2)
    throw std::invalid_argument("accuracy table: need at least two points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [g, e] = points[i];
    if (!std::isfinite(g) || !(e > 0.0 && e <= 1.0))
      throw std::invalid_argument("accuracy table: epsilon must lie in (0, 1]");
    if (i > 0 && !(g > points[i - 1].first && e > points[i - 1].second))
      throw std::invalid_argument(
          "accuracy table: columns must be strictly increasing");
  }
  AccuracyModel m;
  m.table_ = std::move(points);
  return m;
}

AccuracyModel AccuracyModel::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open accuracy table: " + path);
  std::vector<Point> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double g = 0.0, e = 0.0;
    if (!(row >> g >> e)) {
      if (pts.empty()) continue;  // header
      throw std::runtime_error("accuracy table: malformed row '" + line + "'");
    }
    pts.emplace_back(g, e);
  }
  return from_table(std::move(pts));
}

double AccuracyModel::ceiling() const {
  return is_table() ? table_.back().second : curve_.epsilon_max;
}

double AccuracyModel::epsilon(double gamma_db) const {
  if (!is_table()) {
    return curve_.epsilon_max /
           (1.0 + std::exp(-curve_.slope_per_db * (gamma_db - curve_.midpoint_db)));
  }
  if (gamma_db <= table_.front().first) {
    // Linear extension through the origin keeps the map strictly increasing.
    const auto [g0, e0] = table_.front();
    const auto [g1, e1] = table_[1];
    const double slope = (e1 - e0) / (g1 - g0);
    return std::max(e0 + slope * (gamma_db - g0), 0.0);
  }
  if (gamma_db >= table_.back().first) return table_.back().second;
  auto hi = std::upper_bound(table_.begin(), table_.end(), gamma_db,
                             [](double g, const Point& p) { return g < p.first; });
  auto lo = hi - 1;
  const double t = (gamma_db - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

std::optional<double> AccuracyModel::gamma_db_for(double eps) const {
  if (!(eps > 0.0)) return std::nullopt;
  if (!is_table()) {
    if (eps >= curve_.epsilon_max) return std::nullopt;
    return curve_.midpoint_db -
           std::log(curve_.epsilon_max / eps - 1.0) / curve_.slope_per_db;
  }
  if (eps > table_.back().second) return std::nullopt;
  if (eps <= table_.front().second) {
    const auto [g0, e0] = table_.front();
    const auto [g1, e1] = table_[1];
    return g0 - (e0 - eps) * (g1 - g0) / (e1 - e0);
  }
  auto hi = std::lower_bound(table_.begin(), table_.end(), eps,
                             [](const Point& p, double e) { return p.second < e; });
  auto lo = hi - 1;
  const double t = (eps - lo->second) / (hi->second - lo->second);
  return lo->first + t * (hi->first - lo->first);
}

}  // namespace semoff
