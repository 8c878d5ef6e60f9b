#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semoff {

// ε_max / (1 + exp(-a (γ_dB - γ0)))
struct LogisticCurve {
  double epsilon_max = 0.985;
  double slope_per_db = 0.5;
  double midpoint_db = 4.0;

  friend bool operator==(const LogisticCurve&, const LogisticCurve&) = default;
};

// Monotone accuracy-versus-SNR curve standing in for a pre-trained semantic
// transceiver. Either a logistic surrogate or a sampled (γ_dB, ε) table with
// piecewise-linear interpolation.
class AccuracyModel {
 public:
  using Point = std::pair<double, double>;  // (gamma_db, epsilon)

  AccuracyModel() : AccuracyModel(LogisticCurve{}) {}
  explicit AccuracyModel(LogisticCurve curve);

  // Points must be strictly increasing in both columns with ε in (0, 1].
  static AccuracyModel from_table(std::vector<Point> points);
  static AccuracyModel load_csv(const std::string& path);

  bool is_table() const { return !table_.empty(); }
  const LogisticCurve& logistic() const { return curve_; }
  const std::vector<Point>& table() const { return table_; }

  // Supremum of achievable accuracy. Attained for tables, asymptotic for the
  // logistic curve.
  double ceiling() const;

  double epsilon(double gamma_db) const;

  // Smallest SNR (dB) achieving `eps`; nullopt when eps is unreachable.
  std::optional<double> gamma_db_for(double eps) const;

  friend bool operator==(const AccuracyModel&, const AccuracyModel&) = default;

 private:
  LogisticCurve curve_;
  std::vector<Point> table_;
};

}  // namespace semoff
