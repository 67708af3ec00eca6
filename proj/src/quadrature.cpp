#include "uzawa/quadrature.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace uzawa {

namespace {

struct RuleBuilder {
  TriangleRule rule;

  RuleBuilder& centroid(double w) {
    rule.points.emplace_back(1.0 / 3, 1.0 / 3, 1.0 / 3);
    rule.weights.push_back(w);
    return *this;
  }
  // Orbit of (a, a, 1-2a): three points.
  RuleBuilder& s21(double a, double w) {
    const double b = 1.0 - 2.0 * a;
    for (const Eigen::Vector3d& p : {Eigen::Vector3d(b, a, a), Eigen::Vector3d(a, b, a), Eigen::Vector3d(a, a, b)}) {
      rule.points.push_back(p);
      rule.weights.push_back(w);
    }
    return *this;
  }
  // Orbit of (a, b, 1-a-b): six points.
  RuleBuilder& s111(double a, double b, double w) {
    const double c = 1.0 - a - b;
    const std::array<Eigen::Vector3d, 6> orbit{Eigen::Vector3d(a, b, c), Eigen::Vector3d(a, c, b),
                                               Eigen::Vector3d(b, a, c), Eigen::Vector3d(b, c, a),
                                               Eigen::Vector3d(c, a, b), Eigen::Vector3d(c, b, a)};
    for (const auto& p : orbit) {
      rule.points.push_back(p);
      rule.weights.push_back(w);
    }
    return *this;
  }
};

TriangleRule make_rule(int degree) {
  RuleBuilder r;
  switch (degree) {
    case 1:
      r.centroid(1.0);
      break;
    case 2:
      r.s21(1.0 / 6, 1.0 / 3);
      break;
    case 3:
      r.centroid(-27.0 / 48).s21(0.2, 25.0 / 48);
      break;
    case 4:
      r.s21(0.445948490915965, 0.223381589678011).s21(0.091576213509771, 0.109951743655322);
      break;
    case 5:
      r.centroid(0.225)
          .s21(0.470142064105115, 0.132394152788506)
          .s21(0.101286507323456, 0.125939180544827);
      break;
    case 6:
      r.s21(0.249286745170910, 0.116786275726379)
          .s21(0.063089014491502, 0.050844906370207)
          .s111(0.053145049844817, 0.310352451033784, 0.082851075618374);
      break;
    case 8:
      r.centroid(0.144315607677787)
          .s21(0.459292588292723, 0.095091634267285)
          .s21(0.170569307751760, 0.103217370534718)
          .s21(0.050547228317031, 0.032458497623198)
          .s111(0.008394777409958, 0.263112829634638, 0.027230314174435);
      break;
    default:
      throw std::invalid_argument("no triangle rule of degree " + std::to_string(degree));
  }
  // Tabulated weights carry 15 digits; renormalize so constants integrate exactly.
  double total = 0.0;
  for (double w : r.rule.weights) total += w;
  for (double& w : r.rule.weights) w /= total;
  r.rule.degree = degree;
  return r.rule;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const std::array<TriangleRule, 7> rules{make_rule(1), make_rule(2), make_rule(3), make_rule(4),
                                                 make_rule(5), make_rule(6), make_rule(8)};
  if (degree < 1 || degree > 8) throw std::invalid_argument("quadrature degree must be in [1, 8]");
  if (degree <= 6) return rules[static_cast<std::size_t>(degree - 1)];
  return rules[6];
}

}  // namespace uzawa
