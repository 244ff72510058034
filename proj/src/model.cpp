#include "nsys/model.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace nsys {

void validate(const SystemParams& p) {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("SystemParams: " + msg); };
  if (!(std::isfinite(p.lambda1) && p.lambda1 >= 0)) bad("lambda1 must be finite and >= 0");
  if (!(std::isfinite(p.lambda2) && p.lambda2 >= 0)) bad("lambda2 must be finite and >= 0");
  if (!(p.lambda1 + p.lambda2 > 0)) bad("lambda1 + lambda2 must be > 0");
  if (p.n1 < 1) bad("n1 must be >= 1");
  if (p.n2 < 1) bad("n2 must be >= 1");
  if (!(std::isfinite(p.mu1) && p.mu1 > 0)) bad("mu1 must be finite and > 0");
  if (!(std::isfinite(p.mu2) && p.mu2 > 0)) bad("mu2 must be finite and > 0");
}

DerivedRatios derive(const SystemParams& p) {
  validate(p);
  DerivedRatios d;
  d.lambda = p.lambda1 + p.lambda2;
  d.n = p.n1 + p.n2;
  d.alpha = p.lambda1 / d.lambda;
  d.theta = static_cast<double>(p.n1) / d.n;
  d.rho = d.lambda / (p.n1 * p.mu1 + p.n2 * p.mu2);
  d.delta = p.lambda2 / (p.n1 * p.mu1);
  d.kappa = p.lambda1 / (p.n2 * p.mu2);
  return d;
}

StabilityReport stability(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  const bool ok = d.rho < 1.0 && d.delta < 1.0;
  return {ok, ok};
}

SystemParams scale(const ShapeSpec& shape, int n) {
  if (n < 2) throw std::invalid_argument("scale: n must be >= 2");
  if (!(shape.alpha >= 0 && shape.alpha <= 1)) throw std::invalid_argument("scale: alpha must be in [0,1]");
  if (!(shape.theta > 0 && shape.theta < 1)) throw std::invalid_argument("scale: theta must be in (0,1)");
  if (!(shape.rho > 0)) throw std::invalid_argument("scale: rho must be > 0");
  if (!(shape.mu1 > 0 && shape.mu2 > 0)) throw std::invalid_argument("scale: service rates must be > 0");
  const int n1 = static_cast<int>(std::ceil(shape.theta * n));
  const int n2 = n - n1;
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("scale: theta leaves an empty pool at this n");
  SystemParams p;
  p.n1 = n1;
  p.n2 = n2;
  p.mu1 = shape.mu1;
  p.mu2 = shape.mu2;
  const double lambda = shape.rho * (n1 * shape.mu1 + n2 * shape.mu2);
  p.lambda1 = shape.alpha * lambda;
  p.lambda2 = lambda - p.lambda1;
  validate(p);
  return p;
}

SystemParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("params JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("params JSON: top level must be an object");
  static const char* kFields[] = {"lambda1", "lambda2", "n1", "n2", "mu1", "mu2"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* f : kFields) known |= (key == f);
    if (!known) throw std::invalid_argument("params JSON: unknown field \"" + key + "\"");
  }
  for (const char* f : kFields)
    if (!j.contains(f)) throw std::invalid_argument(std::string("params JSON: missing field \"") + f + "\"");
  SystemParams p;
  try {
    p.lambda1 = j.at("lambda1").get<double>();
    p.lambda2 = j.at("lambda2").get<double>();
    p.n1 = j.at("n1").get<int>();
    p.n2 = j.at("n2").get<int>();
    p.mu1 = j.at("mu1").get<double>();
    p.mu2 = j.at("mu2").get<double>();
  } catch (const nlohmann::json::type_error& e) {
    throw std::invalid_argument(std::string("params JSON: ") + e.what());
  }
  validate(p);
  return p;
}

std::string params_to_json(const SystemParams& p) {
  nlohmann::json j{{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"n1", p.n1},
                   {"n2", p.n2},           {"mu1", p.mu1},         {"mu2", p.mu2}};
  return j.dump();
}

}  // namespace nsys
