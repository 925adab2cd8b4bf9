#include "decodecv/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decodecv {

std::string to_string(Loss loss) { return loss == Loss::hinge ? "hinge" : "logistic"; }
std::string to_string(Penalty penalty) { return penalty == Penalty::l1 ? "l1" : "l2"; }

Loss loss_from_string(const std::string& text) {
  if (text == "hinge" || text == "svm") return Loss::hinge;
  if (text == "logistic" || text == "logreg") return Loss::logistic;
  throw std::invalid_argument("unknown loss '" + text + "'");
}

Penalty penalty_from_string(const std::string& text) {
  if (text == "l1") return Penalty::l1;
  if (text == "l2") return Penalty::l2;
  throw std::invalid_argument("unknown penalty '" + text + "'");
}

double hinge_loss(double margin) { return std::max(0.0, 1.0 - margin); }

double logistic_loss(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

}  // namespace decodecv
