#include "hdloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace hdloc {

namespace {

void check_finite(const Matrix& data) {
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (!std::isfinite(data(i, j))) {
        throw NonFiniteEntry(static_cast<std::size_t>(i),
                             static_cast<std::size_t>(j));
      }
    }
  }
}

}  // namespace

GroupedSample::GroupedSample(Matrix data, std::vector<int> labels)
    : data_(std::move(data)), labels_(std::move(labels)) {
  int k_max = -1;
  for (int g : labels_) k_max = std::max(k_max, g);
  group_sizes_.assign(static_cast<std::size_t>(k_max + 1), 0);
  group_rows_.assign(static_cast<std::size_t>(k_max + 1), {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    group_sizes_[static_cast<std::size_t>(labels_[i])]++;
    group_rows_[static_cast<std::size_t>(labels_[i])].push_back(
        static_cast<int>(i));
  }
}

GroupedSample GroupedSample::validate(Matrix data,
                                      const std::vector<long>& raw_labels) {
  if (raw_labels.size() != static_cast<std::size_t>(data.rows())) {
    throw LabelMismatch(raw_labels.size(), static_cast<std::size_t>(data.rows()));
  }
  if (data.rows() == 0 || data.cols() == 0) {
    throw ValidationError("empty data matrix");
  }
  check_finite(data);

  // Re-index groups densely, in order of first appearance.
  std::unordered_map<long, int> remap;
  std::vector<int> labels(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] =
        remap.try_emplace(raw_labels[i], static_cast<int>(remap.size()));
    labels[i] = it->second;
  }
  if (remap.size() < 2) throw SingleGroup();

  GroupedSample sample(std::move(data), std::move(labels));
  for (int k = 0; k < sample.num_groups(); ++k) {
    if (sample.group_sizes()[static_cast<std::size_t>(k)] < 2) {
      throw GroupTooSmall(
          k, static_cast<std::size_t>(
                 sample.group_sizes()[static_cast<std::size_t>(k)]));
    }
  }
  return sample;
}

GroupedSample GroupedSample::unchecked(Matrix data, std::vector<int> labels) {
  check_finite(data);
  return GroupedSample(std::move(data), std::move(labels));
}

const char* method_name(Method m) {
  switch (m) {
    case Method::ImhofExact: return "imhof";
    case Method::WelchSatterthwaite2M: return "ws";
    case Method::HallBuckleyEagleson3M: return "hbe";
    case Method::Permutation: return "perm";
    case Method::FExact: return "f-exact";
    case Method::NormalApprox: return "normal";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "imhof") return Method::ImhofExact;
  if (name == "ws") return Method::WelchSatterthwaite2M;
  if (name == "hbe") return Method::HallBuckleyEagleson3M;
  if (name == "perm") return Method::Permutation;
  if (name == "f-exact") return Method::FExact;
  if (name == "normal") return Method::NormalApprox;
  return std::nullopt;
}

WeightedChiSquare::WeightedChiSquare(Vector weights)
    : weights_(std::move(weights)) {
  if (weights_.size() == 0) {
    throw ValidationError("weighted chi-square needs at least one weight");
  }
  bool any_positive = false;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_[i] < 0.0 || !std::isfinite(weights_[i])) {
      throw ValidationError("weighted chi-square weights must be >= 0");
    }
    any_positive = any_positive || weights_[i] > 0.0;
  }
  if (!any_positive) {
    throw ValidationError("weighted chi-square needs a positive weight");
  }
}

}  // namespace hdloc
