// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlpga/rng.hpp"
#include "rlpga/tensor.hpp"

namespace rlpga {

enum class Domain { source, target };

std::string to_string(Domain d);

// Features plus optional labels. Labels are 0-based in memory and 1-based in
// every file format; load/save are the only conversion points.
struct DomainDataset {
  Tensor features;
  std::optional<std::vector<int>> labels;
  Domain domain = Domain::source;
  std::string name;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool has_labels() const noexcept { return labels.has_value(); }
  // 1 + largest label; 0 when unlabeled.
  std::size_t classes() const;
};

// What the optimization steps may see: no target labels.
struct TrainingView {
  const Tensor& src_x;
  const Tensor& src_onehot;
  const Tensor& tgt_x;
};

struct DomainBatch {
  Tensor src_x;
  Tensor src_onehot;  // noisy labels, one-hot
  Tensor tgt_x;
  std::optional<std::vector<int>> tgt_y;  // evaluation only
  std::vector<std::size_t> src_index;
  std::vector<std::size_t> tgt_index;

  TrainingView training_view() const { return {src_x, src_onehot, tgt_x}; }
};

// Two 2-D Gaussian classes (means (-2,0) and (2,0), sd 0.5, 1000 each) for the
// source; the target draws from the same process, rotated 30 degrees about
// the origin and shifted by (1,1). Target labels are kept for evaluation.
std::pair<DomainDataset, DomainDataset> gen_synthetic(std::uint64_t seed);

DomainDataset parse_feature_csv(std::istream& in, bool has_labels, Domain domain,
                                const std::string& name);
DomainDataset load_feature_csv(const std::string& path, bool has_labels, Domain domain);
void write_feature_csv(std::ostream& out, const DomainDataset& data);

// m_b source rows and m_b target rows, without replacement within the batch.
// Stratified mode takes floor(m_b / C) source rows per noisy class (fewer if a
// class is short) and fills the rest uniformly.
DomainBatch sample_batch(Rng& rng, const DomainDataset& src, const DomainDataset& tgt,
                         std::size_t m_b, bool stratified, std::size_t classes);

}  // namespace rlpga
