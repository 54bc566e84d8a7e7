#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rh/graph.hpp"

namespace rh {

struct NetShape {
  int node_in = kNodeFeatures;
  int edge_in = kEdgeFeatures;
  int ego_in = kEgoFeatures;
  int hidden = 80;
  int layers = 3;
  int embed = 80;
  std::vector<int> head = {256, 128, 64};

  void validate() const;  // throws ParameterError
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  bool is_bias() const { return cols == 1; }
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Message-passing value network. Per layer k, an edge src->dst carries
// m = W_msg [h_src; e] + b_msg; each node takes the elementwise max of its
// incoming messages (zero without any) and updates
// h' = tanh(W_upd [h; agg] + b_upd). The ego's final state and the ego
// features go through z = tanh(W_emb [h_ego; f_ego] + b_emb) and a tanh
// MLP head to one output; V = offset + scale * output.
class ValueNet {
 public:
  explicit ValueNet(NetShape shape = {});

  const NetShape& shape() const { return shape_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;  // throws LookupError
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  // Glorot-uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  double output_offset() const { return offset_; }
  double output_scale() const { return scale_; }
  void set_output_affine(double offset, double scale);

  double forward(const TrafficGraph& g) const;
  // Adds upstream * dV/dparam into grad (size() entries) and returns V.
  double backward(const TrafficGraph& g, double upstream, std::span<double> grad) const;

 private:
  NetShape shape_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
  double offset_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace rh
