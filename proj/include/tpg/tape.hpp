#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpg/param_store.hpp"

namespace tpg {

using NodeId = int;

// Stable softmax over raw logits (max subtraction; the normalizer is summed
// over the value-sorted exponentials so it is invariant under permutations of
// the input). Throws std::invalid_argument on empty or non-finite input.
std::vector<double> forward_softmax(std::span<const double> logits);

// Eager evaluation trace over a fixed, small op set: affine map, tanh,
// sigmoid, softmax, embedding (row) lookup, concatenation, dot product,
// elementwise product, gated blend, weighted sum, scalar stack/sum, and the
// log of one selected probability. Every node keeps its forward value so a
// reverse sweep can push gradients back into a ParamStore.
//
// Values live in one arena that reset() rewinds without freeing, so a tape
// can be reused across episodes with no allocation churn.
class Tape {
 public:
  // Probabilities are floored at this value inside ln so sampled actions with
  // underflowed mass cannot produce -inf.
  static constexpr double kProbFloor = 1e-12;

  NodeId input(std::span<const double> v);
  NodeId scalar_input(double v);

  // Row lookup into a parameter matrix (embedding read).
  NodeId param_row(const ParamStore& store, BlockId mat, int row);

  // W (m x n) applied to x (n) plus bias (1 x m).
  NodeId affine(const ParamStore& store, BlockId w, BlockId bias, NodeId x);

  NodeId tanh_of(NodeId x);
  NodeId sigmoid_of(NodeId x);
  NodeId softmax_of(NodeId logits);
  NodeId concat(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  // z*a + (1-z)*b elementwise; the single-gate recurrent cell's state mix.
  NodeId gate_blend(NodeId z, NodeId a, NodeId b);
  NodeId dot(NodeId a, NodeId b);
  // sum_i weights[i] * items[i]; weights is a vector node with one entry per
  // item. Zero items yields the zero vector of length `item_len`.
  NodeId weighted_sum(NodeId weights, std::span<const NodeId> items, int item_len);
  NodeId stack_scalars(std::span<const NodeId> scalars);
  NodeId sum_scalars(std::span<const NodeId> scalars);
  // ln(max(pmf[index], kProbFloor))
  NodeId log_select(NodeId pmf, int index);

  std::span<const double> value(NodeId id) const;
  double scalar(NodeId id) const;
  int length(NodeId id) const;

  // Reverse sweep from a scalar node seeded with `scale`; adds
  // scale * d(node)/d(param) into the store's gradient accumulators.
  // Repeated calls accumulate. The store must be the one the tape's
  // param-touching nodes were built against.
  void backward(ParamStore& store, NodeId node, double scale);

  // Rewind to empty, keeping buffer capacity.
  void reset();

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op : uint8_t {
    kInput,
    kParamRow,
    kAffine,
    kTanh,
    kSigmoid,
    kSoftmax,
    kConcat,
    kAdd,
    kHadamard,
    kGateBlend,
    kDot,
    kWeightedSum,
    kStack,
    kSumScalars,
    kLogSelect,
  };

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    NodeId c = -1;
    BlockId w = -1;     // matrix block (kParamRow, kAffine)
    BlockId bias = -1;  // bias block (kAffine)
    int aux = -1;       // row / selected index
    int val = 0;        // offset into arenas
    int len = 0;
    int list = 0;  // offset into list arena (kWeightedSum, kStack, kSumScalars)
    int nlist = 0;
  };

  NodeId push(Node n, int len);
  double* mut(const Node& n) { return arena_.data() + n.val; }
  const double* val(const Node& n) const { return arena_.data() + n.val; }
  double* grd(const Node& n) { return grads_.data() + n.val; }
  void check_node(NodeId id) const;
  void check_same_len(NodeId a, NodeId b) const;

  std::vector<Node> nodes_;
  std::vector<double> arena_;   // forward values
  std::vector<double> grads_;   // reverse values, same layout
  std::vector<NodeId> lists_;   // argument lists for variadic ops
  std::vector<uint8_t> touched_;
};

// Append scale * d ln pmf[action] / dw to the store's accumulators, where
// pmf is a softmax (or otherwise valid pmf) node on the tape. The trace must
// have been built against `store`'s current values.
void accumulate_log_prob_grad(ParamStore& store, Tape& tape, NodeId pmf, int action, double scale);

}  // namespace tpg
